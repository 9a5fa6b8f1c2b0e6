//! Closed-form scalar control signals with analytic derivatives of any order.
//!
//! Signals are sums of scaled primitives:
//!
//! * `bump(center, width, amplitude)`: `A (1 - s^2)^8`, `s = (t - center) / width`,
//!   zero for `|s| >= 1` (seven continuous derivatives);
//! * `ramp(t0, t1)`: a degree-17 smoothstep rising from 0 at `t0` to 1 at `t1`.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::parse_terms;

fn falling(n: u32, k: u32) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    falling(n, k) / falling(k, k)
}

/// `d^k/dx^k [p(x)^8 r(x)^8]` for linear `p`, `r` with slopes `dp`, `dr`.
/// Every term keeps its sign pattern, so there is no cancellation near the ends.
fn product_power_derivative(p: f64, dp: f64, r: f64, dr: f64, k: u32) -> f64 {
    if k > 16 {
        return 0.0;
    }
    (k.saturating_sub(8)..=k.min(8))
        .map(|i| {
            let j = k - i;
            binomial(k, i)
                * falling(8, i)
                * p.powi(8 - i as i32)
                * dp.powi(i as i32)
                * falling(8, j)
                * r.powi(8 - j as i32)
                * dr.powi(j as i32)
        })
        .sum()
}

/// Degree-17 smoothstep `I_τ(9, 9)` and its derivatives.
fn ramp_profile(tau: f64, k: u32) -> f64 {
    if k == 0 {
        return (9..=17)
            .map(|j| binomial(17, j) * tau.powi(j as i32) * (1.0 - tau).powi(17 - j as i32))
            .sum();
    }
    // 1 / B(9, 9) = 17! / (8! 8!)
    let inv_beta = 9.0 * binomial(17, 8);
    inv_beta * product_power_derivative(tau, 1.0, 1.0 - tau, -1.0, k - 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Primitive {
    Bump { center: f64, width: f64, amplitude: f64 },
    Ramp { t0: f64, t1: f64 },
}

impl Primitive {
    pub fn bump(center: f64, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0 && center.is_finite() && amplitude.is_finite()) {
            return Err(Error::Config(format!(
                "bump({center}, {width}, {amplitude}) needs a positive width"
            )));
        }
        Ok(Primitive::Bump { center, width, amplitude })
    }

    pub fn ramp(t0: f64, t1: f64) -> Result<Self> {
        if !(t1 > t0 && t0.is_finite() && t1.is_finite()) {
            return Err(Error::Config(format!("ramp({t0}, {t1}) needs t0 < t1")));
        }
        Ok(Primitive::Ramp { t0, t1 })
    }

    /// `k`-th time derivative at `t`.
    pub fn derivative(&self, t: f64, k: u32) -> f64 {
        match *self {
            Primitive::Bump { center, width, amplitude } => {
                let s = (t - center) / width;
                if s.abs() >= 1.0 {
                    return 0.0;
                }
                amplitude * product_power_derivative(1.0 - s, -1.0, 1.0 + s, 1.0, k)
                    / width.powi(k as i32)
            }
            Primitive::Ramp { t0, t1 } => {
                if t <= t0 {
                    return 0.0;
                }
                if t >= t1 {
                    return if k == 0 { 1.0 } else { 0.0 };
                }
                let d = t1 - t0;
                ramp_profile((t - t0) / d, k) / d.powi(k as i32)
            }
        }
    }

    /// Time before which the primitive vanishes identically.
    pub fn onset(&self) -> f64 {
        match *self {
            Primitive::Bump { center, width, .. } => center - width,
            Primitive::Ramp { t0, .. } => t0,
        }
    }

    /// Upper bound of `|value|` over all times.
    pub fn sup(&self) -> f64 {
        match *self {
            Primitive::Bump { amplitude, .. } => amplitude.abs(),
            Primitive::Ramp { .. } => 1.0,
        }
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::Bump { center, width, amplitude } => {
                write!(f, "bump({center}, {width}, {amplitude})")
            }
            Primitive::Ramp { t0, t1 } => write!(f, "ramp({t0}, {t1})"),
        }
    }
}

/// `Σ scale_i p_i^{(order)}(t)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Signal {
    terms: Vec<(f64, Primitive)>,
    order: u32,
}

impl Signal {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn new(terms: Vec<(f64, Primitive)>) -> Self {
        Self { terms, order: 0 }
    }

    pub fn bump(center: f64, width: f64, amplitude: f64) -> Result<Self> {
        Ok(Self::new(vec![(1.0, Primitive::bump(center, width, amplitude)?)]))
    }

    /// Parses `"2*bump(0.1, 0.05, 1) + ramp(0.2, 0.4)"`; an empty string or `0`
    /// is the zero signal.
    pub fn parse(src: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for t in parse_terms(src)? {
            let p = match (t.name.as_str(), t.args.as_slice()) {
                ("bump", [c, w, a]) => Primitive::bump(*c, *w, *a)?,
                ("bump", [c, w]) => Primitive::bump(*c, *w, 1.0)?,
                ("ramp", [t0, t1]) => Primitive::ramp(*t0, *t1)?,
                ("const", [c]) if *c == 0.0 => continue,
                (name, args) => {
                    return Err(Error::Config(format!(
                        "unknown control primitive {name}({args:?}); controls are built from bump and ramp"
                    )))
                }
            };
            terms.push((t.scale, p));
        }
        Ok(Self::new(terms))
    }

    pub fn terms(&self) -> &[(f64, Primitive)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(s, _)| *s == 0.0)
    }

    /// `k`-th derivative of this signal at `t`.
    pub fn value(&self, t: f64, k: u32) -> f64 {
        self.terms
            .iter()
            .map(|(s, p)| s * p.derivative(t, k + self.order))
            .sum()
    }

    /// The signal `d^k/dt^k self`.
    pub fn derivative(&self, k: u32) -> Self {
        Self { terms: self.terms.clone(), order: self.order + k }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            terms: self.terms.iter().map(|(s, p)| (s * factor, *p)).collect(),
            order: self.order,
        }
    }

    /// Sum of two signals with the same derivative order.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if self.order != other.order && !self.terms.is_empty() && !other.terms.is_empty() {
            return Err(Error::Contract("cannot add signals of different derivative order".into()));
        }
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        let order = if self.terms.is_empty() { other.order } else { self.order };
        Ok(Self { terms, order })
    }

    /// Earliest time at which the signal can be nonzero (`+inf` for zero).
    pub fn onset(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(s, _)| *s != 0.0)
            .map(|(_, p)| p.onset())
            .fold(f64::INFINITY, f64::min)
    }

    /// Bound on `sup |value(t, 0)|` for an underived signal.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|(s, p)| s.abs() * p.sup()).sum()
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if *s == 1.0 {
                write!(f, "{p}")?;
            } else {
                write!(f, "{s}*{p}")?;
            }
        }
        if self.order > 0 {
            write!(f, " [d^{}]", self.order)?;
        }
        Ok(())
    }
}

/// Dirichlet data `u(0, t) = f0(t)`, `u(l, t) = fl(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSignal {
    pub f0: Signal,
    pub fl: Signal,
    /// Both signals vanish identically on `[0, dead_time]`.
    pub dead_time: f64,
}

impl ControlSignal {
    /// Checks the vanishing 2-jet at `t = 0` and the dead time.
    pub fn new(f0: Signal, fl: Signal, dead_time: f64) -> Result<Self> {
        if !(dead_time > 0.0) {
            return Err(Error::Config(format!("dead time must be positive, got {dead_time}")));
        }
        let c = Self { f0, fl, dead_time };
        for (name, s) in [("f0", &c.f0), ("fl", &c.fl)] {
            let onset = s.onset();
            if onset < dead_time {
                return Err(Error::Config(format!(
                    "control {name} = {s} starts at t = {onset}, before the dead time {dead_time}"
                )));
            }
            for k in 0..3 {
                let v = s.value(0.0, k);
                if v != 0.0 {
                    return Err(Error::Config(format!(
                        "control {name} has nonzero derivative {k} at t = 0 ({v:e})"
                    )));
                }
            }
        }
        Ok(c)
    }

    pub fn zero() -> Self {
        Self { f0: Signal::zero(), fl: Signal::zero(), dead_time: f64::INFINITY }
    }

    /// Left-end control only.
    pub fn left(f0: Signal, dead_time: f64) -> Result<Self> {
        Self::new(f0, Signal::zero(), dead_time)
    }

    pub fn parse(f0: &str, fl: &str, dead_time: f64) -> Result<Self> {
        Self::new(Signal::parse(f0)?, Signal::parse(fl)?, dead_time)
    }

    pub fn derivative(&self, k: u32) -> Self {
        Self { f0: self.f0.derivative(k), fl: self.fl.derivative(k), dead_time: self.dead_time }
    }

    pub fn is_zero(&self) -> bool {
        self.f0.is_zero() && self.fl.is_zero()
    }

    /// Componentwise sum; the dead time is the smaller of the two.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            f0: self.f0.plus(&other.f0)?,
            fl: self.fl.plus(&other.fl)?,
            dead_time: self.dead_time.min(other.dead_time),
        })
    }

    pub fn sup_bound(&self) -> f64 {
        self.f0.sup_bound().max(self.fl.sup_bound())
    }
}
