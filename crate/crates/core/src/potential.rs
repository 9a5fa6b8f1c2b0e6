//! Potentials `q` on `[0, l]`.
//!
//! Closed-form potentials come from a small vocabulary (`const`, `cos`, `sin`,
//! `poly`, sums and scales) so that off-node values and derivatives are exact.
//! Sampled potentials are interpolated with four-point cubics.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::parse_terms;
use crate::grid::{Grid, GridFunction};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialTerm {
    Const(f64),
    /// `amplitude * cos(frequency * x + phase)`
    Cos { amplitude: f64, frequency: f64, phase: f64 },
    /// `amplitude * sin(frequency * x + phase)`
    Sin { amplitude: f64, frequency: f64, phase: f64 },
    /// `c0 + c1 x + c2 x^2 + ...`
    Poly(Vec<f64>),
}

impl PotentialTerm {
    fn derivative(&self, x: f64, k: u32) -> f64 {
        let shift = k as f64 * std::f64::consts::FRAC_PI_2;
        match self {
            PotentialTerm::Const(c) => {
                if k == 0 {
                    *c
                } else {
                    0.0
                }
            }
            PotentialTerm::Cos { amplitude, frequency, phase } => {
                amplitude * frequency.powi(k as i32) * (frequency * x + phase + shift).cos()
            }
            PotentialTerm::Sin { amplitude, frequency, phase } => {
                amplitude * frequency.powi(k as i32) * (frequency * x + phase + shift).sin()
            }
            PotentialTerm::Poly(c) => {
                let mut coeffs = c.clone();
                for _ in 0..k {
                    coeffs = coeffs
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, v)| i as f64 * v)
                        .collect();
                }
                coeffs.iter().rev().fold(0.0, |acc, v| acc * x + v)
            }
        }
    }

    fn scaled(&self, s: f64) -> Self {
        match self {
            PotentialTerm::Const(c) => PotentialTerm::Const(s * c),
            PotentialTerm::Cos { amplitude, frequency, phase } => PotentialTerm::Cos {
                amplitude: s * amplitude,
                frequency: *frequency,
                phase: *phase,
            },
            PotentialTerm::Sin { amplitude, frequency, phase } => PotentialTerm::Sin {
                amplitude: s * amplitude,
                frequency: *frequency,
                phase: *phase,
            },
            PotentialTerm::Poly(c) => PotentialTerm::Poly(c.iter().map(|v| s * v).collect()),
        }
    }
}

/// A closed-form potential: a sum of terms, optionally reflected through `l/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialExpr {
    terms: Vec<PotentialTerm>,
    reflect_about: Option<f64>,
}

impl PotentialExpr {
    pub fn new(terms: Vec<PotentialTerm>) -> Self {
        Self { terms, reflect_about: None }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![PotentialTerm::Const(c)])
    }

    /// Parses e.g. `"2 + cos(1, 3)"`: `cos(a, k[, phase])`, `sin(a, k[, phase])`,
    /// `poly(c0, c1, ...)`, `const(c)` or a bare number.
    pub fn parse(src: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for t in parse_terms(src)? {
            let term = match (t.name.as_str(), t.args.as_slice()) {
                ("const", [c]) => PotentialTerm::Const(*c),
                ("cos", [a, k]) => PotentialTerm::Cos { amplitude: *a, frequency: *k, phase: 0.0 },
                ("cos", [a, k, p]) => PotentialTerm::Cos { amplitude: *a, frequency: *k, phase: *p },
                ("sin", [a, k]) => PotentialTerm::Sin { amplitude: *a, frequency: *k, phase: 0.0 },
                ("sin", [a, k, p]) => PotentialTerm::Sin { amplitude: *a, frequency: *k, phase: *p },
                ("poly", c) if !c.is_empty() => PotentialTerm::Poly(c.to_vec()),
                (name, args) => {
                    return Err(Error::Config(format!(
                        "unknown potential term {name}({args:?})"
                    )))
                }
            };
            terms.push(term.scaled(t.scale));
        }
        if terms.is_empty() {
            return Err(Error::Config("empty potential expression".into()));
        }
        Ok(Self::new(terms))
    }

    /// `k`-th derivative at `x`.
    pub fn derivative(&self, x: f64, k: u32) -> f64 {
        let (y, sign) = match self.reflect_about {
            Some(l) => (l - x, if k % 2 == 1 { -1.0 } else { 1.0 }),
            None => (x, 1.0),
        };
        sign * self.terms.iter().map(|t| t.derivative(y, k)).sum::<f64>()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `x -> q(l - x)`.
    pub fn reflected(&self, l: f64) -> Self {
        let reflect_about = match self.reflect_about {
            Some(_) => None,
            None => Some(l),
        };
        Self { terms: self.terms.clone(), reflect_about }
    }
}

impl fmt::Display for PotentialExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| match t {
                PotentialTerm::Const(c) => format!("{c}"),
                PotentialTerm::Cos { amplitude, frequency, phase } => {
                    format!("cos({amplitude}, {frequency}, {phase})")
                }
                PotentialTerm::Sin { amplitude, frequency, phase } => {
                    format!("sin({amplitude}, {frequency}, {phase})")
                }
                PotentialTerm::Poly(c) => format!(
                    "poly({})",
                    c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
                ),
            })
            .collect();
        match self.reflect_about {
            Some(l) => write!(f, "reflect[{l}]({})", parts.join(" + ")),
            None => write!(f, "{}", parts.join(" + ")),
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Expr(PotentialExpr),
    Sampled(GridFunction),
}

/// A bounded real potential attached to a grid.
#[derive(Debug, Clone)]
pub struct Potential {
    grid: Grid,
    source: Source,
    samples: Vec<f64>,
    min: f64,
    max: f64,
}

impl Potential {
    pub fn from_expr(grid: Grid, expr: PotentialExpr) -> Result<Self> {
        let samples: Vec<f64> = grid.nodes().map(|x| expr.eval(x)).collect();
        // bounds from a finer scan so bracketing sees the true range
        let fine = 8 * grid.n();
        let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..=fine {
            let v = expr.eval(grid.l() * k as f64 / fine as f64);
            min = min.min(v);
            max = max.max(v);
        }
        Self::checked(grid, Source::Expr(expr), samples, min, max)
    }

    pub fn parse(grid: Grid, src: &str) -> Result<Self> {
        Self::from_expr(grid, PotentialExpr::parse(src)?)
    }

    pub fn zero(grid: Grid) -> Self {
        Self::from_expr(grid, PotentialExpr::constant(0.0)).expect("zero potential is finite")
    }

    /// Potential given only by node samples; imaginary parts must vanish.
    pub fn from_samples(samples: GridFunction) -> Result<Self> {
        let grid = samples.grid();
        let scale = samples.sup_norm().max(1.0);
        if samples.values().iter().any(|v| v.im.abs() > 1e-12 * scale) {
            return Err(Error::Config("potential samples must be real".into()));
        }
        let real: Vec<f64> = samples.values().iter().map(|v| v.re).collect();
        let min = real.iter().copied().fold(f64::INFINITY, f64::min);
        let max = real.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::checked(grid, Source::Sampled(samples), real, min, max)
    }

    fn checked(grid: Grid, source: Source, samples: Vec<f64>, min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::Config("potential is not bounded on [0, l]".into()));
        }
        Ok(Self { grid, source, samples, min, max })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Value at any `x` in `[0, l]`.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.source {
            Source::Expr(e) => e.eval(x),
            Source::Sampled(s) => s.interpolate(x).re,
        }
    }

    /// `k`-th derivative when a closed form is available.
    pub fn derivative(&self, x: f64, k: u32) -> Option<f64> {
        match &self.source {
            Source::Expr(e) => Some(e.derivative(x, k)),
            Source::Sampled(_) => None,
        }
    }

    pub fn expr(&self) -> Option<&PotentialExpr> {
        match &self.source {
            Source::Expr(e) => Some(e),
            Source::Sampled(_) => None,
        }
    }

    /// Node samples `q(x_j)`.
    pub fn values(&self) -> &[f64] {
        &self.samples
    }

    pub fn to_grid_function(&self) -> GridFunction {
        GridFunction::new(
            self.grid,
            self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
        .expect("sample count matches grid")
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Whether the potential is constant to within `tol`.
    pub fn is_constant(&self, tol: f64) -> bool {
        self.max - self.min <= tol
    }

    /// The reflected potential `x -> q(l - x)`.
    pub fn reflected(&self) -> Self {
        match &self.source {
            Source::Expr(e) => Self::from_expr(self.grid, e.reflected(self.grid.l()))
                .expect("reflection keeps the potential bounded"),
            Source::Sampled(s) => {
                let mut v = s.values().to_vec();
                v.reverse();
                Self::from_samples(GridFunction::new(self.grid, v).expect("same length"))
                    .expect("reflection keeps samples real")
            }
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Expr(e) => write!(f, "{e}"),
            Source::Sampled(_) => write!(f, "sampled({} nodes)", self.grid.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_evaluate() {
        let e = PotentialExpr::parse("2 + cos(1, 3)").unwrap();
        assert!((e.eval(0.2) - (2.0 + 0.6f64.cos())).abs() < 1e-15);
        assert!((e.derivative(0.2, 1) + 3.0 * 0.6f64.sin()).abs() < 1e-14);
        assert!((e.derivative(0.2, 2) + 9.0 * 0.6f64.cos()).abs() < 1e-13);
        let p = PotentialExpr::parse("poly(1, 0, 2)").unwrap();
        assert_eq!(p.eval(3.0), 19.0);
        assert_eq!(p.derivative(3.0, 1), 12.0);
        assert!(PotentialExpr::parse("tan(1)").is_err());
    }

    #[test]
    fn reflection() {
        let g = Grid::new(1.0, 100).unwrap();
        let q = Potential::parse(g, "2 + cos(1, 3)").unwrap();
        let r = q.reflected();
        for j in 0..g.len() {
            assert!((r.values()[j] - q.values()[g.mirror(j)]).abs() < 1e-14);
        }
        let rr = r.reflected();
        assert!((rr.eval(0.3) - q.eval(0.3)).abs() < 1e-15);
        assert!((r.derivative(0.3, 1).unwrap() + q.derivative(0.7, 1).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn sampled_potential_interpolates() {
        let g = Grid::new(1.0, 64).unwrap();
        let s = g.sample_real(|x| x * x);
        let q = Potential::from_samples(s).unwrap();
        assert!((q.eval(0.33) - 0.33 * 0.33).abs() < 1e-12);
        assert!(q.derivative(0.3, 1).is_none());
        assert_eq!(q.min(), 0.0);
    }
}
