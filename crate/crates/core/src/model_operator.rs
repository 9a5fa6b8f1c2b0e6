//! The coordinate model operator `-û'' + P̂ û' + Q̂ û` on the half interval.
//!
//! With `û = T U`, `U = (u(x), u(l-x))ᵀ`,
//!
//! ```text
//! P̂ = 2 T' T^{-1},   Q̂ = T Q T^{-1} - T (T^{-1})'',   Q = diag(q(x), q(l-x)),
//! ```
//!
//! and the combination `S = Q̂ + P̂²/4 - P̂'/2` collapses to `T Q T^{-1}`, so
//! its eigenvalues are `{q(x), q(l-x)}`.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary_control::{control_to_kernel, WaveSystem};
use crate::control::ControlSignal;
use crate::error::{Error, Result};
use crate::grid::{diff4, diff4_samples, fmt_f64, DiffOrder, Grid, GridFunction};
use crate::potential::Potential;
use crate::wave_model::{hat_value, hat_value_with_derivatives, max_abs, push_matrix, GaugeData, HatField, Mat2, Vec2};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `P̂`, `Q̂`, `P̂'` and `diag(q(x), q(l-x))` on the admissible half-grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelCoefficients {
    grid: Grid,
    nodes: Vec<usize>,
    phat: Vec<Mat2>,
    qhat: Vec<Mat2>,
    dphat: Vec<Mat2>,
    qdiag: Vec<[f64; 2]>,
}

pub fn assemble_coefficients(gd: &GaugeData, q: &Potential) -> Result<ModelCoefficients> {
    let grid = gd.grid();
    if q.grid() != grid {
        return Err(Error::Contract("potential and gauge live on different grids".into()));
    }
    let qv = q.values();
    let n = grid.n();
    let nodes = gd.admissible_nodes();
    let mut mc = ModelCoefficients {
        grid,
        nodes: nodes.clone(),
        phat: Vec::with_capacity(nodes.len()),
        qhat: Vec::with_capacity(nodes.len()),
        dphat: Vec::with_capacity(nodes.len()),
        qdiag: Vec::with_capacity(nodes.len()),
    };
    for &j in &nodes {
        let node = gd.node(j);
        let ti = node.t.try_inverse().ok_or_else(|| {
            Error::Gauge(format!("T is singular at admissible node x = {}", node.x))
        })?;
        let a = node.t1 * ti;
        let p = a * c(2.0);
        let ti1 = -ti * node.t1 * ti;
        let p_alt = -node.t * ti1 * c(2.0);
        if max_abs(&(p - p_alt)) > 1e-10 * (1.0 + max_abs(&p)) {
            return Err(Error::Internal(format!(
                "the two forms of P̂ disagree at x = {} by {:.3e}",
                node.x,
                max_abs(&(p - p_alt))
            )));
        }
        let ti2 = -ti * node.t2 * ti + ti * node.t1 * ti * node.t1 * ti * c(2.0);
        let qm = Mat2::new(c(qv[j]), c(0.0), c(0.0), c(qv[n - j]));
        let tqt = node.t * qm * ti;
        // -T (T^{-1})'' = T''T^{-1} - 2 (T'T^{-1})^2 without the T T^{-1} sandwich,
        // which loses about |T^{-1}|^2 in rounding next to the guard band
        let qhat = tqt + node.t2 * ti - a * a * c(2.0);
        let qhat_alt = tqt - node.t * ti2;
        if max_abs(&(qhat - qhat_alt)) > 1e-8 * (1.0 + max_abs(&qhat)) {
            return Err(Error::Internal(format!(
                "the two forms of Q̂ disagree at x = {} by {:.3e}",
                node.x,
                max_abs(&(qhat - qhat_alt))
            )));
        }
        mc.phat.push(p);
        mc.qhat.push(qhat);
        mc.dphat.push((node.t2 * ti - a * a) * c(2.0));
        mc.qdiag.push([qv[j], qv[n - j]]);
    }
    Ok(mc)
}

impl ModelCoefficients {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Half-grid node indices carrying coefficients.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn x(&self, k: usize) -> f64 {
        self.grid.x(self.nodes[k])
    }

    pub fn phat(&self) -> &[Mat2] {
        &self.phat
    }

    pub fn qhat(&self) -> &[Mat2] {
        &self.qhat
    }

    /// Analytic `P̂'`.
    pub fn dphat(&self) -> &[Mat2] {
        &self.dphat
    }

    pub fn qdiag(&self) -> &[[f64; 2]] {
        &self.qdiag
    }

    /// Position of half-grid node `j` among the coefficient nodes.
    fn position(&self, j: usize) -> Option<usize> {
        self.nodes.binary_search(&j).ok()
    }

    /// `(P̂, Q̂)` at the node nearest to `x`.
    pub fn at(&self, x: f64) -> Result<(Mat2, Mat2)> {
        let j = (x / self.grid.h()).round();
        let k = if j >= 0.0 { self.position(j as usize) } else { None };
        match k {
            Some(k) => Ok((self.phat[k], self.qhat[k])),
            None => Err(Error::Domain(format!(
                "x = {x} is outside the admissible half grid (guard band or out of range)"
            ))),
        }
    }

    /// `S = Q̂ + P̂²/4 - P̂'/2` with the given `P̂'`.
    pub fn reduced(&self, dphat: &[Mat2]) -> Vec<Mat2> {
        (0..self.len())
            .map(|k| self.qhat[k] + self.phat[k] * self.phat[k] * c(0.25) - dphat[k] * c(0.5))
            .collect()
    }

    /// `P̂'` by order-4 differencing of `(l/2 - x) P̂`, which stays smooth
    /// through the midpoint pole.
    pub fn observed_dphat(&self) -> Result<Vec<Mat2>> {
        let m = self.len();
        if m < 5 {
            return Err(Error::Contract("too few coefficient nodes to difference".into()));
        }
        if self.nodes.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::Contract("coefficient nodes are not contiguous".into()));
        }
        let mid = 0.5 * self.grid.l();
        let h = self.grid.h();
        let mut out = vec![Mat2::zeros(); m];
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let f: Vec<Complex64> = (0..m).map(|k| self.phat[k][(a, b)] * (mid - self.x(k))).collect();
            let df = diff4_samples(&f, h, DiffOrder::First);
            for k in 0..m {
                out[k][(a, b)] = (df[k] + self.phat[k][(a, b)]) / (mid - self.x(k));
            }
        }
        Ok(out)
    }

    /// Writes `x, P̂ (8 columns), Q̂ (8 columns), P̂' (8 columns), q(x), q(l-x)`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["x".to_string()];
        for m in ["P", "Q", "dP"] {
            for ij in ["11", "12", "21", "22"] {
                header.push(format!("re({m}{ij})"));
                header.push(format!("im({m}{ij})"));
            }
        }
        header.push("q(x)".into());
        header.push("q(l-x)".into());
        w.write_record(&header)?;
        for k in 0..self.len() {
            let mut row = vec![fmt_f64(self.x(k))];
            for m in [&self.phat[k], &self.qhat[k], &self.dphat[k]] {
                push_matrix(&mut row, m);
            }
            row.push(fmt_f64(self.qdiag[k][0]));
            row.push(fmt_f64(self.qdiag[k][1]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the layout of [`write_csv`](Self::write_csv); rows must sit on
    /// half-grid nodes of `grid` in increasing order.
    pub fn read_csv<R: Read>(reader: R, grid: Grid) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let mut mc = ModelCoefficients {
            grid,
            nodes: Vec::new(),
            phat: Vec::new(),
            qhat: Vec::new(),
            dphat: Vec::new(),
            qdiag: Vec::new(),
        };
        for rec in r.records() {
            let rec = rec?;
            if rec.len() != 27 {
                return Err(Error::Config(format!("coefficient row has {} fields, expected 27", rec.len())));
            }
            let v: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad number in coefficient CSV: {e}")))?;
            let j = (v[0] / grid.h()).round();
            if j < 0.0 || j as usize > grid.half() || (grid.x(j as usize) - v[0]).abs() > 1e-9 * grid.l() {
                return Err(Error::Config(format!("x = {} is not a half-grid node", v[0])));
            }
            let j = j as usize;
            if mc.nodes.last().is_some_and(|&p| p >= j) {
                return Err(Error::Config("coefficient rows are not increasing in x".into()));
            }
            let mat = |o: usize| {
                Mat2::new(
                    Complex64::new(v[o], v[o + 1]),
                    Complex64::new(v[o + 2], v[o + 3]),
                    Complex64::new(v[o + 4], v[o + 5]),
                    Complex64::new(v[o + 6], v[o + 7]),
                )
            };
            mc.nodes.push(j);
            mc.phat.push(mat(1));
            mc.qhat.push(mat(9));
            mc.dphat.push(mat(17));
            mc.qdiag.push([v[25], v[26]]);
        }
        Ok(mc)
    }
}

/// `-û'' + P̂ û' + Q̂ û` on the coefficient nodes; zero elsewhere.
pub fn apply_model(uh: &HatField, mc: &ModelCoefficients) -> Result<HatField> {
    let (Some(d1), Some(d2)) = (uh.d1(), uh.d2()) else {
        return Err(Error::Contract("apply_model needs a hat field with derivative fields".into()));
    };
    if uh.grid() != mc.grid {
        return Err(Error::Contract("hat field and coefficients live on different grids".into()));
    }
    let mut out = vec![Vec2::zeros(); mc.grid.half() + 1];
    for (k, &j) in mc.nodes.iter().enumerate() {
        out[j] = -d2[j] + mc.phat[k] * d1[j] + mc.qhat[k] * uh.at(j);
    }
    HatField::new(mc.grid, out)
}

/// A smooth function with analytic derivatives: `f(x, k) = u^{(k)}(x)`, `k <= 2`.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    f: Arc<dyn Fn(f64, u32) -> Complex64 + Send + Sync>,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").field("name", &self.name).finish()
    }
}

impl TestFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, u32) -> Complex64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: f64, k: u32) -> Complex64 {
        (self.f)(x, k)
    }

    pub fn sample(&self, grid: Grid, k: u32) -> GridFunction {
        grid.sample(|x| self.eval(x, k))
    }
}

/// Five smooth functions on `[0, l]` with closed-form derivatives.
pub fn test_battery(l: f64) -> Vec<TestFunction> {
    let w = std::f64::consts::PI / l;
    vec![
        TestFunction::new("x^2 (l-x)^2", move |x, k| {
            let v = match k {
                0 => x * x * (l - x) * (l - x),
                1 => 2.0 * x * (l - x) * (l - 2.0 * x),
                _ => 2.0 * (l * l - 6.0 * l * x + 6.0 * x * x),
            };
            c(v)
        }),
        TestFunction::new("exp(x) sin(pi x / l)", move |x, k| {
            let (s, co) = ((w * x).sin(), (w * x).cos());
            let v = match k {
                0 => s,
                1 => s + w * co,
                _ => (1.0 - w * w) * s + 2.0 * w * co,
            };
            c(x.exp() * v)
        }),
        TestFunction::new("cos(2x) + x", |x, k| {
            let v = match k {
                0 => (2.0 * x).cos() + x,
                1 => -2.0 * (2.0 * x).sin() + 1.0,
                _ => -4.0 * (2.0 * x).cos(),
            };
            c(v)
        }),
        TestFunction::new("x^3 - x", |x, k| {
            let v = match k {
                0 => x * x * x - x,
                1 => 3.0 * x * x - 1.0,
                _ => 6.0 * x,
            };
            c(v)
        }),
        TestFunction::new("exp(i 3x) / (1 + x^2)", |x, k| {
            let e = Complex64::new(0.0, 3.0 * x).exp();
            let d = 1.0 + x * x;
            let i3 = Complex64::new(0.0, 3.0);
            match k {
                0 => e / d,
                1 => e * (i3 / d - 2.0 * x / (d * d)),
                _ => {
                    let g = 1.0 / d;
                    let g1 = -2.0 * x / (d * d);
                    let g2 = (6.0 * x * x - 2.0) / (d * d * d);
                    e * (i3 * i3 * g + i3 * 2.0 * g1 + g2)
                }
            }
        }),
    ]
}

/// `sup |apply_model(û) - (-u'' + q u)^| ` over the coefficient nodes, from
/// samples of `u`, `u'`, `u''`.
pub fn intertwine_residual_samples(
    u: &GridFunction,
    du: &GridFunction,
    d2u: &GridFunction,
    q: &Potential,
    gd: &GaugeData,
    mc: &ModelCoefficients,
) -> Result<f64> {
    let hat = hat_value_with_derivatives(u, du, d2u, gd)?;
    let lhs = apply_model(&hat, mc)?;
    let qv = q.values();
    let lu = GridFunction::new(
        u.grid(),
        (0..u.grid().len()).map(|j| -d2u.at(j) + u.at(j) * qv[j]).collect(),
    )?;
    let rhs = hat_value(&lu, gd)?;
    Ok(lhs.sup_diff(&rhs, mc.nodes()))
}

pub fn intertwine_residual(
    u: &TestFunction,
    q: &Potential,
    gd: &GaugeData,
    mc: &ModelCoefficients,
) -> Result<f64> {
    let g = gd.grid();
    intertwine_residual_samples(&u.sample(g, 0), &u.sample(g, 1), &u.sample(g, 2), q, gd, mc)
}

/// A graph point `(W u^h(t), -W u^{h''}(t))` of the model adjoint.
#[derive(Debug, Clone)]
pub struct GraphSample {
    pub t: f64,
    pub wave: GridFunction,
    pub first: HatField,
    pub second: HatField,
}

pub fn graph_sample(c: &ControlSignal, t: f64, sys: &WaveSystem, gd: &GaugeData) -> Result<GraphSample> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("graph sampling needs t > 0, got {t}")));
    }
    let h = control_to_kernel(c, sys.kernel_basis());
    let wave = sys.smooth_wave(&h, t)?;
    let wave2 = sys.smooth_wave(&h.derivative(2), t)?;
    let first = hat_value(&wave, gd)?;
    let second = hat_value(&wave2, gd)?.scale(c_neg());
    Ok(GraphSample { t, wave, first, second })
}

fn c_neg() -> Complex64 {
    Complex64::new(-1.0, 0.0)
}

/// Relative mismatch `sup |apply_model(first) - second| / sup |second|`,
/// with `û'`, `û''` from order-4 differences of the wave field.
pub fn graph_consistency(gs: &GraphSample, gd: &GaugeData, mc: &ModelCoefficients) -> Result<f64> {
    let du = diff4(&gs.wave, DiffOrder::First);
    let d2u = diff4(&gs.wave, DiffOrder::Second);
    let hat = hat_value_with_derivatives(&gs.wave, &du, &d2u, gd)?;
    let lhs = apply_model(&hat, mc)?;
    let scale = gs.second.sup_norm(mc.nodes());
    let diff = lhs.sup_diff(&gs.second, mc.nodes());
    Ok(if scale > 0.0 { diff / scale } else { diff })
}

/// Source of `P̂'` for recovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecoveryPath {
    /// From the analytic derivative fields of the gauge.
    #[default]
    Analytic,
    /// From sampled `P̂` only.
    Observer,
}

pub const REFLECTION_NOTE: &str = "the coefficients determine the unordered pair {q(x), q(l-x)} only; \
q is recovered up to the reflection x -> l - x";

/// Eigenvalue branches of `S` on the coefficient nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub path: RecoveryPath,
    pub x: Vec<f64>,
    pub branches: [Vec<f64>; 2],
    pub collision_flags: Vec<bool>,
    pub reflection_note: String,
    /// Largest imaginary part of an eigenvalue of `S`.
    pub max_imag: f64,
}

impl RecoveryReport {
    pub fn any_collision(&self) -> bool {
        self.collision_flags.iter().any(|&f| f)
    }

    /// Largest unordered-pair error against `{q(x), q(l-x)}` for `x` in `[a, b]`.
    pub fn max_error(&self, q: impl Fn(f64) -> f64, l: f64, a: f64, b: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, &x) in self.x.iter().enumerate() {
            if x < a || x > b {
                continue;
            }
            let (p, r) = (q(x), q(l - x));
            let (b1, b2) = (self.branches[0][k], self.branches[1][k]);
            let e = ((b1 - p).abs().max((b2 - r).abs())).min((b1 - r).abs().max((b2 - p).abs()));
            worst = worst.max(e);
        }
        worst
    }

    /// Writes `x,branch1,branch2,collision`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "branch1", "branch2", "collision"])?;
        for k in 0..self.x.len() {
            w.write_record([
                fmt_f64(self.x[k]),
                fmt_f64(self.branches[0][k]),
                fmt_f64(self.branches[1][k]),
                (self.collision_flags[k] as u8).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn eig2(s: &Mat2) -> [Complex64; 2] {
    let half_tr = (s[(0, 0)] + s[(1, 1)]) * 0.5;
    let disc = (half_tr * half_tr - s.determinant()).sqrt();
    [half_tr - disc, half_tr + disc]
}

/// Eigenvalues of `S = Q̂ + P̂²/4 - P̂'/2` per node, sorted into continuous
/// branches starting from the first node at or beyond `3h`. Nodes where the
/// two eigenvalues are closer than `collision_tol` are flagged and left in
/// ascending order.
pub fn recover_potential(mc: &ModelCoefficients, path: RecoveryPath, collision_tol: f64) -> Result<RecoveryReport> {
    if mc.is_empty() {
        return Err(Error::Contract("no model coefficients to recover from".into()));
    }
    let dphat = match path {
        RecoveryPath::Analytic => mc.dphat.clone(),
        RecoveryPath::Observer => mc.observed_dphat()?,
    };
    let s = mc.reduced(&dphat);
    let mut max_imag: f64 = 0.0;
    let pairs: Vec<[f64; 2]> = s
        .iter()
        .map(|m| {
            let [a, b] = eig2(m);
            max_imag = max_imag.max(a.im.abs()).max(b.im.abs());
            if a.re <= b.re {
                [a.re, b.re]
            } else {
                [b.re, a.re]
            }
        })
        .collect();
    let m = pairs.len();
    let collision: Vec<bool> = pairs
        .iter()
        .map(|p| (p[1] - p[0]).abs() < collision_tol * (1.0 + p[0].abs().max(p[1].abs())))
        .collect();

    let delta = 3.0 * mc.grid.h();
    let start = (0..m).find(|&k| mc.x(k) >= delta - 1e-12).unwrap_or(0);
    let mut b = vec![[0.0; 2]; m];
    b[start] = pairs[start];
    let pick = |prev: [f64; 2], p: [f64; 2], flagged: bool| {
        if flagged {
            return p;
        }
        let keep = (p[0] - prev[0]).abs() + (p[1] - prev[1]).abs();
        let swap = (p[1] - prev[0]).abs() + (p[0] - prev[1]).abs();
        if swap < keep {
            [p[1], p[0]]
        } else {
            p
        }
    };
    for k in start + 1..m {
        b[k] = pick(b[k - 1], pairs[k], collision[k]);
    }
    for k in (0..start).rev() {
        b[k] = pick(b[k + 1], pairs[k], collision[k]);
    }
    Ok(RecoveryReport {
        path,
        x: (0..m).map(|k| mc.x(k)).collect(),
        branches: [b.iter().map(|p| p[0]).collect(), b.iter().map(|p| p[1]).collect()],
        collision_flags: collision,
        reflection_note: REFLECTION_NOTE.into(),
        max_imag,
    })
}
