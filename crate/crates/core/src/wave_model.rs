//! Coordinate model space on the half interval `[0, l/2]`.
//!
//! A gauge `e ∈ K` with `ρ(x) = |e(x)|^2 + |e(l-x)|^2 > 0` normalises the
//! boundary form `⟨u, v⟩_x = (u(x) v̄(x) + u(l-x) v̄(l-x)) / ρ(x)`. With a basis
//! `e1, e2` of `K` the coordinate value of `u` is
//!
//! ```text
//! û(x) = (⟨u, e1⟩_x, ⟨u, e2⟩_x)ᵀ = T(x) (u(x), u(l-x))ᵀ,
//! T(x) = ρ(x)^{-1} [[ē1(x), ē1(l-x)], [ē2(x), ē2(l-x)]],
//! ```
//!
//! and `G(x)_{ik} = ⟨e_k, e_i⟩_x = ρ T T*`. All x-derivatives of `T` come from
//! the integrator's `e'` samples and `e'' = q e`.
//!
//! `det T` has a simple zero at `x = l/2`, where the two evaluation points
//! meet. Nodes with `x > l/2 - 3h` or `|det T| <= 1e-8` form the guard band.

use std::io::Write;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{atom_snapshot, project_onto, Atom};
use crate::grid::{fmt_f64, simpson_weights, Grid, GridFunction};
use crate::potential::Potential;
use crate::sl_solver::KernelBasis;

pub type Mat2 = Matrix2<Complex64>;
pub type Vec2 = Vector2<Complex64>;

const DET_FLOOR: f64 = 1e-8;
const GUARD_CELLS: f64 = 3.0;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `c0 φ_0 + cl φ_l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelVector {
    pub c0: Complex64,
    pub cl: Complex64,
}

impl KernelVector {
    pub fn new(c0: Complex64, cl: Complex64) -> Self {
        Self { c0, cl }
    }

    /// `(re c0, im c0, re cl, im cl)`.
    pub fn from_quadruple(v: [f64; 4]) -> Self {
        Self { c0: Complex64::new(v[0], v[1]), cl: Complex64::new(v[2], v[3]) }
    }
}

/// Gauge `e` and basis `e1, e2` of `K`, in the `(φ_0, φ_l)` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeSpec {
    pub e: KernelVector,
    pub e1: KernelVector,
    pub e2: KernelVector,
}

impl Default for GaugeSpec {
    /// `e = φ_0 + i φ_l`, `e1 = φ_0`, `e2 = φ_l`.
    fn default() -> Self {
        Self {
            e: KernelVector::new(c(1.0), Complex64::i()),
            e1: KernelVector::new(c(1.0), c(0.0)),
            e2: KernelVector::new(c(0.0), c(1.0)),
        }
    }
}

/// Samples of a kernel element with its first two derivatives.
#[derive(Debug, Clone)]
struct KernelElement {
    u: Vec<Complex64>,
    du: Vec<Complex64>,
    d2u: Vec<Complex64>,
}

impl KernelElement {
    fn new(kb: &KernelBasis, q: &[f64], v: KernelVector) -> Self {
        let s = kb.combine(v.c0, v.cl);
        let u = s.u.into_values();
        let d2u = u.iter().zip(q).map(|(a, qq)| a * qq).collect();
        Self { u, du: s.du.into_values(), d2u }
    }
}

/// Gauge quantities at one half-grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaugeNode {
    pub x: f64,
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub t: Mat2,
    pub t1: Mat2,
    pub t2: Mat2,
    /// Assembled from the boundary form of `e1, e2`, not from `T`.
    pub g: Mat2,
    pub det_t: Complex64,
    pub admissible: bool,
}

/// An admissible gauge with `T`, `T'`, `T''`, `ρ` and `G` on the half grid.
#[derive(Debug, Clone)]
pub struct GaugeData {
    grid: Grid,
    spec: GaugeSpec,
    e: KernelElement,
    e1: KernelElement,
    e2: KernelElement,
    nodes: Vec<GaugeNode>,
    wronskian: Complex64,
    perturbed: bool,
}

pub fn default_gauge(q: &Potential, kb: &KernelBasis) -> Result<GaugeData> {
    GaugeData::new(q, kb, &GaugeSpec::default())
}

impl GaugeData {
    pub fn new(q: &Potential, kb: &KernelBasis, spec: &GaugeSpec) -> Result<Self> {
        let grid = kb.grid();
        if q.grid() != grid {
            return Err(Error::Contract("potential and kernel basis live on different grids".into()));
        }
        let qv = q.values();
        let e = KernelElement::new(kb, qv, spec.e);
        let e1 = KernelElement::new(kb, qv, spec.e1);
        let e2 = KernelElement::new(kb, qv, spec.e2);
        let n = grid.n();

        let w = |j: usize| e1.u[j] * e2.du[j] - e1.du[j] * e2.u[j];
        let (w0, wm, wl) = (w(0), w(n / 2), w(n));
        if w0.norm() < 1e-10 {
            return Err(Error::Gauge(format!(
                "e1 and e2 are linearly dependent (Wronskian {:.3e})",
                w0.norm()
            )));
        }
        if (wm - w0).norm() > 1e-6 * w0.norm() || (wl - w0).norm() > 1e-6 * w0.norm() {
            return Err(Error::Gauge(format!(
                "Wronskian of e1, e2 is not constant: {w0:.6e}, {wm:.6e}, {wl:.6e}"
            )));
        }

        let h = grid.h();
        let mid = 0.5 * grid.l();
        let mut nodes = Vec::with_capacity(grid.half() + 1);
        for j in 0..=grid.half() {
            let m = n - j;
            let x = grid.x(j);
            let (ex, em) = (e.u[j], e.u[m]);
            let (dex, dem) = (e.du[j], e.du[m]);
            let rho = ex.norm_sqr() + em.norm_sqr();
            if !(rho > 1e-12) {
                return Err(Error::Gauge(format!("rho({x}) = {rho:.3e} is not positive")));
            }
            let rho1 = 2.0 * (dex * ex.conj()).re - 2.0 * (dem * em.conj()).re;
            let rho2 = 2.0 * dex.norm_sqr()
                + 2.0 * qv[j] * ex.norm_sqr()
                + 2.0 * dem.norm_sqr()
                + 2.0 * qv[m] * em.norm_sqr();
            let b = Mat2::new(e1.u[j].conj(), e1.u[m].conj(), e2.u[j].conj(), e2.u[m].conj());
            let b1 = Mat2::new(e1.du[j].conj(), -e1.du[m].conj(), e2.du[j].conj(), -e2.du[m].conj());
            let b2 = Mat2::new(e1.d2u[j].conj(), e1.d2u[m].conj(), e2.d2u[j].conj(), e2.d2u[m].conj());
            let r = 1.0 / rho;
            let r1 = -rho1 / (rho * rho);
            let r2 = 2.0 * rho1 * rho1 / (rho * rho * rho) - rho2 / (rho * rho);
            let t = b * c(r);
            let t1 = b * c(r1) + b1 * c(r);
            let t2 = b * c(r2) + b1 * c(2.0 * r1) + b2 * c(r);
            let basis = [&e1, &e2];
            let g = Mat2::from_fn(|i, k| {
                (basis[k].u[j] * basis[i].u[j].conj() + basis[k].u[m] * basis[i].u[m].conj()) / rho
            });
            let det_t = b.determinant() / (rho * rho);
            let admissible = x <= mid - GUARD_CELLS * h + 1e-12 * grid.l() && det_t.norm() > DET_FLOOR;
            nodes.push(GaugeNode { x, rho, rho1, rho2, t, t1, t2, g, det_t, admissible });
        }
        let gd = Self { grid, spec: *spec, e, e1, e2, nodes, wronskian: w0, perturbed: false };
        gd.check_guard_band()?;
        Ok(gd)
    }

    /// Inadmissible nodes are only allowed next to the midpoint.
    fn check_guard_band(&self) -> Result<()> {
        let mid = 0.5 * self.grid.l();
        let band = GUARD_CELLS * self.grid.h() + 1e-12 * self.grid.l();
        for node in &self.nodes {
            if !node.admissible && node.x < mid - band {
                return Err(Error::Gauge(format!(
                    "T is numerically singular at x = {} (|det T| = {:.3e}) outside the midpoint guard band",
                    node.x,
                    node.det_t.norm()
                )));
            }
        }
        Ok(())
    }

    /// Test hook: scales the stored `T_12` values by `1 + eps` while leaving
    /// `T'`, `T''`, `G` and `ρ` alone. (Scaling all of `T` would be invisible
    /// to the intertwining identity.) The construction cross-check in
    /// [`hat_value`] is skipped for perturbed data so that the corruption
    /// reaches the downstream identities.
    pub fn with_perturbed_transform(&self, eps: f64) -> Self {
        let mut out = self.clone();
        for node in &mut out.nodes {
            node.t[(0, 1)] *= 1.0 + eps;
        }
        out.perturbed = true;
        out
    }

    pub fn is_perturbed(&self) -> bool {
        self.perturbed
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn spec(&self) -> &GaugeSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[GaugeNode] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &GaugeNode {
        &self.nodes[j]
    }

    pub fn wronskian(&self) -> Complex64 {
        self.wronskian
    }

    /// Width of the midpoint guard band.
    pub fn guard_band(&self) -> f64 {
        GUARD_CELLS * self.grid.h()
    }

    /// Half-grid indices outside the guard band.
    pub fn admissible_nodes(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&j| self.nodes[j].admissible).collect()
    }

    /// The gauge `e` on the full grid.
    pub fn e(&self) -> GridFunction {
        GridFunction::new(self.grid, self.e.u.clone()).expect("gauge samples match grid")
    }

    pub fn e1(&self) -> GridFunction {
        GridFunction::new(self.grid, self.e1.u.clone()).expect("gauge samples match grid")
    }

    pub fn e2(&self) -> GridFunction {
        GridFunction::new(self.grid, self.e2.u.clone()).expect("gauge samples match grid")
    }

    /// `ρ` on the half grid.
    pub fn rho(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.rho).collect()
    }

    /// `max |G - ρ T T*|` at node `j`.
    pub fn gram_residual(&self, j: usize) -> f64 {
        let n = &self.nodes[j];
        max_abs(&(n.g - n.t * n.t.adjoint() * c(n.rho)))
    }

    /// `max |T* G^{-1} T - ρ^{-1} I|` at node `j`, `None` when `G` is singular.
    pub fn inverse_identity_residual(&self, j: usize) -> Option<f64> {
        let n = &self.nodes[j];
        let gi = n.g.try_inverse()?;
        Some(max_abs(&(n.t.adjoint() * gi * n.t - Mat2::identity() * c(1.0 / n.rho))))
    }

    /// Writes `x, T (8 columns), G (8 columns), rho, gram_residual` for every
    /// admissible node.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["x".to_string()];
        for m in ["T", "G"] {
            for ij in ["11", "12", "21", "22"] {
                header.push(format!("re({m}{ij})"));
                header.push(format!("im({m}{ij})"));
            }
        }
        header.push("rho".into());
        header.push("gram_residual".into());
        w.write_record(&header)?;
        for j in self.admissible_nodes() {
            let n = &self.nodes[j];
            let mut row = vec![fmt_f64(n.x)];
            for m in [&n.t, &n.g] {
                push_matrix(&mut row, m);
            }
            row.push(fmt_f64(n.rho));
            row.push(fmt_f64(self.gram_residual(j)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn max_abs(m: &Mat2) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

pub(crate) fn push_matrix(row: &mut Vec<String>, m: &Mat2) {
    for (i, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        row.push(fmt_f64(m[(i, k)].re));
        row.push(fmt_f64(m[(i, k)].im));
    }
}

/// Coordinate values `û` on the half grid, optionally with `û'` and `û''`.
#[derive(Debug, Clone, PartialEq)]
pub struct HatField {
    grid: Grid,
    values: Vec<Vec2>,
    d1: Option<Vec<Vec2>>,
    d2: Option<Vec<Vec2>>,
}

impl HatField {
    pub fn new(grid: Grid, values: Vec<Vec2>) -> Result<Self> {
        if values.len() != grid.half() + 1 {
            return Err(Error::Contract(format!(
                "hat field needs {} half-grid values, got {}",
                grid.half() + 1,
                values.len()
            )));
        }
        Ok(Self { grid, values, d1: None, d2: None })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![Vec2::zeros(); grid.half() + 1], d1: None, d2: None }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Vec2] {
        &self.values
    }

    pub fn at(&self, j: usize) -> Vec2 {
        self.values[j]
    }

    pub fn d1(&self) -> Option<&[Vec2]> {
        self.d1.as_deref()
    }

    pub fn d2(&self) -> Option<&[Vec2]> {
        self.d2.as_deref()
    }

    pub fn has_derivatives(&self) -> bool {
        self.d1.is_some() && self.d2.is_some()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let sc = |v: &Vec<Vec2>| v.iter().map(|a| a * s).collect::<Vec<_>>();
        Self {
            grid: self.grid,
            values: sc(&self.values),
            d1: self.d1.as_ref().map(sc),
            d2: self.d2.as_ref().map(sc),
        }
    }

    /// `max_j |self(j) - other(j)|` over the given nodes.
    pub fn sup_diff(&self, other: &Self, nodes: &[usize]) -> f64 {
        nodes
            .iter()
            .map(|&j| (self.values[j] - other.values[j]).iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// `max_j |self(j)|` over the given nodes.
    pub fn sup_norm(&self, nodes: &[usize]) -> f64 {
        nodes
            .iter()
            .map(|&j| self.values[j].iter().map(|v| v.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }
}

fn pair(u: &[Complex64], j: usize, n: usize) -> Vec2 {
    Vec2::new(u[j], u[n - j])
}

/// `û = T (u(x), u(l-x))ᵀ`, cross-checked against `⟨u, e_i⟩_x`.
pub fn hat_value(u: &GridFunction, gd: &GaugeData) -> Result<HatField> {
    if u.grid() != gd.grid {
        return Err(Error::Contract("function and gauge live on different grids".into()));
    }
    let n = gd.grid.n();
    let uv = u.values();
    let mut values = Vec::with_capacity(gd.nodes.len());
    for (j, node) in gd.nodes.iter().enumerate() {
        let hat = node.t * pair(uv, j, n);
        if !gd.perturbed {
            let form = |e: &KernelElement| {
                (uv[j] * e.u[j].conj() + uv[n - j] * e.u[n - j].conj()) / node.rho
            };
            let direct = Vec2::new(form(&gd.e1), form(&gd.e2));
            let scale = 1.0 + hat.norm();
            if (hat - direct).norm() > 1e-12 * scale {
                return Err(Error::Internal(format!(
                    "hat value at x = {} disagrees with the boundary form by {:.3e}",
                    node.x,
                    (hat - direct).norm()
                )));
            }
        }
        values.push(hat);
    }
    Ok(HatField { grid: gd.grid, values, d1: None, d2: None })
}

/// `û`, `û' = T'U + TU'`, `û'' = T''U + 2T'U' + TU''` with
/// `U = (u(x), u(l-x))`, `U' = (u'(x), -u'(l-x))`, `U'' = (u''(x), u''(l-x))`.
pub fn hat_value_with_derivatives(
    u: &GridFunction,
    du: &GridFunction,
    d2u: &GridFunction,
    gd: &GaugeData,
) -> Result<HatField> {
    let mut hat = hat_value(u, gd)?;
    if du.grid() != gd.grid || d2u.grid() != gd.grid {
        return Err(Error::Contract("derivative samples live on a different grid".into()));
    }
    let n = gd.grid.n();
    let (u, du, d2u) = (u.values(), du.values(), d2u.values());
    let mut d1 = Vec::with_capacity(gd.nodes.len());
    let mut d2 = Vec::with_capacity(gd.nodes.len());
    for (j, node) in gd.nodes.iter().enumerate() {
        let uu = pair(u, j, n);
        let u1 = Vec2::new(du[j], -du[n - j]);
        let u2 = pair(d2u, j, n);
        d1.push(node.t1 * uu + node.t * u1);
        d2.push(node.t2 * uu + node.t1 * u1 * c(2.0) + node.t * u2);
    }
    hat.d1 = Some(d1);
    hat.d2 = Some(d2);
    Ok(hat)
}

/// `⟨u, v⟩_x`, with four-point cubic interpolation off the nodes.
pub fn boundary_form(u: &GridFunction, v: &GridFunction, x: f64, gd: &GaugeData) -> Result<Complex64> {
    let l = gd.grid.l();
    if !(0.0..=0.5 * l).contains(&x) {
        return Err(Error::Domain(format!("boundary form needs 0 <= x <= l/2, got {x}")));
    }
    let e = gd.e();
    let rho = e.interpolate(x).norm_sqr() + e.interpolate(l - x).norm_sqr();
    Ok((u.interpolate(x) * v.interpolate(x).conj() + u.interpolate(l - x) * v.interpolate(l - x).conj())
        / rho)
}

/// Output of [`model_inner`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelInner {
    pub value: Complex64,
    pub guard_nodes: usize,
    /// Simpson contribution of the extrapolated guard-band integrand.
    pub guard_contribution: Complex64,
    /// Band width times the largest integrand magnitude next to the band.
    pub guard_bound: f64,
}

/// Degree-5 Lagrange extrapolation from six abscissae.
fn lagrange(xs: &[f64], ys: &[Complex64], x: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..xs.len() {
        let mut w = 1.0;
        for k in 0..xs.len() {
            if k != i {
                w *= (x - xs[k]) / (xs[i] - xs[k]);
            }
        }
        acc += ys[i] * w;
    }
    acc
}

/// `∫_0^{l/2} (G^{-1} û, v̂) ρ dx` by Simpson on the half grid. Guard-band
/// integrand values are extrapolated from the six admissible nodes before it.
pub fn model_inner(uh: &HatField, vh: &HatField, gd: &GaugeData) -> Result<ModelInner> {
    if uh.grid != gd.grid || vh.grid != gd.grid {
        return Err(Error::Contract("hat fields and gauge live on different grids".into()));
    }
    let count = gd.nodes.len();
    let mut f = vec![Complex64::new(0.0, 0.0); count];
    let mut last = None;
    for (j, node) in gd.nodes.iter().enumerate() {
        if !node.admissible {
            continue;
        }
        let gi = node.g.try_inverse().ok_or_else(|| {
            Error::Gauge(format!("G is singular at admissible node x = {}", node.x))
        })?;
        f[j] = vh.values[j].dotc(&(gi * uh.values[j])) * node.rho;
        last = Some(j);
    }
    let last = last.ok_or_else(|| Error::Gauge("no admissible nodes".into()))?;
    if last < 5 {
        return Err(Error::Gauge("too few admissible nodes to extrapolate into the guard band".into()));
    }
    let xs: Vec<f64> = (last - 5..=last).map(|j| gd.nodes[j].x).collect();
    let ys: Vec<Complex64> = (last - 5..=last).map(|j| f[j]).collect();
    for (fj, node) in f.iter_mut().zip(&gd.nodes).skip(last + 1) {
        *fj = lagrange(&xs, &ys, node.x);
    }
    let w = simpson_weights(count - 1, gd.grid.h());
    let value = f.iter().zip(&w).map(|(a, w)| a * w).sum();
    let guard_contribution = (last + 1..count).map(|j| f[j] * w[j]).sum();
    let near = ys.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(ModelInner {
        value,
        guard_nodes: count - 1 - last,
        guard_contribution,
        guard_bound: (0.5 * gd.grid.l() - gd.nodes[last].x) * near,
    })
}

/// Both sides of the Parseval equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsevalReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    pub guard_bound: f64,
}

/// `|(u, v)_H - model_inner(û, v̂)|`.
pub fn parseval_residual(u: &GridFunction, v: &GridFunction, gd: &GaugeData) -> Result<ParsevalReport> {
    let lhs = u.inner(v);
    let inner = model_inner(&hat_value(u, gd)?, &hat_value(v, gd)?, gd)?;
    Ok(ParsevalReport {
        lhs,
        rhs: inner.value,
        residual: (lhs - inner.value).norm(),
        guard_bound: inner.guard_bound,
    })
}

/// Output of [`form_limit_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormLimitReport {
    pub x: f64,
    pub radii: Vec<f64>,
    /// `‖P u‖² / ‖P e‖²` on the atom snapshot of each radius.
    pub ratios: Vec<f64>,
    /// `(|u(x)|² + |u(l-x)|²) / ρ(x)`.
    pub boundary_ratio: f64,
    pub extrapolated: f64,
    pub deviation: f64,
    pub monotone: bool,
    pub pass: bool,
}

/// Least squares fit of `ratio(t) = c0 + c1 t² [+ c2 t⁴]`; returns `c0`.
fn extrapolate_to_zero(radii: &[f64], ratios: &[f64]) -> f64 {
    let k = radii.len().min(3);
    if k == 1 {
        return ratios[0];
    }
    let a = nalgebra::DMatrix::from_fn(radii.len(), k, |i, p| radii[i].powi(2 * p as i32));
    let b = nalgebra::DVector::from_column_slice(ratios);
    match a.svd(true, true).solve(&b, 1e-14) {
        Ok(sol) => sol[0],
        Err(_) => ratios[0],
    }
}

/// Checks `‖P_{ω_x(t)} u‖² / ‖P_{ω_x(t)} e‖² -> (|u(x)|² + |u(l-x)|²) / ρ(x)`.
///
/// With half-open node snapping, radii `(k + 1/2) h` give node sets centred on
/// `x` when `x` is a node; other radii leave an `O(h/t)` bias.
pub fn form_limit_check(
    u: &GridFunction,
    x: f64,
    gd: &GaugeData,
    radii: &[f64],
    tol: f64,
) -> Result<FormLimitReport> {
    if radii.is_empty() {
        return Err(Error::Config("form limit check needs at least one radius".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let atom = Atom::new(x, gd.grid.l())?;
    let e = gd.e();
    let mut ratios = Vec::with_capacity(radii.len());
    for &t in &radii {
        let s = atom_snapshot(&atom, t)?;
        let den = project_onto(&s, &e).norm_sq();
        ratios.push(project_onto(&s, u).norm_sq() / den);
    }
    let boundary_ratio = boundary_form(u, u, x, gd)?.re;
    let extrapolated = extrapolate_to_zero(&radii, &ratios);
    let deviation = (extrapolated - boundary_ratio).abs();
    // radii are in decreasing order: the error must not grow as t shrinks
    let slack = 1e-10 * (1.0 + boundary_ratio.abs());
    let errs: Vec<f64> = ratios.iter().map(|r| (r - boundary_ratio).abs()).collect();
    let monotone = errs.windows(2).all(|w| w[1] <= w[0] + slack);
    let finite = ratios.iter().all(|r| r.is_finite());
    Ok(FormLimitReport {
        x,
        radii,
        ratios,
        boundary_ratio,
        extrapolated,
        deviation,
        monotone,
        pass: finite && monotone && deviation <= tol,
    })
}
