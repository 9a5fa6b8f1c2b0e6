//! Boundary control of `u_tt - u_xx + q u = 0` on `[0, l]`.
//!
//! The abstract control `h(t) ∈ K` and the Dirichlet data `(f0, f_l)` are tied
//! by `Γ1 u = h`, which gives `h(t)(0) = -f0(t)` and `h(t)(l) = -f_l(t)`.
//! Smooth waves are evaluated modally:
//!
//! ```text
//! u^h(t) = -h(t) + Σ_n [∫_0^t sin(ω_n (t - s)) / ω_n (h''(s), φ_n) ds] φ_n
//! ```
//!
//! The default [`WaveMethod::Accelerated`] route integrates by parts twice
//! more, using `L^{-1} φ_0` and `L^{-1} φ_l` exactly, so the truncated series
//! decays like `n^{-5}` instead of `n^{-3}`.

use std::io::Write;

use nalgebra::{DMatrix, Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{ControlSignal, Signal};
use crate::error::{Error, Result};
use crate::grid::{fmt_f64, simpson_weights, Grid, GridFunction};
use crate::potential::Potential;
use crate::sl_solver::{
    check_lower_bound, dirichlet_eigensystem, kernel_basis, kernel_inverse, EigenSystem,
    KernelBasis,
};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// An element `a φ_0 + b φ_l` of `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoefficients {
    pub a: Complex64,
    pub b: Complex64,
}

impl KernelCoefficients {
    pub fn to_grid_function(&self, kb: &KernelBasis) -> GridFunction {
        kb.combine(self.a, self.b).u
    }
}

/// `Γ1 u = -(u(l)/φ_0(l)) φ_0 - (u(0)/φ_l(0)) φ_l`.
pub fn gamma1(u: &GridFunction, kb: &KernelBasis) -> KernelCoefficients {
    let n = u.grid().n();
    KernelCoefficients {
        a: -u.at(n) / kb.phi0_at_l,
        b: -u.at(0) / kb.phil_at_0,
    }
}

/// `Γ2 u`: orthogonal projection of `L0* u` onto `K`, given samples of `L0* u`.
pub fn gamma2(l0_star_u: &GridFunction, kb: &KernelBasis) -> Result<KernelCoefficients> {
    let (p0, pl) = (&kb.phi0.u, &kb.phil.u);
    let gram = Matrix2::new(p0.inner(p0), pl.inner(p0), p0.inner(pl), pl.inner(pl));
    let scale = gram.norm();
    let det = gram.determinant();
    if !(det.norm() > 1e-12 * scale * scale) {
        return Err(Error::Degenerate(format!(
            "Gram matrix of phi0, phil is singular (det = {det:.3e})"
        )));
    }
    let rhs = Vector2::new(l0_star_u.inner(p0), l0_star_u.inner(pl));
    let c = gram
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("Gram matrix of phi0, phil is not invertible".into()))?
        * rhs;
    Ok(KernelCoefficients { a: c[0], b: c[1] })
}

/// A `K`-valued control `h(t) = a(t) φ_0 + b(t) φ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelControl {
    pub a: Signal,
    pub b: Signal,
}

impl KernelControl {
    pub fn zero() -> Self {
        Self { a: Signal::zero(), b: Signal::zero() }
    }

    pub fn derivative(&self, k: u32) -> Self {
        Self { a: self.a.derivative(k), b: self.b.derivative(k) }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `h^{(k)}(t)` sampled on the grid.
    pub fn sample(&self, t: f64, k: u32, kb: &KernelBasis) -> GridFunction {
        let a = Complex64::new(self.a.value(t, k), 0.0);
        let b = Complex64::new(self.b.value(t, k), 0.0);
        kb.combine(a, b).u
    }
}

/// `a(t) = -f_l(t)/φ_0(l)`, `b(t) = -f0(t)/φ_l(0)`.
pub fn control_to_kernel(c: &ControlSignal, kb: &KernelBasis) -> KernelControl {
    KernelControl {
        a: c.fl.scaled(-1.0 / kb.phi0_at_l),
        b: c.f0.scaled(-1.0 / kb.phil_at_0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveMethod {
    /// The Duhamel formula with `h''` as written.
    Direct,
    /// Two further integrations by parts; needs `h''''`.
    #[default]
    Accelerated,
}

/// A separable source term `θ(s) ψ(x)`.
pub struct SourceTerm {
    pub time: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub profile: GridFunction,
}

impl SourceTerm {
    pub fn new(time: impl Fn(f64) -> f64 + Send + Sync + 'static, profile: GridFunction) -> Self {
        Self { time: Box::new(time), profile }
    }
}

/// A smooth wave with its quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct SmoothWave {
    pub field: GridFunction,
    pub time_panels: usize,
    pub time_step: f64,
    /// Largest modal coefficient among the last five retained modes.
    pub tail_coefficient: f64,
}

/// Everything needed to evaluate waves for one potential.
#[derive(Debug, Clone)]
pub struct WaveSystem {
    es: EigenSystem,
    kb: KernelBasis,
    psi0: GridFunction,
    psil: GridFunction,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    method: WaveMethod,
}

impl WaveSystem {
    /// Computes the eigensystem and kernel basis of `q` with `modes` modes.
    pub fn build(q: &Potential, modes: usize) -> Result<Self> {
        let es = dirichlet_eigensystem(q, modes)?;
        let kb = kernel_basis(q)?;
        Self::new(q, es, kb)
    }

    pub fn new(q: &Potential, es: EigenSystem, kb: KernelBasis) -> Result<Self> {
        check_lower_bound(&es)?;
        let (psi0, psil) = kernel_inverse(q, &kb)?;
        let n = es.grid().n();
        // Green's identity: (φ_0, φ_n) = -φ_0(l) φ_n'(l) / λ_n, (φ_l, φ_n) = φ_l(0) φ_n'(0) / λ_n
        let alpha = (0..es.len())
            .map(|k| -kb.phi0_at_l * es.derivative_samples(k)[n] / es.eigenvalues()[k])
            .collect();
        let beta = (0..es.len())
            .map(|k| kb.phil_at_0 * es.derivative_samples(k)[0] / es.eigenvalues()[k])
            .collect();
        Ok(Self { es, kb, psi0, psil, alpha, beta, method: WaveMethod::default() })
    }

    pub fn with_method(mut self, method: WaveMethod) -> Self {
        self.method = method;
        self
    }

    pub fn method(&self) -> WaveMethod {
        self.method
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.es
    }

    pub fn kernel_basis(&self) -> &KernelBasis {
        &self.kb
    }

    pub fn grid(&self) -> Grid {
        self.es.grid()
    }

    /// `((φ_0, φ_n), (φ_l, φ_n))` for every retained mode.
    pub fn kernel_projections(&self) -> (&[f64], &[f64]) {
        (&self.alpha, &self.beta)
    }

    /// Even Simpson panel count with `Δs <= min(1/(10 ω_N), t/64)`.
    pub fn time_panels(&self, t: f64) -> usize {
        let omega_max = self.es.eigenvalues().last().copied().unwrap_or(1.0).sqrt();
        let ds = (0.1 / omega_max).min(t / 64.0);
        let m = (t / ds).ceil() as usize;
        (m + m % 2).max(64)
    }

    /// `I[i][n] = ∫_0^t sin(ω_n (t - s)) / ω_n f_i(s) ds` for each signal.
    fn duhamel(&self, signals: &[&dyn Fn(f64) -> f64], t: f64) -> (Vec<Vec<f64>>, usize) {
        let panels = self.time_panels(t);
        let ds = t / panels as f64;
        let w = simpson_weights(panels, ds);
        let samples: Vec<Vec<f64>> = signals
            .iter()
            .map(|f| (0..=panels).map(|j| w[j] * f(j as f64 * ds)).collect())
            .collect();
        let active: Vec<usize> = (0..=panels)
            .filter(|&j| samples.iter().any(|s| s[j] != 0.0))
            .collect();
        let out = samples
            .iter()
            .map(|s| {
                self.es
                    .eigenvalues()
                    .iter()
                    .map(|lam| {
                        let omega = lam.sqrt();
                        let rot = Complex64::from_polar(1.0, -omega * ds);
                        let mut acc = 0.0;
                        let mut z = ZERO;
                        let mut last = usize::MAX;
                        for (cnt, &j) in active.iter().enumerate() {
                            // exact phase every 256 nodes, rotation in between
                            if last.wrapping_add(1) != j || cnt % 256 == 0 {
                                z = Complex64::from_polar(1.0, omega * (t - j as f64 * ds));
                            } else {
                                z *= rot;
                            }
                            last = j;
                            acc += s[j] * z.im;
                        }
                        acc / omega
                    })
                    .collect()
            })
            .collect();
        (out, panels)
    }

    pub fn smooth_wave(&self, h: &KernelControl, t: f64) -> Result<GridFunction> {
        Ok(self.smooth_wave_report(h, t)?.field)
    }

    /// `u^h(t)` with diagnostics.
    pub fn smooth_wave_report(&self, h: &KernelControl, t: f64) -> Result<SmoothWave> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("wave time must be non-negative, got {t}")));
        }
        let grid = self.grid();
        if t == 0.0 || h.is_zero() {
            return Ok(SmoothWave {
                field: GridFunction::zeros(grid),
                time_panels: 0,
                time_step: 0.0,
                tail_coefficient: 0.0,
            });
        }
        let order = match self.method {
            WaveMethod::Direct => 2,
            WaveMethod::Accelerated => 4,
        };
        let fa = |s: f64| h.a.value(s, order);
        let fb = |s: f64| h.b.value(s, order);
        let (ints, panels) = self.duhamel(&[&fa, &fb], t);
        let lam = self.es.eigenvalues();
        let coeffs: Vec<Complex64> = (0..lam.len())
            .map(|n| {
                let c = self.alpha[n] * ints[0][n] + self.beta[n] * ints[1][n];
                Complex64::new(
                    match self.method {
                        WaveMethod::Direct => c,
                        WaveMethod::Accelerated => -c / lam[n],
                    },
                    0.0,
                )
            })
            .collect();
        let mut field = self.es.synthesize(&coeffs);
        field = &field - &h.sample(t, 0, &self.kb);
        if self.method == WaveMethod::Accelerated {
            let a2 = Complex64::new(h.a.value(t, 2), 0.0);
            let b2 = Complex64::new(h.b.value(t, 2), 0.0);
            field = &field + &(&self.psi0.scale(a2) + &self.psil.scale(b2));
        }
        let tail_coefficient = coeffs.iter().rev().take(5).map(|c| c.norm()).fold(0.0, f64::max);
        Ok(SmoothWave { field, time_panels: panels, time_step: t / panels as f64, tail_coefficient })
    }

    /// `v^g(t) = ∫_0^t L^{-1/2} sin((t - s) L^{1/2}) g(s) ds` for a separable source.
    pub fn source_wave(&self, g: &[SourceTerm], t: f64) -> Result<GridFunction> {
        if !(t >= 0.0) {
            return Err(Error::Domain(format!("wave time must be non-negative, got {t}")));
        }
        let grid = self.grid();
        if t == 0.0 || g.is_empty() {
            return Ok(GridFunction::zeros(grid));
        }
        let fns: Vec<&dyn Fn(f64) -> f64> = g.iter().map(|s| &*s.time as &dyn Fn(f64) -> f64).collect();
        let (ints, _) = self.duhamel(&fns, t);
        let mut coeffs = vec![ZERO; self.es.len()];
        for (term, int) in g.iter().zip(&ints) {
            if term.profile.grid() != grid {
                return Err(Error::Contract("source profile lives on a different grid".into()));
            }
            for ((c, p), i) in coeffs.iter_mut().zip(self.es.project(&term.profile)).zip(int) {
                *c += p * i;
            }
        }
        Ok(self.es.synthesize(&coeffs))
    }

    /// `u^h(t)` restricted to `m` coarse cell centres for `samples` random bump
    /// controls, with the singular values of the snapshot family.
    pub fn reachable_span_estimate(
        &self,
        t: f64,
        samples: usize,
        m: usize,
        seed: u64,
    ) -> Result<SpanProfile> {
        if samples < m {
            return Err(Error::Config(format!(
                "need at least as many random controls as coarse nodes ({samples} < {m})"
            )));
        }
        let l = self.grid().l();
        let coarse: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * l / m as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dead = 0.005 * l;
        let mut snapshots = Vec::with_capacity(samples);
        for _ in 0..samples {
            let control = if t <= 2.0 * dead {
                ControlSignal::zero()
            } else {
                let span = t - dead;
                let bump = |rng: &mut ChaCha8Rng| -> Result<Signal> {
                    let w = rng.random_range(0.01 * l..0.1 * l).min(0.5 * span);
                    let onset = dead + rng.random_range(0.0..1.0) * (span - w);
                    Signal::bump(onset + w, w, rng.random_range(-1.0..1.0))
                };
                let (f0, fl) = match rng.random_range(0..3) {
                    0 => (bump(&mut rng)?, Signal::zero()),
                    1 => (Signal::zero(), bump(&mut rng)?),
                    _ => (bump(&mut rng)?, bump(&mut rng)?),
                };
                ControlSignal::new(f0, fl, dead)?
            };
            let u = self.smooth_wave(&control_to_kernel(&control, &self.kb), t)?;
            snapshots.push(coarse.iter().map(|&x| u.interpolate(x)).collect::<Vec<_>>());
        }
        let mat = DMatrix::from_fn(m, samples, |i, j| snapshots[j][i]);
        let mut singular_values: Vec<f64> = mat.singular_values().iter().copied().collect();
        singular_values.sort_by(|a, b| b.total_cmp(a));
        Ok(SpanProfile { t, coarse_nodes: coarse, singular_values, snapshots })
    }
}

/// Output of [`WaveSystem::reachable_span_estimate`].
#[derive(Debug, Clone)]
pub struct SpanProfile {
    pub t: f64,
    pub coarse_nodes: Vec<f64>,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// One row of coarse values per random control.
    pub snapshots: Vec<Vec<Complex64>>,
}

impl SpanProfile {
    /// `σ_min / σ_max`, zero for an all-zero family.
    pub fn condition_ratio(&self) -> f64 {
        match (self.singular_values.first(), self.singular_values.last()) {
            (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
            _ => 0.0,
        }
    }

    /// Largest snapshot magnitude at coarse nodes inside `[a, b]`, relative to
    /// the largest magnitude anywhere.
    pub fn relative_max_in(&self, a: f64, b: f64) -> f64 {
        let mut inside = 0.0f64;
        let mut all = 0.0f64;
        for row in &self.snapshots {
            for (x, v) in self.coarse_nodes.iter().zip(row) {
                all = all.max(v.norm());
                if *x >= a && *x <= b {
                    inside = inside.max(v.norm());
                }
            }
        }
        if all == 0.0 {
            0.0
        } else {
            inside / all
        }
    }
}

/// Time samples of a wave, one [`GridFunction`] per time.
#[derive(Debug, Clone)]
pub struct WaveField {
    grid: Grid,
    times: Vec<f64>,
    frames: Vec<GridFunction>,
}

impl WaveField {
    pub fn new(grid: Grid, times: Vec<f64>, frames: Vec<GridFunction>) -> Result<Self> {
        if times.len() != frames.len() || frames.iter().any(|f| f.grid() != grid) {
            return Err(Error::Contract("wave field frames do not match times or grid".into()));
        }
        Ok(Self { grid, times, frames })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn frames(&self) -> &[GridFunction] {
        &self.frames
    }

    /// Frame recorded at `t`, if one lies within a relative `1e-9`.
    pub fn frame_at(&self, t: f64) -> Option<&GridFunction> {
        let tol = 1e-9 * self.times.last().copied().unwrap_or(1.0).max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .map(|k| &self.frames[k])
    }

    /// `t,x,re,im` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "x", "re", "im"])?;
        for (t, f) in self.times.iter().zip(&self.frames) {
            for (j, v) in f.values().iter().enumerate() {
                w.write_record([fmt_f64(*t), fmt_f64(self.grid.x(j)), fmt_f64(v.re), fmt_f64(v.im)])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn fdtd_oracle(c: &ControlSignal, horizon: f64, q: &Potential, cfl: f64) -> Result<WaveField> {
    fdtd_oracle_with(c, horizon, q, cfl, 100)
}

/// Leapfrog for `u_tt = u_xx - q u` with `u(0, t) = f0(t)`, `u(l, t) = f_l(t)`
/// and zero Cauchy data. The step is `horizon / steps <= cfl h`, with the step
/// count a multiple of `frames` so that frame times are exact.
pub fn fdtd_oracle_with(
    c: &ControlSignal,
    horizon: f64,
    q: &Potential,
    cfl: f64,
    frames: usize,
) -> Result<WaveField> {
    if !(cfl > 0.0 && cfl <= 0.9) {
        return Err(Error::Config(format!("cfl must lie in (0, 0.9], got {cfl}")));
    }
    if !(horizon >= 0.0) || frames == 0 {
        return Err(Error::Config(format!(
            "horizon must be non-negative and frames positive (horizon {horizon}, frames {frames})"
        )));
    }
    let grid = q.grid();
    let n = grid.n();
    let h = grid.h();
    let per_frame = ((horizon / (cfl * h)) / frames as f64).ceil().max(1.0) as usize;
    let steps = per_frame * frames;
    let dt = horizon / steps as f64;
    let r2 = (dt / h).powi(2);
    let qv = q.values();
    let limit = 1e6 * c.sup_bound().max(f64::MIN_POSITIVE);

    let mut prev = vec![0.0; n + 1];
    // Taylor start-up from zero Cauchy data: interior u(dt) = 0
    let mut cur = vec![0.0; n + 1];
    cur[0] = c.f0.value(dt, 0);
    cur[n] = c.fl.value(dt, 0);
    let mut next = vec![0.0; n + 1];

    let to_frame = |v: &[f64]| GridFunction::from_real(grid, v).expect("frame length matches grid");
    let mut times = vec![0.0];
    let mut out = vec![to_frame(&prev)];
    if per_frame == 1 {
        times.push(if steps == 1 { horizon } else { dt });
        out.push(to_frame(&cur));
    }
    for k in 1..steps {
        let t_next = (k + 1) as f64 * dt;
        for j in 1..n {
            next[j] = 2.0 * cur[j] - prev[j] + r2 * (cur[j + 1] - 2.0 * cur[j] + cur[j - 1])
                - dt * dt * qv[j] * cur[j];
        }
        next[0] = c.f0.value(t_next, 0);
        next[n] = c.fl.value(t_next, 0);
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if (k + 1) % per_frame == 0 {
            let sup = cur.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !(sup <= limit) {
                return Err(Error::Numerical(format!(
                    "FDTD unstable at t = {t_next:.4} (sup {sup:.3e}); lower the CFL ratio"
                )));
            }
            times.push(if k + 1 == steps { horizon } else { t_next });
            out.push(to_frame(&cur));
        }
    }
    WaveField::new(grid, times, out)
}

/// How much of `u` lies outside the reachable region `[0, t) ∪ (l - t, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub t: f64,
    /// Squared L2 norm on `[0, t + 2h) ∪ (l - t - 2h, l]`.
    pub inside_mass: f64,
    /// Squared L2 norm on `[t + 2h, l - t - 2h]`.
    pub outside_mass: f64,
    pub ratio: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn support_report(u: &GridFunction, t: f64, tol: f64) -> Result<SupportReport> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("support time must be non-negative, got {t}")));
    }
    let g = u.grid();
    let total = u.norm_sq();
    let eps = 2.0 * g.h();
    let (a, b) = (t + eps, g.l() - t - eps);
    if t > 0.5 * g.l() || a >= b {
        return Ok(SupportReport {
            t,
            inside_mass: total,
            outside_mass: 0.0,
            ratio: 0.0,
            tolerance: tol,
            pass: true,
        });
    }
    let h = g.h();
    let j0 = (a / h - 1e-9).ceil() as usize;
    let j1 = ((b / h + 1e-9).floor() as usize).min(g.n());
    let outside = if j1 > j0 {
        let w = simpson_weights(j1 - j0, h);
        (j0..=j1).zip(&w).map(|(j, w)| w * u.at(j).norm_sqr()).sum()
    } else {
        0.0
    };
    let ratio = if total > 0.0 { outside / total } else { 0.0 };
    Ok(SupportReport {
        t,
        inside_mass: (total - outside).max(0.0),
        outside_mass: outside,
        ratio,
        tolerance: tol,
        pass: ratio <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn free(n: usize) -> (Grid, Potential, KernelBasis) {
        let g = Grid::new(1.0, n).unwrap();
        let q = Potential::zero(g);
        let kb = kernel_basis(&q).unwrap();
        (g, q, kb)
    }

    #[test]
    fn gamma1_examples() {
        let (g, _, kb) = free(100);
        let k = gamma1(&g.sample_real(|x| x * (1.0 - x)), &kb);
        assert!(k.a.norm() < 1e-15 && k.b.norm() < 1e-15);
        let k = gamma1(&g.sample_real(|_| 1.0), &kb);
        assert!((k.a - c(-1.0)).norm() < 1e-12 && (k.b - c(1.0)).norm() < 1e-12);
        let k = gamma1(&g.sample_real(|x| x), &kb);
        assert!((k.a - c(-1.0)).norm() < 1e-12 && k.b.norm() < 1e-12);
    }

    #[test]
    fn gamma1_is_minus_identity_on_kernel() {
        let g = Grid::new(1.0, 200).unwrap();
        let q = Potential::parse(g, "2 + cos(1, 3)").unwrap();
        let kb = kernel_basis(&q).unwrap();
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(-2.0, 0.7));
        let k = gamma1(&kb.combine(a, b).u, &kb);
        assert!((k.a + a).norm() < 1e-14 && (k.b + b).norm() < 1e-14);
    }

    #[test]
    fn gamma2_examples() {
        let (g, _, kb) = free(400);
        let k = gamma2(&GridFunction::zeros(g), &kb).unwrap();
        assert_eq!(k.a, ZERO);
        let l0u = g.sample_real(|x| PI * PI * (PI * x).sin());
        let k = gamma2(&l0u, &kb).unwrap();
        assert!((k.a - c(2.0 * PI)).norm() < 1e-8, "{k:?}");
        assert!((k.b - c(-2.0 * PI)).norm() < 1e-8);
        let proj = k.to_grid_function(&kb);
        assert!(proj.values().iter().all(|v| (v - c(2.0 * PI)).norm() < 1e-8));
        let k2 = gamma2(&l0u.scale(Complex64::new(0.0, 3.0)), &kb).unwrap();
        assert!((k2.a - k.a * Complex64::new(0.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn dictionary_trace_identity() {
        let (g, _, kb) = free(100);
        let ctl = ControlSignal::parse("bump(0.1, 0.05, 1)", "2*bump(0.2, 0.1, 1)", 0.01).unwrap();
        let h = control_to_kernel(&ctl, &kb);
        for &t in &[0.08, 0.12, 0.2] {
            let ht = h.sample(t, 0, &kb);
            assert!((ht.at(0).re + ctl.f0.value(t, 0)).abs() < 1e-14);
            assert!((ht.at(g.n()).re + ctl.fl.value(t, 0)).abs() < 1e-14);
        }
        // f0 only: h(t, x) = s(t) (x - 1)
        let ctl = ControlSignal::parse("bump(0.1, 0.05, 1)", "", 0.01).unwrap();
        let h = control_to_kernel(&ctl, &kb);
        let s = ctl.f0.value(0.11, 0);
        let ht = h.sample(0.11, 0, &kb);
        for j in 0..g.len() {
            assert!((ht.at(j).re - s * (g.x(j) - 1.0)).abs() < 1e-13);
        }
        assert!(control_to_kernel(&ControlSignal::zero(), &kb).is_zero());
    }

    #[test]
    fn green_projections_match_quadrature() {
        let g = Grid::new(1.0, 1000).unwrap();
        let q = Potential::parse(g, "2 + cos(1, 3)").unwrap();
        let sys = WaveSystem::build(&q, 20).unwrap();
        let es = sys.eigensystem();
        let p0 = es.project(&sys.kernel_basis().phi0.u);
        let pl = es.project(&sys.kernel_basis().phil.u);
        let (alpha, beta) = sys.kernel_projections();
        for n in 0..20 {
            // the quadrature side carries the O(h^4 λ_n^2) error here
            assert!((alpha[n] - p0[n].re).abs() < 1e-8, "{n} {} {}", alpha[n], p0[n].re);
            assert!((beta[n] - pl[n].re).abs() < 1e-8);
        }
    }

    #[test]
    fn source_wave_single_mode() {
        let g = Grid::new(1.0, 400).unwrap();
        let sys = WaveSystem::build(&Potential::zero(g), 10).unwrap();
        let w1 = sys.eigensystem().eigenvalues()[0].sqrt();
        let phi1 = sys.eigensystem().function(0);
        let t = 0.7;
        let v = sys
            .source_wave(&[SourceTerm::new(move |s| (w1 * s).sin(), phi1.clone())], t)
            .unwrap();
        let amp = ((w1 * t).sin() - w1 * t * (w1 * t).cos()) / (2.0 * w1 * w1);
        let err = (&v - &phi1.scale(c(amp))).sup_norm();
        assert!(err < 1e-6, "{err}");
        assert_eq!(sys.source_wave(&[], t).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn smooth_wave_methods_agree_and_zero_control() {
        let g = Grid::new(1.0, 400).unwrap();
        let q = Potential::parse(g, "2 + cos(1, 3)").unwrap();
        let sys = WaveSystem::build(&q, 120).unwrap();
        let ctl = ControlSignal::parse("bump(0.15, 0.1, 1)", "0.5*bump(0.2, 0.1, 1)", 0.01).unwrap();
        let h = control_to_kernel(&ctl, sys.kernel_basis());
        let a = sys.smooth_wave(&h, 0.3).unwrap();
        let d = sys.clone().with_method(WaveMethod::Direct).smooth_wave(&h, 0.3).unwrap();
        assert!((&a - &d).norm() < 2e-3, "{}", (&a - &d).norm());
        assert_eq!(sys.smooth_wave(&KernelControl::zero(), 0.3).unwrap().sup_norm(), 0.0);
        assert_eq!(sys.smooth_wave(&h, 0.0).unwrap().sup_norm(), 0.0);
        assert!(sys.smooth_wave(&h, -1.0).is_err());
    }

    #[test]
    fn fdtd_zero_control_and_cfl_guard() {
        let g = Grid::new(1.0, 100).unwrap();
        let q = Potential::zero(g);
        let f = fdtd_oracle(&ControlSignal::zero(), 0.5, &q, 0.5).unwrap();
        assert_eq!(f.times().len(), 101);
        assert!(f.frames().iter().all(|u| u.sup_norm() == 0.0));
        assert!((f.times()[100] - 0.5).abs() < 1e-15);
        assert!(fdtd_oracle(&ControlSignal::zero(), 0.5, &q, 0.95).is_err());
    }

    #[test]
    fn support_report_examples() {
        let g = Grid::new(1.0, 200).unwrap();
        let phi1 = g.sample_real(|x| 2f64.sqrt() * (PI * x).sin());
        assert!(!support_report(&phi1, 0.1, 1e-6).unwrap().pass);
        assert!(support_report(&phi1, 0.6, 1e-6).unwrap().pass);
        let local = g.sample_real(|x| if x < 0.05 { x } else { 0.0 });
        let r = support_report(&local, 0.1, 1e-6).unwrap();
        assert!(r.pass && r.outside_mass == 0.0);
    }

    #[test]
    fn wave_field_csv_layout() {
        let g = Grid::new(1.0, 8).unwrap();
        let f = WaveField::new(g, vec![0.0, 0.5], vec![GridFunction::zeros(g); 2]).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,x,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 9);
        assert!(f.frame_at(0.5).is_some() && f.frame_at(0.25).is_none());
    }
}
