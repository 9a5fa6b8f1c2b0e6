//! Sturm–Liouville machinery for `-u'' + q u = λ u` on `[0, l]`.
//!
//! * fixed-step RK4 on the first-order system `(u, u')`, with a per-solve
//!   substep count that keeps the local phase step below a threshold;
//! * the kernel basis `φ_0`, `φ_l` of `-u'' + q u = 0`;
//! * the Dirichlet eigensystem by shooting with oscillation counting;
//! * the modal wave propagator `L^{-1/2} sin(t L^{1/2})`.
//!
//! Derivative samples are always the integrator's `u'` state; nothing in
//! here differences sampled data.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{fmt_f64, Grid, GridFunction};
use crate::potential::Potential;

const OVERFLOW_GUARD: f64 = 1e150;

/// Where Cauchy data is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Endpoint {
    Left,
    Right,
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    /// Largest allowed `sqrt|λ - q| * step`; substeps are added per grid cell
    /// until it holds. `None` integrates with exactly one step per cell.
    pub max_phase_step: Option<f64>,
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self { max_phase_step: Some(0.03) }
    }
}

/// Solution samples `u(x_j)` and `u'(x_j)`.
#[derive(Debug, Clone)]
pub struct IvpSolution {
    pub u: GridFunction,
    pub du: GridFunction,
}

#[derive(Debug)]
struct RealRun {
    u: Vec<f64>,
    du: Vec<f64>,
    end: (f64, f64),
    sign_changes: usize,
}

/// Fixed-step RK4 over a potential with cached fine samples.
struct Shooter<'a> {
    q: &'a Potential,
    fine: RefCell<HashMap<usize, std::rc::Rc<Vec<f64>>>>,
}

impl<'a> Shooter<'a> {
    fn new(q: &'a Potential) -> Self {
        Self { q, fine: RefCell::new(HashMap::new()) }
    }

    fn substeps(&self, lambda: f64, opts: &IvpOptions) -> usize {
        match opts.max_phase_step {
            None => 1,
            Some(theta) => {
                let rate = (lambda - self.q.min()).abs().max((lambda - self.q.max()).abs()).sqrt();
                ((rate * self.q.grid().h() / theta).ceil() as usize).max(1)
            }
        }
    }

    /// `q` at every half substep: index `k` is `x = k * h / (2 s)`.
    fn fine_samples(&self, s: usize) -> std::rc::Rc<Vec<f64>> {
        if let Some(v) = self.fine.borrow().get(&s) {
            return v.clone();
        }
        let g = self.q.grid();
        let m = 2 * s * g.n();
        let v: Vec<f64> = (0..=m)
            .map(|k| {
                if k % (2 * s) == 0 {
                    self.q.values()[k / (2 * s)]
                } else {
                    self.q.eval(g.l() * k as f64 / m as f64)
                }
            })
            .collect();
        let v = std::rc::Rc::new(v);
        self.fine.borrow_mut().insert(s, v.clone());
        v
    }

    fn run(
        &self,
        lambda: f64,
        start: Endpoint,
        u0: f64,
        du0: f64,
        s: usize,
        record: bool,
    ) -> Result<RealRun> {
        let g = self.q.grid();
        let n = g.n();
        let fine = self.fine_samples(s);
        let total = s * n;
        let step = g.h() / s as f64 * if start == Endpoint::Left { 1.0 } else { -1.0 };
        let half = 0.5 * step;
        let mut u_rec = Vec::new();
        let mut du_rec = Vec::new();
        if record {
            u_rec = vec![0.0; n + 1];
            du_rec = vec![0.0; n + 1];
        }
        let store_idx = |i: usize| match start {
            Endpoint::Left => i / s,
            Endpoint::Right => n - i / s,
        };
        let q_at = |k: usize| match start {
            Endpoint::Left => fine[k],
            Endpoint::Right => fine[2 * total - k],
        };
        let (mut u, mut v) = (u0, du0);
        if record {
            u_rec[store_idx(0)] = u;
            du_rec[store_idx(0)] = v;
        }
        let mut last_sign = if u != 0.0 { u.signum() } else { 0.0 };
        let mut sign_changes = 0;
        for i in 0..total {
            let q0 = q_at(2 * i) - lambda;
            let qm = q_at(2 * i + 1) - lambda;
            let q1 = q_at(2 * i + 2) - lambda;
            let k1u = v;
            let k1v = q0 * u;
            let k2u = v + half * k1v;
            let k2v = qm * (u + half * k1u);
            let k3u = v + half * k2v;
            let k3v = qm * (u + half * k2u);
            let k4u = v + step * k3v;
            let k4v = q1 * (u + step * k3u);
            u += step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            if !(u.abs() + v.abs() < OVERFLOW_GUARD) {
                return Err(Error::Numerical(format!(
                    "IVP solution blew up at lambda = {lambda} (|u| + |u'| beyond {OVERFLOW_GUARD:e})"
                )));
            }
            if u != 0.0 {
                let sg = u.signum();
                if last_sign != 0.0 && sg != last_sign {
                    sign_changes += 1;
                }
                last_sign = sg;
            }
            if record && (i + 1) % s == 0 {
                let j = store_idx(i + 1);
                u_rec[j] = u;
                du_rec[j] = v;
            }
        }
        Ok(RealRun { u: u_rec, du: du_rec, end: (u, v), sign_changes })
    }
}

fn to_complex(grid: Grid, re: &[f64], im: Option<&[f64]>) -> GridFunction {
    let values = match im {
        Some(im) => re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect(),
        None => re.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
    };
    GridFunction::new(grid, values).expect("integrator output matches grid")
}

/// Solves `-u'' + q u = λ u` with Cauchy data `(value, slope)` at `start`.
pub fn solve_ivp(
    q: &Potential,
    lambda: f64,
    start: Endpoint,
    value: Complex64,
    slope: Complex64,
) -> Result<IvpSolution> {
    solve_ivp_with(q, lambda, start, value, slope, &IvpOptions::default())
}

pub fn solve_ivp_with(
    q: &Potential,
    lambda: f64,
    start: Endpoint,
    value: Complex64,
    slope: Complex64,
    opts: &IvpOptions,
) -> Result<IvpSolution> {
    let shooter = Shooter::new(q);
    let s = shooter.substeps(lambda, opts);
    let re = shooter.run(lambda, start, value.re, slope.re, s, true)?;
    let grid = q.grid();
    if value.im == 0.0 && slope.im == 0.0 {
        return Ok(IvpSolution {
            u: to_complex(grid, &re.u, None),
            du: to_complex(grid, &re.du, None),
        });
    }
    let im = shooter.run(lambda, start, value.im, slope.im, s, true)?;
    Ok(IvpSolution {
        u: to_complex(grid, &re.u, Some(&im.u)),
        du: to_complex(grid, &re.du, Some(&im.du)),
    })
}

/// Basis of `K = {u : -u'' + q u = 0}`:
/// `φ_0(0) = 0, φ_0'(0) = 1` and `φ_l(l) = 0, φ_l'(l) = 1`.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub phi0: IvpSolution,
    pub phil: IvpSolution,
    pub phi0_at_l: f64,
    pub phil_at_0: f64,
}

impl KernelBasis {
    pub fn grid(&self) -> Grid {
        self.phi0.u.grid()
    }

    /// Samples of `c0 φ_0 + cl φ_l` with its derivative.
    pub fn combine(&self, c0: Complex64, cl: Complex64) -> IvpSolution {
        IvpSolution {
            u: &self.phi0.u.scale(c0) + &self.phil.u.scale(cl),
            du: &self.phi0.du.scale(c0) + &self.phil.du.scale(cl),
        }
    }
}

pub fn kernel_basis(q: &Potential) -> Result<KernelBasis> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let phi0 = solve_ivp(q, 0.0, Endpoint::Left, zero, one)?;
    let phil = solve_ivp(q, 0.0, Endpoint::Right, zero, one)?;
    let n = q.grid().n();
    let phi0_at_l = phi0.u.at(n).re;
    let phil_at_0 = phil.u.at(0).re;
    let threshold = 1e-10 * q.grid().l();
    if phi0_at_l.abs() < threshold || phil_at_0.abs() < threshold {
        return Err(Error::ZeroEigenvalue {
            phi0_at_l: phi0_at_l.abs(),
            phil_at_0: phil_at_0.abs(),
        });
    }
    Ok(KernelBasis { phi0, phil, phi0_at_l, phil_at_0 })
}

/// `L^{-1} φ_0` and `L^{-1} φ_l`: solutions of `-y'' + q y = φ` with
/// `y(0) = y(l) = 0`.
pub fn kernel_inverse(q: &Potential, kb: &KernelBasis) -> Result<(GridFunction, GridFunction)> {
    let shooter = Shooter::new(q);
    let s = shooter.substeps(0.0, &IvpOptions::default());
    let fine = shooter.fine_samples(s);
    let g = q.grid();
    let n = g.n();
    let step = g.h() / s as f64;
    let half = 0.5 * step;

    // state (p, p', y, y') with p'' = q p and y'' = q y - p
    let solve = |p0: f64, dp0: f64| -> Vec<f64> {
        let f = |qq: f64, st: [f64; 4]| [st[1], qq * st[0], st[3], qq * st[2] - st[0]];
        let mut st = [p0, dp0, 0.0, 0.0];
        let mut out = vec![0.0; n + 1];
        for i in 0..s * n {
            let (q0, qm, q1) = (fine[2 * i], fine[2 * i + 1], fine[2 * i + 2]);
            let k1 = f(q0, st);
            let k2 = f(qm, std::array::from_fn(|c| st[c] + half * k1[c]));
            let k3 = f(qm, std::array::from_fn(|c| st[c] + half * k2[c]));
            let k4 = f(q1, std::array::from_fn(|c| st[c] + step * k3[c]));
            for c in 0..4 {
                st[c] += step / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
            if (i + 1) % s == 0 {
                out[(i + 1) / s] = st[2];
            }
        }
        out
    };
    let phi0: Vec<f64> = kb.phi0.u.values().iter().map(|v| v.re).collect();
    let fix = |y: Vec<f64>| -> Result<GridFunction> {
        let c = y[n] / kb.phi0_at_l;
        let vals: Vec<f64> = y.iter().zip(&phi0).map(|(a, p)| a - c * p).collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("kernel inverse is not finite".into()));
        }
        GridFunction::from_real(g, &vals)
    };
    let psi0 = fix(solve(0.0, 1.0))?;
    let psil = fix(solve(kb.phil.u.at(0).re, kb.phil.du.at(0).re))?;
    Ok((psi0, psil))
}

/// Shooting settings for the eigenvalue search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    /// Relative tolerance on each eigenvalue.
    pub shoot_tol: f64,
    pub ivp: IvpOptions,
}

impl Default for EigenOptions {
    fn default() -> Self {
        // eigenvalue error scales like λ (phase step)^4, so shoot finer than plain solves
        Self { shoot_tol: 1e-10, ivp: IvpOptions { max_phase_step: Some(0.01) } }
    }
}

/// First `N` Dirichlet eigenpairs of `L`; eigenfunctions are L2-normalised
/// with `φ_n'(0) > 0`.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    grid: Grid,
    eigenvalues: Vec<f64>,
    functions: Vec<Vec<f64>>,
    derivatives: Vec<Vec<f64>>,
}

impl EigenSystem {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenfunction samples of mode `k` (0-based).
    pub fn function_samples(&self, k: usize) -> &[f64] {
        &self.functions[k]
    }

    pub fn derivative_samples(&self, k: usize) -> &[f64] {
        &self.derivatives[k]
    }

    pub fn function(&self, k: usize) -> GridFunction {
        GridFunction::from_real(self.grid, &self.functions[k]).expect("sample count matches grid")
    }

    pub fn derivative(&self, k: usize) -> GridFunction {
        GridFunction::from_real(self.grid, &self.derivatives[k]).expect("sample count matches grid")
    }

    /// Coefficients `(g, φ_n)` by quadrature.
    pub fn project(&self, g: &GridFunction) -> Vec<Complex64> {
        let w = self.grid.simpson_weights();
        let gw: Vec<Complex64> = g.values().iter().zip(&w).map(|(v, w)| v * w).collect();
        self.functions
            .iter()
            .map(|phi| gw.iter().zip(phi).map(|(a, p)| a * p).sum())
            .collect()
    }

    /// `Σ c_n φ_n`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> GridFunction {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for (c, phi) in coeffs.iter().zip(&self.functions) {
            if *c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (o, p) in out.iter_mut().zip(phi) {
                *o += c * p;
            }
        }
        GridFunction::new(self.grid, out).expect("sample count matches grid")
    }

    /// Writes `n,lambda` rows (1-based `n`).
    pub fn write_eigenvalues_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "lambda"])?;
        for (k, lam) in self.eigenvalues.iter().enumerate() {
            w.write_record([(k + 1).to_string(), fmt_f64(*lam)])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn dirichlet_eigensystem(q: &Potential, modes: usize) -> Result<EigenSystem> {
    dirichlet_eigensystem_with(q, modes, &EigenOptions::default())
}

pub fn dirichlet_eigensystem_with(
    q: &Potential,
    modes: usize,
    opts: &EigenOptions,
) -> Result<EigenSystem> {
    if modes == 0 {
        return Err(Error::Config("mode count must be at least 1".into()));
    }
    let grid = q.grid();
    let shooter = Shooter::new(q);
    let w = grid.simpson_weights();
    let mut eigenvalues = Vec::with_capacity(modes);
    let mut functions = Vec::with_capacity(modes);
    let mut derivatives = Vec::with_capacity(modes);
    let mut floor = f64::NEG_INFINITY;
    for k in 1..=modes {
        let lam = find_eigenvalue(&shooter, k, floor, opts)?;
        floor = lam;
        let s = shooter.substeps(lam, &opts.ivp);
        let run = shooter.run(lam, Endpoint::Left, 0.0, 1.0, s, true)?;
        let norm = run.u.iter().zip(&w).map(|(u, w)| u * u * w).sum::<f64>().sqrt();
        eigenvalues.push(lam);
        functions.push(run.u.iter().map(|u| u / norm).collect());
        derivatives.push(run.du.iter().map(|u| u / norm).collect());
    }
    Ok(EigenSystem { grid, eigenvalues, functions, derivatives })
}

/// Brackets the `k`-th eigenvalue by zero counting, then refines the root of
/// `λ -> u_λ(l)` with a safeguarded secant (Illinois) iteration.
fn find_eigenvalue(shooter: &Shooter<'_>, k: usize, floor: f64, opts: &EigenOptions) -> Result<f64> {
    let g = shooter.q.grid();
    let unit = (PI / g.l()).powi(2);
    let base = k as f64 * k as f64 * unit;
    let mut lo = base + shooter.q.min() - 0.25 * (2 * k - 1) as f64 * unit;
    let mut hi = base + shooter.q.max() + 0.25 * (2 * k + 1) as f64 * unit;
    if lo <= floor {
        lo = floor + 0.25 * (hi - floor).min(unit);
    }
    let mut s = shooter.substeps(hi, &opts.ivp);
    let count = |lam: f64, s: usize| -> Result<usize> {
        Ok(shooter.run(lam, Endpoint::Left, 0.0, 1.0, s, false)?.sign_changes)
    };
    let mut zlo = count(lo, s)?;
    let mut zhi = count(hi, s)?;
    let mut widen = unit;
    let mut guard = 0;
    while zlo >= k || zhi < k {
        guard += 1;
        if guard > 60 {
            return Err(Error::Numerical(format!(
                "could not bracket eigenvalue {k}: zero counts {zlo} at {lo}, {zhi} at {hi}"
            )));
        }
        if zlo >= k {
            lo -= widen;
            zlo = count(lo, s)?;
        }
        if zhi < k {
            hi += widen;
            s = shooter.substeps(hi, &opts.ivp);
            zhi = count(hi, s)?;
        }
        widen *= 2.0;
    }
    let mut iters = 0;
    while zlo != k - 1 || zhi != k {
        iters += 1;
        if iters > 200 {
            return Err(Error::Numerical(format!(
                "could not isolate eigenvalue {k}: zero counts {zlo} at {lo}, {zhi} at {hi}"
            )));
        }
        let mid = 0.5 * (lo + hi);
        let z = count(mid, s)?;
        if z >= k {
            hi = mid;
            zhi = z;
        } else {
            lo = mid;
            zlo = z;
        }
    }
    let f = |lam: f64| -> Result<f64> { Ok(shooter.run(lam, Endpoint::Left, 0.0, 1.0, s, false)?.end.0) };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Numerical(format!(
            "eigenvalue {k}: u(l) does not change sign on [{a}, {b}] (zero counts {zlo}, {zhi})"
        )));
    }
    let tol = opts.shoot_tol;
    let mut side = 0i32;
    let mut width = b - a;
    for it in 0..300 {
        // a plain bisection every third step unless the bracket halved
        let mut c = (a * fb - b * fa) / (fb - fa);
        if it % 3 == 2 && (b - a) > 0.5 * width || !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        if it % 3 == 2 {
            width = b - a;
        }
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a) <= tol * c.abs().max(1.0) {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Err(Error::Numerical(format!(
        "eigenvalue {k}: refinement did not converge on [{a}, {b}]"
    )))
}

/// Returns `κ = λ_1` when it is positive.
pub fn check_lower_bound(es: &EigenSystem) -> Result<f64> {
    let lam1 = *es
        .eigenvalues
        .first()
        .ok_or_else(|| Error::Contract("empty eigensystem".into()))?;
    if lam1 > 0.0 {
        Ok(lam1)
    } else {
        Err(Error::NotAdmissible(format!(
            "lowest Dirichlet eigenvalue is {lam1:.6e} <= 0; L0 is not positive definite"
        )))
    }
}

/// Output of [`wave_propagator_apply`].
#[derive(Debug, Clone)]
pub struct PropagatedWave {
    pub field: GridFunction,
    /// `Σ_{n > N} |(g, φ_n)|^2`, from Bessel's inequality.
    pub tail_bound: f64,
}

/// `Σ_{n ≤ N} sin(√λ_n t) / √λ_n (g, φ_n) φ_n`.
pub fn wave_propagator_apply(es: &EigenSystem, t: f64, g: &GridFunction) -> Result<PropagatedWave> {
    if t < 0.0 {
        return Err(Error::Domain(format!("propagator time must be non-negative, got {t}")));
    }
    check_lower_bound(es)?;
    let coeffs = es.project(g);
    let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    let tail_bound = (g.norm_sq() - captured).max(0.0);
    let scaled: Vec<Complex64> = coeffs
        .iter()
        .zip(&es.eigenvalues)
        .map(|(c, lam)| {
            let w = lam.sqrt();
            c * ((w * t).sin() / w)
        })
        .collect();
    Ok(PropagatedWave { field: es.synthesize(&scaled), tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: f64, n: usize) -> Grid {
        Grid::new(l, n).unwrap()
    }

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn ivp_linear_solutions() {
        let g = grid(1.0, 100);
        let q = Potential::zero(g);
        let s = solve_ivp(&q, 0.0, Endpoint::Left, c(0.0), c(1.0)).unwrap();
        for j in 0..g.len() {
            assert!((s.u.at(j).re - g.x(j)).abs() < 1e-10);
            assert!((s.du.at(j).re - 1.0).abs() < 1e-10);
        }
        let s = solve_ivp(&q, 0.0, Endpoint::Right, c(0.0), c(1.0)).unwrap();
        for j in 0..g.len() {
            assert!((s.u.at(j).re - (g.x(j) - 1.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn ivp_sine_solution() {
        let g = grid(1.0, 1000);
        let q = Potential::zero(g);
        let s = solve_ivp(&q, PI * PI, Endpoint::Left, c(0.0), c(1.0)).unwrap();
        for j in 0..g.len() {
            let x = g.x(j);
            assert!((s.u.at(j).re - (PI * x).sin() / PI).abs() < 1e-8);
            assert!((s.du.at(j).re - (PI * x).cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn ivp_complex_data_is_linear() {
        let g = grid(1.0, 64);
        let q = Potential::parse(g, "1 + cos(0.5, 2)").unwrap();
        let a = solve_ivp(&q, 3.0, Endpoint::Left, c(0.3), c(1.0)).unwrap();
        let b = solve_ivp(&q, 3.0, Endpoint::Left, c(-0.2), c(0.5)).unwrap();
        let z = solve_ivp(&q, 3.0, Endpoint::Left, Complex64::new(0.3, -0.2), Complex64::new(1.0, 0.5))
            .unwrap();
        for j in 0..g.len() {
            let expect = a.u.at(j) + Complex64::i() * b.u.at(j);
            assert!((z.u.at(j) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn ivp_fourth_order_convergence() {
        let opts = IvpOptions { max_phase_step: None };
        let err = |n: usize| {
            let g = grid(1.0, n);
            let q = Potential::zero(g);
            let s = solve_ivp_with(&q, PI * PI, Endpoint::Left, c(0.0), c(1.0), &opts).unwrap();
            (0..g.len())
                .map(|j| (s.u.at(j).re - (PI * g.x(j)).sin() / PI).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(10), err(20), err(40));
        assert!(e1 / e2 >= 12.0, "{e1} / {e2}");
        assert!(e2 / e3 >= 12.0, "{e2} / {e3}");
    }

    #[test]
    fn ivp_detects_blow_up() {
        let g = grid(1.0, 64);
        let q = Potential::parse(g, "1e6").unwrap();
        let opts = IvpOptions { max_phase_step: None };
        let r = solve_ivp_with(&q, 0.0, Endpoint::Left, c(1.0), c(0.0), &opts);
        assert!(matches!(r, Err(Error::Numerical(_))));
    }

    #[test]
    fn kernel_basis_examples() {
        let g = grid(1.0, 200);
        let kb = kernel_basis(&Potential::zero(g)).unwrap();
        assert!((kb.phi0_at_l - 1.0).abs() < 1e-12);
        assert!((kb.phil_at_0 + 1.0).abs() < 1e-12);
        for j in 0..g.len() {
            assert!((kb.phi0.u.at(j).re - g.x(j)).abs() < 1e-12);
            assert!((kb.phil.u.at(j).re - (g.x(j) - 1.0)).abs() < 1e-12);
        }

        let kb = kernel_basis(&Potential::parse(g, "1").unwrap()).unwrap();
        assert!((kb.phi0_at_l - 1f64.sinh()).abs() < 1e-8);
        for j in 0..g.len() {
            assert!((kb.phi0.u.at(j).re - g.x(j).sinh()).abs() < 1e-8);
            assert!((kb.phil.u.at(j).re - (g.x(j) - 1.0).sinh()).abs() < 1e-8);
        }

        // fine enough that the integration error sits well below the 1e-10 threshold
        let g = grid(1.0, 1000);
        let r = kernel_basis(&Potential::from_expr(g, crate::potential::PotentialExpr::constant(-PI * PI)).unwrap());
        assert!(matches!(r, Err(Error::ZeroEigenvalue { .. })));
    }

    #[test]
    fn kernel_inverse_matches_closed_form() {
        // q = 0: L^{-1} x = (x - x^3) / 6, L^{-1} (x - 1) = (x - x^3)/6 - (x - x^2)/2
        let g = grid(1.0, 200);
        let q = Potential::zero(g);
        let kb = kernel_basis(&q).unwrap();
        let (p0, pl) = kernel_inverse(&q, &kb).unwrap();
        for j in 0..g.len() {
            let x = g.x(j);
            let e0 = (x - x.powi(3)) / 6.0;
            let el = e0 - (x - x * x) / 2.0;
            assert!((p0.at(j).re - e0).abs() < 1e-12);
            assert!((pl.at(j).re - el).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenvalues_free_case() {
        let g = grid(PI, 400);
        let es = dirichlet_eigensystem(&Potential::zero(g), 3).unwrap();
        for (k, lam) in es.eigenvalues().iter().enumerate() {
            let n = (k + 1) as f64;
            assert!((lam - n * n).abs() < 1e-8, "{lam}");
        }
        let g = grid(1.0, 400);
        let es = dirichlet_eigensystem(&Potential::zero(g), 2).unwrap();
        assert!((es.eigenvalues()[0] - PI * PI).abs() < 1e-7);
        assert!((es.eigenvalues()[1] - 4.0 * PI * PI).abs() < 1e-7);
    }

    #[test]
    fn eigenfunctions_normalised_signed_and_vanishing() {
        let g = grid(1.0, 400);
        let es = dirichlet_eigensystem(&Potential::parse(g, "2 + cos(1, 3)").unwrap(), 4).unwrap();
        for k in 0..4 {
            let f = es.function(k);
            assert!((f.norm_sq() - 1.0).abs() < 1e-12);
            assert!(es.derivative_samples(k)[0] > 0.0);
            assert!(f.at(0).norm() == 0.0);
            assert!(f.at(g.n()).norm() < 1e-8);
        }
    }

    #[test]
    fn lower_bound_examples() {
        let g = grid(PI, 200);
        let es = dirichlet_eigensystem(&Potential::zero(g), 1).unwrap();
        assert!((check_lower_bound(&es).unwrap() - 1.0).abs() < 1e-8);
        let g = grid(1.0, 200);
        let es = dirichlet_eigensystem(&Potential::parse(g, "5").unwrap(), 1).unwrap();
        assert!((check_lower_bound(&es).unwrap() - (PI * PI + 5.0)).abs() < 1e-7);
        let es = dirichlet_eigensystem(&Potential::parse(g, "-15").unwrap(), 1).unwrap();
        assert!(matches!(check_lower_bound(&es), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn propagator_examples() {
        let g = grid(1.0, 400);
        let es = dirichlet_eigensystem(&Potential::zero(g), 20).unwrap();
        let gfun = g.sample_real(|x| x * (1.0 - x));
        let z = wave_propagator_apply(&es, 0.0, &gfun).unwrap();
        assert!(z.field.sup_norm() == 0.0);

        let phi1 = g.sample_real(|x| 2f64.sqrt() * (PI * x).sin());
        let t = 0.37;
        let out = wave_propagator_apply(&es, t, &phi1).unwrap();
        let expect = phi1.scale(c((PI * t).sin() / PI));
        assert!((&out.field - &expect).sup_norm() < 1e-8);
        assert!(out.tail_bound < 1e-10);
        assert!(wave_propagator_apply(&es, -1.0, &phi1).is_err());
    }
}
