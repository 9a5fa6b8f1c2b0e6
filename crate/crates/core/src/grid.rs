//! Uniform grids on `[0, l]`, sampled complex functions, composite Simpson
//! quadrature and finite differences.
//!
//! Every other module works on grid-sampled data. Endpoints are always part of
//! the grid; open-interval semantics are handled by callers through index
//! ranges.

use std::io::{Read, Write};
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform grid `x_j = j * l / n`, `j = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    l: f64,
    n: usize,
}

impl Grid {
    /// Builds a grid with `n` subintervals. `n` must be even and at least 8.
    pub fn new(l: f64, n: usize) -> Result<Self> {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::Config(format!("interval length must be positive, got {l}")));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "grid needs an even number of subintervals >= 8, got {n}"
            )));
        }
        Ok(Self { l, n })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Number of subintervals.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.n {
            self.l
        } else {
            j as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n).map(move |j| self.x(j))
    }

    /// Index of the last node of the half grid `[0, l/2]`.
    pub fn half(&self) -> usize {
        self.n / 2
    }

    /// Index of the node mirrored through `l/2`.
    pub fn mirror(&self, j: usize) -> usize {
        self.n - j
    }

    /// Composite Simpson weights over the whole grid.
    pub fn simpson_weights(&self) -> Vec<f64> {
        simpson_weights(self.n, self.h())
    }

    /// Samples a complex-valued closure at every node.
    pub fn sample(&self, f: impl Fn(f64) -> Complex64) -> GridFunction {
        GridFunction {
            grid: *self,
            values: self.nodes().map(f).collect(),
        }
    }

    /// Samples a real-valued closure at every node.
    pub fn sample_real(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        self.sample(|x| Complex64::new(f(x), 0.0))
    }
}

/// Shorthand for [`Grid::new`].
pub fn build_grid(l: f64, n: usize) -> Result<Grid> {
    Grid::new(l, n)
}

/// Composite Simpson weights for `intervals` uniform panels of width `h`.
///
/// An odd panel count closes with a 3/8 rule on the last three panels; a single
/// panel falls back to the trapezoid rule.
pub fn simpson_weights(intervals: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; intervals + 1];
    match intervals {
        0 => {}
        1 => {
            w[0] = 0.5 * h;
            w[1] = 0.5 * h;
        }
        _ => {
            let simpson_panels = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
            for k in (0..simpson_panels).step_by(2) {
                w[k] += h / 3.0;
                w[k + 1] += 4.0 * h / 3.0;
                w[k + 2] += h / 3.0;
            }
            if intervals % 2 == 1 {
                let s = simpson_panels;
                w[s] += 3.0 * h / 8.0;
                w[s + 1] += 9.0 * h / 8.0;
                w[s + 2] += 9.0 * h / 8.0;
                w[s + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// Complex samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "grid function needs {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, j: usize) -> Complex64 {
        self.values[j]
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(j, &v)| f(self.grid.x(j), v))
            .collect();
        Self { grid: self.grid, values }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|_, v| c * v)
    }

    pub fn conj(&self) -> Self {
        self.map(|_, v| v.conj())
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Self { grid: self.grid, values }
    }

    /// `(self, other)_H = quad(self * conj(other))`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let w = self.grid.simpson_weights();
        self.values
            .iter()
            .zip(&other.values)
            .zip(&w)
            .map(|((a, b), w)| a * b.conj() * w)
            .sum()
    }

    pub fn norm_sq(&self) -> f64 {
        let w = self.grid.simpson_weights();
        self.values.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Value at an arbitrary `x` in `[0, l]` by four-point cubic interpolation.
    pub fn interpolate(&self, x: f64) -> Complex64 {
        let h = self.grid.h();
        let n = self.grid.n();
        let s = (x / h).clamp(0.0, n as f64);
        let j = s.round();
        if (s - j).abs() < 1e-12 {
            return self.values[j as usize];
        }
        let base = (s.floor() as isize - 1).clamp(0, n as isize - 3) as usize;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if k != i {
                    w *= (s - (base + k) as f64) / (i as f64 - k as f64);
                }
            }
            acc += self.values[base + i] * w;
        }
        acc
    }

    /// Writes `x,re,im` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "re", "im"])?;
        for (j, v) in self.values.iter().enumerate() {
            w.write_record([fmt_f64(self.grid.x(j)), fmt_f64(v.re), fmt_f64(v.im)])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an `x,re,im` file; the nodes must form a uniform grid from 0.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "re", "im"] {
            return Err(Error::Config(format!("expected header x,re,im, got {headers:?}")));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad number {:?}: {e}", &rec[i])))
            };
            xs.push(parse(0)?);
            values.push(Complex64::new(parse(1)?, parse(2)?));
        }
        if xs.len() < 2 {
            return Err(Error::Config("grid function file has fewer than two rows".into()));
        }
        let n = xs.len() - 1;
        let grid = Grid::new(xs[n], n)?;
        for (j, &x) in xs.iter().enumerate() {
            if (x - grid.x(j)).abs() > 1e-9 * grid.l() {
                return Err(Error::Config(format!("node {j} at {x} is not on a uniform grid")));
            }
        }
        Self::new(grid, values)
    }
}

impl Add for &GridFunction {
    type Output = GridFunction;
    fn add(self, rhs: Self) -> GridFunction {
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a + b).collect();
        GridFunction { grid: self.grid, values }
    }
}

impl Sub for &GridFunction {
    type Output = GridFunction;
    fn sub(self, rhs: Self) -> GridFunction {
        let values = self.values.iter().zip(&rhs.values).map(|(a, b)| a - b).collect();
        GridFunction { grid: self.grid, values }
    }
}

impl Mul<Complex64> for &GridFunction {
    type Output = GridFunction;
    fn mul(self, rhs: Complex64) -> GridFunction {
        self.scale(rhs)
    }
}

/// Composite Simpson approximation of `∫_0^l f dx`.
pub fn quad(f: &GridFunction) -> Complex64 {
    let w = f.grid.simpson_weights();
    f.values.iter().zip(&w).map(|(v, w)| v * w).sum()
}

/// Derivative order for the finite-difference helpers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffOrder {
    First,
    Second,
}

/// Second-order central differences in the interior with one-sided
/// second-order stencils at the endpoints.
pub fn central_diff(f: &GridFunction, order: DiffOrder) -> GridFunction {
    let g = f.grid;
    let h = g.h();
    let n = g.n();
    let v = &f.values;
    let mut out = vec![Complex64::new(0.0, 0.0); g.len()];
    match order {
        DiffOrder::First => {
            for j in 1..n {
                out[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
            }
            out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
            out[n] = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
        }
        DiffOrder::Second => {
            let h2 = h * h;
            for j in 1..n {
                out[j] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / h2;
            }
            out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
            out[n] = (2.0 * v[n] - 5.0 * v[n - 1] + 4.0 * v[n - 2] - v[n - 3]) / h2;
        }
    }
    GridFunction { grid: g, values: out }
}

/// Fourth-order accurate derivative of uniformly spaced samples, with
/// one-sided stencils near both ends. Needs at least six samples.
pub fn diff4_samples(v: &[Complex64], h: f64, order: DiffOrder) -> Vec<Complex64> {
    let len = v.len();
    assert!(len >= 6, "fourth-order differencing needs at least six samples");
    let n = len - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    let dot = |c: &[f64], idx: &dyn Fn(usize) -> usize| -> Complex64 {
        c.iter().enumerate().map(|(k, &ck)| v[idx(k)] * ck).sum()
    };
    match order {
        DiffOrder::First => {
            let d = 12.0 * h;
            const C0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
            const C1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
            for j in 2..n - 1 {
                out[j] = (v[j - 2] - 8.0 * v[j - 1] + 8.0 * v[j + 1] - v[j + 2]) / d;
            }
            out[0] = dot(&C0, &|k| k) / d;
            out[1] = dot(&C1, &|k| k) / d;
            out[n] = -dot(&C0, &|k| n - k) / d;
            out[n - 1] = -dot(&C1, &|k| n - k) / d;
        }
        DiffOrder::Second => {
            let d = 12.0 * h * h;
            const C0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
            const C1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];
            for j in 2..n - 1 {
                out[j] =
                    (-v[j - 2] + 16.0 * v[j - 1] - 30.0 * v[j] + 16.0 * v[j + 1] - v[j + 2]) / d;
            }
            out[0] = dot(&C0, &|k| k) / d;
            out[1] = dot(&C1, &|k| k) / d;
            out[n] = dot(&C0, &|k| n - k) / d;
            out[n - 1] = dot(&C1, &|k| n - k) / d;
        }
    }
    out
}

/// Fourth-order finite differences of a grid function.
pub fn diff4(f: &GridFunction, order: DiffOrder) -> GridFunction {
    GridFunction {
        grid: f.grid,
        values: diff4_samples(&f.values, f.grid.h(), order),
    }
}

/// 17 significant digits.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
