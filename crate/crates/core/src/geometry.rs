//! Reflection-symmetric subsets of `(0, l)`, their metric neighbourhoods, the
//! atoms `ω_x` of the wave spectrum and the eikonal distance functions.
//!
//! Projections snap each interval `(a, b)` to the node range `a <= x_j < b`
//! (the node `l` joins when `b >= l`), so a set and its complement split the
//! grid exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Finite union of disjoint open intervals plus isolated point pairs
/// `{x, l - x}`, closed under `x -> l - x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSet {
    l: f64,
    /// Sorted, pairwise disjoint.
    intervals: Vec<[f64; 2]>,
    /// Left members `x <= l/2` of isolated pairs, sorted.
    points: Vec<f64>,
}

fn merge(mut iv: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    iv.retain(|[a, b]| b > a);
    iv.sort_by(|p, q| p[0].total_cmp(&q[0]));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(iv.len());
    for [a, b] in iv {
        match out.last_mut() {
            Some(last) if a <= last[1] => last[1] = last[1].max(b),
            _ => out.push([a, b]),
        }
    }
    out
}

impl SymmetricSet {
    /// Validates disjointness, containment in `[0, l]` and reflection symmetry
    /// with endpoint tolerance `tol`.
    pub fn new(l: f64, intervals: Vec<[f64; 2]>, points: Vec<f64>, tol: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::Config(format!("interval length must be positive, got {l}")));
        }
        let mut sorted = intervals.clone();
        sorted.sort_by(|p, q| p[0].total_cmp(&q[0]));
        for [a, b] in &sorted {
            if !(*a >= 0.0 && *b <= l && a < b) {
                return Err(Error::Config(format!("interval ({a}, {b}) is not inside (0, {l})")));
            }
        }
        for w in sorted.windows(2) {
            if w[1][0] < w[0][1] {
                return Err(Error::Config(format!(
                    "intervals ({}, {}) and ({}, {}) overlap",
                    w[0][0], w[0][1], w[1][0], w[1][1]
                )));
            }
        }
        for [a, b] in &sorted {
            let (ra, rb) = (l - b, l - a);
            let mirrored = sorted
                .iter()
                .any(|[c, d]| (c - ra).abs() <= tol && (d - rb).abs() <= tol);
            if !mirrored {
                return Err(Error::Config(format!(
                    "interval ({a}, {b}) has no mirror image ({ra}, {rb})"
                )));
            }
        }
        let mut pts = Vec::with_capacity(points.len());
        for x in points {
            if !(0.0..=l).contains(&x) {
                return Err(Error::Config(format!("point {x} is outside [0, {l}]")));
            }
            pts.push(x.min(l - x));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|p, q| (*p - *q).abs() <= tol);
        Ok(Self { l, intervals: sorted, points: pts })
    }

    pub fn empty(l: f64) -> Self {
        Self { l, intervals: Vec::new(), points: Vec::new() }
    }

    pub fn whole(l: f64) -> Self {
        Self { l, intervals: vec![[0.0, l]], points: Vec::new() }
    }

    /// `(a, b) ∪ (l - b, l - a)`.
    pub fn symmetric_interval(l: f64, a: f64, b: f64) -> Result<Self> {
        let iv = merge(vec![[a, b], [l - b, l - a]]);
        Self::new(l, iv, Vec::new(), 0.0)
    }

    pub fn point_pair(l: f64, x: f64) -> Result<Self> {
        Self::new(l, Vec::new(), vec![x], 0.0)
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && self.points.is_empty()
    }

    /// Total length of the intervals.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|[a, b]| b - a).sum()
    }

    /// Open gaps of `(0, l)` not covered by the intervals; points are dropped.
    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut start = 0.0;
        for [a, b] in &self.intervals {
            if *a > start {
                out.push([start, *a]);
            }
            start = *b;
        }
        if start < self.l {
            out.push([start, self.l]);
        }
        Self { l: self.l, intervals: out, points: Vec::new() }
    }

    /// Whether every interval of `self` lies inside some interval of `other`
    /// and every point pair lies in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let covered = |x: f64| {
            other.intervals.iter().any(|[a, b]| *a < x && x < *b)
                || other.points.iter().any(|p| *p == x.min(self.l - x))
        };
        self.intervals
            .iter()
            .all(|[a, b]| other.intervals.iter().any(|[c, d]| c <= a && b <= d))
            && self.points.iter().all(|&x| covered(x))
    }

    /// Whether the reflected set equals `self` within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let mut r: Vec<[f64; 2]> = self.intervals.iter().map(|[a, b]| [self.l - b, self.l - a]).collect();
        r.sort_by(|p, q| p[0].total_cmp(&q[0]));
        r.len() == self.intervals.len()
            && r.iter()
                .zip(&self.intervals)
                .all(|(p, q)| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol)
    }

    /// Node indicator on `grid`.
    pub fn mask(&self, grid: Grid) -> Vec<bool> {
        let h = grid.h();
        let n = grid.n();
        let mut m = vec![false; n + 1];
        for [a, b] in &self.intervals {
            let j0 = (a / h - 1e-9).ceil().max(0.0) as usize;
            let j1 = if *b >= self.l - 1e-12 * self.l {
                n + 1
            } else {
                ((b / h - 1e-9).ceil().max(0.0) as usize).min(n + 1)
            };
            for v in m.iter_mut().take(j1).skip(j0) {
                *v = true;
            }
        }
        m
    }
}

/// `(s)^t`: every interval and point pair widened by `t`, clipped to `(0, l)`,
/// overlaps merged.
pub fn neighborhood(s: &SymmetricSet, t: f64) -> Result<SymmetricSet> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("neighbourhood radius must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(s.clone());
    }
    let l = s.l;
    let mut iv: Vec<[f64; 2]> = s
        .intervals
        .iter()
        .map(|[a, b]| [(a - t).max(0.0), (b + t).min(l)])
        .collect();
    for &x in &s.points {
        iv.push([(x - t).max(0.0), (x + t).min(l)]);
        iv.push([(l - x - t).max(0.0), (l - x + t).min(l)]);
    }
    Ok(SymmetricSet { l, intervals: merge(iv), points: Vec::new() })
}

/// The isotony `L2(E) -> L2(E^t)` acting on the set `E`.
pub fn isotony_apply(s: &SymmetricSet, t: f64) -> Result<SymmetricSet> {
    neighborhood(s, t)
}

/// The atom `ω_x`, `0 <= x <= l/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    x: f64,
    l: f64,
}

impl Atom {
    pub fn new(x: f64, l: f64) -> Result<Self> {
        if !(l > 0.0 && x >= 0.0 && x <= 0.5 * l) {
            return Err(Error::Domain(format!("atom parameter {x} is outside [0, {}]", 0.5 * l)));
        }
        Ok(Self { x, l })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// Distance from `y` to `{x, l - x}`.
    pub fn distance(&self, y: f64) -> f64 {
        (y - self.x).abs().min((y - (self.l - self.x)).abs())
    }
}

/// `ω_0`, the single boundary atom.
pub fn boundary_atom(l: f64) -> Atom {
    Atom { x: 0.0, l }
}

/// `({x} ∪ {l - x})^t`.
pub fn atom_snapshot(a: &Atom, t: f64) -> Result<SymmetricSet> {
    neighborhood(&SymmetricSet::point_pair(a.l, a.x)?, t)
}

/// `P_s u`: `u` times the node indicator of `s`.
pub fn project_onto(s: &SymmetricSet, u: &GridFunction) -> GridFunction {
    let mask = s.mask(u.grid());
    let values = u
        .values()
        .iter()
        .zip(&mask)
        .map(|(v, &inside)| if inside { *v } else { num_complex::Complex64::new(0.0, 0.0) })
        .collect();
    GridFunction::new(u.grid(), values).expect("mask matches grid")
}

/// Multiplication by `d_a(y) = min(|y - x|, |y - (l - x)|)`.
pub fn eikonal_apply(a: &Atom, u: &GridFunction) -> GridFunction {
    u.map(|y, v| v * a.distance(y))
}

/// `τ(ω_1, ω_2) = |x_1 - x_2|`, after checking it against the grid sup of
/// `|d_1 - d_2|`.
pub fn eikonal_metric(a1: &Atom, a2: &Atom, grid: Grid) -> Result<f64> {
    let exact = (a1.x - a2.x).abs();
    let sup = grid
        .nodes()
        .map(|y| (a1.distance(y) - a2.distance(y)).abs())
        .fold(0.0, f64::max);
    if (sup - exact).abs() > grid.h() {
        return Err(Error::Internal(format!(
            "eikonal sup {sup} disagrees with |x1 - x2| = {exact} beyond h = {}",
            grid.h()
        )));
    }
    Ok(exact)
}
