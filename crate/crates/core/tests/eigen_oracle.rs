//! Shooting eigenvalues against a finite-difference matrix oracle.

use nalgebra::{DMatrix, SymmetricEigen};
use slwave::config::RunConfig;
use slwave::grid::Grid;
use slwave::pipeline::{output_path, run_eigs};
use slwave::potential::Potential;
use slwave::sl_solver::{check_lower_bound, dirichlet_eigensystem};

fn q_cos(x: f64) -> f64 {
    2.0 + (3.0 * x).cos()
}

/// Lowest `k` eigenvalues of the three-point Dirichlet matrix on `n` cells.
fn fd_eigenvalues(q: impl Fn(f64) -> f64, l: f64, n: usize, k: usize) -> Vec<f64> {
    let h = l / n as f64;
    let m = n - 1;
    let a = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            2.0 / (h * h) + q((i + 1) as f64 * h)
        } else if i.abs_diff(j) == 1 {
            -1.0 / (h * h)
        } else {
            0.0
        }
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev.truncate(k);
    ev
}

/// The three-point error is `c h^2 + O(h^4)`; one Richardson step removes `h^2`.
fn richardson(q: impl Fn(f64) -> f64 + Copy, l: f64, k: usize) -> Vec<f64> {
    let coarse = fd_eigenvalues(q, l, 200, k);
    let fine = fd_eigenvalues(q, l, 400, k);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}

#[test]
fn oracle_reproduces_free_string() {
    let ev = richardson(|_| 0.0, std::f64::consts::PI, 3);
    for (k, lam) in ev.iter().enumerate() {
        assert!((lam - ((k + 1) * (k + 1)) as f64).abs() < 1e-6);
    }
}

#[test]
fn shooting_matches_fd_oracle_for_cosine_potential() {
    let oracle = richardson(q_cos, 1.0, 3);
    let g = Grid::new(1.0, 2000).unwrap();
    let es = dirichlet_eigensystem(&Potential::parse(g, "2 + cos(1, 3)").unwrap(), 3).unwrap();
    for (lam, o) in es.eigenvalues().iter().zip(&oracle) {
        assert!((lam - o).abs() < 1e-5, "{lam} vs {o}");
    }
    assert!((check_lower_bound(&es).unwrap() - oracle[0]).abs() < 1e-5);
}

#[test]
fn run_eigs_lambda1_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::from_toml("[problem]\npotential = \"2 + cos(1, 3)\"\n[numerics]\nmodes = 2").unwrap();
    cfg.output.dir = dir.path().to_path_buf();
    run_eigs(&cfg).unwrap();
    let text = std::fs::read_to_string(output_path(&cfg, "eigenvalues.csv")).unwrap();
    let lam1: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((lam1 - richardson(q_cos, 1.0, 1)[0]).abs() < 1e-5);
}

#[test]
fn eigenvalues_shift_with_constant_potential() {
    let g = Grid::new(1.0, 1000).unwrap();
    let base = dirichlet_eigensystem(&Potential::zero(g), 5).unwrap();
    let shifted = dirichlet_eigensystem(&Potential::parse(g, "3.5").unwrap(), 5).unwrap();
    for (a, b) in base.eigenvalues().iter().zip(shifted.eigenvalues()) {
        assert!((b - a - 3.5).abs() < 1e-7);
    }
}
