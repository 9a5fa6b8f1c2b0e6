//! Dirichlet eigenvalues for a smooth potential and the lower bound check.
//!
//! `cargo run --example eigensystem`

use slwave::grid::Grid;
use slwave::potential::Potential;
use slwave::sl_solver::{check_lower_bound, dirichlet_eigensystem};

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let q = Potential::parse(g, "2 + cos(1, 3)")?;
    let es = dirichlet_eigensystem(&q, 8)?;
    for (k, lam) in es.eigenvalues().iter().enumerate() {
        let free = ((k + 1) as f64 * std::f64::consts::PI).powi(2);
        println!("lambda_{:<2} = {lam:>14.8}   (free string {free:>12.6})", k + 1);
    }
    println!("lambda_1 = {:.8} > 0, so the kernel basis exists", check_lower_bound(&es)?);
    Ok(())
}
