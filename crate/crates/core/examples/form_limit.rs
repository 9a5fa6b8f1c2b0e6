//! The boundary form as the limit of shrinking symmetric neighbourhoods.

use num_complex::Complex64;
use slwave::grid::Grid;
use slwave::potential::Potential;
use slwave::sl_solver::kernel_basis;
use slwave::wave_model::{default_gauge, form_limit_check};

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let q = Potential::parse(g, "2 + cos(1, 3)")?;
    let gd = default_gauge(&q, &kernel_basis(&q)?)?;
    let u = g.sample(|x| Complex64::new((3.0 * x).sin() + x, 0.5 * x * x));
    let h = g.h();
    let radii: Vec<f64> = [32.5, 16.5, 8.5, 4.5, 2.5].iter().map(|k| k * h).collect();
    let r = form_limit_check(&u, 0.3, &gd, &radii, 1e-4)?;
    for (eps, ratio) in r.radii.iter().zip(&r.ratios) {
        println!("eps = {eps:.5}  ratio = {ratio:.8}");
    }
    println!("extrapolated {:.8}, boundary form {:.8}, pass = {}", r.extrapolated, r.boundary_ratio, r.pass);
    Ok(())
}
