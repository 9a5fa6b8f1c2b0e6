//! `(u, v)` in `L²(0, l)` against the model inner product of `û, v̂`.

use num_complex::Complex64;
use slwave::grid::Grid;
use slwave::potential::Potential;
use slwave::sl_solver::kernel_basis;
use slwave::wave_model::{default_gauge, parseval_residual};

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let q = Potential::parse(g, "poly(1, 1)")?;
    let gd = default_gauge(&q, &kernel_basis(&q)?)?;
    let u = g.sample(|x| Complex64::new((5.0 * x).sin(), x * x));
    let v = g.sample(|x| Complex64::new(x.exp(), (2.0 * x).cos()));
    for (name, a, b) in [("(u, u)", &u, &u), ("(u, v)", &u, &v), ("(v, v)", &v, &v)] {
        let r = parseval_residual(a, b, &gd)?;
        println!("{name}: direct {:.10}  model {:.10}  residual {:.2e}", r.lhs, r.rhs, r.residual);
    }
    Ok(())
}
