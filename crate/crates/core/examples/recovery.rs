//! Both recovery paths on `q = 2 + cos 3x`. The branches are the unordered
//! pair `{q(x), q(l - x)}`.

use slwave::grid::Grid;
use slwave::model_operator::{assemble_coefficients, recover_potential, RecoveryPath, REFLECTION_NOTE};
use slwave::potential::Potential;
use slwave::sl_solver::kernel_basis;
use slwave::wave_model::default_gauge;

fn main() -> slwave::Result<()> {
    let q = Potential::parse(Grid::new(1.0, 2000)?, "2 + cos(1, 3)")?;
    let gd = default_gauge(&q, &kernel_basis(&q)?)?;
    let mc = assemble_coefficients(&gd, &q)?;
    let exact = |x: f64| q.eval(x);
    for path in [RecoveryPath::Analytic, RecoveryPath::Observer] {
        let r = recover_potential(&mc, path, 1e-6)?;
        println!("{path:?}: max error on [0.1, 0.4] = {:.2e}", r.max_error(exact, 1.0, 0.1, 0.4));
    }
    println!("{REFLECTION_NOTE}");
    Ok(())
}
