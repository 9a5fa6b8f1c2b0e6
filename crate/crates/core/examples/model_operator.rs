//! Model coefficients and the intertwining residual over the test battery.

use slwave::grid::Grid;
use slwave::model_operator::{assemble_coefficients, intertwine_residual, test_battery};
use slwave::potential::Potential;
use slwave::sl_solver::kernel_basis;
use slwave::wave_model::default_gauge;

fn main() -> slwave::Result<()> {
    let q = Potential::parse(Grid::new(1.0, 2000)?, "2 + cos(1, 3)")?;
    let gd = default_gauge(&q, &kernel_basis(&q)?)?;
    let mc = assemble_coefficients(&gd, &q)?;
    let (p, qh) = mc.at(0.25)?;
    println!("P(0.25) = {p:.6}");
    println!("Q(0.25) = {qh:.6}");
    for tf in test_battery(1.0) {
        println!("{:>20}: residual {:.2e}", tf.name(), intertwine_residual(&tf, &q, &gd, &mc)?);
    }
    Ok(())
}
