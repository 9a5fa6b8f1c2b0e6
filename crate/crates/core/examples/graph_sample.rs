//! A graph point of the model adjoint built from a boundary-controlled wave.

use slwave::boundary_control::WaveSystem;
use slwave::control::ControlSignal;
use slwave::grid::Grid;
use slwave::model_operator::{assemble_coefficients, graph_consistency, graph_sample};
use slwave::potential::Potential;
use slwave::wave_model::default_gauge;

fn main() -> slwave::Result<()> {
    let q = Potential::parse(Grid::new(1.0, 2000)?, "2 + cos(1, 3)")?;
    let sys = WaveSystem::build(&q, 300)?;
    let gd = default_gauge(&q, sys.kernel_basis())?;
    let mc = assemble_coefficients(&gd, &q)?;
    let c = ControlSignal::parse("bump(0.15, 0.1, 1)", "bump(0.2, 0.1, 0.5)", 0.005)?;
    for t in [0.2, 0.3, 0.4] {
        let gs = graph_sample(&c, t, &sys, &gd)?;
        println!("t = {t}: relative mismatch {:.2e}", graph_consistency(&gs, &gd, &mc)?);
    }
    Ok(())
}
