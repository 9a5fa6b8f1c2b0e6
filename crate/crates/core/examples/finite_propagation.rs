//! Mass of the wave outside the reachable region `[0, t] ∪ [l - t, l]`.

use slwave::boundary_control::{control_to_kernel, support_report, WaveSystem};
use slwave::control::ControlSignal;
use slwave::grid::Grid;
use slwave::potential::Potential;

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let sys = WaveSystem::build(&Potential::parse(g, "poly(1, 1)")?, 300)?;
    let c = ControlSignal::parse("bump(0.12, 0.1, 1)", "bump(0.15, 0.1, -1)", 0.005)?;
    let h = control_to_kernel(&c, sys.kernel_basis());
    for t in [0.1, 0.2, 0.3, 0.4, 0.5] {
        let r = support_report(&sys.smooth_wave(&h, t)?, t, 1e-6)?;
        println!("t = {t:.1}  outside/total = {:.2e}  pass = {}", r.ratio, r.pass);
    }
    Ok(())
}
