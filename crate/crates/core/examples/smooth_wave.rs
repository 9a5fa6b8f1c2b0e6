//! A boundary-controlled wave for `q = 0` next to the travelling-wave formula.

use slwave::boundary_control::{control_to_kernel, WaveSystem};
use slwave::control::ControlSignal;
use slwave::grid::Grid;
use slwave::potential::Potential;

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let sys = WaveSystem::build(&Potential::zero(g), 300)?;
    let c = ControlSignal::parse("bump(0.15, 0.1, 1)", "", 0.005)?;
    let h = control_to_kernel(&c, sys.kernel_basis());
    let t = 0.3;
    let u = sys.smooth_wave(&h, t)?;
    println!("{:>6} {:>12} {:>12}", "x", "u(x, t)", "f0(t - x)");
    for j in (0..=g.n()).step_by(100) {
        let x = g.x(j);
        let exact = if x < t { c.f0.value(t - x, 0) } else { 0.0 };
        println!("{x:>6.3} {:>12.6} {exact:>12.6}", u.at(j).re);
    }
    Ok(())
}
