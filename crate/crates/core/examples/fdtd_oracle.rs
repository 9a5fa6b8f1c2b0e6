//! Spectral waves against the leapfrog finite-difference solver.

use slwave::boundary_control::{control_to_kernel, fdtd_oracle_with, WaveSystem};
use slwave::control::ControlSignal;
use slwave::grid::Grid;
use slwave::potential::Potential;

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let q = Potential::parse(g, "2 + cos(1, 3)")?;
    let sys = WaveSystem::build(&q, 300)?;
    let c = ControlSignal::parse("bump(0.15, 0.1, 1)", "0.5*bump(0.2, 0.1, 1)", 0.005)?;
    let field = fdtd_oracle_with(&c, 1.0, &q, 0.5, 5)?;
    let h = control_to_kernel(&c, sys.kernel_basis());
    for (t, f) in field.times().iter().zip(field.frames()) {
        let u = sys.smooth_wave(&h, *t)?;
        println!("t = {t:.2}  |u - u_fd| = {:.3e}  |u| = {:.3e}", (&u - f).norm(), u.norm());
    }
    Ok(())
}
