//! Gauge data on the half grid: `ρ`, `det T`, and the Gram identity `G = ρ T T*`.

use slwave::grid::Grid;
use slwave::potential::Potential;
use slwave::sl_solver::kernel_basis;
use slwave::wave_model::default_gauge;

fn main() -> slwave::Result<()> {
    let q = Potential::parse(Grid::new(1.0, 1000)?, "2 + cos(1, 3)")?;
    let kb = kernel_basis(&q)?;
    let gd = default_gauge(&q, &kb)?;
    println!("guard band width {:.4} below x = l/2", gd.guard_band());
    for j in (0..=gd.grid().half()).step_by(50) {
        let n = gd.node(j);
        let res = if n.admissible { format!("{:.2e}", gd.gram_residual(j)) } else { "-".into() };
        println!("x = {:.3}  rho = {:.6}  |det T| = {:.3e}  gram residual {res}", n.x, n.rho, n.det_t.norm());
    }
    let mut csv = Vec::new();
    gd.write_csv(&mut csv)?;
    println!("gauge table: {} rows", csv.iter().filter(|&&b| b == b'\n').count() - 1);
    Ok(())
}
