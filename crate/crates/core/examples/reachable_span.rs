//! Random controls fill the reachable region: singular values of the
//! snapshot matrix on a coarse grid inside `[0, t] ∪ [l - t, l]`.

use slwave::boundary_control::WaveSystem;
use slwave::grid::Grid;
use slwave::potential::Potential;

fn main() -> slwave::Result<()> {
    let g = Grid::new(1.0, 2000)?;
    let sys = WaveSystem::build(&Potential::parse(g, "2 + cos(1, 3)")?, 300)?;
    let p = sys.reachable_span_estimate(0.6, 96, 24, 7)?;
    println!("coarse nodes: {}", p.coarse_nodes.len());
    println!("sigma_max = {:.3e}, sigma_min = {:.3e}", p.singular_values[0], p.singular_values.last().unwrap());
    println!("condition ratio = {:.3e}", p.condition_ratio());
    Ok(())
}
