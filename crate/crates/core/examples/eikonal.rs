//! The eikonal distance between atoms equals the distance of their points.

use slwave::geometry::{atom_snapshot, eikonal_metric, Atom};
use slwave::grid::Grid;

fn main() -> slwave::Result<()> {
    let l = 1.0;
    let g = Grid::new(l, 2000)?;
    let pairs = [(0.1, 0.3), (0.05, 0.45), (0.2, 0.2), (0.3, 0.12)];
    for (x, y) in pairs {
        let d = eikonal_metric(&Atom::new(x, l)?, &Atom::new(y, l)?, g)?;
        println!("tau({x}, {y}) = {d:.6}   |x - y| = {:.6}", (x - y).abs());
    }
    let s = atom_snapshot(&Atom::new(0.2, l)?, 0.1)?;
    println!("snapshot of the atom at 0.2 after t = 0.1: {:?}", s.intervals());
    Ok(())
}
