// Bins the nodal forces of a sheared flat-punch contact into the 3×20×20
// label grid and checks the totals against the solver.

use tactile_sim::contact::{solve_normal_contact, ElasticHalfSpace, Indenter, IndenterShape, Pose};
use tactile_sim::labels::{bin_forces, total_force, ForceGrid};

pub fn run_example() -> tactile_sim::Result<ForceGrid> {
    let hs = ElasticHalfSpace::default();
    let ind = Indenter::new(IndenterShape::FlatSquare { side: 4.0 }, Pose { x: 12.0, y: 17.0, depth: 0.3, yaw: 0.5 });
    let sol = solve_normal_contact(&hs, &ind, 48)?.apply_shear([0.05, 0.0], &hs);
    let grid = bin_forces(&sol.nodal_forces)?;
    let (binned, solver) = (total_force(&grid), sol.total_force());
    for (c, name) in ["Fx", "Fy", "Fz"].iter().enumerate() {
        println!("{name}: binned {:+.6} N, solver {:+.6} N", binned[c], solver[c]);
    }
    let busiest = (0..400).max_by(|&a, &b| grid.get(2, a % 20, a / 20).abs().total_cmp(&grid.get(2, b % 20, b / 20).abs())).unwrap();
    println!("largest normal bin at ({}, {})", busiest % 20, busiest / 20);
    Ok(grid)
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    run_example().map(|_| ())
}
