// Presses a sphere into the default gel and compares the solver load with
// the closed-form Hertz force.

use tactile_sim::contact::{hertz_force, solve_normal_contact, ElasticHalfSpace, Indenter, IndenterShape, Pose};

pub fn run_example() -> tactile_sim::Result<()> {
    let hs = ElasticHalfSpace::default();
    println!("depth (mm)   solver (N)   Hertz (N)   error");
    for depth in [0.2, 0.5, 1.0] {
        let ind = Indenter::new(IndenterShape::Sphere { radius: 3.0 }, Pose { x: 15.0, y: 15.0, depth, yaw: 0.0 });
        let sol = solve_normal_contact(&hs, &ind, 48)?;
        let f = hertz_force(hs.effective_modulus(), 3.0, depth);
        let got = sol.normal_force();
        println!("{depth:10.2} {got:12.5} {f:11.5} {:7.2}%", 100.0 * (got - f) / f);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    run_example()
}
