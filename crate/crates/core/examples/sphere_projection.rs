// Image of a particle through the canonical pinhole camera.

use tactile_sim::camera::{project_sphere, PinholeCamera};

pub fn run_example() -> tactile_sim::Result<()> {
    // R = 0.09 mm, 10.9 mm in front of a 220 px camera.
    let e = project_sphere([0.0, 0.0, 10.9], 0.09, 220.0, [0.0, 0.0])?;
    println!("on-axis disc: {:.3} px across", e.major);

    let cam = PinholeCamera::default();
    for g in [[15.0, 15.0, 0.0], [2.0, 3.0, 0.0], [2.0, 3.0, 4.5]] {
        let e = cam.project_sphere(cam.gel_to_pinhole(g), 0.09)?;
        println!(
            "gel {g:?}: centre ({:.1}, {:.1}) px, axes {:.3} x {:.3} px, angle {:.3} rad",
            e.center[0], e.center[1], e.major, e.minor, e.orientation
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    run_example()
}
