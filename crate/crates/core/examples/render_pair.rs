// Renders the rest and deformed particle images for one sheared sphere
// indentation. Pass a directory to also write the two PNGs.

use tactile_sim::camera::PinholeCamera;
use tactile_sim::contact::{solve_normal_contact, ElasticHalfSpace, Indenter, IndenterShape, Pose};
use tactile_sim::particles::{displace_particles, sample_particles, DisplacementConfig, LayerSpec};
use tactile_sim::render::{render_pair, RenderOptions, TactileImagePair};

pub fn run_example() -> tactile_sim::Result<TactileImagePair> {
    let hs = ElasticHalfSpace::default();
    let ind = Indenter::new(IndenterShape::Sphere { radius: 3.0 }, Pose { x: 15.0, y: 15.0, depth: 1.0, yaw: 0.0 });
    let sol = solve_normal_contact(&hs, &ind, 32)?.apply_shear([0.2, 0.1], &hs);
    let layer = LayerSpec { nominal_count: 1500, ..LayerSpec::default() };
    let set = sample_particles(1, &layer)?;
    let moved = displace_particles(&set, &sol, &hs, &layer, &DisplacementConfig::default())?;
    let peak = moved.particles.iter().map(|p| p.displacement[2].abs()).fold(0.0, f64::max);
    let pair = render_pair(&moved, &PinholeCamera::default(), 7, 0, &RenderOptions::default())?;
    let changed = pair.at_rest.data.iter().zip(&pair.deformed.data).filter(|(a, b)| a != b).count();
    println!("{} particles, deepest push {peak:.4} mm, {changed} pixels changed", moved.len());
    Ok(pair)
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    let pair = run_example()?;
    if let Some(dir) = std::env::args().nth(1) {
        let dir = std::path::Path::new(&dir);
        pair.at_rest.save_png(&dir.join("rest.png"))?;
        pair.deformed.save_png(&dir.join("deformed.png"))?;
    }
    Ok(())
}
