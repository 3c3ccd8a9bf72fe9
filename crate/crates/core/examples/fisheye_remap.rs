// Renders particles through a synthetic fisheye, remaps the image into the
// pinhole frame and compares it with a direct pinhole render.

use tactile_sim::camera::{rotation_z, FisheyeCamera, PinholeCamera, RadialModel};
use tactile_sim::particles::{sample_particles, LayerSpec};
use tactile_sim::remap::{build_remap_table, remap_image, CameraRig};
use tactile_sim::render::{render_fisheye, render_pinhole, RenderOptions};

fn fisheye() -> FisheyeCamera {
    // Looks up at the gel from 15 mm below its centre, rolled by 0.03 rad.
    let r = rotation_z(0.03);
    let c = [15.0, 15.0, -15.0];
    let t = [0, 1, 2].map(|i| -(r[i][0] * c[0] + r[i][1] * c[1] + r[i][2] * c[2]));
    FisheyeCamera {
        radial: RadialModel::Polynomial { coefficients: [0.0, 205.0, 0.0, -6.0, 0.0] },
        stretch: [[1.0, 0.002], [0.0, 0.995]],
        center: [221.5, 218.0],
        resolution: [440, 440],
        max_incidence: 1.3,
        rotation_gc: r,
        translation_gc: t,
    }
}

pub fn run_example() -> tactile_sim::Result<f64> {
    let pin = PinholeCamera::default();
    let opts = RenderOptions::default();
    let set = sample_particles(5, &LayerSpec { nominal_count: 400, ..LayerSpec::default() })?;
    let real = render_fisheye(&set, &fisheye(), 3, false, &opts);
    let table = build_remap_table(&CameraRig::new(pin, fisheye()))?;
    let remapped = remap_image(&real, &table)?;
    let direct = render_pinhole(&set, &pin, 3, false, &opts)?;
    let (lo, hi) = (22, 418);
    let (mut sum, mut n) = (0.0, 0.0);
    for y in lo..hi {
        for x in lo..hi {
            sum += (remapped.get(x, y) as f64 - direct.get(x, y) as f64).abs();
            n += 1.0;
        }
    }
    let mad = sum / n;
    println!("valid table entries {:.1}%, central mean abs difference {mad:.2}/255", 100.0 * table.valid_fraction());
    Ok(mad)
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    run_example().map(|_| ())
}
