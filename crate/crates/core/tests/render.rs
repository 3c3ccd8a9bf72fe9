mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tactile_sim::camera::{Ellipse, PinholeCamera};
use tactile_sim::particles::{sample_particles, LayerSpec, Particle, ParticleSet};
use tactile_sim::raster::GrayImage;
use tactile_sim::render::{rasterize, render_fisheye, render_pair, render_pinhole, RenderOptions};

fn coverage(img: &GrayImage) -> Vec<bool> {
    img.data.iter().map(|&v| v > 0).collect()
}

#[test]
fn disc_area_matches_projected_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = 3.63;
    let discs: Vec<Ellipse> = (0..400)
        .map(|k| Ellipse::circle([10.0 * (k % 20) as f64 + 5.0 + rng.gen::<f64>(), 10.0 * (k / 20) as f64 + 5.0 + rng.gen::<f64>()], d))
        .collect();
    let img = rasterize(&discs, [200, 200], 3, &RenderOptions::default());
    let per_disc = coverage(&img).iter().filter(|&&c| c).count() as f64 / 400.0;
    let want = std::f64::consts::PI * d * d / 4.0;
    assert!((per_disc - want).abs() / want < 0.15, "{per_disc} vs {want}");
}

#[test]
fn rendering_is_deterministic_and_coverage_ignores_colour_seed() {
    let cam = PinholeCamera::default();
    let set = sample_particles(2, &LayerSpec { nominal_count: 600, ..LayerSpec::default() }).unwrap();
    let a = render_pinhole(&set, &cam, 5, false, &RenderOptions::default()).unwrap();
    let b = render_pinhole(&set, &cam, 5, false, &RenderOptions::default()).unwrap();
    let c = render_pinhole(&set, &cam, 6, false, &RenderOptions::default()).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(coverage(&a), coverage(&c));
}

#[test]
fn zero_displacement_pair_is_identical() {
    let set = sample_particles(4, &LayerSpec::default()).unwrap();
    let pair = render_pair(&set, &PinholeCamera::default(), 1, 0, &RenderOptions::default()).unwrap();
    assert_eq!(pair.at_rest, pair.deformed);
}

#[test]
fn uniform_displacement_translates_the_image() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let particles: Vec<Particle> = (0..300)
        .map(|id| Particle {
            id,
            position: [rng.gen_range(3.0..27.0), rng.gen_range(3.0..27.0), 0.0],
            radius: 0.09,
            displacement: [0.5, 0.0, 0.0],
        })
        .collect();
    let set = ParticleSet { particles };
    let cam = PinholeCamera::default();
    let pair = render_pair(&set, &cam, 1, 0, &RenderOptions::default()).unwrap();
    // Camera 15 mm below the plane: 220 * 0.5 / 15 px.
    let expected = 220.0 * 0.5 / 15.0;
    let score = |s: i64| {
        let mut acc = 0.0;
        for y in 0..440 {
            for x in 20..420i64 {
                acc += pair.at_rest.get(x as usize, y) as f64 * pair.deformed.get((x + s) as usize, y) as f64;
            }
        }
        acc
    };
    let best = (-12..=12).max_by(|&a, &b| score(a).total_cmp(&score(b))).unwrap();
    assert!((best as f64 - expected).abs() <= 0.5, "{best} vs {expected}");
}

#[test]
fn removing_a_particle_is_local() {
    let cam = PinholeCamera::default();
    let set = sample_particles(8, &LayerSpec::default()).unwrap();
    let full = render_pinhole(&set, &cam, 2, false, &RenderOptions::default()).unwrap();
    let mut fewer = set.clone();
    let gone = fewer.particles.remove(17);
    let partial = render_pinhole(&fewer, &cam, 2, false, &RenderOptions::default()).unwrap();
    let e = cam.project_sphere(cam.gel_to_pinhole(gone.position), gone.radius).unwrap();
    let [u0, v0, u1, v1] = e.bounds();
    for y in 0..440 {
        for x in 0..440 {
            if full.get(x, y) != partial.get(x, y) {
                let (u, v) = (x as f64 + 0.5, y as f64 + 0.5);
                assert!(u >= u0 && u <= u1 && v >= v0 && v <= v1);
            }
        }
    }
}

#[test]
fn antialiasing_only_softens_edges() {
    let disc = [Ellipse::circle([20.0, 20.0], 9.0)];
    let hard = rasterize(&disc, [40, 40], 1, &RenderOptions { antialias: false });
    let soft = rasterize(&disc, [40, 40], 1, &RenderOptions { antialias: true });
    assert_eq!(hard.get(20, 20), soft.get(20, 20));
    assert_eq!(soft.get(2, 2), 0);
    let sum = |i: &GrayImage| i.data.iter().map(|&v| v as f64).sum::<f64>();
    assert!((sum(&hard) - sum(&soft)).abs() / sum(&hard) < 0.1);
}

#[test]
fn fisheye_particle_on_the_optical_axis_lands_on_the_image_centre() {
    let fe = common::synthetic_fisheye([0.0; 3]);
    let set = ParticleSet {
        particles: vec![Particle { id: 0, position: [15.0, 15.0, 2.0], radius: 0.3, displacement: [0.0; 3] }],
    };
    let img = render_fisheye(&set, &fe, 1, false, &RenderOptions::default());
    let (mut n, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for y in 0..img.height {
        for x in 0..img.width {
            if img.get(x, y) > 0 {
                n += 1.0;
                cx += x as f64 + 0.5;
                cy += y as f64 + 0.5;
            }
        }
    }
    assert!(n > 0.0);
    assert!((cx / n - fe.center[0]).abs() < 0.5 && (cy / n - fe.center[1]).abs() < 0.5);
}
