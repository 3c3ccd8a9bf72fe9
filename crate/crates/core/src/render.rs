//! Rasterizes projected particles into grayscale tactile images.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::camera::{Ellipse, FisheyeCamera, PinholeCamera};
use crate::error::Result;
use crate::particles::ParticleSet;
use crate::raster::GrayImage;
use crate::seed;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderOptions {
    /// 4×4 supersampled coverage blending instead of a hard pixel-centre test.
    pub antialias: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TactileImagePair {
    pub at_rest: GrayImage,
    pub deformed: GrayImage,
    pub seed: u64,
    pub step: usize,
}

/// Random RGB colour with channels in `[64, 255]`, keyed by `(seed, key)`.
pub fn particle_color(seed: u64, key: u64) -> [u8; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(seed, &[key]));
    [rng.gen_range(64..=255), rng.gen_range(64..=255), rng.gen_range(64..=255)]
}

/// ITU-R BT.601 luma, rounded.
pub fn luma(rgb: [u8; 3]) -> u8 {
    (0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64).round() as u8
}

const AA: usize = 4;

/// Paints `shapes` in order onto `img`, later shapes overwriting.
pub fn paint(img: &mut GrayImage, shapes: &[(Ellipse, u8)], options: &RenderOptions) {
    let (w, h) = (img.width as f64, img.height as f64);
    for (e, gray) in shapes {
        let [u0, v0, u1, v1] = e.bounds();
        if !(u1 > 0.0 && v1 > 0.0 && u0 < w && v0 < h) || !(e.minor > 0.0) {
            continue;
        }
        let xs = u0.floor().max(0.0) as usize..(u1.ceil().min(w) as usize);
        let ys = v0.floor().max(0.0) as usize..(v1.ceil().min(h) as usize);
        for y in ys {
            for x in xs.clone() {
                if !options.antialias {
                    if e.contains(x as f64 + 0.5, y as f64 + 0.5) {
                        img.set(x, y, *gray);
                    }
                    continue;
                }
                let mut hits = 0;
                for sy in 0..AA {
                    for sx in 0..AA {
                        let u = x as f64 + (sx as f64 + 0.5) / AA as f64;
                        let v = y as f64 + (sy as f64 + 0.5) / AA as f64;
                        hits += e.contains(u, v) as usize;
                    }
                }
                if hits > 0 {
                    let a = hits as f64 / (AA * AA) as f64;
                    let old = img.get(x, y) as f64;
                    img.set(x, y, (old + a * (*gray as f64 - old)).round() as u8);
                }
            }
        }
    }
}

/// Draws `ellipses` on a black canvas, colour `i` drawn from `(seed, i)`.
pub fn rasterize(ellipses: &[Ellipse], resolution: [usize; 2], seed: u64, options: &RenderOptions) -> GrayImage {
    let shapes: Vec<(Ellipse, u8)> = ellipses
        .iter()
        .enumerate()
        .map(|(i, e)| (*e, luma(particle_color(seed, i as u64))))
        .collect();
    let mut img = GrayImage::new(resolution[0], resolution[1]);
    paint(&mut img, &shapes, options);
    img
}

/// Pinhole image of the particles, displaced or not.
pub fn render_pinhole(
    set: &ParticleSet,
    cam: &PinholeCamera,
    seed: u64,
    displaced: bool,
    options: &RenderOptions,
) -> Result<GrayImage> {
    let mut shapes = Vec::with_capacity(set.len());
    for p in &set.particles {
        let mut s = cam.gel_to_pinhole(p.position);
        if displaced {
            let d = cam.gel_disp_to_pinhole(p.displacement);
            for c in 0..3 {
                s[c] += d[c];
            }
        }
        let e = cam.project_sphere(s, p.radius)?;
        shapes.push((e, luma(particle_color(seed, p.id as u64))));
    }
    let mut img = GrayImage::new(cam.resolution[0], cam.resolution[1]);
    paint(&mut img, &shapes, options);
    Ok(img)
}

pub fn render_pair(
    set: &ParticleSet,
    cam: &PinholeCamera,
    seed: u64,
    step: usize,
    options: &RenderOptions,
) -> Result<TactileImagePair> {
    Ok(TactileImagePair {
        at_rest: render_pinhole(set, cam, seed, false, options)?,
        deformed: render_pinhole(set, cam, seed, true, options)?,
        seed,
        step,
    })
}

const SILHOUETTE_SAMPLES: usize = 24;

/// Ellipse through the fisheye images of the sphere's silhouette circle.
/// `None` when part of the silhouette leaves the field of view.
pub fn fisheye_ellipse(cam: &FisheyeCamera, center: [f64; 3], radius: f64) -> Option<Ellipse> {
    let c = nalgebra::Vector3::from(center);
    let d = c.norm();
    if !(d > radius) {
        return None;
    }
    let axis = c / d;
    // Tangent circle: centre along the view ray, radius R√(D²−R²)/D.
    let circle_center = c * (1.0 - radius * radius / (d * d));
    let circle_radius = radius * (d * d - radius * radius).sqrt() / d;
    let helper = if axis.x.abs() < 0.9 {
        nalgebra::Vector3::x()
    } else {
        nalgebra::Vector3::y()
    };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    let mut pts = Vec::with_capacity(SILHOUETTE_SAMPLES);
    for k in 0..SILHOUETTE_SAMPLES {
        let t = k as f64 * std::f64::consts::TAU / SILHOUETTE_SAMPLES as f64;
        let q = circle_center + circle_radius * (t.cos() * e1 + t.sin() * e2);
        pts.push(cam.project([q.x, q.y, q.z]).ok()?);
    }
    Ellipse::from_boundary_points(&pts)
}

/// Synthetic real-camera image of the particles.
pub fn render_fisheye(
    set: &ParticleSet,
    cam: &FisheyeCamera,
    seed: u64,
    displaced: bool,
    options: &RenderOptions,
) -> GrayImage {
    let mut shapes = Vec::with_capacity(set.len());
    for p in &set.particles {
        let mut s = p.position;
        if displaced {
            for c in 0..3 {
                s[c] += p.displacement[c];
            }
        }
        if let Some(e) = fisheye_ellipse(cam, cam.gel_to_camera(s), p.radius) {
            shapes.push((e, luma(particle_color(seed, p.id as u64))));
        }
    }
    let mut img = GrayImage::new(cam.resolution[0], cam.resolution[1]);
    paint(&mut img, &shapes, options);
    img
}
