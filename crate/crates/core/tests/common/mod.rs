//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tactile_sim::camera::{rotation_z, FisheyeCamera, PinholeCamera, RadialModel};
use tactile_sim::contact::NodalForce;
use tactile_sim::labels::{ForceGrid, LABEL_SIDE};
use tactile_sim::particles::{sample_particles, LayerSpec, Particle, ParticleSet};
use tactile_sim::raster::GrayImage;

/// Fisheye camera looking up at the gel from 15 mm below its centre, slightly
/// rolled, with a mildly non-equidistant lens. `offset` is added to t^GC.
pub fn synthetic_fisheye(offset: [f64; 3]) -> FisheyeCamera {
    let r = rotation_z(0.03);
    let c = [15.0, 15.0, -15.0];
    let mut t = [0.0; 3];
    for i in 0..3 {
        t[i] = -(r[i][0] * c[0] + r[i][1] * c[1] + r[i][2] * c[2]) + offset[i];
    }
    FisheyeCamera {
        radial: RadialModel::Polynomial {
            coefficients: [0.0, 205.0, 0.0, -6.0, 0.0],
        },
        stretch: [[1.0, 0.002], [0.0, 0.995]],
        center: [221.5, 218.0],
        resolution: [440, 440],
        max_incidence: 1.3,
        rotation_gc: r,
        translation_gc: t,
    }
}

/// Full major-axis length of a sphere's pinhole silhouette, found by
/// bisecting ray/sphere intersection along `rays` image directions from
/// the projected centre and taking the longest chord.
pub fn raycast_major_axis(center: [f64; 3], radius: f64, focal: f64, rays: usize) -> f64 {
    let hits = |u: f64, v: f64| {
        let d = [u / focal, v / focal, 1.0];
        let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
        let t = (d[0] * center[0] + d[1] * center[1] + d[2] * center[2]) / dd;
        let q = [t * d[0] - center[0], t * d[1] - center[1], t * d[2] - center[2]];
        q[0] * q[0] + q[1] * q[1] + q[2] * q[2] <= radius * radius
    };
    let o = [focal * center[0] / center[2], focal * center[1] / center[2]];
    assert!(hits(o[0], o[1]));
    let mut boundary = Vec::with_capacity(rays);
    for k in 0..rays {
        let a = std::f64::consts::TAU * k as f64 / rays as f64;
        let dir = [a.cos(), a.sin()];
        let (mut lo, mut hi) = (0.0, 1.0);
        while hits(o[0] + hi * dir[0], o[1] + hi * dir[1]) {
            hi *= 2.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if hits(o[0] + mid * dir[0], o[1] + mid * dir[1]) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        boundary.push([o[0] + lo * dir[0], o[1] + lo * dir[1]]);
    }
    let mut best: f64 = 0.0;
    for (i, a) in boundary.iter().enumerate() {
        for b in &boundary[i + 1..] {
            best = best.max((a[0] - b[0]).hypot(a[1] - b[1]));
        }
    }
    best
}

/// Smooth random texture: a sum of sinusoids with 18-60 px wavelengths.
pub fn smooth_texture(seed: u64) -> impl Fn(f64, f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<[f64; 4]> = (0..12)
        .map(|_| {
            let wl = rng.gen_range(18.0..60.0);
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            let k = std::f64::consts::TAU / wl;
            [k * a.cos(), k * a.sin(), rng.gen_range(0.0..std::f64::consts::TAU), rng.gen_range(0.5..1.0)]
        })
        .collect();
    let norm: f64 = waves.iter().map(|w| w[3]).sum();
    move |x: f64, y: f64| {
        let s: f64 = waves.iter().map(|w| w[3] * (w[0] * x + w[1] * y + w[2]).sin()).sum();
        127.5 + 120.0 * s / norm
    }
}

/// Samples `f` at pixel centres after moving the content by `(dx, dy)`.
pub fn shifted_image(f: &impl Fn(f64, f64) -> f64, width: usize, height: usize, dx: f64, dy: f64) -> GrayImage {
    let mut img = GrayImage::new(width, height);
    for y in 0..height {
        for x in 0..width {
            let v = f(x as f64 + 0.5 - dx, y as f64 + 0.5 - dy);
            img.set(x, y, v.round().clamp(0.0, 255.0) as u8);
        }
    }
    img
}

/// Shepard interpolation over the `k` nearest nodes by exhaustive search.
pub fn brute_force_idw(nodes: &[[f64; 3]], values: &[[f64; 3]], q: [f64; 3], power: f64, k: usize) -> [f64; 3] {
    let mut d: Vec<(f64, usize)> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| ((n[0] - q[0]).powi(2) + (n[1] - q[1]).powi(2) + (n[2] - q[2]).powi(2), i))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    if d[0].0.sqrt() < 1e-12 {
        return values[d[0].1];
    }
    let (mut num, mut den) = ([0.0; 3], 0.0);
    for &(d2, i) in d.iter().take(k) {
        let w = 1.0 / d2.sqrt().powf(power);
        for c in 0..3 {
            num[c] += w * values[i][c];
        }
        den += w;
    }
    [num[0] / den, num[1] / den, num[2] / den]
}

/// Binning by linear search over bin edges, accumulating in node order.
pub fn brute_force_bins(forces: &[NodalForce]) -> ForceGrid {
    let edge = |k: usize| 30.0 * k as f64 / LABEL_SIDE as f64;
    let bin = |x: f64| (0..LABEL_SIDE).rev().find(|&k| x >= edge(k)).unwrap();
    let mut g = ForceGrid::zeros();
    for nf in forces {
        let (ix, iy) = (bin(nf.position[0]), bin(nf.position[1]));
        for c in 0..3 {
            g.data[(c * LABEL_SIDE + iy) * LABEL_SIDE + ix] += nf.force[c];
        }
    }
    g
}

pub fn random_nodal_forces(rng: &mut impl Rng, n: usize) -> Vec<NodalForce> {
    (0..n)
        .map(|_| NodalForce {
            position: [rng.gen_range(0.0..=30.0), rng.gen_range(0.0..=30.0)],
            force: [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-2.0..0.0)],
        })
        .collect()
}

/// Particle layer whose image ends exactly at the pinhole frame: random
/// particles pulled in by their radius, plus a ring on the remap plane
/// (z = 0) whose silhouettes just touch the frame edges.
pub fn framed_particles(seed: u64, count: usize) -> ParticleSet {
    let mut set = sample_particles(seed, &LayerSpec { nominal_count: count, ..LayerSpec::default() }).unwrap();
    for p in &mut set.particles {
        for c in 0..2 {
            p.position[c] = p.radius + p.position[c] * (30.0 - 2.0 * p.radius) / 30.0;
        }
    }
    let cam = PinholeCamera::default();
    let px_per_mm = cam.focal / cam.translation_gp[2];
    let r = 0.09;
    let n = 150;
    for k in 0..=n {
        let s = r + (30.0 - 2.0 * r) * k as f64 / n as f64;
        // Which image bounds [u0, v0, u1, v1] to pin, and their targets.
        for (xy, pins) in [
            ([r, s], [Some(0.0), None, None, None]),
            ([30.0 - r, s], [None, None, Some(440.0), None]),
            ([s, r], [None, Some(0.0), None, None]),
            ([s, 30.0 - r], [None, None, None, Some(440.0)]),
        ] {
            let mut pos = [xy[0], xy[1], 0.0];
            for _ in 0..20 {
                let b = cam.project_sphere(cam.gel_to_pinhole(pos), r).unwrap().bounds();
                for (i, target) in pins.iter().enumerate() {
                    if let Some(t) = target {
                        pos[i % 2] += (t - b[i]) / px_per_mm;
                    }
                }
            }
            set.particles.push(Particle { id: set.particles.len() as u32, position: pos, radius: r, displacement: [0.0; 3] });
        }
    }
    set
}
