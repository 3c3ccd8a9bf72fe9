//! Gel, pinhole and real-camera frames; sphere-to-ellipse projection.

mod fisheye;
mod pinhole;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

pub use fisheye::{FisheyeCamera, RadialModel};
pub use pinhole::{
    focal_from_geometry, project_sphere, PinholeCamera, CANONICAL_FIELD_MM, CANONICAL_RESOLUTION, IDENTITY,
};

use crate::error::{Error, Result};

/// Filled ellipse in pixel coordinates.
///
/// `major` and `minor` are full axis lengths; `orientation` is the angle of
/// the major axis from the `u` axis, counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub center: [f64; 2],
    pub major: f64,
    pub minor: f64,
    pub orientation: f64,
}

impl Ellipse {
    pub fn circle(center: [f64; 2], diameter: f64) -> Self {
        Self {
            center,
            major: diameter,
            minor: diameter,
            orientation: 0.0,
        }
    }

    #[inline]
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let (s, c) = self.orientation.sin_cos();
        let du = u - self.center[0];
        let dv = v - self.center[1];
        let a = (du * c + dv * s) / (0.5 * self.major);
        let b = (-du * s + dv * c) / (0.5 * self.minor);
        a * a + b * b <= 1.0
    }

    /// Axis-aligned bounds `[u_min, v_min, u_max, v_max]`.
    pub fn bounds(&self) -> [f64; 4] {
        let (s, c) = self.orientation.sin_cos();
        let (a, b) = (0.5 * self.major, 0.5 * self.minor);
        let hu = (a * a * c * c + b * b * s * s).sqrt();
        let hv = (a * a * s * s + b * b * c * c).sqrt();
        [
            self.center[0] - hu,
            self.center[1] - hv,
            self.center[0] + hu,
            self.center[1] + hv,
        ]
    }

    /// Fits an ellipse to points spread evenly (in parameter) around its
    /// boundary, from their mean and covariance.
    pub fn from_boundary_points(points: &[[f64; 2]]) -> Option<Self> {
        if points.len() < 3 {
            return None;
        }
        let n = points.len() as f64;
        let mu = points.iter().fold([0.0; 2], |m, p| [m[0] + p[0] / n, m[1] + p[1] / n]);
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for p in points {
            let (dx, dy) = (p[0] - mu[0], p[1] - mu[1]);
            sxx += dx * dx / n;
            sxy += dx * dy / n;
            syy += dy * dy / n;
        }
        let tr = 0.5 * (sxx + syy);
        let disc = (0.25 * (sxx - syy).powi(2) + sxy * sxy).sqrt();
        let (l1, l2) = (tr + disc, (tr - disc).max(0.0));
        if !(l2 > 0.0) {
            return None;
        }
        // For x = a cos t, var = a²/2.
        Some(Self {
            center: mu,
            major: 2.0 * (2.0 * l1).sqrt(),
            minor: 2.0 * (2.0 * l2).sqrt(),
            orientation: 0.5 * (2.0 * sxy).atan2(sxx - syy),
        })
    }
}

pub(crate) fn matrix(m: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&[
        m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
    ])
}

pub(crate) fn check_rotation(m: &[[f64; 3]; 3], name: &str) -> Result<()> {
    let r = matrix(m);
    let err = (r.transpose() * r - Matrix3::identity()).abs().max();
    if !(err <= 1e-12) || !(r.determinant() > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{name} is not a proper rotation (|RᵀR − I| = {err:.3e})"
        )));
    }
    Ok(())
}

/// Rotation about the z axis by `angle` rad.
pub fn rotation_z(angle: f64) -> [[f64; 3]; 3] {
    let (s, c) = angle.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_fit_recovers_ellipse() {
        let (a, b, w) = (5.0, 2.0, 0.7f64);
        let pts: Vec<[f64; 2]> = (0..32)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 32.0;
                let (x, y) = (a * t.cos(), b * t.sin());
                [3.0 + x * w.cos() - y * w.sin(), -1.0 + x * w.sin() + y * w.cos()]
            })
            .collect();
        let e = Ellipse::from_boundary_points(&pts).unwrap();
        assert!((e.major - 2.0 * a).abs() < 1e-9);
        assert!((e.minor - 2.0 * b).abs() < 1e-9);
        assert!((e.orientation - w).abs() < 1e-9);
        assert!((e.center[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bounds_enclose_boundary() {
        let e = Ellipse {
            center: [10.0, 5.0],
            major: 8.0,
            minor: 3.0,
            orientation: 0.4,
        };
        let [u0, v0, u1, v1] = e.bounds();
        for k in 0..360 {
            let t = (k as f64).to_radians();
            let (x, y) = (4.0 * t.cos(), 1.5 * t.sin());
            let (s, c) = e.orientation.sin_cos();
            let (u, v) = (10.0 + x * c - y * s, 5.0 + x * s + y * c);
            assert!(u >= u0 - 1e-9 && u <= u1 + 1e-9 && v >= v0 - 1e-9 && v <= v1 + 1e-9);
        }
    }

    #[test]
    fn rotation_check() {
        check_rotation(&rotation_z(0.3), "r").unwrap();
        assert!(check_rotation(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]], "r").is_err());
    }
}
