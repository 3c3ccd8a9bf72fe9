use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{check_rotation, Ellipse};
use crate::error::{Error, Result};

/// Side length of the canonical pinhole image (px).
pub const CANONICAL_RESOLUTION: usize = 440;
/// Width of the particle layer the canonical image spans (mm).
pub const CANONICAL_FIELD_MM: f64 = 30.0;

/// Focal length (px) at which a camera `tz` mm below the layer exactly
/// frames the 30 mm layer in 440 px.
pub fn focal_from_geometry(tz: f64) -> Result<f64> {
    if !(tz > 0.0) || !tz.is_finite() {
        return Err(Error::InvalidParameter(format!("tz must be positive, got {tz}")));
    }
    Ok(CANONICAL_RESOLUTION as f64 / CANONICAL_FIELD_MM * tz)
}

/// Ideal pinhole camera looking along +z of its own frame.
///
/// Pixel coordinates are continuous with pixel `(i, j)` covering
/// `[i, i+1) × [j, j+1)`; `u` grows with x and `v` with y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinholeCamera {
    pub focal: f64,
    pub center: [f64; 2],
    pub resolution: [usize; 2],
    /// Rotation from the gel frame into the camera frame (row-major).
    pub rotation_gp: [[f64; 3]; 3],
    /// Translation from the gel frame into the camera frame (mm).
    pub translation_gp: [f64; 3],
}

impl Default for PinholeCamera {
    fn default() -> Self {
        Self::canonical(15.0).expect("positive tz")
    }
}

impl PinholeCamera {
    /// Camera centred under the 30×30 mm layer at distance `tz`, gel z along
    /// the optical axis.
    pub fn canonical(tz: f64) -> Result<Self> {
        let half = CANONICAL_FIELD_MM / 2.0;
        let c = CANONICAL_RESOLUTION as f64 / 2.0;
        Ok(Self {
            focal: focal_from_geometry(tz)?,
            center: [c, c],
            resolution: [CANONICAL_RESOLUTION; 2],
            rotation_gp: IDENTITY,
            translation_gp: [-half, -half, tz],
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal > 0.0) || !self.focal.is_finite() {
            return Err(Error::InvalidParameter(format!("focal length must be positive, got {}", self.focal)));
        }
        if self.resolution[0] == 0 || self.resolution[1] == 0 {
            return Err(Error::InvalidParameter("pinhole resolution must be non-zero".into()));
        }
        if !(self.translation_gp[2] > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "pinhole tz must be positive, got {}",
                self.translation_gp[2]
            )));
        }
        check_rotation(&self.rotation_gp, "rotation_gp")
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        super::matrix(&self.rotation_gp)
    }

    /// `s^P = R s^G + t`.
    pub fn gel_to_pinhole(&self, point: [f64; 3]) -> [f64; 3] {
        let p = self.rotation() * Vector3::from(point) + Vector3::from(self.translation_gp);
        [p.x, p.y, p.z]
    }

    /// Displacements rotate but do not translate.
    pub fn gel_disp_to_pinhole(&self, disp: [f64; 3]) -> [f64; 3] {
        let d = self.rotation() * Vector3::from(disp);
        [d.x, d.y, d.z]
    }

    pub fn pinhole_to_gel(&self, point: [f64; 3]) -> [f64; 3] {
        let p = self.rotation().transpose() * (Vector3::from(point) - Vector3::from(self.translation_gp));
        [p.x, p.y, p.z]
    }

    /// Projects a camera-frame point; `None` behind the camera.
    pub fn project(&self, p: [f64; 3]) -> Option<[f64; 2]> {
        if p[2] <= 0.0 {
            return None;
        }
        Some([
            self.focal * p[0] / p[2] + self.center[0],
            self.focal * p[1] / p[2] + self.center[1],
        ])
    }

    /// Camera-frame point at depth `z` seen at pixel `(u, v)`.
    pub fn back_project(&self, pixel: [f64; 2], z: f64) -> [f64; 3] {
        [
            z / self.focal * (pixel[0] - self.center[0]),
            z / self.focal * (pixel[1] - self.center[1]),
            z,
        ]
    }

    /// Pinhole-frame point where the ray through `pixel` meets the gel plane
    /// `z^G = plane_z`. `None` if the ray is parallel to or points away from it.
    pub fn back_project_to_gel_plane(&self, pixel: [f64; 2], plane_z: f64) -> Option<[f64; 3]> {
        let r = self.rotation();
        let t = Vector3::from(self.translation_gp);
        let d = Vector3::new(
            (pixel[0] - self.center[0]) / self.focal,
            (pixel[1] - self.center[1]) / self.focal,
            1.0,
        );
        let rt = r.transpose();
        let dz = (rt * d).z;
        if dz.abs() < 1e-15 {
            return None;
        }
        let lambda = (plane_z + (rt * t).z) / dz;
        if !(lambda > 0.0) {
            return None;
        }
        Some([lambda * d.x, lambda * d.y, lambda])
    }

    /// Image of a sphere with camera-frame centre `center` and radius `radius`.
    pub fn project_sphere(&self, center: [f64; 3], radius: f64) -> Result<Ellipse> {
        project_sphere(center, radius, self.focal, self.center)
    }
}

/// Identity rotation.
pub const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Sphere silhouette as an ellipse.
///
/// Works in the plane spanned by the optical axis and the sphere centre:
/// the two tangent rays at elevation `α ∓ β` hit the image plane at the
/// major-axis extremes. The minor axis equals the on-axis diameter at the
/// same depth, `2fR/√(z² − R²)`.
pub fn project_sphere(center: [f64; 3], radius: f64, focal: f64, principal: [f64; 2]) -> Result<Ellipse> {
    let [x, y, z] = center;
    if !(radius > 0.0) {
        return Err(Error::Geometry(format!("sphere radius must be positive, got {radius}")));
    }
    if !(z > radius) {
        return Err(Error::Geometry(format!(
            "sphere at z = {z} mm is not fully in front of the camera (radius {radius} mm)"
        )));
    }
    let x_t = x.hypot(y);
    let alpha = z.atan2(x_t);
    let beta = (radius / x_t.hypot(z)).asin();
    let gamma = alpha - beta;
    // Radial image coordinates of the two tangent points (signed, px).
    let rho_r = focal / gamma.tan();
    let rho_l = focal / (alpha + beta).tan();
    let major = rho_r - rho_l;
    let minor = 2.0 * focal * radius / (z * z - radius * radius).sqrt();
    let omega = y.atan2(x);
    let mid = 0.5 * (rho_r + rho_l);
    Ok(Ellipse {
        center: [principal[0] + mid * omega.cos(), principal[1] + mid * omega.sin()],
        major: major.max(minor),
        minor,
        orientation: omega,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focal_examples() {
        assert_eq!(focal_from_geometry(30.0).unwrap(), 440.0);
        assert!((focal_from_geometry(15.0).unwrap() - 220.0).abs() < 1e-12);
        assert!(focal_from_geometry(0.0).is_err());
    }

    #[test]
    fn transforms() {
        let mut cam = PinholeCamera::default();
        cam.translation_gp = [0.0, 0.0, 15.0];
        assert_eq!(cam.gel_to_pinhole([1.0, 2.0, 0.0]), [1.0, 2.0, 15.0]);
        assert_eq!(cam.gel_disp_to_pinhole([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0]);
        let p = [3.0, -1.0, 2.0];
        let back = cam.pinhole_to_gel(cam.gel_to_pinhole(p));
        for c in 0..3 {
            assert!((back[c] - p[c]).abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_camera_frames_layer_bottom() {
        let cam = PinholeCamera::default();
        let a = cam.project(cam.gel_to_pinhole([0.0, 0.0, 0.0])).unwrap();
        let b = cam.project(cam.gel_to_pinhole([30.0, 30.0, 0.0])).unwrap();
        assert!(a[0].abs() < 1e-9 && a[1].abs() < 1e-9);
        assert!((b[0] - 440.0).abs() < 1e-9 && (b[1] - 440.0).abs() < 1e-9);
    }

    #[test]
    fn back_projection_is_inverse_of_projection() {
        let cam = PinholeCamera::default();
        for &(u, v) in &[(0.0, 0.0), (13.5, 400.25), (439.9, 220.0)] {
            let s = cam.back_project_to_gel_plane([u, v], 0.0).unwrap();
            let q = cam.project(s).unwrap();
            assert!((q[0] - u).abs() < 1e-9 && (q[1] - v).abs() < 1e-9);
            assert!(cam.pinhole_to_gel(s)[2].abs() < 1e-12);
        }
    }

    #[test]
    fn sphere_behind_camera_rejected() {
        assert!(project_sphere([0.0, 0.0, 0.05], 0.08, 220.0, [0.0, 0.0]).is_err());
    }
}
