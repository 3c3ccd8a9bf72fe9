use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::check_rotation;
use crate::error::{Error, Result};

/// Radial projection `ρ(θ)` from incidence angle to image radius (px).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialModel {
    /// `ρ = a0 + a1 θ + a2 θ² + a3 θ³ + a4 θ⁴` with `a0 = 0`.
    Polynomial { coefficients: [f64; 5] },
    /// `ρ = f tan θ`; makes the fisheye an exact pinhole.
    Perspective { focal: f64 },
}

impl RadialModel {
    pub fn equidistant(focal: f64) -> Self {
        RadialModel::Polynomial {
            coefficients: [0.0, focal, 0.0, 0.0, 0.0],
        }
    }

    pub fn radius(&self, theta: f64) -> f64 {
        match *self {
            RadialModel::Polynomial { coefficients: a } => {
                a[0] + theta * (a[1] + theta * (a[2] + theta * (a[3] + theta * a[4])))
            }
            RadialModel::Perspective { focal } => focal * theta.tan(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FisheyeCamera {
    pub radial: RadialModel,
    /// Affine stretch applied to the radial image offset (row-major).
    pub stretch: [[f64; 2]; 2],
    pub center: [f64; 2],
    pub resolution: [usize; 2],
    /// Largest incidence angle (rad) the model is valid for.
    pub max_incidence: f64,
    /// Rotation from the gel frame into the camera frame (row-major).
    pub rotation_gc: [[f64; 3]; 3],
    pub translation_gc: [f64; 3],
}

const MONOTONE_SAMPLES: usize = 2048;

impl FisheyeCamera {
    pub fn validate(&self) -> Result<()> {
        if self.resolution[0] == 0 || self.resolution[1] == 0 {
            return Err(Error::InvalidParameter("fisheye resolution must be non-zero".into()));
        }
        if !(self.max_incidence > 0.0 && self.max_incidence < std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "max_incidence must lie in (0, π), got {}",
                self.max_incidence
            )));
        }
        let [[a, b], [c, d]] = self.stretch;
        if !((a * d - b * c).abs() > 1e-12) || !(a * d - b * c).is_finite() {
            return Err(Error::InvalidParameter("fisheye stretch matrix is singular".into()));
        }
        match self.radial {
            RadialModel::Polynomial { coefficients } => {
                if coefficients[0] != 0.0 {
                    return Err(Error::CalibrationInvalid(format!(
                        "radial polynomial must satisfy ρ(0) = 0, got a0 = {}",
                        coefficients[0]
                    )));
                }
            }
            RadialModel::Perspective { focal } => {
                if !(focal > 0.0) {
                    return Err(Error::InvalidParameter(format!("perspective focal must be positive, got {focal}")));
                }
                if self.max_incidence >= std::f64::consts::FRAC_PI_2 {
                    return Err(Error::InvalidParameter(
                        "perspective model needs max_incidence below π/2".into(),
                    ));
                }
            }
        }
        self.check_monotone()?;
        check_rotation(&self.rotation_gc, "rotation_gc")
    }

    fn check_monotone(&self) -> Result<()> {
        let mut prev = self.radial.radius(0.0);
        for k in 1..=MONOTONE_SAMPLES {
            let theta = self.max_incidence * k as f64 / MONOTONE_SAMPLES as f64;
            let r = self.radial.radius(theta);
            if !(r > prev) {
                return Err(Error::CalibrationInvalid(format!(
                    "radial projection is not strictly increasing near θ = {theta:.4} rad"
                )));
            }
            prev = r;
        }
        Ok(())
    }

    pub fn gel_to_camera(&self, point: [f64; 3]) -> [f64; 3] {
        let p = super::matrix(&self.rotation_gc) * Vector3::from(point) + Vector3::from(self.translation_gc);
        [p.x, p.y, p.z]
    }

    /// Pixel of a camera-frame point.
    pub fn project(&self, point: [f64; 3]) -> Result<[f64; 2]> {
        let [x, y, z] = point;
        let r = (x * x + y * y).sqrt();
        let theta = r.atan2(z);
        if theta > self.max_incidence || !(z > 0.0 || r > 0.0) {
            return Err(Error::OutOfField {
                incidence: theta,
                max: self.max_incidence,
            });
        }
        let rho = self.radial.radius(theta);
        let (c, s) = if r > 0.0 { (x / r, y / r) } else { (1.0, 0.0) };
        let (dx, dy) = (rho * c, rho * s);
        let [[a, b], [cc, d]] = self.stretch;
        Ok([a * dx + b * dy + self.center[0], cc * dx + d * dy + self.center[1]])
    }

    /// True if `pixel` lies inside the image.
    pub fn in_frame(&self, pixel: [f64; 2]) -> bool {
        pixel[0] >= 0.0
            && pixel[1] >= 0.0
            && pixel[0] <= self.resolution[0] as f64
            && pixel[1] <= self.resolution[1] as f64
    }
}
