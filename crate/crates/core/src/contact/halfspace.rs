use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear-elastic half-space standing in for the soft gel.
///
/// Lengths are in millimetres. The modulus is stored in pascal as it appears
/// in configuration files; solver code works in N/mm² (MPa).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElasticHalfSpace {
    /// Young's modulus (Pa).
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub friction_mu: f64,
    /// Width and depth of the particle layer footprint (mm).
    pub layer_size: [f64; 2],
    /// Thickness of the soft stack above the gel-frame origin (mm).
    pub gel_thickness: f64,
    /// Tangential traction per millimetre of lateral offset (N/mm³).
    /// Defaults to `G / gel_thickness` when unset.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tangential_stiffness: Option<f64>,
}

impl Default for ElasticHalfSpace {
    fn default() -> Self {
        Self {
            young_modulus: 50.0e3,
            poisson_ratio: 0.48,
            friction_mu: 0.9,
            layer_size: [30.0, 30.0],
            gel_thickness: 6.0,
            tangential_stiffness: None,
        }
    }
}

impl ElasticHalfSpace {
    pub fn new(young_modulus: f64, poisson_ratio: f64, friction_mu: f64) -> Result<Self> {
        let hs = Self {
            young_modulus,
            poisson_ratio,
            friction_mu,
            ..Self::default()
        };
        hs.validate()?;
        Ok(hs)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.young_modulus > 0.0 && self.young_modulus.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "young_modulus must be positive, got {}",
                self.young_modulus
            )));
        }
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::InvalidParameter(format!(
                "poisson_ratio must lie in [0, 0.5), got {}",
                self.poisson_ratio
            )));
        }
        if !(self.friction_mu >= 0.0 && self.friction_mu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "friction_mu must be non-negative, got {}",
                self.friction_mu
            )));
        }
        if self.layer_size.iter().any(|&s| !(s > 0.0)) || !(self.gel_thickness > 0.0) {
            return Err(Error::InvalidParameter(
                "layer_size and gel_thickness must be positive".into(),
            ));
        }
        if let Some(k) = self.tangential_stiffness {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "tangential_stiffness must be non-negative, got {k}"
                )));
            }
        }
        Ok(())
    }

    /// Young's modulus in N/mm².
    pub fn modulus(&self) -> f64 {
        self.young_modulus * 1e-6
    }

    /// Plane-strain modulus `E / (1 - ν²)` in N/mm².
    pub fn effective_modulus(&self) -> f64 {
        self.modulus() / (1.0 - self.poisson_ratio * self.poisson_ratio)
    }

    /// Shear modulus in N/mm².
    pub fn shear_modulus(&self) -> f64 {
        self.modulus() / (2.0 * (1.0 + self.poisson_ratio))
    }

    pub fn tangential_stiffness(&self) -> f64 {
        self.tangential_stiffness
            .unwrap_or_else(|| self.shear_modulus() / self.gel_thickness)
    }

    /// Surface compliance factor `(1 - ν²) / (π E)` in mm²/N.
    pub(crate) fn surface_compliance(&self) -> f64 {
        1.0 / (std::f64::consts::PI * self.effective_modulus())
    }
}
