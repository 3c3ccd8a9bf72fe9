//! Single-file TOML configuration for the whole pipeline.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::camera::PinholeCamera;
use crate::contact::{ElasticHalfSpace, SolverSettings, TrajectoryConfig};
use crate::dataset::AugmentConfig;
use crate::error::{Error, Result};
use crate::features::{FeatureKind, FlowParams};
use crate::particles::{DisplacementConfig, LayerSpec};
use crate::remap::SearchSpec;
use crate::render::RenderOptions;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub trajectories: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub feature_kind: FeatureKind,
    pub dataset_path: PathBuf,
    /// Contact grid cells per side.
    pub grid_n: usize,
    pub val_fraction: f64,
    pub material: ElasticHalfSpace,
    pub solver: SolverSettings,
    pub trajectory: TrajectoryConfig,
    pub particles: LayerSpec,
    pub displacement: DisplacementConfig,
    pub camera: PinholeCamera,
    pub render: RenderOptions,
    pub flow: FlowParams,
    pub augment: AugmentConfig,
    pub refine: SearchSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trajectories: 3300,
            workers: 0,
            feature_kind: FeatureKind::OpticalFlow,
            dataset_path: PathBuf::from("dataset"),
            grid_n: 32,
            val_fraction: 0.2,
            material: ElasticHalfSpace::default(),
            solver: SolverSettings::default(),
            trajectory: TrajectoryConfig::default(),
            particles: LayerSpec::default(),
            displacement: DisplacementConfig::default(),
            camera: PinholeCamera::default(),
            render: RenderOptions::default(),
            flow: FlowParams::default(),
            augment: AugmentConfig::default(),
            refine: SearchSpec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trajectories == 0 {
            return Err(Error::InvalidParameter("trajectory count must be positive".into()));
        }
        if self.grid_n < 16 {
            return Err(Error::InvalidParameter(format!("grid_n must be at least 16, got {}", self.grid_n)));
        }
        if !(0.0..=1.0).contains(&self.val_fraction) {
            return Err(Error::InvalidParameter("val_fraction must lie in [0, 1]".into()));
        }
        if self.material.layer_size != self.trajectory.layer_size {
            return Err(Error::InvalidParameter(
                "material and trajectory layer sizes disagree".into(),
            ));
        }
        self.material.validate()?;
        self.trajectory.validate()?;
        self.particles.validate()?;
        self.displacement.mesh.validate()?;
        self.camera.validate()?;
        self.flow.validate()?;
        self.refine.offsets()?;
        let parent = match self.dataset_path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        if !parent.is_dir() {
            return Err(Error::InvalidParameter(format!(
                "dataset parent directory {} does not exist",
                parent.display()
            )));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::parse("config", e))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::parse("config", e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        toml::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))
    }

    /// SHA-256 of the canonical TOML rendering, leaving out the worker count
    /// and the output path, which do not change what is produced.
    pub fn hash(&self) -> Result<String> {
        let normalized = Self {
            workers: 0,
            dataset_path: PathBuf::new(),
            ..self.clone()
        };
        Ok(hex::encode(Sha256::digest(normalized.to_toml()?.as_bytes())))
    }
}
