//! Two-channel 88×88 network inputs from a tactile image pair.

mod flow;

use serde::{Deserialize, Serialize};

pub use flow::{dense_flow, FlowField, FlowParams};

use crate::error::{Error, Result};
use crate::raster::GrayImage;

pub const FEATURE_SIDE: usize = 88;
pub const FEATURE_CHANNELS: usize = 2;
pub const FEATURE_LEN: usize = FEATURE_CHANNELS * FEATURE_SIDE * FEATURE_SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    OpticalFlow,
    Raw,
}

impl std::fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeatureKind::OpticalFlow => "optical_flow",
            FeatureKind::Raw => "raw",
        })
    }
}

/// `2 × 88 × 88` tensor, channel-major then row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub kind: FeatureKind,
    pub data: Vec<f32>,
    /// Factor applied to the source units: 1 for flow (px), 1/255 for raw.
    pub scale: f32,
}

impl FeatureTensor {
    pub fn new(kind: FeatureKind, data: Vec<f32>, scale: f32) -> Result<Self> {
        if data.len() != FEATURE_LEN {
            return Err(Error::ShapeMismatch(format!(
                "feature tensor needs {FEATURE_LEN} values, got {}",
                data.len()
            )));
        }
        Ok(Self { kind, data, scale })
    }

    #[inline]
    pub fn get(&self, channel: usize, row: usize, col: usize) -> f32 {
        self.data[(channel * FEATURE_SIDE + row) * FEATURE_SIDE + col]
    }

    /// Mirrors columns; flow also negates its `u` channel.
    pub fn flip_horizontal(&self) -> Self {
        let n = FEATURE_SIDE;
        let mut out = self.data.clone();
        for c in 0..FEATURE_CHANNELS {
            for r in 0..n {
                for col in 0..n {
                    let v = self.data[(c * n + r) * n + (n - 1 - col)];
                    out[(c * n + r) * n + col] = if c == 0 && self.kind == FeatureKind::OpticalFlow { -v } else { v };
                }
            }
        }
        Self { data: out, ..*self }
    }

    /// Mirrors rows; flow also negates its `v` channel.
    pub fn flip_vertical(&self) -> Self {
        let n = FEATURE_SIDE;
        let mut out = self.data.clone();
        for c in 0..FEATURE_CHANNELS {
            for r in 0..n {
                for col in 0..n {
                    let v = self.data[(c * n + (n - 1 - r)) * n + col];
                    out[(c * n + r) * n + col] = if c == 1 && self.kind == FeatureKind::OpticalFlow { -v } else { v };
                }
            }
        }
        Self { data: out, ..*self }
    }
}

/// Bin edges `⌊b·len/bins⌋`, `b = 0..=bins`.
fn bin_edges(len: usize, bins: usize) -> Vec<usize> {
    (0..=bins).map(|b| b * len / bins).collect()
}

/// Mean of each of `bins × bins` evenly partitioned regions of a row-major
/// `width × height` plane.
pub fn average_pool(plane: &[f64], width: usize, height: usize, bins: usize) -> Result<Vec<f64>> {
    if plane.len() != width * height {
        return Err(Error::ShapeMismatch(format!(
            "{} values for a {width}×{height} plane",
            plane.len()
        )));
    }
    if width < bins || height < bins || bins == 0 {
        return Err(Error::ShapeMismatch(format!(
            "cannot pool {width}×{height} into {bins}×{bins} bins"
        )));
    }
    let ex = bin_edges(width, bins);
    let ey = bin_edges(height, bins);
    let mut out = vec![0.0; bins * bins];
    for by in 0..bins {
        for bx in 0..bins {
            let mut s = 0.0;
            for y in ey[by]..ey[by + 1] {
                s += plane[y * width + ex[bx]..y * width + ex[bx + 1]].iter().sum::<f64>();
            }
            let count = (ey[by + 1] - ey[by]) * (ex[bx + 1] - ex[bx]);
            out[by * bins + bx] = s / count as f64;
        }
    }
    Ok(out)
}

pub fn pool_flow(flow: &FlowField) -> Result<FeatureTensor> {
    let mut data = Vec::with_capacity(FEATURE_LEN);
    for ch in [&flow.u, &flow.v] {
        let plane: Vec<f64> = ch.iter().map(|&x| x as f64).collect();
        let pooled = average_pool(&plane, flow.width, flow.height, FEATURE_SIDE)?;
        data.extend(pooled.into_iter().map(|x| x as f32));
    }
    FeatureTensor::new(FeatureKind::OpticalFlow, data, 1.0)
}

pub fn raw_features(rest: &GrayImage, deformed: &GrayImage) -> Result<FeatureTensor> {
    if rest.dimensions() != deformed.dimensions() {
        return Err(Error::ShapeMismatch(format!(
            "raw feature inputs {:?} and {:?} differ",
            rest.dimensions(),
            deformed.dimensions()
        )));
    }
    let mut data = Vec::with_capacity(FEATURE_LEN);
    for img in [rest, deformed] {
        let plane: Vec<f64> = img.data.iter().map(|&v| v as f64).collect();
        let pooled = average_pool(&plane, img.width, img.height, FEATURE_SIDE)?;
        data.extend(pooled.into_iter().map(|x| (x / 255.0) as f32));
    }
    FeatureTensor::new(FeatureKind::Raw, data, 1.0 / 255.0)
}

/// Feature extraction for either kind.
pub fn extract(kind: FeatureKind, rest: &GrayImage, deformed: &GrayImage, flow: &FlowParams) -> Result<FeatureTensor> {
    match kind {
        FeatureKind::Raw => raw_features(rest, deformed),
        FeatureKind::OpticalFlow => pool_flow(&dense_flow(rest, deformed, flow)?),
    }
}
