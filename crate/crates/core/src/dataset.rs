//! On-disk datasets: a JSON manifest plus raw little-endian f32 tensors.
//!
//! ```text
//! <dir>/manifest.json
//! <dir>/features.bin   count × 2 × 88 × 88
//! <dir>/labels.bin     count × 3 × 20 × 20
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{FeatureKind, FeatureTensor, FEATURE_CHANNELS, FEATURE_LEN, FEATURE_SIDE};
use crate::labels::{ForceGrid, LABEL_CHANNELS, LABEL_LEN, LABEL_SIDE};

pub const DATASET_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const FEATURES_FILE: &str = "features.bin";
pub const LABELS_FILE: &str = "labels.bin";
pub const DTYPE: &str = "float32_le";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub trajectory: u64,
    pub step: usize,
    /// Human-readable indenter descriptor, e.g. `sphere(r=3mm)`.
    pub indenter: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: FeatureTensor,
    /// Values are held at f32 precision so that a write/read round trip is exact.
    pub label: ForceGrid,
    pub meta: SampleMeta,
}

impl Sample {
    pub fn new(features: FeatureTensor, label: ForceGrid, meta: SampleMeta) -> Self {
        let data = label.data.iter().map(|&v| v as f32 as f64).collect();
        Self {
            features,
            label: ForceGrid { data },
            meta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Val,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub trajectory: u64,
    pub step: usize,
    pub indenter: String,
    pub seed: u64,
    pub split: Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub seed: u64,
    pub val_fraction: f64,
    pub val_trajectories: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileRecord {
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub feature_kind: FeatureKind,
    pub count: usize,
    pub dtype: String,
    pub feature_shape: [usize; 3],
    pub label_shape: [usize; 3],
    /// Largest |value| per label channel over the training split.
    pub label_max: [f64; 3],
    pub split: SplitInfo,
    pub samples: Vec<SampleRecord>,
    pub files: BTreeMap<String, FileRecord>,
    /// False when the producing run stopped early.
    pub complete: bool,
    pub config_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WriteOptions {
    pub split_seed: u64,
    pub val_fraction: f64,
    pub complete: bool,
    pub config_hash: Option<String>,
}

impl Default for WriteOptions {
    fn default() -> Self {
        Self {
            split_seed: 0,
            val_fraction: 0.2,
            complete: true,
            config_hash: None,
        }
    }
}

/// Trajectory ids assigned to validation: a seeded shuffle of the distinct
/// ids, first `round(fraction · n)` taken.
pub fn validation_trajectories(ids: impl IntoIterator<Item = u64>, fraction: f64, seed: u64) -> BTreeSet<u64> {
    let mut unique: Vec<u64> = ids.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let n_val = (unique.len() as f64 * fraction).round() as usize;
    unique.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    unique.into_iter().take(n_val).collect()
}

fn label_max(samples: &[Sample], records: &[SampleRecord]) -> [f64; 3] {
    let mut m = [0.0f64; 3];
    for (s, r) in samples.iter().zip(records) {
        if r.split != Split::Train {
            continue;
        }
        for (c, mc) in m.iter_mut().enumerate() {
            for &v in s.label.channel(c) {
                *mc = mc.max((v as f32).abs() as f64);
            }
        }
    }
    m
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn write_dataset(samples: &[Sample], dir: &Path, options: &WriteOptions) -> Result<Manifest> {
    if !(0.0..=1.0).contains(&options.val_fraction) {
        return Err(Error::InvalidParameter(format!(
            "validation fraction must lie in [0, 1], got {}",
            options.val_fraction
        )));
    }
    let kind = samples.first().map_or(FeatureKind::Raw, |s| s.features.kind);
    for (i, s) in samples.iter().enumerate() {
        if s.features.kind != kind {
            return Err(Error::ShapeMismatch(format!(
                "sample {i} has {} features in a {kind} dataset",
                s.features.kind
            )));
        }
        if s.features.data.len() != FEATURE_LEN || s.label.data.len() != LABEL_LEN {
            return Err(Error::ShapeMismatch(format!("sample {i} has inconsistent tensor shapes")));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;

    let val = validation_trajectories(samples.iter().map(|s| s.meta.trajectory), options.val_fraction, options.split_seed);
    let records: Vec<SampleRecord> = samples
        .iter()
        .map(|s| SampleRecord {
            trajectory: s.meta.trajectory,
            step: s.meta.step,
            indenter: s.meta.indenter.clone(),
            seed: s.meta.seed,
            split: if val.contains(&s.meta.trajectory) { Split::Val } else { Split::Train },
        })
        .collect();

    let mut feat = Vec::with_capacity(samples.len() * FEATURE_LEN * 4);
    let mut lab = Vec::with_capacity(samples.len() * LABEL_LEN * 4);
    for s in samples {
        for v in &s.features.data {
            feat.extend_from_slice(&v.to_le_bytes());
        }
        for v in &s.label.data {
            lab.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    let mut files = BTreeMap::new();
    for (name, bytes) in [(FEATURES_FILE, &feat), (LABELS_FILE, &lab)] {
        write_file(&dir.join(name), bytes)?;
        files.insert(
            name.to_string(),
            FileRecord {
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            },
        );
    }
    let manifest = Manifest {
        version: DATASET_VERSION,
        feature_kind: kind,
        count: samples.len(),
        dtype: DTYPE.into(),
        feature_shape: [FEATURE_CHANNELS, FEATURE_SIDE, FEATURE_SIDE],
        label_shape: [LABEL_CHANNELS, LABEL_SIDE, LABEL_SIDE],
        label_max: label_max(samples, &records),
        split: SplitInfo {
            seed: options.split_seed,
            val_fraction: options.val_fraction,
            val_trajectories: val.into_iter().collect(),
        },
        samples: records,
        files,
        complete: options.complete,
        config_hash: options.config_hash.clone(),
    };
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::parse("manifest", e))?;
    write_file(&dir.join(MANIFEST_FILE), json.as_bytes())?;
    Ok(manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub manifest: Manifest,
    pub samples: Vec<Sample>,
}

fn read_tensor_file(dir: &Path, name: &str, manifest: &Manifest, per_sample: usize) -> Result<Vec<f32>> {
    let path = dir.join(name);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let expected = manifest.count * per_sample * 4;
    let integrity = |reason: String| Error::Integrity {
        path: path.clone(),
        reason,
    };
    if bytes.len() != expected {
        return Err(integrity(format!("{} bytes, expected {expected}", bytes.len())));
    }
    let rec = manifest
        .files
        .get(name)
        .ok_or_else(|| integrity("file not listed in the manifest".into()))?;
    if rec.bytes != bytes.len() as u64 || rec.sha256 != sha256_hex(&bytes) {
        return Err(integrity("content does not match the manifest checksum".into()));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    if manifest.version != DATASET_VERSION {
        return Err(Error::VersionMismatch {
            found: manifest.version,
            expected: DATASET_VERSION,
        });
    }
    let mismatch = |what: &str| Error::Integrity {
        path: path.clone(),
        reason: what.to_string(),
    };
    if manifest.dtype != DTYPE {
        return Err(mismatch("unsupported dtype"));
    }
    if manifest.feature_shape != [FEATURE_CHANNELS, FEATURE_SIDE, FEATURE_SIDE]
        || manifest.label_shape != [LABEL_CHANNELS, LABEL_SIDE, LABEL_SIDE]
    {
        return Err(mismatch("unexpected tensor shapes"));
    }
    if manifest.samples.len() != manifest.count {
        return Err(mismatch("sample records disagree with count"));
    }
    Ok(manifest)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    let manifest = read_manifest(dir)?;
    let feats = read_tensor_file(dir, FEATURES_FILE, &manifest, FEATURE_LEN)?;
    let labels = read_tensor_file(dir, LABELS_FILE, &manifest, LABEL_LEN)?;
    let scale = match manifest.feature_kind {
        FeatureKind::OpticalFlow => 1.0,
        FeatureKind::Raw => 1.0 / 255.0,
    };
    let samples: Vec<Sample> = manifest
        .samples
        .iter()
        .enumerate()
        .map(|(i, r)| Sample {
            features: FeatureTensor {
                kind: manifest.feature_kind,
                data: feats[i * FEATURE_LEN..(i + 1) * FEATURE_LEN].to_vec(),
                scale,
            },
            label: ForceGrid {
                data: labels[i * LABEL_LEN..(i + 1) * LABEL_LEN].iter().map(|&v| v as f64).collect(),
            },
            meta: SampleMeta {
                trajectory: r.trajectory,
                step: r.step,
                indenter: r.indenter.clone(),
                seed: r.seed,
            },
        })
        .collect();
    if label_max(&samples, &manifest.samples) != manifest.label_max {
        return Err(Error::Integrity {
            path: dir.join(MANIFEST_FILE),
            reason: "label maxima do not match the training samples".into(),
        });
    }
    Ok(Dataset { manifest, samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipAxis {
    Horizontal,
    Vertical,
}

pub fn augment_flip(sample: &Sample, axis: FlipAxis) -> Sample {
    let (features, label) = match axis {
        FlipAxis::Horizontal => (sample.features.flip_horizontal(), sample.label.flip_horizontal()),
        FlipAxis::Vertical => (sample.features.flip_vertical(), sample.label.flip_vertical()),
    };
    Sample {
        features,
        label,
        meta: sample.meta.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhotometricRanges {
    pub brightness: [f64; 2],
    pub noise_fraction: [f64; 2],
}

impl Default for PhotometricRanges {
    fn default() -> Self {
        Self {
            brightness: [0.8, 1.2],
            noise_fraction: [0.0, 0.01],
        }
    }
}

/// Brightness factor then salt-and-pepper: each cell independently, with
/// probability `noise_fraction`, is set to 0 or 1.
pub fn apply_photometric(sample: &Sample, brightness: f64, noise_fraction: f64, rng: &mut impl Rng) -> Result<Sample> {
    if sample.features.kind != FeatureKind::Raw {
        return Err(Error::Augmentation(format!(
            "photometric augmentation needs raw features, got {}",
            sample.features.kind
        )));
    }
    let mut out = sample.clone();
    let b = brightness as f32;
    for v in &mut out.features.data {
        if b != 1.0 {
            *v = (*v * b).clamp(0.0, 1.0);
        }
        if noise_fraction > 0.0 && rng.gen_bool(noise_fraction) {
            *v = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
        }
    }
    Ok(out)
}

pub fn augment_photometric(sample: &Sample, seed: u64, ranges: &PhotometricRanges) -> Result<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]| if lo == hi { lo } else { rng.gen_range(lo..=hi) };
    let brightness = draw(&mut rng, ranges.brightness);
    let noise = draw(&mut rng, ranges.noise_fraction);
    apply_photometric(sample, brightness, noise, &mut rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub flips: bool,
    pub photometric: bool,
    pub ranges: PhotometricRanges,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            flips: true,
            photometric: true,
            ranges: PhotometricRanges::default(),
        }
    }
}

impl Dataset {
    /// Sample `index` with seeded read-time augmentation: each flip with
    /// probability 1/2, photometric noise for raw features.
    pub fn augmented(&self, index: usize, seed: u64, config: &AugmentConfig) -> Result<Sample> {
        let base = self
            .samples
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("sample index {index} out of range")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::derive(seed, &[index as u64]));
        let mut s = base.clone();
        if config.flips {
            if rng.gen_bool(0.5) {
                s = augment_flip(&s, FlipAxis::Horizontal);
            }
            if rng.gen_bool(0.5) {
                s = augment_flip(&s, FlipAxis::Vertical);
            }
        }
        if config.photometric && s.features.kind == FeatureKind::Raw {
            s = augment_photometric(&s, rng.gen(), &config.ranges)?;
        }
        Ok(s)
    }
}
