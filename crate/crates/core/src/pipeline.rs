//! End-to-end commands behind the CLI.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::camera::PinholeCamera;
use crate::config::PipelineConfig;
use crate::contact::{generate_trajectory, solve_normal_contact_with, Indenter};
use crate::dataset::{read_dataset, write_dataset, Dataset, Sample, SampleMeta, WriteOptions};
use crate::error::{Error, Result};
use crate::features::{extract, raw_features, FeatureKind, FeatureTensor};
use crate::labels::{bin_forces, evaluate, total_force, ForceGrid, MetricsReport, LABEL_SIDE};
use crate::particles::{displace_particles, sample_particles};
use crate::raster::GrayImage;
use crate::remap::{build_remap_table, refine_translation, remap_image, CalibrationFile, CameraRig, Refinement, SearchSpec};
use crate::render::render_pair;
use crate::seed;

const STREAM_TRAJECTORY: u64 = 1;
const STREAM_PARTICLES: u64 = 2;
const STREAM_COLORS: u64 = 3;

/// All samples of one trajectory.
pub fn simulate_trajectory(config: &PipelineConfig, trajectory: usize) -> Result<Vec<Sample>> {
    let t = trajectory as u64;
    let traj_seed = seed::derive(config.seed, &[STREAM_TRAJECTORY, t]);
    let traj = generate_trajectory(traj_seed, &config.trajectory).map_err(|e| Error::Simulation {
        trajectory,
        step: 0,
        source: Box::new(e),
    })?;
    let mut samples = Vec::with_capacity(traj.steps.len());
    for step in &traj.steps {
        let k = step.step_index;
        let run = || -> Result<Sample> {
            let indenter = Indenter::new(traj.shape, step.indenter_pose);
            let normal = solve_normal_contact_with(&config.material, &indenter, config.grid_n, &config.solver)?;
            let solution = normal.apply_shear(step.lateral_offset, &config.material);
            let particle_seed = seed::derive(config.seed, &[STREAM_PARTICLES, t, k as u64]);
            let color_seed = seed::derive(config.seed, &[STREAM_COLORS, t, k as u64]);
            let set = sample_particles(particle_seed, &config.particles)?;
            let set = displace_particles(&set, &solution, &config.material, &config.particles, &config.displacement)?;
            let pair = render_pair(&set, &config.camera, color_seed, k, &config.render)?;
            let features = extract(config.feature_kind, &pair.at_rest, &pair.deformed, &config.flow)?;
            let label = bin_forces(&solution.nodal_forces)?;
            Ok(Sample::new(
                features,
                label,
                SampleMeta {
                    trajectory: t,
                    step: k,
                    indenter: traj.shape.to_string(),
                    seed: traj_seed,
                },
            ))
        };
        samples.push(run().map_err(|e| Error::Simulation {
            trajectory,
            step: k,
            source: Box::new(e),
        })?);
    }
    Ok(samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub samples: usize,
    pub trajectories: usize,
    /// Range of per-sample total force per channel (N).
    pub force_ranges: [[f64; 2]; 3],
    pub config_hash: String,
    pub dataset: PathBuf,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))
}

/// Runs every trajectory and writes the dataset. On failure the samples of
/// the trajectories before the failing one are still written, with the
/// manifest marked incomplete.
pub fn simulate(config: &PipelineConfig, progress: &(dyn Fn(usize, usize) + Sync)) -> Result<SimulationSummary> {
    config.validate()?;
    let hash = config.hash()?;
    let pool = thread_pool(config.workers)?;
    let n = config.trajectories;
    let done = std::sync::atomic::AtomicUsize::new(0);
    let results: Vec<Result<Vec<Sample>>> = pool.install(|| {
        (0..n)
            .into_par_iter()
            .map(|t| {
                let r = simulate_trajectory(config, t);
                let d = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                progress(d, n);
                r
            })
            .collect()
    });

    let mut samples = Vec::new();
    let mut failure = None;
    for r in results {
        match r {
            Ok(s) => samples.extend(s),
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let options = WriteOptions {
        split_seed: config.seed,
        val_fraction: config.val_fraction,
        complete: failure.is_none(),
        config_hash: Some(hash.clone()),
    };
    write_dataset(&samples, &config.dataset_path, &options)?;
    if let Some(e) = failure {
        return Err(e);
    }
    let mut ranges = [[f64::INFINITY, f64::NEG_INFINITY]; 3];
    for s in &samples {
        let t = total_force(&s.label);
        for c in 0..3 {
            ranges[c][0] = ranges[c][0].min(t[c]);
            ranges[c][1] = ranges[c][1].max(t[c]);
        }
    }
    Ok(SimulationSummary {
        samples: samples.len(),
        trajectories: n,
        force_ranges: ranges,
        config_hash: hash,
        dataset: config.dataset_path.clone(),
    })
}

/// Features of a PNG image pair.
pub fn featurize(rest: &Path, deformed: &Path, kind: FeatureKind, config: &PipelineConfig) -> Result<FeatureTensor> {
    let a = GrayImage::load_png(rest)?;
    let b = GrayImage::load_png(deformed)?;
    extract(kind, &a, &b, &config.flow)
}

/// Writes a tensor as little-endian f32.
pub fn write_tensor(path: &Path, data: &[f32]) -> Result<()> {
    let bytes: Vec<u8> = data.iter().flat_map(|v| v.to_le_bytes()).collect();
    std::fs::write(path, bytes).map_err(|e| Error::io(path.display().to_string(), e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemapOutcome {
    pub refinement: Option<Refinement>,
    pub translation_gc: [f64; 3],
    pub valid_fraction: f64,
}

/// Remaps one real image into the pinhole frame, optionally refining the
/// camera translation on it first.
pub fn remap_file(
    image: &Path,
    calibration: &Path,
    pinhole: &PinholeCamera,
    refine: Option<&SearchSpec>,
    out: &Path,
) -> Result<RemapOutcome> {
    let cal = CalibrationFile::load(calibration)?;
    let img = GrayImage::load_png(image)?;
    let mut rig = CameraRig::new(*pinhole, cal.camera);
    let refinement = match refine {
        Some(spec) => {
            let r = refine_translation(&img, &rig, spec)?;
            rig.fisheye.translation_gc = r.translation_gc;
            Some(r)
        }
        None => None,
    };
    let table = build_remap_table(&rig)?;
    remap_image(&img, &table)?.save_png(out)?;
    Ok(RemapOutcome {
        refinement,
        translation_gc: rig.fisheye.translation_gc,
        valid_fraction: table.valid_fraction(),
    })
}

/// Refines the calibrated translation on a rest image and writes the
/// updated calibration file.
pub fn calibrate_refine(
    image: &Path,
    calibration: &Path,
    pinhole: &PinholeCamera,
    spec: &SearchSpec,
    out: &Path,
) -> Result<Refinement> {
    let mut cal = CalibrationFile::load(calibration)?;
    let img = GrayImage::load_png(image)?;
    let rig = CameraRig::new(*pinhole, cal.camera);
    let r = refine_translation(&img, &rig, spec)?;
    cal.camera.translation_gc = r.translation_gc;
    // Self-test pixels follow the moved camera.
    let points: Vec<[f64; 3]> = cal.self_test.iter().map(|s| s.point).collect();
    CalibrationFile::with_self_test(cal.camera, &points)?.save(out)?;
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub metrics: MetricsReport,
    pub truth_config_hash: Option<String>,
    pub prediction_config_hash: Option<String>,
}

/// Metrics of `pred` against `truth`, matched by (trajectory, step).
pub fn eval_datasets(pred: &Dataset, truth: &Dataset) -> Result<EvalOutput> {
    let key = |s: &Sample| (s.meta.trajectory, s.meta.step);
    let pred_by_id: BTreeMap<_, &Sample> = pred.samples.iter().map(|s| (key(s), s)).collect();
    let truth_ids: Vec<_> = truth.samples.iter().map(key).collect();
    let missing: Vec<String> = truth_ids
        .iter()
        .filter(|k| !pred_by_id.contains_key(k))
        .map(|(t, s)| format!("{t}/{s}"))
        .collect();
    let extra = pred.samples.len() + missing.len() != truth.samples.len();
    if !missing.is_empty() || extra {
        return Err(Error::LengthMismatch(format!(
            "datasets are not aligned; missing predictions for [{}]{}",
            missing.join(", "),
            if extra { " and predictions without ground truth" } else { "" }
        )));
    }
    let preds: Vec<ForceGrid> = truth_ids.iter().map(|k| pred_by_id[k].label.clone()).collect();
    let truths: Vec<ForceGrid> = truth.samples.iter().map(|s| s.label.clone()).collect();
    Ok(EvalOutput {
        metrics: evaluate(&preds, &truths)?,
        truth_config_hash: truth.manifest.config_hash.clone(),
        prediction_config_hash: pred.manifest.config_hash.clone(),
    })
}

pub fn eval(pred_dir: &Path, truth_dir: &Path) -> Result<EvalOutput> {
    eval_datasets(&read_dataset(pred_dir)?, &read_dataset(truth_dir)?)
}

const PLOT_CELL: usize = 12;
const PLOT_GAP: usize = 8;

fn diverging(t: f64) -> [u8; 3] {
    // Blue for negative, red for positive, white at zero.
    let t = t.clamp(-1.0, 1.0);
    let fade = |x: f64| (255.0 * (1.0 - x)).round() as u8;
    if t >= 0.0 {
        [255, fade(t), fade(t)]
    } else {
        [fade(-t), fade(-t), 255]
    }
}

/// Heatmaps of each label channel: one row per grid, one column per
/// channel. x and y use a symmetric scale, z a one-sided compressive scale;
/// scales are shared down each column.
pub fn render_heatmaps(grids: &[&ForceGrid]) -> (usize, usize, Vec<u8>) {
    let panel = LABEL_SIDE * PLOT_CELL;
    let width = 3 * panel + 4 * PLOT_GAP;
    let height = grids.len() * panel + (grids.len() + 1) * PLOT_GAP;
    let mut rgb = vec![255u8; width * height * 3];
    for c in 0..3 {
        let scale = grids
            .iter()
            .flat_map(|g| g.channel(c).iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for (row, g) in grids.iter().enumerate() {
            let x0 = PLOT_GAP + c * (panel + PLOT_GAP);
            let y0 = PLOT_GAP + row * (panel + PLOT_GAP);
            for iy in 0..LABEL_SIDE {
                for ix in 0..LABEL_SIDE {
                    let v = g.get(c, ix, iy) / scale;
                    let color = if c == 2 { diverging(-v.min(0.0).abs()) } else { diverging(v) };
                    for py in 0..PLOT_CELL {
                        for px in 0..PLOT_CELL {
                            let x = x0 + ix * PLOT_CELL + px;
                            let y = y0 + iy * PLOT_CELL + py;
                            rgb[(y * width + x) * 3..(y * width + x) * 3 + 3].copy_from_slice(&color);
                        }
                    }
                }
            }
        }
    }
    (width, height, rgb)
}

pub fn plot_sample(truth: &Path, index: usize, pred: Option<&Path>, out: &Path) -> Result<[usize; 2]> {
    let t = read_dataset(truth)?;
    let sample = t
        .samples
        .get(index)
        .ok_or_else(|| Error::InvalidParameter(format!("sample {index} out of range ({} samples)", t.samples.len())))?;
    let mut grids = vec![&sample.label];
    let p;
    if let Some(dir) = pred {
        p = read_dataset(dir)?;
        let found = p
            .samples
            .iter()
            .find(|s| s.meta.trajectory == sample.meta.trajectory && s.meta.step == sample.meta.step)
            .ok_or_else(|| {
                Error::LengthMismatch(format!(
                    "prediction dataset has no sample {}/{}",
                    sample.meta.trajectory, sample.meta.step
                ))
            })?;
        grids.push(&found.label);
    }
    let (w, h, rgb) = render_heatmaps(&grids);
    image::save_buffer(out, &rgb, w as u32, h as u32, image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::Image(format!("{}: {e}", out.display())))?;
    Ok([w, h])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub iterations: usize,
    pub frames: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
    pub mean_ms: f64,
    pub hz: f64,
    pub resolution: [usize; 2],
    pub config_hash: String,
}

/// Times remap plus raw-feature extraction per frame. The first frame is
/// taken as the rest image.
pub fn bench(
    frames: &[GrayImage],
    calibration: &CalibrationFile,
    config: &PipelineConfig,
    iterations: usize,
) -> Result<BenchReport> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter("bench needs at least one frame".into()));
    }
    if iterations == 0 {
        return Err(Error::InvalidParameter("bench needs at least one iteration".into()));
    }
    let rig = CameraRig::new(config.camera, calibration.camera);
    let table = build_remap_table(&rig)?;
    let rest = remap_image(&frames[0], &table)?;
    let mut times = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let frame = &frames[i % frames.len()];
        let start = Instant::now();
        let img = remap_image(frame, &table)?;
        let f = raw_features(&rest, &img)?;
        std::hint::black_box(&f);
        times.push(start.elapsed().as_secs_f64() * 1e3);
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    times.sort_by(|a, b| a.total_cmp(b));
    let pick = |q: f64| times[((q * (times.len() - 1) as f64).round() as usize).min(times.len() - 1)];
    let median = pick(0.5);
    Ok(BenchReport {
        iterations,
        frames: frames.len(),
        median_ms: median,
        p95_ms: pick(0.95),
        mean_ms: mean,
        hz: 1e3 / median,
        resolution: config.camera.resolution,
        config_hash: config.hash()?,
    })
}

/// PNG frames of a directory in name order.
pub fn load_frames(dir: &Path) -> Result<Vec<GrayImage>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    paths.sort();
    paths.iter().map(|p| GrayImage::load_png(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diverging_endpoints() {
        assert_eq!(diverging(0.0), [255, 255, 255]);
        assert_eq!(diverging(1.0), [255, 0, 0]);
        assert_eq!(diverging(-1.0), [0, 0, 255]);
    }

    #[test]
    fn heatmap_size_is_fixed() {
        let g = ForceGrid::zeros();
        let (w, h, rgb) = render_heatmaps(&[&g, &g]);
        assert_eq!((w, h), (3 * 240 + 32, 2 * 240 + 24));
        assert_eq!(rgb.len(), w * h * 3);
    }
}
