// Simulates a tiny dataset end to end and reads it back.

use tactile_sim::config::PipelineConfig;
use tactile_sim::dataset::{read_dataset, Split};
use tactile_sim::features::FeatureKind;
use tactile_sim::pipeline;

pub fn run_example() -> tactile_sim::Result<usize> {
    let dir = std::env::temp_dir().join(format!("tactile-sim-example-{}", std::process::id()));
    let mut cfg = PipelineConfig {
        trajectories: 5,
        workers: 1,
        feature_kind: FeatureKind::Raw,
        dataset_path: dir.clone(),
        ..PipelineConfig::default()
    };
    cfg.trajectory.steps = 4;
    cfg.trajectory.min_depth = 0.1;
    cfg.trajectory.max_depth = 0.25;
    let summary = pipeline::simulate(&cfg, &|done, total| eprintln!("trajectory {done}/{total}"))?;
    let ds = read_dataset(&dir)?;
    let val = ds.manifest.samples.iter().filter(|r| r.split == Split::Val).count();
    println!(
        "{} samples ({val} validation), Fz {:.4}..{:.4} N, label maxima {:?}",
        summary.samples, summary.force_ranges[2][0], summary.force_ranges[2][1], ds.manifest.label_max
    );
    std::fs::remove_dir_all(&dir).ok();
    Ok(ds.samples.len())
}

#[allow(dead_code)]
fn main() -> tactile_sim::Result<()> {
    run_example().map(|_| ())
}
