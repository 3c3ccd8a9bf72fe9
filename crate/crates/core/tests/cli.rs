mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tactile_sim::camera::{FisheyeCamera, PinholeCamera, RadialModel, IDENTITY};
use tactile_sim::config::PipelineConfig;
use tactile_sim::dataset::read_dataset;
use tactile_sim::features::FeatureKind;
use tactile_sim::labels::total_force;
use tactile_sim::raster::GrayImage;
use tactile_sim::remap::CalibrationFile;
use tactile_sim::render::{render_fisheye, RenderOptions};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tactile-sim")).args(args).output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let mut cfg = PipelineConfig { trajectories: 3, workers: 1, ..PipelineConfig::default() };
    cfg.trajectory.steps = 4;
    cfg.trajectory.max_depth = 0.3;
    cfg.trajectory.min_depth = 0.2;
    let path = dir.join("config.toml");
    std::fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    path
}

fn twin_calibration(dir: &Path) -> PathBuf {
    let pin = PinholeCamera::default();
    let cam = FisheyeCamera {
        radial: RadialModel::Perspective { focal: pin.focal },
        stretch: [[1.0, 0.0], [0.0, 1.0]],
        center: pin.center,
        resolution: pin.resolution,
        max_incidence: 1.2,
        rotation_gc: IDENTITY,
        translation_gc: pin.translation_gp,
    };
    let path = dir.join("cal.toml");
    CalibrationFile::with_self_test(cam, &[[15.0, 15.0, 0.0], [2.0, 3.0, 0.0]]).unwrap().save(&path).unwrap();
    path
}

#[test]
fn config_init_prints_the_defaults() {
    let out = run(&["config", "init"]);
    assert!(out.status.success());
    let cfg = PipelineConfig::from_toml(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(cfg, PipelineConfig::default());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.toml");
    let out = run(&["config", "init", "--seed", "5", "--feature-kind", "raw", "--out", s(&path)]);
    assert!(out.status.success());
    let cfg = PipelineConfig::load(&path).unwrap();
    assert_eq!(cfg.seed, 5);
    assert_eq!(cfg.feature_kind, FeatureKind::Raw);
}

#[test]
fn exit_codes_separate_usage_validation_and_success() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    assert_eq!(run(&["eval", "--pred", s(&missing), "--truth", s(&missing)]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["simulate", "--feature-kind", "depth"]).status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "trajectories = 0\n").unwrap();
    assert_eq!(run(&["--config", s(&bad), "simulate"]).status.code(), Some(3));
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(run(&["--config", s(&bad), "simulate"]).status.code(), Some(3));

    // A calibration whose self-test record is off by 0.5 px.
    let cal = twin_calibration(dir.path());
    let mut file = CalibrationFile::load(&cal).unwrap();
    file.self_test[0].pixel[1] += 0.5;
    std::fs::write(&cal, file.to_toml_string().unwrap()).unwrap();
    let img = dir.path().join("img.png");
    GrayImage::new(440, 440).save_png(&img).unwrap();
    let out = run(&["remap", "--image", s(&img), "--calibration", s(&cal), "--out", s(&dir.path().join("o.png"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("self-test point 0"));
}

#[test]
fn simulate_eval_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let data = dir.path().join("data");
    let out = run(&["--config", s(&cfg), "--seed", "7", "--feature-kind", "raw", "simulate", "--out", s(&data)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    assert_eq!(summary["samples"], 12);

    let ds = read_dataset(&data).unwrap();
    assert_eq!(ds.manifest.count, 12);
    assert_eq!(ds.manifest.feature_kind, FeatureKind::Raw);
    assert!(ds.manifest.complete);
    assert_eq!(ds.manifest.config_hash.as_deref(), summary["config_hash"].as_str());
    // Reported force ranges are a scan of the stored labels.
    for c in 0..3 {
        let totals: Vec<f64> = ds.samples.iter().map(|x| total_force(&x.label)[c]).collect();
        let lo = totals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = totals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let r = &summary["force_ranges"][c];
        assert!((r[0].as_f64().unwrap() - lo).abs() <= 1e-6 * (1.0 + lo.abs()));
        assert!((r[1].as_f64().unwrap() - hi).abs() <= 1e-6 * (1.0 + hi.abs()));
    }

    let report = dir.path().join("report.json");
    let out = run(&["eval", "--pred", s(&data), "--truth", s(&data), "--out", s(&report)]);
    assert!(out.status.success());
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    for key in ["rmse", "rmset", "mae_bin", "sdae_bin", "mae_total", "sdae_total"] {
        assert!(r["metrics"][key].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)), "{key}");
    }

    let png = dir.path().join("plot.png");
    let out = run(&["plot", "--dataset", s(&data), "--index", "2", "--out", s(&png)]);
    assert!(out.status.success());
    let dims = image::image_dimensions(&png).unwrap();
    assert_eq!(dims, (752, 256));
    let out = run(&["plot", "--dataset", s(&data), "--pred", s(&data), "--out", s(&png)]);
    assert!(out.status.success());
    assert_eq!(image::image_dimensions(&png).unwrap(), (752, 504));
    assert_eq!(run(&["plot", "--dataset", s(&data), "--index", "99", "--out", s(&png)]).status.code(), Some(3));
}

#[test]
fn remap_with_identical_cameras_leaves_the_image_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let cal = twin_calibration(dir.path());
    let set = common::framed_particles(1, 2000);
    let img = render_fisheye(&set, &CalibrationFile::load(&cal).unwrap().camera, 2, false, &RenderOptions::default());
    let src = dir.path().join("real.png");
    img.save_png(&src).unwrap();
    let dst = dir.path().join("remapped.png");
    let out = run(&["remap", "--image", s(&src), "--calibration", s(&cal), "--out", s(&dst)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(GrayImage::load_png(&dst).unwrap(), img);
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dst.with_extension("json")).unwrap()).unwrap();
    assert_eq!(meta["outcome"]["valid_fraction"], 1.0);

    // Refinement on the same rest image keeps the calibrated translation.
    let toml = dir.path().join("refine.toml");
    let mut cfg = PipelineConfig::default();
    cfg.refine.range = 0.05;
    std::fs::write(&toml, cfg.to_toml().unwrap()).unwrap();
    let refined = dir.path().join("refined.toml");
    let out = run(&["--config", s(&toml), "calibrate-refine", "--image", s(&src), "--calibration", s(&cal), "--out", s(&refined)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["refinement"]["offset"], serde_json::json!([0.0, 0.0, 0.0]));
    assert_eq!(CalibrationFile::load(&refined).unwrap(), CalibrationFile::load(&cal).unwrap());
}

#[test]
fn featurize_writes_a_raw_tensor() {
    let dir = tempfile::tempdir().unwrap();
    let f = common::smooth_texture(3);
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    common::shifted_image(&f, 440, 440, 0.0, 0.0).save_png(&a).unwrap();
    common::shifted_image(&f, 440, 440, 2.0, 0.0).save_png(&b).unwrap();
    let t = dir.path().join("t.bin");
    let out = run(&["featurize", "--rest", s(&a), "--deformed", s(&b), "--out", s(&t)]);
    assert!(out.status.success());
    let bytes = std::fs::read(&t).unwrap();
    assert_eq!(bytes.len(), 2 * 88 * 88 * 4);
    let u = f32::from_le_bytes(bytes[4 * (44 * 88 + 44)..4 * (44 * 88 + 45)].try_into().unwrap());
    assert!((u - 2.0).abs() < 0.3, "{u}");
    assert_eq!(json(&out)["kind"], "optical_flow");
}

#[test]
fn bench_reports_ordered_percentiles() {
    let dir = tempfile::tempdir().unwrap();
    let cal = twin_calibration(dir.path());
    let frames = dir.path().join("frames");
    std::fs::create_dir(&frames).unwrap();
    let out = run(&["bench", "--frames", s(&frames), "--calibration", s(&cal)]);
    assert_eq!(out.status.code(), Some(3), "empty frame directory");
    for k in 0..3 {
        common::shifted_image(&common::smooth_texture(k), 440, 440, 0.0, 0.0)
            .save_png(&frames.join(format!("{k:03}.png")))
            .unwrap();
    }
    let out = run(&["bench", "--frames", s(&frames), "--calibration", s(&cal), "--iterations", "200"]);
    assert!(out.status.success());
    let r = json(&out);
    let (median, p95) = (r["median_ms"].as_f64().unwrap(), r["p95_ms"].as_f64().unwrap());
    assert!(median > 0.0 && median <= p95);
    assert_eq!(r["iterations"], 200);
    assert_eq!(r["frames"], 3);
}
