use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tactile_sim::config::PipelineConfig;
use tactile_sim::features::FeatureKind;
use tactile_sim::pipeline;
use tactile_sim::remap::CalibrationFile;
use tactile_sim::Error;

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_RUNTIME: u8 = 4;

#[derive(Parser)]
#[command(name = "tactile-sim", version, about = "Simulated tactile datasets and real-camera remapping")]
struct Cli {
    /// Pipeline configuration (TOML); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    feature_kind: Option<KindArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Flow,
    Raw,
}

impl From<KindArg> for FeatureKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Flow => FeatureKind::OpticalFlow,
            KindArg::Raw => FeatureKind::Raw,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write a dataset.
    Simulate {
        #[arg(long)]
        trajectories: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feature tensor of a rest/deformed PNG pair (raw little-endian f32).
    Featurize {
        #[arg(long)]
        rest: PathBuf,
        #[arg(long)]
        deformed: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Remap a real-camera PNG into the pinhole frame.
    Remap {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        /// Refine the camera translation on this image first.
        #[arg(long)]
        refine: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Refine the calibrated translation on a rest image.
    CalibrateRefine {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a prediction dataset with ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Label heatmaps of one sample.
    Plot {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 0)]
        index: usize,
        #[arg(long)]
        pred: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Time remap plus raw features on a directory of real frames.
    Bench {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        calibration: PathBuf,
        #[arg(long, default_value_t = 1000)]
        iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print (or write) the default configuration.
    Init {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn require(paths: &[&Path]) -> Result<(), Failure> {
    for p in paths {
        if !p.exists() {
            return Err(Failure::Usage(format!("{} does not exist", p.display())));
        }
    }
    Ok(())
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let json = serde_json::to_string_pretty(value).expect("serializable report");
    match out {
        Some(p) => std::fs::write(p, json + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            require(&[p])?;
            PipelineConfig::load(p)?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Some(k) = cli.feature_kind {
        cfg.feature_kind = k.into();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Simulate { trajectories, out } => {
            if let Some(n) = trajectories {
                cfg.trajectories = n;
            }
            if let Some(o) = out {
                cfg.dataset_path = o;
            }
            let summary = pipeline::simulate(&cfg, &|done, total| {
                eprintln!("trajectory {done}/{total}");
            })?;
            eprintln!(
                "{} samples; Fx {:.4}..{:.4} N, Fy {:.4}..{:.4} N, Fz {:.4}..{:.4} N",
                summary.samples,
                summary.force_ranges[0][0],
                summary.force_ranges[0][1],
                summary.force_ranges[1][0],
                summary.force_ranges[1][1],
                summary.force_ranges[2][0],
                summary.force_ranges[2][1],
            );
            emit(&summary, None)
        }
        Command::Featurize { rest, deformed, out } => {
            require(&[&rest, &deformed])?;
            let t = pipeline::featurize(&rest, &deformed, cfg.feature_kind, &cfg)?;
            pipeline::write_tensor(&out, &t.data)?;
            emit(
                &serde_json::json!({
                    "kind": t.kind,
                    "shape": [2, 88, 88],
                    "scale": t.scale,
                    "out": out,
                    "config_hash": cfg.hash()?,
                }),
                None,
            )
        }
        Command::Remap {
            image,
            calibration,
            refine,
            out,
        } => {
            require(&[&image, &calibration])?;
            let spec = refine.then_some(&cfg.refine);
            let outcome = pipeline::remap_file(&image, &calibration, &cfg.camera, spec, &out)?;
            emit(
                &serde_json::json!({ "outcome": outcome, "config_hash": cfg.hash()? }),
                Some(&out.with_extension("json")),
            )
        }
        Command::CalibrateRefine { image, calibration, out } => {
            require(&[&image, &calibration])?;
            let r = pipeline::calibrate_refine(&image, &calibration, &cfg.camera, &cfg.refine, &out)?;
            emit(&serde_json::json!({ "refinement": r, "config_hash": cfg.hash()? }), None)
        }
        Command::Eval { pred, truth, out } => {
            require(&[&pred, &truth])?;
            let report = pipeline::eval(&pred, &truth)?;
            eprint!("{}", report.metrics.to_table());
            emit(&report, out.as_deref())
        }
        Command::Plot {
            dataset,
            index,
            pred,
            out,
        } => {
            require(&[&dataset])?;
            if let Some(p) = &pred {
                require(&[p])?;
            }
            let [w, h] = pipeline::plot_sample(&dataset, index, pred.as_deref(), &out)?;
            emit(&serde_json::json!({ "out": out, "width": w, "height": h }), None)
        }
        Command::Bench {
            frames,
            calibration,
            iterations,
            out,
        } => {
            require(&[&frames, &calibration])?;
            let cal = CalibrationFile::load(&calibration)?;
            let imgs = pipeline::load_frames(&frames)?;
            let report = pipeline::bench(&imgs, &cal, &cfg, iterations)?;
            emit(&report, out.as_deref())
        }
        Command::Config {
            action: ConfigAction::Init { out },
        } => {
            let text = cfg.to_toml()?;
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME })
        }
    }
}
