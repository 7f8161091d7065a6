//! Command implementations: simulate, track, evaluate, train-motion and demo.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, ValueEnum};
use log::info;
use mono3dt_core::association::run_sequence;
use mono3dt_core::metrics::{evaluate_sequence, tracked_by_frame, ClearReport, Gate};
use mono3dt_core::motion::{train_lstm, LstmWeights, MotionBackend, TrainingHyperparams};
use mono3dt_core::simulator::{simulate, Preset, ScenarioConfig};
use mono3dt_core::{CameraFrame, TrackRecord, TrackerConfig};

use crate::config::{load_config, ConfigError};
use crate::io::{self, IoError};
use crate::manifest::{manifest_path, RunManifest};

/// Failure of a command, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, configuration or input files (exit code 2).
    #[error("{0}")]
    Usage(String),
    /// Anything that fails while running (exit code 1).
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_input_error() {
            CliError::Usage(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

fn usage(e: impl ToString) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    Preset::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Preset::ALL.iter().map(Preset::as_str).collect();
        format!(
            "unknown preset `{s}` (expected one of {})",
            names.join(", ")
        )
    })
}

fn parse_motion(s: &str) -> Result<MotionBackend, String> {
    MotionBackend::parse(s)
        .ok_or_else(|| format!("unknown motion backend `{s}` (expected none, kf2d, kf3d or lstm)"))
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => Ok([
            a.trim().parse().map_err(|e| format!("{e}"))?,
            b.trim().parse().map_err(|e| format!("{e}"))?,
        ]),
        _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

fn parse_range(s: &str) -> Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(r) if r > 0.0 && r.is_finite() => Ok(r),
        _ => Err(format!("ranges must be positive numbers, got `{s}`")),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("configuration serializes")
}

/// Scenario flags shared by `simulate`, `train-motion` and `demo`.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// Scenario preset: open_road, crossing_occlusion, reappearance or dense.
    #[arg(long, value_parser = parse_preset)]
    pub preset: Option<Preset>,
    /// Full scenario configuration (TOML); flags override its values.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Number of frames.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Number of vehicles.
    #[arg(long)]
    pub vehicles: Option<usize>,
    /// Disable every detection noise source and dropout.
    #[arg(long)]
    pub noiseless: bool,
    /// Probability of dropping a visible vehicle's detection.
    #[arg(long)]
    pub dropout: Option<f64>,
    /// Vehicle acceleration magnitude range `min,max`, meters per frame².
    #[arg(long, value_parser = parse_pair)]
    pub accel_range: Option<[f64; 2]>,
}

impl ScenarioArgs {
    /// Resolves the scenario for `seed`, starting from `default_preset` when
    /// neither a preset nor a scenario file is given.
    pub fn resolve(&self, seed: u64, default_preset: Preset) -> Result<ScenarioConfig, CliError> {
        let mut c = match (&self.scenario, self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                let mut c: ScenarioConfig =
                    toml::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
                if let Some(p) = self.preset {
                    c = ScenarioConfig { preset: p, ..c };
                }
                c
            }
            (None, p) => ScenarioConfig::preset(p.unwrap_or(default_preset), seed),
        };
        c.seed = seed;
        if let Some(f) = self.frames {
            c.frames = f;
        }
        if let Some(n) = self.vehicles {
            c.n_vehicles = n;
        }
        if let Some(d) = self.dropout {
            c.dropout = d;
        }
        if let Some(a) = self.accel_range {
            c.accel_range = a;
        }
        if self.noiseless {
            c = c.noiseless();
        }
        c.validate().map_err(usage)?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Scenario seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Paths of a simulated scenario inside its directory.
pub struct ScenarioFiles {
    pub detections: PathBuf,
    pub poses: PathBuf,
    pub calib: PathBuf,
    pub ground_truth: PathBuf,
}

impl ScenarioFiles {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            detections: dir.join("detections.jsonl"),
            poses: dir.join("poses.json"),
            calib: dir.join("calib.json"),
            ground_truth: dir.join("gt.jsonl"),
        }
    }
}

fn write_scenario(config: &ScenarioConfig, out: &Path) -> Result<ScenarioFiles, CliError> {
    let mut manifest = RunManifest::new("simulate", Some(config.seed), to_json(config));
    let scenario = manifest
        .time("simulate", || simulate(config))
        .map_err(usage)?;
    let files = ScenarioFiles::in_dir(out);
    manifest.time("write", || -> Result<(), CliError> {
        io::write_sequence(
            &scenario.sequence(),
            &files.detections,
            &files.poses,
            &files.calib,
        )?;
        let gt: Vec<TrackRecord> = scenario.ground_truth().into_iter().flatten().collect();
        io::write_tracks(&files.ground_truth, &gt)?;
        Ok(())
    })?;
    manifest.output("detections", &files.detections);
    manifest.output("poses", &files.poses);
    manifest.output("calib", &files.calib);
    manifest.output("ground_truth", &files.ground_truth);
    manifest.write(&manifest_path(out, true))?;
    Ok(files)
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let config = args.scenario.resolve(args.seed, Preset::OpenRoad)?;
    write_scenario(&config, &args.out)?;
    info!(
        "wrote {} scenario (seed {}, {} frames) to {}",
        config.preset.as_str(),
        config.seed,
        config.frames,
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct TrackArgs {
    /// Detection stream (JSONL).
    #[arg(long)]
    pub detections: PathBuf,
    /// Camera poses and intrinsics (JSON).
    #[arg(long)]
    pub poses: PathBuf,
    /// Calibration document; defaults to the intrinsics stored with the poses.
    #[arg(long)]
    pub calib: Option<PathBuf>,
    /// Tracker configuration (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Motion backend, overriding the configuration.
    #[arg(long, value_parser = parse_motion)]
    pub motion: Option<MotionBackend>,
    /// LSTM weights, required by the lstm backend.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Output track stream.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_track(args: &TrackArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(p) => load_config(p)?,
        None => TrackerConfig::default(),
    };
    if let Some(m) = args.motion {
        config.motion_backend = m;
    }
    if config.motion_backend == MotionBackend::Lstm && args.weights.is_none() {
        return Err(usage("the lstm motion backend requires --weights"));
    }
    let mut manifest = RunManifest::new("track", None, to_json(&config));
    let (seq, weights) = manifest.time("load", || -> Result<_, CliError> {
        let seq = io::load_sequence(&args.detections, &args.poses, args.calib.as_deref())?;
        let weights = args.weights.as_deref().map(io::load_weights).transpose()?;
        Ok((seq, weights))
    })?;
    let records = manifest
        .time("tracking", || run_sequence(&config, weights.as_ref(), &seq))
        .map_err(runtime)?;
    manifest.time("write", || io::write_tracks(&args.out, &records))?;
    manifest.input("detections", &args.detections);
    manifest.input("poses", &args.poses);
    for (name, p) in [
        ("calib", &args.calib),
        ("config", &args.config),
        ("weights", &args.weights),
    ] {
        if let Some(p) = p {
            manifest.input(name, p);
        }
    }
    manifest.output("tracks", &args.out);
    manifest.write(&manifest_path(&args.out, false))?;
    info!(
        "tracked {} frames into {} records",
        seq.len(),
        records.len()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EvalMode {
    /// Image boxes matched at IoU ≥ 0.5.
    #[value(name = "2d")]
    TwoD,
    /// Ground-plane centers matched within 2 m.
    #[value(name = "3d")]
    ThreeD,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    /// Ground-truth track stream.
    #[arg(long)]
    pub gt: PathBuf,
    /// Predicted track stream.
    #[arg(long)]
    pub pred: PathBuf,
    /// Matching gate.
    #[arg(long, value_enum, default_value = "3d")]
    pub mode: EvalMode,
    /// Maximum camera depths, meters, e.g. `30,50,100`. Requires --poses.
    #[arg(long, value_delimiter = ',', value_parser = parse_range)]
    pub ranges: Option<Vec<f64>>,
    /// Camera poses used to measure object depth.
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// JSON report destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RangeReport {
    /// `None` means unbounded.
    pub max_depth_m: Option<f64>,
    pub clear: ClearReport,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvaluationReport {
    pub mode: &'static str,
    pub frames: usize,
    pub ranges: Vec<RangeReport>,
}

impl EvaluationReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.ranges {
            let label = r
                .max_depth_m
                .map_or_else(|| "all".to_string(), |d| format!("<= {d} m"));
            let c = &r.clear;
            out += &format!(
                "{} {label}: MOTA {:.4} MOTP {:.4} MM {} FP {} FN {} FRAG {} MT {:.3} ML {:.3} GT {} RMSE {:.3} m\n",
                self.mode, c.mota, c.motp, c.mismatches, c.false_positives, c.false_negatives, c.fragmentations, c.mostly_tracked,
                c.mostly_lost, c.gt_objects, c.position_rmse_m
            );
        }
        out
    }
}

/// Records whose camera depth lies in `(0, max_depth]`.
fn within_depth(
    records: &[TrackRecord],
    poses: &io::PoseStream,
    max_depth: f64,
) -> Result<Vec<TrackRecord>, CliError> {
    let mut out = Vec::new();
    for r in records {
        let index = r
            .frame
            .checked_sub(poses.first_frame)
            .filter(|&i| (i as usize) < poses.poses.len());
        let Some(i) = index else {
            return Err(usage(format!(
                "track {} in frame {} lies outside the pose range",
                r.track_id, r.frame
            )));
        };
        let depth =
            CameraFrame::new(poses.intrinsics, poses.poses[i as usize]).depth_of(&r.box3d.center);
        if depth > 0.0 && depth <= max_depth {
            out.push(r.clone());
        }
    }
    Ok(out)
}

/// CLEAR metrics of `pred` against `gt`, overall or per depth range.
pub fn evaluate_tracks(
    gt: &[TrackRecord],
    pred: &[TrackRecord],
    mode: EvalMode,
    ranges: Option<&[f64]>,
    poses: Option<&io::PoseStream>,
) -> Result<EvaluationReport, CliError> {
    let frames = gt.iter().chain(pred).map(|r| r.frame);
    let (first, last) = match (frames.clone().min(), frames.max()) {
        (Some(a), Some(b)) => (a, b),
        _ => (0, 0),
    };
    let (first, n) = match poses {
        Some(p) => {
            if !gt.is_empty() || !pred.is_empty() {
                if first < p.first_frame || last >= p.first_frame + p.poses.len() as u64 {
                    return Err(usage("track frames lie outside the pose range"));
                }
            }
            (p.first_frame, p.poses.len())
        }
        None if gt.is_empty() && pred.is_empty() => (0, 0),
        None => (first, (last - first + 1) as usize),
    };
    let gate = match mode {
        EvalMode::TwoD => Gate::KITTI_2D,
        EvalMode::ThreeD => Gate::BEV_3D,
    };
    let score = |g: &[TrackRecord], p: &[TrackRecord]| {
        evaluate_sequence(
            &tracked_by_frame(g, first, n),
            &tracked_by_frame(p, first, n),
            gate,
        )
        .1
    };
    let ranges = match ranges {
        None => vec![RangeReport {
            max_depth_m: None,
            clear: score(gt, pred),
        }],
        Some(rs) => {
            let poses = poses.ok_or_else(|| usage("--ranges requires --poses"))?;
            rs.iter()
                .map(|&r| {
                    Ok(RangeReport {
                        max_depth_m: Some(r),
                        clear: score(&within_depth(gt, poses, r)?, &within_depth(pred, poses, r)?),
                    })
                })
                .collect::<Result<_, CliError>>()?
        }
    };
    let mode = match mode {
        EvalMode::TwoD => "2d",
        EvalMode::ThreeD => "3d",
    };
    Ok(EvaluationReport {
        mode,
        frames: n,
        ranges,
    })
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<EvaluationReport, CliError> {
    let gt = io::load_tracks(&args.gt)?;
    let pred = io::load_tracks(&args.pred)?;
    let poses = args.poses.as_deref().map(io::load_poses).transpose()?;
    let report = evaluate_tracks(
        &gt,
        &pred,
        args.mode,
        args.ranges.as_deref(),
        poses.as_ref(),
    )?;
    print!("{}", report.to_text());
    if let Some(out) = &args.out {
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(out, text + "\n").map_err(|source| IoError::Io {
            path: out.clone(),
            source,
        })?;
    }
    Ok(report)
}

#[derive(Debug, Clone, Args)]
pub struct TrainMotionArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of simulated scenarios (seeds `seed`, `seed + 1`, ...).
    #[arg(long, default_value_t = 20)]
    pub scenarios: usize,
    /// First scenario seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training epochs.
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    /// Optimizer steps per epoch.
    #[arg(long, default_value_t = 100)]
    pub steps_per_epoch: usize,
    /// Windows per optimizer step.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Initial learning rate of momentum SGD.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Output weights file (JSON); the loss curve goes to `<stem>.loss.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cmd_train_motion(args: &TrainMotionArgs) -> Result<f64, CliError> {
    if args.scenarios == 0 {
        return Err(usage("--scenarios must be at least 1"));
    }
    if args.epochs == 0 || args.steps_per_epoch == 0 {
        return Err(usage("--epochs and --steps-per-epoch must be at least 1"));
    }
    let mut hp = TrainingHyperparams {
        steps: args.epochs * args.steps_per_epoch,
        seed: args.seed,
        ..TrainingHyperparams::default()
    };
    if let Some(b) = args.batch {
        hp.batch_size = b;
    }
    if let Some(lr) = args.learning_rate {
        hp.learning_rate = lr;
    }
    hp.validate().map_err(usage)?;
    let configs = (0..args.scenarios as u64)
        .map(|k| args.scenario.resolve(args.seed + k, Preset::OpenRoad))
        .collect::<Result<Vec<_>, _>>()?;
    let mut manifest = RunManifest::new(
        "train-motion",
        Some(args.seed),
        serde_json::json!({
            "scenarios": configs.iter().map(to_json).collect::<Vec<_>>(),
            "steps": hp.steps,
            "batch_size": hp.batch_size,
            "window": hp.window,
            "learning_rate": hp.learning_rate,
            "momentum": hp.momentum,
        }),
    );
    let samples = manifest.time("simulate", || -> Result<Vec<_>, CliError> {
        Ok(configs
            .iter()
            .map(|c| simulate(c).map_err(usage))
            .collect::<Result<Vec<_>, _>>()?
            .iter()
            .flat_map(|s| s.training_samples())
            .collect())
    })?;
    let report = manifest
        .time("train", || {
            train_lstm(&samples, LstmWeights::init(args.seed), &hp)
        })
        .map_err(runtime)?;
    let curve = args.out.with_extension("loss.csv");
    manifest.time("write", || -> Result<(), CliError> {
        io::write_weights(&args.out, &report.weights)?;
        let mut csv = String::from("step,loss\n");
        for (i, l) in report.losses.iter().enumerate() {
            csv += &format!("{i},{l}\n");
        }
        std::fs::write(&curve, csv).map_err(|source| IoError::Io {
            path: curve.clone(),
            source,
        })?;
        Ok(())
    })?;
    manifest.output("weights", &args.out);
    manifest.output("loss_curve", &curve);
    manifest.write(&manifest_path(&args.out, false))?;
    info!(
        "trained on {} trajectories; final loss {:.6}",
        samples.len(),
        report.final_loss
    );
    Ok(report.final_loss)
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of sequences (consecutive seeds).
    #[arg(long, default_value_t = 1)]
    pub sequences: usize,
    /// Worker threads; each sequence is tracked independently.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Motion backend: none, kf2d, kf3d or lstm.
    #[arg(long, value_parser = parse_motion, default_value = "kf3d")]
    pub motion: MotionBackend,
    /// LSTM weights for the lstm backend.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Output directory; sequence `k` goes to `seed_<seed + k>/`.
    #[arg(long)]
    pub out: PathBuf,
}

fn demo_sequence(args: &DemoArgs, seed: u64) -> Result<EvaluationReport, CliError> {
    let dir = args.out.join(format!("seed_{seed}"));
    let config = args.scenario.resolve(seed, Preset::CrossingOcclusion)?;
    let files = write_scenario(&config, &dir)?;
    let tracks = dir.join("tracks.jsonl");
    cmd_track(&TrackArgs {
        detections: files.detections,
        poses: files.poses.clone(),
        calib: Some(files.calib),
        config: None,
        motion: Some(args.motion),
        weights: args.weights.clone(),
        out: tracks.clone(),
    })?;
    let poses = io::load_poses(&files.poses)?;
    let report = evaluate_tracks(
        &io::load_tracks(&files.ground_truth)?,
        &io::load_tracks(&tracks)?,
        EvalMode::ThreeD,
        None,
        Some(&poses),
    )?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    let path = dir.join("report.json");
    std::fs::write(&path, text + "\n").map_err(|source| IoError::Io { path, source })?;
    Ok(report)
}

/// Simulates, tracks and evaluates `sequences` scenarios, returning one report
/// per seed in seed order.
pub fn cmd_demo(args: &DemoArgs) -> Result<Vec<(u64, EvaluationReport)>, CliError> {
    if args.sequences == 0 || args.jobs == 0 {
        return Err(usage("--sequences and --jobs must be at least 1"));
    }
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..args.jobs.min(args.sequences) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= args.sequences {
                    break;
                }
                let seed = args.seed + k as u64;
                let r = demo_sequence(args, seed);
                results
                    .lock()
                    .expect("no worker panics while holding the lock")
                    .push((seed, r));
            });
        }
    });
    let mut results = results.into_inner().expect("workers joined");
    results.sort_by_key(|(s, _)| *s);
    let reports = results
        .into_iter()
        .map(|(s, r)| r.map(|r| (s, r)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut manifest = RunManifest::new(
        "demo",
        Some(args.seed),
        serde_json::json!({ "sequences": args.sequences, "motion": args.motion }),
    );
    for (seed, report) in &reports {
        manifest.output(
            &format!("seed_{seed}"),
            &args.out.join(format!("seed_{seed}")),
        );
        print!("seed {seed} {}", report.to_text());
    }
    manifest.write(&manifest_path(&args.out, true))?;
    Ok(reports)
}
