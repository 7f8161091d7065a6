//! File formats, configuration loading and command-line pipelines around the
//! `mono3dt-core` tracker.

pub mod commands;
pub mod config;
pub mod io;
pub mod manifest;

use clap::{Parser, Subcommand};

pub use commands::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "mono3dt",
    version,
    about = "Online monocular 3D multi-object tracking"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic scenario: detections, poses, calibration and ground truth.
    Simulate(commands::SimulateArgs),
    /// Track a detection stream online.
    Track(commands::TrackArgs),
    /// Score a track stream against ground truth with CLEAR metrics.
    Evaluate(commands::EvaluateArgs),
    /// Train the LSTM motion model on simulated trajectories.
    TrainMotion(commands::TrainMotionArgs),
    /// Simulate, track and evaluate end to end.
    Demo(commands::DemoArgs),
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Simulate(a) => commands::cmd_simulate(a),
        Command::Track(a) => commands::cmd_track(a),
        Command::Evaluate(a) => commands::cmd_evaluate(a).map(|_| ()),
        Command::TrainMotion(a) => commands::cmd_train_motion(a).map(|_| ()),
        Command::Demo(a) => commands::cmd_demo(a).map(|_| ()),
    }
}
