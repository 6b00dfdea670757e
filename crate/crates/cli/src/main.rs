// SPDX-License-Identifier: MIT OR Apache-2.0

//! `w2cpd`: change point detection and segment clustering from the shell.

mod commands;
mod config;
mod error;
mod ingest;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::{CalibrateArgs, ClusterArgs, DetectArgs, EvaluateArgs, SimulateArgs};

#[derive(Debug, Parser)]
#[command(
    name = "w2cpd",
    version,
    about = "Wasserstein two-sample change point detection and segment clustering"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate a matched filter from simulated single-change series.
    CalibrateFilter(CalibrateArgs),
    /// Generate a piecewise IID series with known change points.
    Simulate(SimulateArgs),
    /// Detect change points and write the statistic trace.
    Detect(DetectArgs),
    /// Cluster the segments between change points.
    Cluster(ClusterArgs),
    /// Score detections and labels against ground truth.
    Evaluate(EvaluateArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = match &cli.command {
        Command::CalibrateFilter(args) => commands::calibrate_filter(args),
        Command::Simulate(args) => commands::simulate(args),
        Command::Detect(args) => commands::detect_command(args),
        Command::Cluster(args) => commands::cluster_command(args),
        Command::Evaluate(args) => commands::evaluate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
