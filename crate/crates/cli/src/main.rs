//! `mmot`: batch front end for the membrane MOT simulator.
//!
//! Exit status is 0 on success, 1 for invalid input (arguments, scenario,
//! CSV) and 2 for failures while running or fitting.

mod commands;
mod error;
mod experiment;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{FitModel, RunRequest, SweepRequest};

#[derive(Parser)]
#[command(name = "mmot", version, about = "Membrane MOT simulator: loading runs, sweeps, cooling and fits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Base seed; required for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Scenario override, e.g. `vapor.injection_rate_per_s=2e4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Figure manifest supplying scenario, seed and overrides.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// MOT loading run, with optional PG cooling and TOF stages.
    Run {
        #[command(flatten)]
        common: Common,
        /// Follow loading with the polarization-gradient cooling stage.
        #[arg(long)]
        pg: bool,
        /// Comma-separated TOF drop times in ms.
        #[arg(long, value_name = "MS,MS,...")]
        tof_ms: Option<String>,
        /// Record trajectories of the first N injected atoms.
        #[arg(long, default_value_t = 0)]
        trajectories: u64,
        /// Integration steps between trajectory points.
        #[arg(long, default_value_t = 100)]
        trajectory_stride: u64,
    },
    /// One run per value of a scenario key, aggregated into a table.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted scenario key, e.g. `device.hole_diameter_mm`.
        #[arg(long)]
        key: Option<String>,
        /// Comma-separated values.
        #[arg(long)]
        values: Option<String>,
        /// Comma-separated subset of loading, pg, capture (default loading,pg).
        #[arg(long)]
        metrics: Option<String>,
        /// Launch direction for the capture metric.
        #[arg(long, default_value = "1,0,0")]
        direction: String,
        /// Capture velocity tolerance, m/s.
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
    /// Fit a CSV series and write a JSON report.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        model: FitModel,
        #[arg(long)]
        out: PathBuf,
        /// Atomic mass for TOF temperatures (default Cs-133).
        #[arg(long)]
        mass_amu: Option<f64>,
        /// Explicit x and y column names, e.g. `value,steady_state` on a sweep table.
        #[arg(long, value_name = "X,Y")]
        columns: Option<String>,
    },
    /// Loading, PG cooling and a time-of-flight series with temperature fits.
    Tof {
        #[command(flatten)]
        common: Common,
        /// Comma-separated drop times in ms.
        #[arg(long, default_value = "0,1,2,3,4,5,6")]
        drops_ms: String,
        /// Drop the MOT cloud directly, without PG cooling.
        #[arg(long)]
        no_pg: bool,
    },
    /// Capture velocity by bisection on the launch speed.
    Capture {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "1,0,0")]
        direction: String,
        /// m/s
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
    /// Write the built-in scenarios (`paper_free_space`, `paper_hole_0p4mm`,
    /// `paper_bridged_0p4mm` or `all`) as JSON.
    ScenarioGen {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_request(c: Common, pg: bool, tof_ms: Option<String>, trajectories: u64, trajectory_stride: u64) -> RunRequest {
    RunRequest {
        scenario: c.scenario,
        seed: c.seed,
        out: c.out,
        set: c.set,
        workers: c.workers,
        manifest: c.manifest,
        pg,
        tof_ms,
        trajectories,
        trajectory_stride,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run { common, pg, tof_ms, trajectories, trajectory_stride } => {
            commands::cmd_run(run_request(common, pg, tof_ms, trajectories, trajectory_stride), "run")
        }
        Command::Tof { common, drops_ms, no_pg } => {
            commands::cmd_run(run_request(common, !no_pg, Some(drops_ms), 0, 1), "tof")
        }
        Command::Sweep { common, key, values, metrics, direction, tolerance } => commands::cmd_sweep(SweepRequest {
            scenario: common.scenario,
            seed: common.seed,
            out: common.out,
            set: common.set,
            workers: common.workers,
            manifest: common.manifest,
            key,
            values,
            metrics,
            direction,
            tolerance,
        }),
        Command::Fit { input, model, out, mass_amu, columns } => {
            commands::cmd_fit(&input, model, &out, mass_amu, columns.as_deref())
        }
        Command::Capture { scenario, set, out, direction, tolerance } => {
            commands::cmd_capture(&scenario, &set, out.as_deref(), &direction, tolerance)
        }
        Command::ScenarioGen { name, out } => commands::cmd_scenario_gen(&name, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
