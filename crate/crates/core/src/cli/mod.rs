//! Command-line front end: configuration merging, experiment presets, CSV
//! output and a companion gnuplot script.
//!
//! Exit codes: 0 success, 1 invalid configuration, 2 runtime failure.

mod config;
mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use thiserror::Error;

pub use config::{parse_config, parse_config_str, Overrides, RunConfig};
pub use output::{csv_rows, plot_script, render_csv, CSV_HEADER};

use crate::scheduler::SchedulerMode;
use crate::sim::{run_sweep, RunMetrics, SimConfig};

/// Named experiment setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// BLER versus SNR for each MCS.
    BlerVsSnr,
    /// Total throughput versus SNR for each MCS.
    RateVsSnr,
    /// MU-MIMO against proportional-fair single-user scheduling.
    MuVsPf,
    /// 52 RB (20 MHz at 30 kHz) profile, single-user reference and MU-MIMO.
    PracticalProfile,
}

impl Preset {
    pub const ALL: [Preset; 4] = [
        Preset::BlerVsSnr,
        Preset::RateVsSnr,
        Preset::MuVsPf,
        Preset::PracticalProfile,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::BlerVsSnr => "bler-vs-snr",
            Preset::RateVsSnr => "rate-vs-snr",
            Preset::MuVsPf => "mu-vs-pf",
            Preset::PracticalProfile => "practical",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// Settings the preset pins regardless of file or flags.
    pub fn force(&self, cfg: &mut SimConfig) {
        if let Preset::PracticalProfile = self {
            cfg.num_rb = 52;
        }
    }

    /// Scheduler modes swept by the preset, in output order.
    pub fn modes(&self, cfg: &SimConfig) -> Vec<SchedulerMode> {
        match self {
            Preset::BlerVsSnr | Preset::RateVsSnr => vec![cfg.scheduler_mode],
            Preset::MuVsPf => vec![SchedulerMode::MuMimoEnabled, SchedulerMode::ProportionalFairOnly],
            Preset::PracticalProfile => vec![SchedulerMode::SingleUserOnly, SchedulerMode::MuMimoEnabled],
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config file {path}: {message}")]
    Syntax { path: PathBuf, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid configuration: {0}")]
    Sim(#[from] crate::Error),
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("simulation failed: {0}")]
    Sim(crate::Error),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 1,
            RunError::Sim(_) | RunError::Write { .. } => 2,
        }
    }
}

/// Link-level MU-MIMO PDSCH simulator.
#[derive(Debug, Default, Parser)]
#[command(name = "nr-mumimo", version, allow_negative_numbers = true)]
pub struct Args {
    /// Config file (`key = value` lines, lists as `[a, b, c]`).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// bler-vs-snr | rate-vs-snr | mu-vs-pf | practical
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// SNR grid in dB as MIN:MAX:STEP, or a single value.
    #[arg(long, value_name = "MIN:MAX:STEP")]
    pub snr: Option<String>,
    /// MCS indices, comma separated; `a-b` expands to a range.
    #[arg(long, value_name = "LIST")]
    pub mcs: Option<String>,
    /// ideal | rayleigh
    #[arg(long)]
    pub channel: Option<String>,
    /// mumimo | pf | su
    #[arg(long)]
    pub sched: Option<String>,
    #[arg(long, value_name = "N")]
    pub rb: Option<String>,
    #[arg(long, value_name = "N")]
    pub seed: Option<String>,
    #[arg(long = "tb-per-point", value_name = "N")]
    pub tb_per_point: Option<String>,
    /// Output CSV path; the plot script is written next to it.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// bdd | threshold
    #[arg(long = "link-model")]
    pub link_model: Option<String>,
    #[arg(long, value_name = "X")]
    pub epsilon: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<String>,
}

/// Sweeps produced by one invocation, in output order.
pub fn execute(cfg: &RunConfig) -> Result<Vec<RunMetrics>, RunError> {
    let modes = match cfg.preset {
        Some(p) => p.modes(&cfg.sim),
        None => vec![cfg.sim.scheduler_mode],
    };
    modes
        .into_iter()
        .map(|mode| {
            let sim = SimConfig {
                scheduler_mode: mode,
                ..cfg.sim.clone()
            };
            run_sweep(&sim).map_err(RunError::Sim)
        })
        .collect()
}

/// Path of the gnuplot script written alongside `csv`.
pub fn plot_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}

/// Runs a parsed configuration and writes its outputs.
pub fn run(cfg: &RunConfig) -> Result<(), RunError> {
    let sweeps = execute(cfg)?;
    let csv = render_csv(&sweeps);
    let script = plot_script(cfg.preset, &cfg.out, &cfg.sim);
    let plot = plot_path(&cfg.out);
    let write = |path: &Path, body: &str| {
        std::fs::write(path, body).map_err(|source| RunError::Write {
            path: path.to_path_buf(),
            source,
        })
    };
    write(&cfg.out, &csv)?;
    if let Err(e) = write(&plot, &script) {
        let _ = std::fs::remove_file(&cfg.out);
        let _ = std::fs::remove_file(&plot);
        return Err(e);
    }
    Ok(())
}

/// Entry point shared by the binary and tests; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = parse_config(&args)
        .map_err(RunError::from)
        .and_then(|cfg| run(&cfg).map(|()| cfg));
    match result {
        Ok(cfg) => {
            eprintln!("wrote {} and {}", cfg.out.display(), plot_path(&cfg.out).display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
