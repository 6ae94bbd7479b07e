//! Command-line driver for the `rlogse` solver: configuration, study
//! execution and artifact emission.

pub mod artifacts;
pub mod config;
pub mod error;
pub mod snapshot;

use std::path::PathBuf;
use std::sync::Mutex;

use clap::Parser;
use rlogse::experiments::{run_study, RunOptions, StudyOutput};
use rlogse::StepReport;

pub use config::{resolve, Overrides, RunConfig};
pub use error::CliError;

/// Conserving solver for the regularized logarithmic Schrödinger equation.
#[derive(Debug, Parser)]
#[command(name = "rlogse", version)]
pub struct Args {
    /// Catalogued study (accuracy-1d, cases-1d/I..IV, accuracy-2d,
    /// cases-2d/I..III) or `custom`.
    #[arg(long)]
    pub study: Option<String>,
    /// Flat TOML run configuration; flags override its keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Use the reduced preset of the study.
    #[arg(long)]
    pub desk_scale: bool,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Nodes per axis.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Prediction sweeps K.
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Args {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            study: self.study.clone(),
            out: self.out.clone(),
            desk_scale: self.desk_scale,
            tau: self.tau,
            t_end: self.t_end,
            nodes: self.nodes,
            sweeps: self.sweeps,
            snapshot_every: self.snapshot_every,
            threads: self.threads,
        }
    }
}

pub const PROGRESS_EVERY: usize = 100;

/// Parses the configuration named by `args` and resolves it.
pub fn load(args: &Args) -> Result<RunConfig, CliError> {
    let text = match &args.config {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?),
        None => None,
    };
    resolve(text.as_deref(), &args.overrides())
}

/// Runs a resolved configuration; `progress` receives a line every
/// [`PROGRESS_EVERY`] steps. On solver failure the last completed step is
/// reported through `progress` before the error is returned.
pub fn execute(cfg: &RunConfig, progress: &(dyn Fn(&str) + Sync)) -> Result<StudyOutput, CliError> {
    let opts = RunOptions {
        threads: cfg.threads,
        snapshots: cfg.snapshots.clone(),
    };
    // (initial mass, initial energy, last report)
    let state: Mutex<Option<(f64, f64, StepReport)>> = Mutex::new(None);
    let line = |r: &StepReport, m0: f64, e0: f64| {
        format!(
            "step {} t={:.6} e_mass={:.3e} e_energy={:.3e} beta=({:.3e}, {:.3e}) newton={}",
            r.step,
            r.time,
            (r.mass_after - m0).abs() / m0,
            (r.energy_after - e0).abs() / e0.abs(),
            r.beta1,
            r.beta2,
            r.newton_iterations
        )
    };
    let sink = |r: &StepReport| {
        let mut s = state.lock().unwrap();
        let (m0, e0) = s.as_ref().map_or((r.mass_before, r.energy_before), |x| (x.0, x.1));
        if r.step.is_multiple_of(PROGRESS_EVERY) {
            progress(&line(r, m0, e0));
        }
        *s = Some((m0, e0, r.clone()));
    };
    run_study(&cfg.preset, &opts, Some(&sink)).map_err(|e| {
        if let Some((m0, e0, r)) = state.lock().unwrap().as_ref() {
            progress(&format!("last completed {}", line(r, *m0, *e0)));
        }
        CliError::from(e)
    })
}

/// Full CLI pipeline; returns the process exit code.
pub fn main_with(args: &Args) -> i32 {
    let report = |msg: &str| eprintln!("{msg}");
    let result = load(args).and_then(|cfg| {
        let out = execute(&cfg, &report)?;
        artifacts::emit(&cfg, &out)?;
        Ok(cfg)
    });
    match result {
        Ok(cfg) => {
            eprintln!("wrote artifacts to {}", cfg.out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
