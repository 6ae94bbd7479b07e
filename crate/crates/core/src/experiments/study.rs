//! Driver that runs a preset end to end.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::integrator::{step_count, Integrator, SolverConfig, StepReport};
use crate::spectral::SpectralOperator;
use crate::tableau::ButcherTableau;

use super::diagnostics::{l2_error, order_table, residual_series, ConvergenceRow, ResidualRow};
use super::presets::{ExperimentPreset, StudyKind};

/// When to keep copies of the solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum SnapshotSchedule {
    /// Only the final state.
    #[default]
    Final,
    /// Every `k` steps, plus the initial and final state.
    Every(usize),
    /// At the steps nearest to these times, plus the final state.
    Times(Vec<f64>),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads for independent runs of an accuracy study; `1` keeps
    /// everything on the calling thread.
    pub threads: usize,
    pub snapshots: SnapshotSchedule,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub tau: f64,
    pub field: ComplexField,
}

#[derive(Debug, Clone)]
pub struct StudyOutput {
    /// Rows for accuracy studies, coarsest first.
    pub convergence: Option<Vec<ConvergenceRow>>,
    /// Step reports of the primary run (`τ₀` for accuracy studies).
    pub reports: Vec<StepReport>,
    pub residuals: Vec<ResidualRow>,
    pub snapshots: Vec<Snapshot>,
    pub final_field: ComplexField,
}

/// Progress sink; receives the reports of the primary run.
pub type Progress<'a> = &'a (dyn Fn(&StepReport) + Sync);

struct Run {
    reports: Vec<StepReport>,
    snapshots: Vec<Snapshot>,
    final_field: ComplexField,
}

fn run_one(
    op: &Arc<SpectralOperator>,
    preset: &ExperimentPreset,
    u0: &ComplexField,
    tau: f64,
    schedule: Option<&SnapshotSchedule>,
    progress: Option<Progress<'_>>,
) -> Result<Run> {
    let cfg = SolverConfig::new(tau).with_sweeps(preset.sweeps);
    let integ = Integrator::with_operator(op.clone(), ButcherTableau::gauss2(), cfg, preset.params()?)?;
    let (full, rest) = step_count(preset.t_end, tau);
    let total = full + usize::from(rest.is_some());
    let steps: Vec<usize> = match schedule {
        Some(SnapshotSchedule::Times(ts)) => ts.iter().map(|t| ((t / tau).round() as usize).min(total)).collect(),
        _ => Vec::new(),
    };
    let every = match schedule {
        Some(SnapshotSchedule::Every(k)) => Some(*k),
        _ => None,
    };
    let mut snapshots = Vec::new();
    if schedule.is_some() && (every.is_some() || steps.contains(&0) || total == 0) {
        snapshots.push(Snapshot {
            step: 0,
            time: 0.0,
            tau,
            field: u0.clone(),
        });
    }
    let mut reports = Vec::with_capacity(total);
    let final_field = integ.integrate_with(
        u0,
        preset.t_end,
        |n| every.is_some_and(|k| k > 0 && n % k == 0) || steps.contains(&n),
        |ev| {
            reports.push(ev.report.clone());
            if let Some(p) = progress {
                p(ev.report);
            }
            if let (Some(field), Some(_)) = (ev.snapshot, schedule) {
                snapshots.push(Snapshot {
                    step: ev.step,
                    time: ev.time,
                    tau,
                    field: field.clone(),
                });
            }
        },
    )?;
    Ok(Run {
        reports,
        snapshots,
        final_field,
    })
}

/// Validates and executes a study.
pub fn run_study(preset: &ExperimentPreset, opts: &RunOptions, progress: Option<Progress<'_>>) -> Result<StudyOutput> {
    preset.validate()?;
    let grid = preset.grid()?;
    let op = Arc::new(SpectralOperator::new(&grid));
    let u0 = preset.initial.sample(&grid);
    let schedule = &opts.snapshots;

    match &preset.kind {
        StudyKind::Evolution { tau } => {
            let run = run_one(&op, preset, &u0, *tau, Some(schedule), progress)?;
            Ok(StudyOutput {
                convergence: None,
                residuals: residual_series(&run.reports)?,
                reports: run.reports,
                snapshots: run.snapshots,
                final_field: run.final_field,
            })
        }
        StudyKind::Accuracy { taus, tau_ref } => {
            // index 0 is the primary run, the last entry the reference
            let mut all: Vec<f64> = taus.clone();
            all.push(*tau_ref);
            let job = |k: usize| -> Result<Run> {
                let primary = k == 0;
                run_one(
                    &op,
                    preset,
                    &u0,
                    all[k],
                    primary.then_some(schedule),
                    if primary { progress } else { None },
                )
            };
            let runs: Vec<Run> = if opts.threads > 1 {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(opts.threads)
                    .build()
                    .map_err(|e| Error::Study(format!("thread pool: {e}")))?;
                pool.install(|| (0..all.len()).into_par_iter().map(job).collect::<Result<_>>())?
            } else {
                (0..all.len()).map(job).collect::<Result<_>>()?
            };
            let reference = &runs[runs.len() - 1].final_field;
            let errors = runs[..taus.len()]
                .iter()
                .map(|r| l2_error(&r.final_field, reference))
                .collect::<Result<Vec<_>>>()?;
            let convergence = order_table(taus, &errors)?;
            let mut runs = runs.into_iter();
            let primary = runs.next().unwrap();
            Ok(StudyOutput {
                convergence: Some(convergence),
                residuals: residual_series(&primary.reports)?,
                reports: primary.reports,
                snapshots: primary.snapshots,
                final_field: primary.final_field,
            })
        }
    }
}
