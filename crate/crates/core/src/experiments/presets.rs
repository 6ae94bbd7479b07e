//! Catalogue of initial data and study parameters.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::model::ModelParams;

/// One term `b · exp(-a/2 |x - x₀|² + i v·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub width: f64,
    pub center: [f64; 2],
    pub velocity: [f64; 2],
}

impl GaussianTerm {
    pub fn new(amplitude: f64, width: f64, center: [f64; 2], velocity: [f64; 2]) -> Self {
        GaussianTerm {
            amplitude,
            width,
            center,
            velocity,
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        let r2 = dx * dx + dy * dy;
        let phase = self.velocity[0] * x + self.velocity[1] * y;
        Complex64::from_polar(self.amplitude * (-0.5 * self.width * r2).exp(), phase)
    }
}

/// Superposition of moving Gaussian profiles.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub terms: Vec<GaussianTerm>,
}

impl InitialCondition {
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval(x, y)).sum()
    }

    /// Samples the datum at the grid nodes.
    pub fn sample(&self, grid: &Arc<Grid>) -> ComplexField {
        ComplexField::from_fn(grid, |x, y| self.eval(x, y))
    }
}

/// What a study computes.
#[derive(Debug, Clone, PartialEq)]
pub enum StudyKind {
    /// Temporal self-convergence: runs at each `τ` (halving sequence) are
    /// compared with the same scheme at `tau_ref`.
    Accuracy { taus: Vec<f64>, tau_ref: f64 },
    /// Single long run tracking the invariants.
    Evolution { tau: f64 },
}

/// A fully resolved study configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPreset {
    pub name: String,
    pub desk_scale: bool,
    pub bounds: Vec<(f64, f64)>,
    pub nodes: Vec<usize>,
    pub lambda: f64,
    pub epsilon: f64,
    pub initial: InitialCondition,
    pub t_end: f64,
    /// Horizon of the density-evolution plots, when it differs from `t_end`.
    pub snapshot_horizon: Option<f64>,
    pub kind: StudyKind,
    pub sweeps: usize,
}

/// Catalogued study names.
pub const STUDY_NAMES: &[&str] = &[
    "accuracy-1d",
    "cases-1d/I",
    "cases-1d/II",
    "cases-1d/III",
    "cases-1d/IV",
    "accuracy-2d",
    "cases-2d/I",
    "cases-2d/II",
    "cases-2d/III",
];

/// `τ₀ / 2^k` for `k = 0..count`.
pub fn halving_sequence(tau0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| tau0 / f64::powi(2.0, k as i32)).collect()
}

/// The reference step must be at least this many times finer than the
/// finest step of an accuracy study.
pub const MIN_REFERENCE_RATIO: f64 = 4.0;

impl ExperimentPreset {
    pub fn grid(&self) -> Result<Arc<Grid>> {
        Grid::new(&self.bounds, &self.nodes)
    }

    pub fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.lambda, self.epsilon)
    }

    pub fn initial_field(&self) -> Result<ComplexField> {
        Ok(self.initial.sample(&self.grid()?))
    }

    pub fn dims(&self) -> usize {
        self.bounds.len()
    }

    /// Checks every physical and study parameter before any computation.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.params()?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::config(
                "t_end",
                format!("must be finite and >= 0, got {}", self.t_end),
            ));
        }
        if self.sweeps == 0 {
            return Err(Error::config("sweeps", "must be at least 1"));
        }
        if self.initial.terms.is_empty() {
            return Err(Error::config("ic", "initial condition has no terms"));
        }
        match &self.kind {
            StudyKind::Evolution { tau } => check_tau("tau", *tau)?,
            StudyKind::Accuracy { taus, tau_ref } => {
                check_tau("tau_ref", *tau_ref)?;
                if taus.is_empty() {
                    return Err(Error::config("taus", "empty step-size list"));
                }
                for &t in taus {
                    check_tau("taus", t)?;
                }
                check_halving(taus).map_err(|e| Error::config("taus", e.to_string()))?;
                let finest = taus[taus.len() - 1];
                if *tau_ref * MIN_REFERENCE_RATIO > finest * (1.0 + 1e-12) {
                    return Err(Error::config(
                        "tau_ref",
                        format!("must be at most 1/{MIN_REFERENCE_RATIO} of the finest step {finest}, got {tau_ref}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_tau(key: &str, tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("step size must be positive, got {tau}")))
    }
}

/// Requires `taus` to be strictly halving (relative tolerance `1e-12`).
pub fn check_halving(taus: &[f64]) -> Result<()> {
    for w in taus.windows(2) {
        if ((w[0] / w[1]) - 2.0).abs() > 1e-12 {
            return Err(Error::Study(format!(
                "step sizes must halve exactly: {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn pair_1d(length: f64, center: f64, velocity: f64) -> (Vec<(f64, f64)>, InitialCondition) {
    let terms = vec![
        GaussianTerm::new(1.0, 1.0, [-center, 0.0], [velocity, 0.0]),
        GaussianTerm::new(1.0, 1.0, [center, 0.0], [-velocity, 0.0]),
    ];
    (vec![(-length, length)], InitialCondition { terms })
}

/// Looks up a catalogued study. `desk_scale` selects the reduced variant.
pub fn preset(name: &str, desk_scale: bool) -> Result<ExperimentPreset> {
    let lambda = -1.0;
    let quarter = PI.powf(-0.25);
    let preset = match name {
        "accuracy-1d" => ExperimentPreset {
            name: name.into(),
            desk_scale,
            bounds: vec![(-16.0, 16.0)],
            nodes: vec![if desk_scale { 256 } else { 512 }],
            lambda,
            epsilon: 1e-15,
            // sqrt(-λ/π) exp(i x + λ x²/2)
            initial: InitialCondition {
                terms: vec![GaussianTerm::new(
                    (-lambda / PI).sqrt(),
                    -lambda,
                    [0.0, 0.0],
                    [1.0, 0.0],
                )],
            },
            t_end: 1.0,
            snapshot_horizon: None,
            kind: StudyKind::Accuracy {
                taus: halving_sequence(1.0 / 40.0, 5),
                tau_ref: 1e-4,
            },
            sweeps: 3,
        },
        "accuracy-2d" => ExperimentPreset {
            name: name.into(),
            desk_scale,
            bounds: vec![(-16.0, 16.0); 2],
            nodes: vec![if desk_scale { 128 } else { 512 }; 2],
            lambda,
            epsilon: 1e-12,
            initial: InitialCondition {
                terms: vec![GaussianTerm::new(PI.powf(-1.0 / 3.0), -lambda, [-2.0, 0.0], [1.0, 1.0])],
            },
            t_end: 1.0,
            snapshot_horizon: None,
            kind: if desk_scale {
                StudyKind::Accuracy {
                    taus: halving_sequence(1.0 / 10.0, 4),
                    tau_ref: 1.0 / 320.0,
                }
            } else {
                StudyKind::Accuracy {
                    taus: halving_sequence(1.0 / 40.0, 5),
                    tau_ref: 2e-4,
                }
            },
            sweeps: 3,
        },
        _ if name.starts_with("cases-1d/") => {
            let (length, center, velocity, horizon) = match &name["cases-1d/".len()..] {
                "I" => (16.0, 5.0, 0.0, 500.0),
                "II" => (40.0, 3.0, 0.0, 100.0),
                "III" => (50.0, 30.0, 2.0, 16.0),
                "IV" => (50.0, 30.0, 15.0, 3.0),
                _ => return Err(unknown(name)),
            };
            let (bounds, initial) = pair_1d(length, center, velocity);
            ExperimentPreset {
                name: name.into(),
                desk_scale,
                bounds,
                nodes: vec![1024],
                lambda,
                epsilon: 1e-15,
                initial,
                t_end: if desk_scale { f64::min(horizon, 10.0) } else { 100.0 },
                snapshot_horizon: Some(horizon),
                kind: StudyKind::Evolution { tau: 5e-3 },
                sweeps: 3,
            }
        }
        _ if name.starts_with("cases-2d/") => {
            let mut bounds = vec![(-16.0, 16.0); 2];
            let terms = match &name["cases-2d/".len()..] {
                "I" => vec![
                    GaussianTerm::new(quarter, 1.0, [-2.0, 0.0], [0.0, 0.0]),
                    GaussianTerm::new(quarter, 1.0, [2.0, 0.0], [0.0, 0.0]),
                ],
                "II" => vec![
                    GaussianTerm::new(quarter, 1.0, [0.0, 0.0], [-0.15, 0.0]),
                    GaussianTerm::new(quarter / 1.5, 1.0, [5.0, 0.0], [0.0, 0.0]),
                ],
                "III" => {
                    // room for the drift along +y
                    bounds[1] = (-16.0, 48.0);
                    vec![
                        GaussianTerm::new(quarter, 1.0, [-2.0, 0.0], [0.0, 0.0]),
                        GaussianTerm::new(quarter, 1.0, [2.0, 0.0], [0.0, 0.85]),
                    ]
                }
                _ => return Err(unknown(name)),
            };
            ExperimentPreset {
                name: name.into(),
                desk_scale,
                bounds,
                nodes: vec![if desk_scale { 128 } else { 512 }; 2],
                lambda,
                epsilon: 1e-12,
                initial: InitialCondition { terms },
                t_end: if desk_scale { 5.0 } else { 20.0 },
                snapshot_horizon: None,
                kind: StudyKind::Evolution { tau: 1e-2 },
                sweeps: 3,
            }
        }
        _ => return Err(unknown(name)),
    };
    Ok(preset)
}

fn unknown(name: &str) -> Error {
    Error::config(
        "study",
        format!("unknown study `{name}`; expected one of {}", STUDY_NAMES.join(", ")),
    )
}

/// Builds the catalogued initial datum of a study.
pub fn initial_condition(name: &str, desk_scale: bool) -> Result<ComplexField> {
    preset(name, desk_scale)?.initial_field()
}
