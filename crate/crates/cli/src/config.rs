//! Run configuration: flat TOML file plus command-line overrides.
//!
//! Keys (all optional unless `study = "custom"`):
//!
//! ```text
//! study, desk_scale, out, threads, snapshot_every, snapshot_times,
//! bounds, nodes, lambda, epsilon, t_end, sweeps, tau, taus, tau_ref,
//! ic_amplitude, ic_width, ic_center_x, ic_center_y, ic_velocity_x, ic_velocity_y
//! ```
//!
//! `bounds` is `[x_L, x_R]` or `[x_L, x_R, y_L, y_R]`; the `ic_*` lists hold
//! one entry per Gaussian term. On an accuracy study `tau` replaces the
//! coarsest step and keeps the number of halvings.

use std::fmt::Write as _;
use std::path::PathBuf;

use rlogse::experiments::{
    halving_sequence, preset, ExperimentPreset, GaussianTerm, InitialCondition, SnapshotSchedule, StudyKind,
};
use toml::{Table, Value};

use crate::error::CliError;

pub const CUSTOM: &str = "custom";

const KEYS: &[&str] = &[
    "study",
    "desk_scale",
    "out",
    "threads",
    "snapshot_every",
    "snapshot_times",
    "bounds",
    "nodes",
    "lambda",
    "epsilon",
    "t_end",
    "sweeps",
    "tau",
    "taus",
    "tau_ref",
    "ic_amplitude",
    "ic_width",
    "ic_center_x",
    "ic_center_y",
    "ic_velocity_x",
    "ic_velocity_y",
];

/// Fully resolved and validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub study: String,
    pub preset: ExperimentPreset,
    pub out: PathBuf,
    pub snapshots: SnapshotSchedule,
    pub threads: usize,
}

/// Values given on the command line; `None` leaves the file or preset value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub study: Option<String>,
    pub out: Option<PathBuf>,
    pub desk_scale: bool,
    pub tau: Option<f64>,
    pub t_end: Option<f64>,
    pub nodes: Option<usize>,
    pub sweeps: Option<usize>,
    pub snapshot_every: Option<usize>,
    pub threads: Option<usize>,
}

fn bad(key: &str, reason: impl Into<String>) -> CliError {
    CliError::Config {
        key: key.into(),
        reason: reason.into(),
    }
}

/// Typed view of a parsed file.
struct Keys(Table);

impl Keys {
    fn real(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.0.get(key).map(|v| as_real(key, v)).transpose()
    }

    fn uint(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.0.get(key).map(|v| as_uint(key, v)).transpose()
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Boolean(b)) => Ok(Some(*b)),
            Some(v) => Err(bad(key, format!("expected a boolean, found {}", v.type_str()))),
        }
    }

    fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(bad(key, format!("expected a string, found {}", v.type_str()))),
        }
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| as_real(key, v))
                .collect::<Result<_, _>>()
                .map(Some),
            Some(v) => Err(bad(key, format!("expected a list of reals, found {}", v.type_str()))),
        }
    }

    fn uints(&self, key: &str) -> Result<Option<Vec<usize>>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| as_uint(key, v))
                .collect::<Result<_, _>>()
                .map(Some),
            Some(v) => Err(bad(key, format!("expected a list of integers, found {}", v.type_str()))),
        }
    }
}

fn as_real(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(bad(key, format!("expected a real, found {}", v.type_str()))),
    }
}

fn as_uint(key: &str, v: &Value) -> Result<usize, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        Value::Integer(i) => Err(bad(key, format!("must be non-negative, got {i}"))),
        _ => Err(bad(key, format!("expected an integer, found {}", v.type_str()))),
    }
}

/// Parses the text of a configuration file.
pub fn parse_table(text: &str) -> Result<Table, CliError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let key = e.message().split('`').nth(1).unwrap_or("file").to_string();
        bad(&key, e.message().trim())
    })?;
    for (key, value) in &table {
        if !KEYS.contains(&key.as_str()) {
            return Err(bad(key, "unknown key"));
        }
        if matches!(value, Value::Table(_)) {
            return Err(bad(key, "nested tables are not supported"));
        }
    }
    Ok(table)
}

/// Resolves file keys and flags into a validated configuration.
pub fn resolve(file: Option<&str>, flags: &Overrides) -> Result<RunConfig, CliError> {
    let keys = Keys(match file {
        Some(text) => parse_table(text)?,
        None => Table::new(),
    });

    let study = flags
        .study
        .clone()
        .or(keys.string("study")?)
        .ok_or_else(|| bad("study", "no study given (use --study or `study = ...`)"))?;
    let desk_scale = flags.desk_scale || keys.boolean("desk_scale")?.unwrap_or(false);

    let mut p = if study == CUSTOM {
        custom_base(&keys, desk_scale)?
    } else {
        preset(&study, desk_scale)?
    };

    if let Some(b) = keys.reals("bounds")? {
        p.bounds = pairs(&b)?;
    }
    if let Some(n) = keys.uints("nodes")? {
        p.nodes = n;
    }
    if let Some(x) = keys.real("lambda")? {
        p.lambda = x;
    }
    if let Some(x) = keys.real("epsilon")? {
        p.epsilon = x;
    }
    if let Some(x) = keys.real("t_end")? {
        p.t_end = x;
    }
    if let Some(k) = keys.uint("sweeps")? {
        p.sweeps = k;
    }
    if let Some(ic) = initial_condition(&keys)? {
        p.initial = ic;
    }
    apply_steps(&mut p, keys.reals("taus")?, keys.real("tau_ref")?, keys.real("tau")?)?;

    // flags win over the file
    if let Some(n) = flags.nodes {
        p.nodes = vec![n; p.bounds.len()];
    }
    if let Some(t) = flags.t_end {
        p.t_end = t;
    }
    if let Some(k) = flags.sweeps {
        p.sweeps = k;
    }
    apply_steps(&mut p, None, None, flags.tau)?;

    let snapshot_every = flags.snapshot_every.or(keys.uint("snapshot_every")?);
    let snapshot_times = keys.reals("snapshot_times")?;
    let snapshots = match (snapshot_every, snapshot_times) {
        (Some(_), Some(_)) if flags.snapshot_every.is_none() => {
            return Err(bad("snapshot_times", "give either snapshot_every or snapshot_times"))
        }
        (Some(0), _) => return Err(bad("snapshot_every", "must be at least 1")),
        (Some(k), _) => SnapshotSchedule::Every(k),
        (None, Some(ts)) => {
            if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && **t <= p.t_end)) {
                return Err(bad("snapshot_times", format!("time {t} outside [0, t_end]")));
            }
            SnapshotSchedule::Times(ts)
        }
        (None, None) => SnapshotSchedule::Final,
    };
    let threads = flags.threads.or(keys.uint("threads")?).unwrap_or(1);
    if threads == 0 {
        return Err(bad("threads", "must be at least 1"));
    }
    let out = flags
        .out
        .clone()
        .or(keys.string("out")?.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    validate(&p)?;
    Ok(RunConfig {
        study,
        preset: p,
        out,
        snapshots,
        threads,
    })
}

fn custom_base(keys: &Keys, desk_scale: bool) -> Result<ExperimentPreset, CliError> {
    let need = |key: &str| bad(key, "required for a custom study");
    let bounds = pairs(&keys.reals("bounds")?.ok_or_else(|| need("bounds"))?)?;
    let kind = match (keys.reals("taus")?, keys.real("tau")?) {
        (Some(taus), _) => StudyKind::Accuracy {
            taus,
            tau_ref: keys.real("tau_ref")?.ok_or_else(|| need("tau_ref"))?,
        },
        (None, Some(tau)) => StudyKind::Evolution { tau },
        (None, None) => return Err(need("tau")),
    };
    Ok(ExperimentPreset {
        name: CUSTOM.into(),
        desk_scale,
        nodes: keys.uints("nodes")?.ok_or_else(|| need("nodes"))?,
        bounds,
        lambda: keys.real("lambda")?.ok_or_else(|| need("lambda"))?,
        epsilon: keys.real("epsilon")?.ok_or_else(|| need("epsilon"))?,
        initial: initial_condition(keys)?.ok_or_else(|| need("ic_amplitude"))?,
        t_end: keys.real("t_end")?.ok_or_else(|| need("t_end"))?,
        snapshot_horizon: None,
        kind,
        sweeps: keys.uint("sweeps")?.unwrap_or(3),
    })
}

fn pairs(b: &[f64]) -> Result<Vec<(f64, f64)>, CliError> {
    if b.len() != 2 && b.len() != 4 {
        return Err(bad("bounds", format!("expected 2 or 4 reals, got {}", b.len())));
    }
    Ok(b.chunks(2).map(|c| (c[0], c[1])).collect())
}

fn initial_condition(keys: &Keys) -> Result<Option<InitialCondition>, CliError> {
    let Some(amp) = keys.reals("ic_amplitude")? else {
        for k in [
            "ic_width",
            "ic_center_x",
            "ic_center_y",
            "ic_velocity_x",
            "ic_velocity_y",
        ] {
            if keys.0.contains_key(k) {
                return Err(bad(k, "needs ic_amplitude"));
            }
        }
        return Ok(None);
    };
    let n = amp.len();
    let list = |key: &str, default: f64| -> Result<Vec<f64>, CliError> {
        let v = keys.reals(key)?.unwrap_or_else(|| vec![default; n]);
        if v.len() != n {
            return Err(bad(
                key,
                format!("expected {n} entries to match ic_amplitude, got {}", v.len()),
            ));
        }
        Ok(v)
    };
    let (w, cx, cy, vx, vy) = (
        list("ic_width", 1.0)?,
        list("ic_center_x", 0.0)?,
        list("ic_center_y", 0.0)?,
        list("ic_velocity_x", 0.0)?,
        list("ic_velocity_y", 0.0)?,
    );
    let terms = (0..n)
        .map(|k| GaussianTerm::new(amp[k], w[k], [cx[k], cy[k]], [vx[k], vy[k]]))
        .collect();
    Ok(Some(InitialCondition { terms }))
}

fn apply_steps(
    p: &mut ExperimentPreset,
    taus: Option<Vec<f64>>,
    tau_ref: Option<f64>,
    tau: Option<f64>,
) -> Result<(), CliError> {
    match &mut p.kind {
        StudyKind::Evolution { tau: t } => {
            if taus.is_some() {
                return Err(bad("taus", "only valid for accuracy studies"));
            }
            if tau_ref.is_some() {
                return Err(bad("tau_ref", "only valid for accuracy studies"));
            }
            if let Some(x) = tau {
                *t = x;
            }
        }
        StudyKind::Accuracy { taus: ts, tau_ref: r } => {
            if let Some(list) = taus {
                *ts = list;
            }
            if let Some(x) = tau_ref {
                *r = x;
            }
            if let Some(x) = tau {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(bad("tau", format!("step size must be positive, got {x}")));
                }
                *ts = halving_sequence(x, ts.len());
            }
        }
    }
    Ok(())
}

fn validate(p: &ExperimentPreset) -> Result<(), CliError> {
    if p.nodes.len() != p.bounds.len() {
        return Err(bad(
            "nodes",
            format!("{} axes in bounds but {} node counts", p.bounds.len(), p.nodes.len()),
        ));
    }
    if let Some(n) = p.nodes.iter().find(|&&n| n < 4 || n % 2 != 0) {
        return Err(bad("nodes", format!("node counts must be even and >= 4, got {n}")));
    }
    if let Some((a, b)) = p
        .bounds
        .iter()
        .find(|(a, b)| !(a < b && a.is_finite() && b.is_finite()))
    {
        return Err(bad("bounds", format!("need lower < upper, got [{a}, {b}]")));
    }
    if p.dims() == 1 {
        if let Some(t) = p
            .initial
            .terms
            .iter()
            .find(|t| t.center[1] != 0.0 || t.velocity[1] != 0.0)
        {
            return Err(bad("ic_center_y", format!("1D study has a y component in {t:?}")));
        }
    }
    p.validate().map_err(CliError::from)
}

/// Flat TOML echo of every resolved parameter; parsing it back with
/// [`resolve`] reproduces the run.
pub fn echo(cfg: &RunConfig) -> String {
    let p = &cfg.preset;
    let mut s = String::new();
    let reals = |v: &[f64]| v.iter().map(|x| real(*x)).collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "study = {:?}", cfg.study);
    let _ = writeln!(s, "desk_scale = {}", p.desk_scale);
    let _ = writeln!(s, "threads = {}", cfg.threads);
    match &cfg.snapshots {
        SnapshotSchedule::Final => {}
        SnapshotSchedule::Every(k) => {
            let _ = writeln!(s, "snapshot_every = {k}");
        }
        SnapshotSchedule::Times(ts) => {
            let _ = writeln!(s, "snapshot_times = [{}]", reals(ts));
        }
    }
    let flat: Vec<f64> = p.bounds.iter().flat_map(|&(a, b)| [a, b]).collect();
    let _ = writeln!(s, "bounds = [{}]", reals(&flat));
    let nodes: Vec<String> = p.nodes.iter().map(|n| n.to_string()).collect();
    let _ = writeln!(s, "nodes = [{}]", nodes.join(", "));
    let _ = writeln!(s, "lambda = {}", real(p.lambda));
    let _ = writeln!(s, "epsilon = {}", real(p.epsilon));
    let _ = writeln!(s, "t_end = {}", real(p.t_end));
    let _ = writeln!(s, "sweeps = {}", p.sweeps);
    match &p.kind {
        StudyKind::Evolution { tau } => {
            let _ = writeln!(s, "tau = {}", real(*tau));
        }
        StudyKind::Accuracy { taus, tau_ref } => {
            let _ = writeln!(s, "taus = [{}]", reals(taus));
            let _ = writeln!(s, "tau_ref = {}", real(*tau_ref));
        }
    }
    let terms = &p.initial.terms;
    let field = |f: &dyn Fn(&GaussianTerm) -> f64| reals(&terms.iter().map(f).collect::<Vec<_>>());
    let _ = writeln!(s, "ic_amplitude = [{}]", field(&|t| t.amplitude));
    let _ = writeln!(s, "ic_width = [{}]", field(&|t| t.width));
    let _ = writeln!(s, "ic_center_x = [{}]", field(&|t| t.center[0]));
    let _ = writeln!(s, "ic_center_y = [{}]", field(&|t| t.center[1]));
    let _ = writeln!(s, "ic_velocity_x = [{}]", field(&|t| t.velocity[0]));
    let _ = writeln!(s, "ic_velocity_y = [{}]", field(&|t| t.velocity[1]));
    s
}

/// Shortest round-trip representation, always with a decimal point or
/// exponent so TOML reads it back as a float.
fn real(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains(['.', 'e', 'E']) || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}
