//! CSV tables, snapshots and the run manifest.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rlogse::experiments::{ConvergenceRow, ResidualRow, StudyOutput};
use sha2::{Digest, Sha256};

use crate::config::{echo, RunConfig};
use crate::error::CliError;
use crate::snapshot::{self, SnapshotFile};

pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const RESIDUALS_CSV: &str = "residuals.csv";
pub const MANIFEST: &str = "manifest.txt";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("tau,l2_error,order\n");
    for r in rows {
        let order = r.order.map(real).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", real(r.tau), real(r.l2_error), order);
    }
    s
}

pub fn residuals_csv(rows: &[ResidualRow]) -> String {
    let mut s = String::from("step,t,e_mass,e_energy,beta1,beta2,newton_iters\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.step,
            real(r.time),
            real(r.e_mass),
            real(r.e_energy),
            real(r.beta1),
            real(r.beta2),
            r.newton_iterations
        );
    }
    s
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:08}.bin")
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes every artifact of a finished study into `cfg.out` and returns
/// the paths written, manifest last.
pub fn emit(cfg: &RunConfig, out: &StudyOutput) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.out;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    // (relative name, contents) in a fixed order
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    if let Some(rows) = &out.convergence {
        files.push((CONVERGENCE_CSV.into(), convergence_csv(rows).into_bytes()));
    }
    files.push((RESIDUALS_CSV.into(), residuals_csv(&out.residuals).into_bytes()));
    for s in &out.snapshots {
        let snap = SnapshotFile {
            time: s.time,
            lambda: cfg.preset.lambda,
            epsilon: cfg.preset.epsilon,
            tau: s.tau,
            sweeps: cfg.preset.sweeps,
            field: s.field.clone(),
        };
        files.push((
            format!("{SNAPSHOT_DIR}/{}", snapshot_name(s.step)),
            snapshot::encode(&snap),
        ));
    }
    if !out.snapshots.is_empty() {
        let sd = dir.join(SNAPSHOT_DIR);
        std::fs::create_dir_all(&sd).map_err(|e| CliError::io(&sd, e))?;
    }

    let mut manifest = String::from("# rlogse run manifest; parse with --config to rerun\n");
    manifest.push_str(&echo(cfg));
    let mut written = Vec::new();
    for (name, bytes) in &files {
        let path = dir.join(name);
        write(&path, bytes)?;
        let _ = writeln!(manifest, "# sha256 {name} {}", hex(&Sha256::digest(bytes)));
        written.push(path);
    }
    let path = dir.join(MANIFEST);
    write(&path, manifest.as_bytes())?;
    written.push(path);
    Ok(written)
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
