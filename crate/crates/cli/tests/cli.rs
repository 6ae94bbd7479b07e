use std::path::Path;
use std::process::{Command, Output};

use rlogse::experiments::preset;
use rlogse_cli::artifacts::{CONVERGENCE_CSV, MANIFEST, RESIDUALS_CSV, SNAPSHOT_DIR};
use rlogse_cli::snapshot;

fn rlogse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlogse")).args(args).output().unwrap()
}

fn run_ok(args: &[&str]) -> Output {
    let out = rlogse(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in [dir.to_path_buf(), dir.join(SNAPSHOT_DIR)] {
        let Ok(rd) = std::fs::read_dir(&sub) else { continue };
        for e in rd {
            let p = e.unwrap().path();
            if p.is_file() {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    std::fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn unknown_study_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rlogse(&["--study", "cases-1d/V", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("study"));
}

#[test]
fn invalid_nodes_exit_2_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let out = rlogse(&[
        "--study",
        "cases-1d/I",
        "--nodes",
        "255",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nodes"));
}

#[test]
fn unknown_config_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "study = \"cases-1d/I\"\nlamda = -1.0\n").unwrap();
    let out = rlogse(&["--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lamda"));
}

#[test]
fn bad_flag_exits_2() {
    assert_eq!(rlogse(&["--no-such-flag"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let out_dir = blocker.join("out");
    let out = rlogse(&[
        "--study",
        "cases-1d/I",
        "--desk-scale",
        "--t-end",
        "0.01",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evolution_run_writes_residuals_and_snapshots() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    // 3 steps of size 5e-3, a snapshot every 2 steps plus the final one
    run_ok(&[
        "--study",
        "cases-1d/II",
        "--desk-scale",
        "--t-end",
        "0.015",
        "--snapshot-every",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let rows = lines(&dir.join(RESIDUALS_CSV));
    assert_eq!(rows[0], "step,t,e_mass,e_energy,beta1,beta2,newton_iters");
    assert_eq!(rows.len(), 4);
    for (k, row) in rows[1..].iter().enumerate() {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert_eq!(cols[0].parse::<usize>().unwrap(), k + 1);
        let e_mass: f64 = cols[2].parse().unwrap();
        let e_energy: f64 = cols[3].parse().unwrap();
        assert!(e_mass <= 1e-11 && e_energy <= 1e-11, "{row}");
    }
    assert!(!dir.join(CONVERGENCE_CSV).exists());

    let snaps: Vec<_> = files(dir)
        .into_iter()
        .filter(|(n, _)| n.starts_with(SNAPSHOT_DIR))
        .collect();
    let names: Vec<&str> = snaps.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "snapshots/snapshot_00000000.bin",
            "snapshots/snapshot_00000002.bin",
            "snapshots/snapshot_00000003.bin"
        ]
    );
    let first = snapshot::read(&dir.join(&snaps[0].0)).unwrap();
    let p = preset("cases-1d/II", true).unwrap();
    assert_eq!(first.time, 0.0);
    assert_eq!(first.lambda, p.lambda);
    assert_eq!(first.epsilon, p.epsilon);
    assert_eq!(first.sweeps, p.sweeps);
    assert_eq!(first.field.values(), p.initial_field().unwrap().values());
    let last = snapshot::read(&dir.join(&snaps[2].0)).unwrap();
    assert!((last.time - 0.015).abs() < 1e-15);
    let header = String::from_utf8_lossy(&snaps[2].1[..200]).to_string();
    assert!(header.starts_with("RLOGSE-SNAPSHOT\nversion 1\ndims 1\n"), "{header}");
}

#[test]
fn accuracy_run_writes_convergence_table() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_ok(&[
        "--study",
        "accuracy-1d",
        "--desk-scale",
        "--threads",
        "2",
        "--out",
        dir.to_str().unwrap(),
    ]);
    let rows = lines(&dir.join(CONVERGENCE_CSV));
    assert_eq!(rows[0], "tau,l2_error,order");
    assert_eq!(rows.len(), 6);
    assert!(rows[1].ends_with(','));
    for row in &rows[2..] {
        let order: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!((order - 4.0).abs() < 0.05, "{row}");
    }
}

/// The manifest is itself a configuration: rerunning from it reproduces
/// every artifact byte for byte, and each hash line matches its file.
#[test]
fn manifest_reproduces_run() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&[
        "--study",
        "cases-1d/IV",
        "--desk-scale",
        "--t-end",
        "0.05",
        "--sweeps",
        "2",
        "--snapshot-every",
        "5",
        "--out",
        a.to_str().unwrap(),
    ]);
    let manifest = a.join(MANIFEST);
    let text = std::fs::read_to_string(&manifest).unwrap();
    assert!(text.contains("sweeps = 2\n"));
    run_ok(&["--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    let (fa, fb) = (files(&a), files(&b));
    assert_eq!(fa.len(), 5);
    assert_eq!(fa, fb);

    use sha2::{Digest, Sha256};
    let hashes: Vec<&str> = text.lines().filter(|l| l.starts_with("# sha256 ")).collect();
    assert_eq!(hashes.len(), fa.len() - 1);
    for line in hashes {
        let mut parts = line.split_whitespace().skip(2);
        let (name, digest) = (parts.next().unwrap(), parts.next().unwrap());
        let bytes = std::fs::read(a.join(name)).unwrap();
        let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(hex, digest, "{name}");
    }
}

#[test]
fn progress_lines_are_printed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "--study",
        "cases-1d/III",
        "--desk-scale",
        "--t-end",
        "1.0",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let err = String::from_utf8_lossy(&out.stderr);
    let progress: Vec<&str> = err.lines().filter(|l| l.starts_with("step ")).collect();
    assert_eq!(progress.len(), 2, "{err}");
    assert!(progress[1].starts_with("step 200 t=1.000000 e_mass="));
}

#[test]
fn desk_case_conserves_invariants() {
    let tmp = tempfile::tempdir().unwrap();
    run_ok(&[
        "--study",
        "cases-1d/IV",
        "--desk-scale",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let rows = lines(&tmp.path().join(RESIDUALS_CSV));
    assert_eq!(rows.len(), 601);
    for row in &rows[1..] {
        let cols: Vec<f64> = row.split(',').take(4).map(|c| c.parse().unwrap()).collect();
        assert!(cols[2] <= 1e-11 && cols[3] <= 1e-11, "{row}");
    }
}
