//! Field snapshots: 13 text header lines, then little-endian `f64` pairs
//! `(re, im)` in row-major order (x slow, y fast).

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rlogse::{Complex64, ComplexField, Grid};

use crate::error::CliError;

pub const MAGIC: &str = "RLOGSE-SNAPSHOT";
pub const VERSION: u32 = 1;
pub const HEADER_LINES: usize = 13;

/// A decoded snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotFile {
    pub time: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub sweeps: usize,
    pub field: ComplexField,
}

fn join(v: impl IntoIterator<Item = String>) -> String {
    v.into_iter().collect::<Vec<_>>().join(" ")
}

pub fn encode(snap: &SnapshotFile) -> Vec<u8> {
    let grid = snap.field.grid();
    let bounds = join(
        grid.bounds()
            .into_iter()
            .flat_map(|(a, b)| [format!("{a:?}"), format!("{b:?}")]),
    );
    let nodes = join(grid.nodes().into_iter().map(|n| n.to_string()));
    let header = [
        MAGIC.to_string(),
        format!("version {VERSION}"),
        format!("dims {}", grid.dims()),
        format!("bounds {bounds}"),
        format!("nodes {nodes}"),
        format!("t {:?}", snap.time),
        format!("lambda {:?}", snap.lambda),
        format!("epsilon {:?}", snap.epsilon),
        format!("tau {:?}", snap.tau),
        format!("K {}", snap.sweeps),
        "layout row-major".to_string(),
        "format f64-le re,im".to_string(),
        format!("values {}", snap.field.len()),
    ];
    let mut out = header.join("\n").into_bytes();
    out.push(b'\n');
    out.reserve(snap.field.len() * 16);
    for z in snap.field.values() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn write(path: &Path, snap: &SnapshotFile) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(&encode(snap)).map_err(|e| CliError::io(path, e))
}

pub fn read(path: &Path) -> Result<SnapshotFile, CliError> {
    let f = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    decode(BufReader::new(f)).map_err(|reason| match reason {
        DecodeError::Io(e) => CliError::io(path, e),
        DecodeError::Format(reason) => CliError::Snapshot {
            path: path.display().to_string(),
            reason,
        },
    })
}

#[derive(Debug)]
pub enum DecodeError {
    Io(std::io::Error),
    Format(String),
}

fn fmt_err(s: impl Into<String>) -> DecodeError {
    DecodeError::Format(s.into())
}

pub fn decode(mut r: impl BufRead) -> Result<SnapshotFile, DecodeError> {
    let mut lines = Vec::with_capacity(HEADER_LINES);
    for _ in 0..HEADER_LINES {
        let mut line = String::new();
        if r.read_line(&mut line).map_err(DecodeError::Io)? == 0 {
            return Err(fmt_err("truncated header"));
        }
        lines.push(line.trim_end_matches('\n').to_string());
    }
    if lines[0] != MAGIC {
        return Err(fmt_err(format!("bad magic `{}`", lines[0])));
    }
    let field = |i: usize, name: &str| -> Result<Vec<&str>, DecodeError> {
        let mut parts = lines[i].split(' ');
        if parts.next() != Some(name) {
            return Err(fmt_err(format!("header line {} should start with `{name}`", i + 1)));
        }
        Ok(parts.collect())
    };
    let num = |i: usize, name: &str| -> Result<f64, DecodeError> {
        field(i, name)?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| fmt_err(format!("bad `{name}`")))
    };
    let version = num(1, "version")?;
    if version != VERSION as f64 {
        return Err(fmt_err(format!("unsupported version {version}")));
    }
    let dims = num(2, "dims")? as usize;
    let bounds: Vec<f64> = field(3, "bounds")?
        .iter()
        .map(|s| s.parse().map_err(|_| fmt_err("bad bounds")))
        .collect::<Result<_, _>>()?;
    let nodes: Vec<usize> = field(4, "nodes")?
        .iter()
        .map(|s| s.parse().map_err(|_| fmt_err("bad nodes")))
        .collect::<Result<_, _>>()?;
    if bounds.len() != 2 * dims || nodes.len() != dims {
        return Err(fmt_err("bounds/nodes do not match dims"));
    }
    let time = num(5, "t")?;
    let lambda = num(6, "lambda")?;
    let epsilon = num(7, "epsilon")?;
    let tau = num(8, "tau")?;
    let sweeps = num(9, "K")? as usize;
    if field(10, "layout")? != ["row-major"] {
        return Err(fmt_err("unsupported layout"));
    }
    field(11, "format")?;
    let count = num(12, "values")? as usize;

    let pairs: Vec<(f64, f64)> = bounds.chunks(2).map(|c| (c[0], c[1])).collect();
    let grid = Grid::new(&pairs, &nodes).map_err(|e| fmt_err(e.to_string()))?;
    if grid.len() != count {
        return Err(fmt_err(format!(
            "values {count} does not match grid size {}",
            grid.len()
        )));
    }
    let mut bytes = vec![0u8; count * 16];
    r.read_exact(&mut bytes).map_err(|_| fmt_err("truncated payload"))?;
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    let field = ComplexField::from_values(&grid, values).map_err(|e| fmt_err(e.to_string()))?;
    Ok(SnapshotFile {
        time,
        lambda,
        epsilon,
        tau,
        sweeps,
        field,
    })
}
