//! Reference computations for the acceptance criteria.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::sync::Arc;

use rlogse::experiments::find_peaks;
use rlogse::{Complex64, ComplexField, Grid, SpectralOperator};

/// Deterministic pseudo-random values in `[-1, 1)`.
pub fn noise(seed: u64, n: usize) -> Vec<Complex64> {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    };
    (0..n).map(|_| Complex64::new(next(), next())).collect()
}

pub fn noise_field(grid: &Arc<Grid>, seed: u64) -> ComplexField {
    ComplexField::from_values(grid, noise(seed, grid.len())).unwrap()
}

type Dense = Vec<Vec<Complex64>>;

fn second_derivative(n: usize, length: f64) -> Dense {
    let mu = 2.0 * PI / length;
    (0..n)
        .map(|j| {
            (0..n)
                .map(|m| {
                    (0..n)
                        .map(|l| {
                            let k = if l <= n / 2 { l as f64 } else { l as f64 - n as f64 };
                            let phase = 2.0 * PI * l as f64 * (j as f64 - m as f64) / n as f64;
                            -(mu * k).powi(2) * Complex64::from_polar(1.0, phase)
                        })
                        .sum::<Complex64>()
                        / n as f64
                })
                .collect()
        })
        .collect()
}

/// Dense `Δ_h` in row-major order (x slow).
pub fn dense_laplacian(grid: &Grid) -> Dense {
    let dx = second_derivative(grid.nx(), grid.axis(0).length());
    let dy = if grid.dims() == 2 {
        second_derivative(grid.ny(), grid.axis(1).length())
    } else {
        vec![vec![Complex64::new(0.0, 0.0)]]
    };
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); nx * ny]; nx * ny];
    for i in 0..nx {
        for j in 0..ny {
            for p in 0..nx {
                for q in 0..ny {
                    let mut v = Complex64::new(0.0, 0.0);
                    if j == q {
                        v += dx[i][p];
                    }
                    if i == p && grid.dims() == 2 {
                        v += dy[j][q];
                    }
                    out[i * ny + j][p * ny + q] = v;
                }
            }
        }
    }
    out
}

pub fn dense_solve(mut m: Dense, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&x, &y| m[x][c].norm().total_cmp(&m[y][c].norm()))
            .unwrap();
        m.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let t = m[c][k];
                m[r][k] -= f * t;
            }
            let t = b[c];
            b[r] -= f * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| m[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    x
}

/// Brute-force solve of the full `(sN) × (sN)` stage system.
pub fn dense_stage_solve(grid: &Grid, a: &[f64], tau: f64, rhs: &[ComplexField]) -> Vec<Vec<Complex64>> {
    let (s, n) = (rhs.len(), grid.len());
    let lap = dense_laplacian(grid);
    let mut m = vec![vec![Complex64::new(0.0, 0.0); s * n]; s * n];
    for i in 0..s {
        for j in 0..s {
            let c = Complex64::new(0.0, -tau * a[i * s + j]);
            for p in 0..n {
                for q in 0..n {
                    m[i * n + p][j * n + q] = c * lap[p][q];
                }
                if i == j {
                    m[i * n + p][j * n + p] += 1.0;
                }
            }
        }
    }
    let b = rhs.iter().flat_map(|f| f.values().to_vec()).collect();
    dense_solve(m, b).chunks(n).map(|c| c.to_vec()).collect()
}

fn min_image(d: f64, length: f64) -> f64 {
    d - length * (d / length).round()
}

/// Group velocity `2 Im(ū u_x) / |u|²` averaged over a window.
fn local_velocity(op: &SpectralOperator, u: &ComplexField, center: f64, half_width: f64) -> f64 {
    let grid = u.grid();
    let ux = op.derivative(u, 0, 1).unwrap();
    let length = grid.axis(0).length();
    let (mut num, mut den) = (0.0, 0.0);
    for (j, (z, d)) in u.values().iter().zip(ux.values()).enumerate() {
        let x = grid.axis(0).coordinate(j);
        if min_image(x - center, length).abs() <= half_width {
            num += (z.conj() * d).im;
            den += z.norm_sqr();
        }
    }
    2.0 * num / den
}

#[derive(Debug, Clone)]
pub struct Track {
    pub start: f64,
    pub position: f64,
    pub velocity: f64,
    /// Unwrapped displacement from `start`.
    pub travelled: f64,
    pub peak: usize,
}

#[derive(Debug, Clone)]
pub struct Frame {
    pub time: f64,
    pub peaks: usize,
    pub tracks: Vec<Track>,
    /// Smallest periodic distance between two tracks.
    pub separation: f64,
}

/// Tracks closer than this are treated as interacting.
pub const INTERACTION_DISTANCE: f64 = 8.0;

fn separation(tracks: &[Track], length: f64) -> f64 {
    let mut d = f64::INFINITY;
    for (i, a) in tracks.iter().enumerate() {
        for b in &tracks[i + 1..] {
            d = d.min(min_image(a.position - b.position, length).abs());
        }
    }
    d
}

/// Follows the initial density peaks of a 1D run through a sequence of
/// snapshots. Each track moves to the peak nearest its ballistic
/// prediction; velocities are re-estimated only while every track sits on
/// its own peak and no two tracks interact.
pub fn track_peaks(op: &SpectralOperator, frames: &[(f64, ComplexField)], threshold: f64) -> Vec<Frame> {
    let (t0, u0) = &frames[0];
    let length = u0.grid().axis(0).length();
    let mut tracks: Vec<Track> = find_peaks(u0, threshold)
        .iter()
        .enumerate()
        .map(|(k, p)| Track {
            start: p.center[0],
            position: p.center[0],
            velocity: local_velocity(op, u0, p.center[0], 3.0),
            travelled: 0.0,
            peak: k,
        })
        .collect();
    let mut out = vec![Frame {
        time: *t0,
        peaks: tracks.len(),
        separation: separation(&tracks, length),
        tracks: tracks.clone(),
    }];
    let mut prev_t = *t0;
    for (t, u) in &frames[1..] {
        let dt = t - prev_t;
        prev_t = *t;
        let peaks = find_peaks(u, threshold);
        let mut next = tracks.clone();
        for tr in next.iter_mut() {
            let predicted = tr.position + tr.velocity * dt;
            let nearest = peaks
                .iter()
                .enumerate()
                .map(|(k, p)| (k, min_image(p.center[0] - predicted, length).abs()))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            let (new_pos, peak) = match nearest {
                Some((k, d)) if d <= 1.0f64.max(0.5 * (tr.velocity * dt).abs()) => (peaks[k].center[0], k),
                _ => (predicted, usize::MAX),
            };
            tr.travelled += min_image(new_pos - tr.position, length);
            tr.position = new_pos;
            tr.peak = peak;
        }
        let sep = separation(&next, length).min(separation(&tracks, length));
        let mut ids: Vec<usize> = next.iter().map(|t| t.peak).collect();
        ids.sort_unstable();
        ids.dedup();
        let isolated = ids.len() == next.len() && !ids.contains(&usize::MAX) && sep >= INTERACTION_DISTANCE;
        if isolated {
            for (tr, old) in next.iter_mut().zip(&tracks) {
                tr.velocity = min_image(tr.position - old.position, length) / dt;
            }
        }
        tracks = next;
        out.push(Frame {
            time: *t,
            peaks: peaks.len(),
            separation: separation(&tracks, length),
            tracks: tracks.clone(),
        });
    }
    out
}
