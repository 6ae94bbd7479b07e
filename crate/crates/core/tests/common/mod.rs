//! Independent reference implementations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlogse::{Complex64, ComplexField, Grid};

pub type Dense = Vec<Vec<Complex64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> ComplexField {
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexField::from_values(grid, values).unwrap()
}

/// Smooth random field: a few random low modes times a Gaussian envelope.
pub fn smooth_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng) -> ComplexField {
    let terms: Vec<(f64, f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.3..1.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            )
        })
        .collect();
    ComplexField::from_fn(grid, |x, y| {
        terms
            .iter()
            .map(|&(b, cx, cy, vx, vy)| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                Complex64::from_polar(b * (-0.5 * r2).exp(), vx * x + vy * y)
            })
            .sum()
    })
}

/// Compensated (Neumaier) summation.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Signed integer wavenumber of DFT index `l` on `n` points.
fn wavenumber(l: usize, n: usize) -> f64 {
    if l <= n / 2 {
        l as f64
    } else {
        l as f64 - n as f64
    }
}

/// Dense second-derivative matrix on one periodic axis, assembled from
/// explicit DFT sums: `D = F⁻¹ diag(-(μk)²) F`.
pub fn dense_second_derivative(n: usize, length: f64) -> Dense {
    let mu = 2.0 * PI / length;
    let mut d = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for (j, row) in d.iter_mut().enumerate() {
        for (m, entry) in row.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..n {
                let k = wavenumber(l, n);
                let sym = -(mu * k) * (mu * k);
                let phase = 2.0 * PI * (l as f64) * (j as f64 - m as f64) / n as f64;
                acc += sym * Complex64::from_polar(1.0, phase);
            }
            *entry = acc / n as f64;
        }
    }
    d
}

pub fn identity(n: usize) -> Dense {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

pub fn kron(a: &Dense, b: &Dense) -> Dense {
    let (na, nb) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); na * nb]; na * nb];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[i * nb + k][j * nb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Dense Laplacian on a grid (row-major, x slow).
pub fn dense_laplacian(grid: &Grid) -> Dense {
    let dx = dense_second_derivative(grid.nx(), grid.axis(0).length());
    if grid.dims() == 1 {
        return dx;
    }
    let dy = dense_second_derivative(grid.ny(), grid.axis(1).length());
    let a = kron(&dx, &identity(grid.ny()));
    let b = kron(&identity(grid.nx()), &dy);
    a.iter()
        .zip(&b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn matvec(m: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut m: Dense, mut rhs: Vec<Complex64>) -> Vec<Complex64> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&a, &b| m[a][col].norm().partial_cmp(&m[b][col].norm()).unwrap())
            .unwrap();
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..n {
                let t = m[col][c];
                m[r][c] -= f * t;
            }
            let t = rhs[col];
            rhs[r] -= f * t;
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    x
}

/// Solves `K_i - iτ Σ_j a_ij Δ K_j = B_i` as one dense `(sN) × (sN)` system.
pub fn dense_stage_solve(grid: &Grid, a: &[f64], tau: f64, rhs: &[ComplexField]) -> Vec<Vec<Complex64>> {
    let s = rhs.len();
    let n = grid.len();
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
    let b: Vec<Complex64> = rhs.iter().flat_map(|f| f.values().to_vec()).collect();
    let x = dense_solve(m, b);
    x.chunks(n).map(|c| c.to_vec()).collect()
}

pub fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale
}
