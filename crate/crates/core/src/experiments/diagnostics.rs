//! Error norms, convergence orders, invariant drift and density features.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::integrator::StepReport;

use super::presets::check_halving;

/// `‖a - b‖_h`.
pub fn l2_error(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    Ok(a.sub(b)?.norm())
}

/// Unweighted nodal norm `(Σ |a - b|²)^{1/2}`, i.e. `‖a - b‖_h / √h`.
pub fn nodal_l2_error(a: &ComplexField, b: &ComplexField) -> Result<f64> {
    Ok(l2_error(a, b)? / a.grid().cell_volume().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub l2_error: f64,
    /// `log2(e(2τ) / e(τ))`; absent on the coarsest row.
    pub order: Option<f64>,
}

/// Observed orders for errors on a halving step sequence, coarsest first.
pub fn order_table(taus: &[f64], errors: &[f64]) -> Result<Vec<ConvergenceRow>> {
    if taus.len() != errors.len() {
        return Err(Error::Dimension(format!(
            "{} step sizes but {} errors",
            taus.len(),
            errors.len()
        )));
    }
    check_halving(taus)?;
    Ok(taus
        .iter()
        .zip(errors)
        .enumerate()
        .map(|(k, (&tau, &err))| ConvergenceRow {
            tau,
            l2_error: err,
            order: (k > 0).then(|| (errors[k - 1] / err).log2()),
        })
        .collect())
}

/// Relative drift of the invariants after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub step: usize,
    pub time: f64,
    pub e_mass: f64,
    pub e_energy: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub newton_iterations: usize,
}

/// `e_M(tₙ) = |Mⁿ - M⁰| / M⁰`, `e_E(tₙ) = |Eⁿ - E⁰| / |E⁰|` from the
/// step reports of one run (first report is step 1).
pub fn residual_series(reports: &[StepReport]) -> Result<Vec<ResidualRow>> {
    let Some(first) = reports.first() else {
        return Ok(Vec::new());
    };
    let (m0, e0) = (first.mass_before, first.energy_before);
    if m0 == 0.0 {
        return Err(Error::UndefinedNormalization("mass"));
    }
    if e0 == 0.0 {
        return Err(Error::UndefinedNormalization("energy"));
    }
    Ok(reports
        .iter()
        .map(|r| ResidualRow {
            step: r.step,
            time: r.time,
            e_mass: (r.mass_after - m0).abs() / m0,
            e_energy: (r.energy_after - e0).abs() / e0.abs(),
            beta1: r.beta1,
            beta2: r.beta2,
            newton_iterations: r.newton_iterations,
        })
        .collect())
}

/// Largest drift of mass and energy over a series.
pub fn max_drift(rows: &[ResidualRow]) -> (f64, f64) {
    rows.iter()
        .fold((0.0, 0.0), |(m, e), r| (f64::max(m, r.e_mass), f64::max(e, r.e_energy)))
}

/// A connected region of `|U| ≥ threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Peak {
    /// `|U|²`-weighted centroid, wrapped into the domain.
    pub center: [f64; 2],
    pub max_modulus: f64,
    pub nodes: usize,
}

/// Connected components (periodic neighbours along each axis) of the set
/// `|U| ≥ rel_threshold · max|U|`, ordered by centroid.
pub fn find_peaks(u: &ComplexField, rel_threshold: f64) -> Vec<Peak> {
    let grid = u.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let modulus: Vec<f64> = u.values().iter().map(|z| z.norm()).collect();
    let top = modulus.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Vec::new();
    }
    let threshold = rel_threshold * top;
    let mut seen = vec![false; modulus.len()];
    let mut peaks = Vec::new();
    let spacing: Vec<f64> = grid.axes().iter().map(|a| a.spacing()).collect();
    let lower: Vec<f64> = grid.axes().iter().map(|a| a.lower()).collect();

    for start in 0..modulus.len() {
        if seen[start] || modulus[start] < threshold {
            continue;
        }
        seen[start] = true;
        // Unwrapped integer coordinates keep components that straddle the
        // periodic seam contiguous.
        let mut queue = VecDeque::from([(start, (start / ny) as i64, (start % ny) as i64)]);
        let (mut w, mut sx, mut sy, mut peak, mut count) = (0.0, 0.0, 0.0, 0.0f64, 0);
        while let Some((idx, i, j)) = queue.pop_front() {
            let m = modulus[idx];
            let weight = m * m;
            w += weight;
            sx += weight * i as f64;
            sy += weight * j as f64;
            peak = peak.max(m);
            count += 1;
            let mut neighbours = vec![(i - 1, j), (i + 1, j)];
            if ny > 1 {
                neighbours.extend([(i, j - 1), (i, j + 1)]);
            }
            for (a, b) in neighbours {
                let k = (a.rem_euclid(nx as i64) as usize) * ny + b.rem_euclid(ny as i64) as usize;
                if !seen[k] && modulus[k] >= threshold {
                    seen[k] = true;
                    queue.push_back((k, a, b));
                }
            }
        }
        let mut center = [0.0; 2];
        for (k, s) in [sx, sy].into_iter().enumerate().take(grid.dims()) {
            let len = grid.axis(k).length();
            let c = lower[k] + spacing[k] * s / w;
            center[k] = lower[k] + (c - lower[k]).rem_euclid(len);
        }
        peaks.push(Peak {
            center,
            max_modulus: peak,
            nodes: count,
        });
    }
    peaks.sort_by(|a, b| a.center.partial_cmp(&b.center).unwrap());
    peaks
}

/// `‖U - RU‖_h / ‖U‖_h` where `R` reflects every axis through the domain
/// centre. Requires node sets that are symmetric under the reflection,
/// i.e. `x_L = -x_R`.
pub fn parity_defect(u: &ComplexField) -> Result<f64> {
    let grid = u.grid();
    for a in grid.axes() {
        if (a.lower() + a.upper()).abs() > 1e-12 * a.length() {
            return Err(Error::Dimension(format!(
                "parity needs a symmetric domain, got [{}, {}]",
                a.lower(),
                a.upper()
            )));
        }
    }
    let (nx, ny) = (grid.nx(), grid.ny());
    let vals = u.values();
    // node x_j = x_L + j h reflects to x_{(N - j) mod N}
    let reflected = (0..vals.len())
        .map(|idx| {
            let (i, j) = (idx / ny, idx % ny);
            vals[((nx - i) % nx) * ny + (ny - j) % ny]
        })
        .collect();
    let r = ComplexField::from_values(grid, reflected)?;
    let norm = u.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    Ok(u.sub(&r)?.norm() / norm)
}
