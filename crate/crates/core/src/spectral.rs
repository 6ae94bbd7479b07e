//! Fourier pseudo-spectral differentiation and mode-wise stage solves.
//!
//! DFT convention: the forward transform is unnormalized and the inverse
//! carries `1/N` per axis. All symbol tables below assume this convention.
//!
//! Spectral differentiation of order `s` along an axis multiplies DFT bin
//! `l` by `(i μ k_l)^s`, where `k_l` is the signed index of the bin. Odd
//! orders zero the Nyquist bin, even orders keep it as `+N/2`. The discrete
//! Laplacian therefore has the real, nonpositive symbol
//! `σ = -(μ_x k_x)² - (μ_y k_y)²` with the Nyquist mode retained.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;

/// Relative pivot magnitude below which a mode matrix is declared singular.
const PIVOT_TOL: f64 = 1e-14;

struct AxisPlan {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl AxisPlan {
    fn new(planner: &mut FftPlanner<f64>, n: usize) -> Self {
        AxisPlan {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

/// DFT plans and differentiation symbols for one grid. Immutable and
/// shareable across threads; scratch space is allocated per call.
pub struct SpectralOperator {
    grid: Arc<Grid>,
    x: AxisPlan,
    y: Option<AxisPlan>,
    laplacian: Vec<f64>,
}

impl std::fmt::Debug for SpectralOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralOperator")
            .field("nodes", &self.grid.nodes())
            .finish()
    }
}

impl SpectralOperator {
    pub fn new(grid: &Arc<Grid>) -> Self {
        let mut planner = FftPlanner::new();
        let x = AxisPlan::new(&mut planner, grid.nx());
        let y = (grid.dims() == 2).then(|| AxisPlan::new(&mut planner, grid.ny()));

        let second = |axis: usize| -> Vec<f64> {
            match grid.axes().get(axis) {
                Some(ax) => derivative_symbols(ax, 2).iter().map(|z| z.re).collect(),
                None => vec![0.0],
            }
        };
        let (sx, sy) = (second(0), second(1));
        let laplacian = sx.iter().flat_map(|&a| sy.iter().map(move |&b| a + b)).collect();

        SpectralOperator {
            grid: Arc::clone(grid),
            x,
            y,
            laplacian,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Laplacian symbol `σ` for every DFT bin, in the field layout.
    pub fn laplacian_symbols(&self) -> &[f64] {
        &self.laplacian
    }

    /// In-place unnormalized forward DFT over all axes.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, true);
    }

    /// In-place inverse DFT including the `1/(N_x N_y)` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, false);
        let scale = 1.0 / data.len() as f64;
        data.iter_mut().for_each(|z| *z *= scale);
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        assert_eq!(data.len(), self.grid.len(), "buffer does not match grid");
        let pick = |p: &AxisPlan| {
            if forward {
                Arc::clone(&p.forward)
            } else {
                Arc::clone(&p.inverse)
            }
        };
        let fx = pick(&self.x);
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        match &self.y {
            None => {
                let mut scratch = vec![Complex64::default(); fx.get_inplace_scratch_len()];
                fx.process_with_scratch(data, &mut scratch);
            }
            Some(yp) => {
                let fy = pick(yp);
                let mut scratch =
                    vec![Complex64::default(); fx.get_inplace_scratch_len().max(fy.get_inplace_scratch_len())];
                // rows are contiguous along y
                fy.process_with_scratch(data, &mut scratch);
                let mut t = vec![Complex64::default(); data.len()];
                transpose(data, &mut t, nx, ny);
                fx.process_with_scratch(&mut t, &mut scratch);
                transpose(&t, data, ny, nx);
            }
        }
    }

    /// Forward DFT of a field into a new buffer.
    pub fn to_spectral(&self, u: &ComplexField) -> Vec<Complex64> {
        let mut buf = u.values().to_vec();
        self.forward(&mut buf);
        buf
    }

    /// Inverse DFT of a spectral buffer into a field on this grid.
    pub fn to_physical(&self, mut buf: Vec<Complex64>) -> ComplexField {
        self.inverse(&mut buf);
        ComplexField::from_raw(&self.grid, buf)
    }

    /// `Δ_h U = F⁻¹(σ ⊙ F U)`.
    pub fn laplacian(&self, u: &ComplexField) -> Result<ComplexField> {
        self.check(u)?;
        let mut buf = self.to_spectral(u);
        for (z, &s) in buf.iter_mut().zip(&self.laplacian) {
            *z *= s;
        }
        Ok(self.to_physical(buf))
    }

    /// Applies `d^order/dx_axis^order` spectrally.
    pub fn derivative(&self, u: &ComplexField, axis: usize, order: u32) -> Result<ComplexField> {
        self.check(u)?;
        let ax = self
            .grid
            .axes()
            .get(axis)
            .ok_or_else(|| Error::Dimension(format!("axis {axis} on a {}D grid", self.grid.dims())))?;
        let sym = derivative_symbols(ax, order);
        let ny = self.grid.ny();
        let mut buf = self.to_spectral(u);
        for (idx, z) in buf.iter_mut().enumerate() {
            let l = if axis == 0 { idx / ny } else { idx % ny };
            *z *= sym[l];
        }
        Ok(self.to_physical(buf))
    }

    /// Weighted spectral form `h_x h_y / N · Σ (-σ) â conj(b̂)`, which equals
    /// `-⟨Δ_h A, B⟩_h` for the spectral coefficients `â`, `b̂` of two fields.
    pub fn kinetic_form(&self, a_hat: &[Complex64], b_hat: &[Complex64]) -> Complex64 {
        let w = self.grid.cell_volume() / self.grid.len() as f64;
        let sum: Complex64 = self
            .laplacian
            .iter()
            .zip(a_hat.iter().zip(b_hat))
            .map(|(&s, (a, b))| -s * a * b.conj())
            .sum();
        sum * w
    }

    fn check(&self, u: &ComplexField) -> Result<()> {
        if Arc::ptr_eq(u.grid(), &self.grid) || **u.grid() == *self.grid {
            Ok(())
        } else {
            Err(Error::Dimension(
                "field grid differs from the spectral operator grid".into(),
            ))
        }
    }
}

/// Diagonal symbol `(i μ k_l)^order` of spectral differentiation along one axis.
pub fn derivative_symbols(axis: &crate::grid::Axis, order: u32) -> Vec<Complex64> {
    let mu = axis.wavenumber_scale();
    let keep_nyquist = order.is_multiple_of(2);
    (0..axis.nodes())
        .map(|l| {
            let k = axis.signed_index(l, keep_nyquist);
            Complex64::new(0.0, mu * k).powu(order)
        })
        .collect()
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Dense LU factors with partial pivoting of an `s × s` complex matrix.
#[derive(Debug, Clone)]
struct SmallLu {
    s: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl SmallLu {
    /// Returns the smallest relative pivot on failure.
    fn factor(mut m: Vec<Complex64>, s: usize) -> Result<SmallLu, f64> {
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut perm: Vec<usize> = (0..s).collect();
        for k in 0..s {
            let p = (k..s)
                .max_by(|&i, &j| m[i * s + k].norm().total_cmp(&m[j * s + k].norm()))
                .unwrap();
            let pivot = m[p * s + k].norm();
            if !(pivot > PIVOT_TOL * scale) {
                return Err(pivot / scale);
            }
            if p != k {
                for c in 0..s {
                    m.swap(k * s + c, p * s + c);
                }
                perm.swap(k, p);
            }
            let d = m[k * s + k];
            for i in k + 1..s {
                let f = m[i * s + k] / d;
                m[i * s + k] = f;
                for c in k + 1..s {
                    let t = m[k * s + c];
                    m[i * s + c] -= f * t;
                }
            }
        }
        Ok(SmallLu { s, lu: m, perm })
    }

    fn solve(&self, b: &mut [Complex64]) {
        let s = self.s;
        let mut x: [Complex64; 8] = [Complex64::default(); 8];
        for i in 0..s {
            x[i] = b[self.perm[i]];
        }
        for i in 0..s {
            for j in 0..i {
                let t = self.lu[i * s + j] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..s).rev() {
            for j in i + 1..s {
                let t = self.lu[i * s + j] * x[j];
                x[i] -= t;
            }
            x[i] /= self.lu[i * s + i];
        }
        b[..s].copy_from_slice(&x[..s]);
    }
}

/// Largest stage count supported by the mode-wise solver.
pub const MAX_STAGES: usize = 8;

/// Per-mode LU factorizations of `I_s - iτσA` for a fixed tableau matrix
/// and step size. Built once and reused for every stage solve with that `τ`.
#[derive(Debug, Clone)]
pub struct StageSolver {
    stages: usize,
    tau: f64,
    modes: Vec<SmallLu>,
}

impl StageSolver {
    /// Factors the mode matrices for the row-major `s × s` matrix `a`.
    pub fn new(op: &SpectralOperator, a: &[f64], stages: usize, tau: f64) -> Result<Self> {
        if stages == 0 || stages > MAX_STAGES || a.len() != stages * stages {
            return Err(Error::Dimension(format!(
                "stage matrix of length {} for {stages} stages",
                a.len()
            )));
        }
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::config("tau", format!("must be finite and >= 0, got {tau}")));
        }
        let mut modes = Vec::with_capacity(op.laplacian.len());
        for (mode, &sigma) in op.laplacian.iter().enumerate() {
            let m: Vec<Complex64> = (0..stages * stages)
                .map(|idx| {
                    let (i, j) = (idx / stages, idx % stages);
                    let id = if i == j { 1.0 } else { 0.0 };
                    Complex64::new(id, -tau * sigma * a[idx])
                })
                .collect();
            let lu = SmallLu::factor(m, stages).map_err(|pivot| Error::SingularMode { mode, pivot })?;
            modes.push(lu);
        }
        Ok(StageSolver { stages, tau, modes })
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Solves `(I - iτσA) K̂ = B̂` for every mode, overwriting the spectral
    /// stage buffers `rhs[0..s]` with the solution.
    pub fn solve_in_place(&self, rhs: &mut [Vec<Complex64>]) {
        assert_eq!(rhs.len(), self.stages);
        let mut b = [Complex64::default(); MAX_STAGES];
        for (mode, lu) in self.modes.iter().enumerate() {
            for (i, r) in rhs.iter().enumerate() {
                b[i] = r[mode];
            }
            lu.solve(&mut b[..self.stages]);
            for (i, r) in rhs.iter_mut().enumerate() {
                r[mode] = b[i];
            }
        }
    }
}

/// The stage system `K_i - iτ Σ_j a_ij Δ_h K_j = B_i`, `i = 1..s`.
#[derive(Debug, Clone)]
pub struct StageSystem<'a> {
    /// Row-major `s × s` tableau matrix.
    pub a: &'a [f64],
    pub tau: f64,
    pub rhs: &'a [ComplexField],
}

/// Solves a stage system by decoupling it into one `s × s` complex system
/// per Fourier mode.
pub fn solve_stage_system(op: &SpectralOperator, sys: &StageSystem<'_>) -> Result<Vec<ComplexField>> {
    let s = sys.rhs.len();
    for b in sys.rhs {
        op.check(b)?;
    }
    let solver = StageSolver::new(op, sys.a, s, sys.tau)?;
    let mut hats: Vec<Vec<Complex64>> = sys.rhs.iter().map(|b| op.to_spectral(b)).collect();
    solver.solve_in_place(&mut hats);
    Ok(hats.into_iter().map(|h| op.to_physical(h)).collect())
}
