//! Supplementary-variable prediction–correction Gauss RK time stepper.
//!
//! One step from `Uⁿ`:
//!
//! 1. **Prediction.** Starting from `U_{i,(0)} = Uⁿ`, `K` sweeps solve the
//!    linear stage system with the nonlinearity frozen at the previous sweep,
//!    `k_i = iΔ_h U_i - iλ U_{i,(m)} ln((ε+|U_{i,(m)}|)²)`, for all stages.
//! 2. **Correction.** With the nonlinearity frozen at the predicted stages
//!    `U*_i`, three stage solves give `k̂ = A⁻¹U`, `r_1 = A⁻¹G_1`,
//!    `r_2 = A⁻¹G_2` where `G_1`, `G_2` stack `δE/δū` and `δM/δū` at the
//!    stages. Then `Uⁿ⁺¹ = û + β_1 R_1 + β_2 R_2` with `û = Uⁿ + τ bᵀk̂`,
//!    `R_j = bᵀr_j`, and `β = (β_1, β_2)` solves
//!    `E_h(Uⁿ⁺¹) = E_h(Uⁿ)`, `M_h(Uⁿ⁺¹) = M_h(Uⁿ)` by Newton from `(0, 0)`.
//!
//! All stage solves go through one set of per-mode LU factors of
//! `I - iτσA`, computed once per step size.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::grid::Grid;
use crate::model::{self, ModelParams};
use crate::spectral::{SpectralOperator, StageSolver};
use crate::tableau::ButcherTableau;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative determinant below which the 2×2 Newton Jacobian is degenerate.
const DET_TOL: f64 = 1e-14;

/// A Newton step that fails to reduce the residual is treated as having hit
/// the round-off floor; the previous iterate is accepted if within this
/// multiple of the tolerance.
pub const STALL_FACTOR: f64 = 100.0;

/// Time-stepping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tau: f64,
    /// Number of prediction sweeps `K`.
    pub sweeps: usize,
    /// Relative Newton tolerance: converged when
    /// `|F_1| ≤ tol·max(1, |E_h(Uⁿ)|)` and `|F_2| ≤ tol·max(1, M_h(Uⁿ))`.
    /// Iterates that stall at the round-off floor are accepted up to
    /// `STALL_FACTOR · tol`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Use a central-difference Jacobian instead of the analytic one.
    pub fd_jacobian: bool,
}

impl SolverConfig {
    pub fn new(tau: f64) -> Self {
        SolverConfig {
            tau,
            sweeps: 3,
            newton_tol: 1e-15,
            newton_max_iter: 25,
            fd_jacobian: false,
        }
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config("tau", format!("must be positive, got {}", self.tau)));
        }
        if self.sweeps == 0 {
            return Err(Error::config("sweeps", "need at least one prediction sweep"));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::config("newton_tol", "must be positive"));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::config("newton_max_iter", "must be positive"));
        }
        Ok(())
    }
}

/// Per-step record.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// 1-based index of the step that produced this state.
    pub step: usize,
    /// Time reached by the step.
    pub time: f64,
    /// Step size actually used.
    pub tau: f64,
    /// True for a final step shortened to land on `t_end`.
    pub shortened: bool,
    /// `β_1 = τα_1`, multiplier of the energy-gradient direction.
    pub beta1: f64,
    /// `β_2 = τα_2`, multiplier of the mass-gradient direction.
    pub beta2: f64,
    pub newton_iterations: usize,
    pub mass_before: f64,
    pub energy_before: f64,
    pub mass_after: f64,
    pub energy_after: f64,
    /// Scaled residual `max(|F_1|/max(1,|Eⁿ|), |F_2|/max(1,Mⁿ))` at the
    /// accepted `β`.
    pub correction_residual: f64,
}

/// What the observer of [`Integrator::integrate`] sees after each step.
#[derive(Debug)]
pub struct StepEvent<'a> {
    pub step: usize,
    pub time: f64,
    pub report: &'a StepReport,
    pub snapshot: Option<&'a ComplexField>,
}

/// Intermediate products of the correction stage solves.
struct Correction {
    u_hat: ComplexField,
    r1: ComplexField,
    r2: ComplexField,
    /// Spectral coefficients of `û`, `R_1`, `R_2`.
    spectra: [Vec<Complex64>; 3],
}

/// Scheme state for one grid, tableau, step size and model.
#[derive(Debug)]
pub struct Integrator {
    op: Arc<SpectralOperator>,
    tableau: ButcherTableau,
    cfg: SolverConfig,
    params: ModelParams,
    solver: StageSolver,
}

impl Integrator {
    pub fn new(grid: &Arc<Grid>, tableau: ButcherTableau, cfg: SolverConfig, params: ModelParams) -> Result<Self> {
        Self::with_operator(Arc::new(SpectralOperator::new(grid)), tableau, cfg, params)
    }

    pub fn with_operator(
        op: Arc<SpectralOperator>,
        tableau: ButcherTableau,
        cfg: SolverConfig,
        params: ModelParams,
    ) -> Result<Self> {
        cfg.validate()?;
        let solver = StageSolver::new(&op, tableau.a(), tableau.stages(), cfg.tau)?;
        Ok(Integrator {
            op,
            tableau,
            cfg,
            params,
            solver,
        })
    }

    pub fn operator(&self) -> &Arc<SpectralOperator> {
        &self.op
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn tableau(&self) -> &ButcherTableau {
        &self.tableau
    }

    pub fn mass(&self, u: &ComplexField) -> f64 {
        model::mass(u)
    }

    pub fn energy(&self, u: &ComplexField) -> Result<f64> {
        model::energy(&self.op, u, &self.params)
    }

    /// Prediction stage values `U*_1..U*_s` after `K` sweeps.
    pub fn predict(&self, u: &ComplexField) -> Result<Vec<ComplexField>> {
        self.check(u)?;
        self.predict_with(&self.solver, u)
    }

    fn predict_with(&self, solver: &StageSolver, u: &ComplexField) -> Result<Vec<ComplexField>> {
        let s = self.tableau.stages();
        let tau = solver.tau();
        let sigma = self.op.laplacian_symbols();
        let u_hat = self.op.to_spectral(u);
        // iΔ_h Uⁿ in spectral space
        let lin: Vec<Complex64> = u_hat.iter().zip(sigma).map(|(z, &sg)| I * sg * z).collect();

        let mut stages = vec![u.clone(); s];
        for sweep in 0..self.cfg.sweeps {
            let mut k_hat: Vec<Vec<Complex64>> = stages
                .iter()
                .map(|st| {
                    let mut n = model::nonlinear_term(st, &self.params).into_values();
                    self.op.forward(&mut n);
                    lin.iter().zip(&n).map(|(l, nz)| l - I * nz).collect()
                })
                .collect();
            solver.solve_in_place(&mut k_hat);
            for (i, stage) in stages.iter_mut().enumerate() {
                let mut v = u_hat.clone();
                for (j, kj) in k_hat.iter().enumerate() {
                    let c = tau * self.tableau.a_ij(i, j);
                    for (vz, kz) in v.iter_mut().zip(kj) {
                        *vz += c * kz;
                    }
                }
                *stage = self.op.to_physical(v);
                if !stage.is_finite() {
                    return Err(Error::Divergence { sweep: sweep + 1 });
                }
            }
        }
        Ok(stages)
    }

    fn correction_directions(
        &self,
        solver: &StageSolver,
        u: &ComplexField,
        stages: &[ComplexField],
    ) -> Result<Correction> {
        let s = self.tableau.stages();
        if stages.len() != s {
            return Err(Error::Dimension(format!(
                "{} stage values for {s} stages",
                stages.len()
            )));
        }
        for st in stages {
            self.check(st)?;
        }
        let tau = solver.tau();
        let lam = self.params.lambda();
        let sigma = self.op.laplacian_symbols();
        let u_hat = self.op.to_spectral(u);

        let mut k_hat = Vec::with_capacity(s);
        let mut g1 = Vec::with_capacity(s);
        let mut g2 = Vec::with_capacity(s);
        for st in stages {
            let st_hat = self.op.to_spectral(st);
            let mut n = model::nonlinear_term(st, &self.params).into_values();
            self.op.forward(&mut n);
            k_hat.push(
                u_hat
                    .iter()
                    .zip(sigma)
                    .zip(&n)
                    .map(|((z, &sg), nz)| I * sg * z - I * nz)
                    .collect::<Vec<_>>(),
            );
            // δE/δū = -Δ_h U + λU ln((ε+|U|)²) + λU
            g1.push(
                st_hat
                    .iter()
                    .zip(sigma)
                    .zip(&n)
                    .map(|((z, &sg), nz)| -sg * z + nz + lam * z)
                    .collect::<Vec<_>>(),
            );
            g2.push(st_hat);
        }
        solver.solve_in_place(&mut k_hat);
        solver.solve_in_place(&mut g1);
        solver.solve_in_place(&mut g2);

        let b = self.tableau.b();
        let combine = |base: Option<&[Complex64]>, scale: f64, parts: &[Vec<Complex64>]| {
            let mut out = base.map_or_else(|| vec![Complex64::default(); u_hat.len()], <[_]>::to_vec);
            for (bi, p) in b.iter().zip(parts) {
                let c = scale * bi;
                for (o, z) in out.iter_mut().zip(p) {
                    *o += c * z;
                }
            }
            out
        };
        let spectra = [
            combine(Some(&u_hat), tau, &k_hat),
            combine(None, 1.0, &g1),
            combine(None, 1.0, &g2),
        ];
        let phys = |v: &Vec<Complex64>| self.op.to_physical(v.clone());
        let (u_hat_f, r1, r2) = (phys(&spectra[0]), phys(&spectra[1]), phys(&spectra[2]));
        if !(u_hat_f.is_finite() && r1.is_finite() && r2.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Correction {
            u_hat: u_hat_f,
            r1,
            r2,
            spectra,
        })
    }

    /// Projects the corrected state onto the mass and energy levels of `u`.
    pub fn correct(&self, u: &ComplexField, stages: &[ComplexField]) -> Result<(ComplexField, StepReport)> {
        self.check(u)?;
        self.correct_with(&self.solver, u, stages)
    }

    fn correct_with(
        &self,
        solver: &StageSolver,
        u: &ComplexField,
        stages: &[ComplexField],
    ) -> Result<(ComplexField, StepReport)> {
        let corr = self.correction_directions(solver, u, stages)?;
        let mass_before = model::mass(u);
        let energy_before = self.energy(u)?;

        let n_hat = self.op.to_spectral(u);
        let target_energy = self.op.kinetic_form(&n_hat, &n_hat).re + model::potential_energy(u, &self.params);
        let constraint = Constraint::new(&self.op, &self.params, &corr, target_energy, mass_before);
        let outcome = constraint.solve(self.cfg.newton_tol, self.cfg.newton_max_iter, self.cfg.fd_jacobian)?;

        let [b1, b2] = outcome.beta;
        let next: Vec<Complex64> = corr
            .u_hat
            .values()
            .iter()
            .zip(corr.r1.values().iter().zip(corr.r2.values()))
            .map(|(u, (r1, r2))| u + b1 * r1 + b2 * r2)
            .collect();
        let next = ComplexField::from_raw(u.grid(), next);
        if !next.is_finite() {
            return Err(Error::NonFinite);
        }
        let report = StepReport {
            step: 1,
            time: solver.tau(),
            tau: solver.tau(),
            shortened: false,
            beta1: b1,
            beta2: b2,
            newton_iterations: outcome.iterations,
            mass_before,
            energy_before,
            mass_after: model::mass(&next),
            energy_after: self.energy(&next)?,
            correction_residual: outcome.residual,
        };
        Ok((next, report))
    }

    /// One full step: predict then correct.
    pub fn step(&self, u: &ComplexField) -> Result<(ComplexField, StepReport)> {
        self.check(u)?;
        let stages = self.predict_with(&self.solver, u)?;
        self.correct_with(&self.solver, u, &stages)
    }

    fn step_with(&self, solver: &StageSolver, u: &ComplexField) -> Result<(ComplexField, StepReport)> {
        let stages = self.predict_with(solver, u)?;
        self.correct_with(solver, u, &stages)
    }

    /// Advances `u0` to `t_end`.
    ///
    /// If `t_end` is not a multiple of `τ` (within `1e-12` relative), the
    /// last step is shortened to land on `t_end` and flagged in its report.
    /// The observer is called after every step; `snapshot` is populated on
    /// steps that are multiples of `snapshot_every` and on the final step.
    pub fn integrate(
        &self,
        u0: &ComplexField,
        t_end: f64,
        snapshot_every: Option<usize>,
        observer: impl FnMut(&StepEvent<'_>),
    ) -> Result<ComplexField> {
        self.integrate_with(
            u0,
            t_end,
            |n| snapshot_every.is_some_and(|k| k > 0 && n % k == 0),
            observer,
        )
    }

    /// Like [`Integrator::integrate`] with an arbitrary snapshot predicate on
    /// the step index. The final step always carries a snapshot.
    pub fn integrate_with(
        &self,
        u0: &ComplexField,
        t_end: f64,
        snapshot_at: impl Fn(usize) -> bool,
        mut observer: impl FnMut(&StepEvent<'_>),
    ) -> Result<ComplexField> {
        self.check(u0)?;
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::config("t_end", format!("must be finite and >= 0, got {t_end}")));
        }
        let tau = self.cfg.tau;
        let (full_steps, remainder) = step_count(t_end, tau);
        let short_solver = match remainder {
            Some(r) => Some(StageSolver::new(&self.op, self.tableau.a(), self.tableau.stages(), r)?),
            None => None,
        };
        let total = full_steps + usize::from(remainder.is_some());

        let mut u = u0.clone();
        for n in 1..=total {
            let last_short = n > full_steps;
            let solver = if last_short {
                short_solver.as_ref().unwrap()
            } else {
                &self.solver
            };
            let (next, mut report) = self.step_with(solver, &u).map_err(|e| Error::StepFailed {
                step: n,
                source: Box::new(e),
            })?;
            report.step = n;
            report.time = if last_short { t_end } else { n as f64 * tau };
            report.shortened = last_short;
            u = next;
            let snap = n == total || snapshot_at(n);
            observer(&StepEvent {
                step: n,
                time: report.time,
                report: &report,
                snapshot: snap.then_some(&u),
            });
        }
        Ok(u)
    }

    fn check(&self, u: &ComplexField) -> Result<()> {
        if u.grid().as_ref() == self.op.grid().as_ref() {
            Ok(())
        } else {
            Err(Error::Dimension("field grid differs from the integrator grid".into()))
        }
    }
}

/// Number of full steps of size `tau` in `[0, t_end]` and the length of a
/// shortened final step, if one is needed.
pub fn step_count(t_end: f64, tau: f64) -> (usize, Option<f64>) {
    let n = (t_end / tau).round();
    if (n * tau - t_end).abs() <= 1e-12 * t_end.max(1.0) {
        return (n as usize, None);
    }
    let n = (t_end / tau).floor();
    let rest = t_end - n * tau;
    (n as usize, (rest > 0.0).then_some(rest))
}

struct NewtonOutcome {
    beta: [f64; 2],
    iterations: usize,
    residual: f64,
}

/// The two scalar constraints `F(β) = (E_h(û + β·R) - Eⁿ, M_h(û + β·R) - Mⁿ)`.
struct Constraint<'a> {
    params: &'a ModelParams,
    corr: &'a Correction,
    weight: f64,
    /// `-⟨Δ_h a, b⟩_h` for `a, b ∈ {û, R_1, R_2}`; the kinetic energy is a
    /// quadratic form in `β`.
    kinetic: [[Complex64; 3]; 3],
    target_energy: f64,
    target_mass: f64,
    scale: [f64; 2],
}

impl<'a> Constraint<'a> {
    fn new(
        op: &SpectralOperator,
        params: &'a ModelParams,
        corr: &'a Correction,
        target_energy: f64,
        target_mass: f64,
    ) -> Self {
        let mut kinetic = [[Complex64::default(); 3]; 3];
        #[allow(clippy::needless_range_loop)]
        for a in 0..3 {
            for b in a..3 {
                kinetic[a][b] = op.kinetic_form(&corr.spectra[a], &corr.spectra[b]);
                kinetic[b][a] = kinetic[a][b].conj();
            }
        }
        Constraint {
            params,
            corr,
            weight: corr.u_hat.grid().cell_volume(),
            kinetic,
            target_energy,
            target_mass,
            scale: [target_energy.abs().max(1.0), target_mass.max(1.0)],
        }
    }

    /// Residual and analytic Jacobian at `beta`.
    fn eval(&self, beta: [f64; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
        let w = [1.0, beta[0], beta[1]];
        let kq = &self.kinetic;
        let mut kin = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                kin += w[a] * w[b] * kq[a][b].re;
            }
        }
        // ∂/∂β_j of the kinetic quadratic form
        let dkin = |j: usize| 2.0 * (0..3).map(|a| w[a] * kq[a][j].re).sum::<f64>();

        let (mut pot, mut mass) = (0.0, 0.0);
        let (mut dp, mut dm) = ([0.0; 2], [0.0; 2]);
        let uh = self.corr.u_hat.values();
        let r1 = self.corr.r1.values();
        let r2 = self.corr.r2.values();
        for ((u, a), b) in uh.iter().zip(r1).zip(r2) {
            let z = u + beta[0] * a + beta[1] * b;
            let rho2 = z.norm_sqr();
            let rho = rho2.sqrt();
            pot += self.params.potential_density(rho);
            mass += rho2;
            let gf = self.params.potential_gradient_factor(z);
            let (ra, rb) = ((z * a.conj()).re, (z * b.conj()).re);
            dp[0] += gf * ra;
            dp[1] += gf * rb;
            dm[0] += ra;
            dm[1] += rb;
        }
        let h = self.weight;
        let f = [kin + h * pot - self.target_energy, h * mass - self.target_mass];
        let jac = [
            [dkin(1) + 2.0 * h * dp[0], dkin(2) + 2.0 * h * dp[1]],
            [2.0 * h * dm[0], 2.0 * h * dm[1]],
        ];
        (f, jac)
    }

    fn residual(&self, beta: [f64; 2]) -> [f64; 2] {
        self.eval(beta).0
    }

    fn fd_jacobian(&self, beta: [f64; 2]) -> [[f64; 2]; 2] {
        let mut jac = [[0.0; 2]; 2];
        for j in 0..2 {
            let hb = 1e-7 * beta[j].abs().max(1.0);
            let (mut p, mut m) = (beta, beta);
            p[j] += hb;
            m[j] -= hb;
            let (fp, fm) = (self.residual(p), self.residual(m));
            for i in 0..2 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * hb);
            }
        }
        jac
    }

    fn scaled(&self, f: [f64; 2]) -> f64 {
        (f[0] / self.scale[0]).abs().max((f[1] / self.scale[1]).abs())
    }

    fn solve(&self, tol: f64, max_iter: usize, fd: bool) -> Result<NewtonOutcome> {
        let mut beta = [0.0; 2];
        let (mut f, mut analytic) = self.eval(beta);
        let mut residual = self.scaled(f);
        let mut iterations = 0;
        loop {
            if !residual.is_finite() {
                return Err(Error::NonFinite);
            }
            if residual <= tol {
                return Ok(NewtonOutcome {
                    beta,
                    iterations,
                    residual,
                });
            }
            if iterations == max_iter {
                return Err(Error::NewtonNotConverged {
                    iterations,
                    f1: f[0],
                    f2: f[1],
                });
            }
            let jac = if fd { self.fd_jacobian(beta) } else { analytic };
            let delta = match solve2(jac, f) {
                Ok(d) => d,
                Err(det) if !fd => {
                    solve2(self.fd_jacobian(beta), f).map_err(|_| Error::DegenerateDirections { det })?
                }
                Err(det) => return Err(Error::DegenerateDirections { det }),
            };
            let next = [beta[0] - delta[0], beta[1] - delta[1]];
            let (f_next, jac_next) = self.eval(next);
            let r_next = self.scaled(f_next);
            iterations += 1;
            if !(r_next < residual) && residual <= STALL_FACTOR * tol {
                return Ok(NewtonOutcome {
                    beta,
                    iterations: iterations - 1,
                    residual,
                });
            }
            beta = next;
            f = f_next;
            analytic = jac_next;
            residual = r_next;
        }
    }
}

/// Solves the 2×2 system `J δ = f`; on a degenerate `J` returns its determinant.
fn solve2(j: [[f64; 2]; 2], f: [f64; 2]) -> Result<[f64; 2], f64> {
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = (j[0][0] * j[1][1]).abs() + (j[0][1] * j[1][0]).abs();
    if !(det.abs() > DET_TOL * scale) {
        return Err(det);
    }
    Ok([
        (j[1][1] * f[0] - j[0][1] * f[1]) / det,
        (j[0][0] * f[1] - j[1][0] * f[0]) / det,
    ])
}
