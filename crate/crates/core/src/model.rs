//! Physics of the regularized logarithmic Schrödinger equation
//!
//! ```text
//! i ∂_t u + Δu = λ u ln((ε + |u|)²)
//! ```
//!
//! with the discrete invariants
//!
//! ```text
//! M_h = ‖U‖_h²
//! E_h = -⟨Δ_h U, U⟩_h + ⟨2ελ|U| + 2λ(|U|² - ε²) ln(ε + |U|), 1⟩_h
//! ```
//!
//! `ln(ε+|u|)²` is read as `ln((ε+|u|)²)`; with that reading `E_h` is a
//! conserved quantity of the semi-discrete flow.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::ComplexField;
use crate::spectral::SpectralOperator;

/// Nonlinear strength `λ` and regularization `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    lambda: f64,
    epsilon: f64,
}

impl ModelParams {
    pub fn new(lambda: f64, epsilon: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda == 0.0 {
            return Err(Error::config(
                "lambda",
                format!("must be finite and nonzero, got {lambda}"),
            ));
        }
        Self::unchecked(lambda, epsilon)
    }

    /// Like [`ModelParams::new`] but admits `λ = 0`, the linear Schrödinger
    /// flow. Only `ε > 0` is enforced.
    pub fn unchecked(lambda: f64, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::config("epsilon", format!("must be positive, got {epsilon}")));
        }
        Ok(ModelParams { lambda, epsilon })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `λ z ln((ε + |z|)²)`.
    #[inline]
    pub fn nonlinearity(&self, z: Complex64) -> Complex64 {
        z * (2.0 * self.lambda * (self.epsilon + z.norm()).ln())
    }

    /// Energy density of the potential part, as a function of `ρ = |u|`:
    /// `2ελρ + 2λ(ρ² - ε²) ln(ε + ρ)`.
    #[inline]
    pub fn potential_density(&self, rho: f64) -> f64 {
        let (l, e) = (self.lambda, self.epsilon);
        2.0 * e * l * rho + 2.0 * l * (rho * rho - e * e) * (e + rho).ln()
    }

    /// Multiplier `2λ ln(ε + |z|) + λ` of the potential part of `δE/δū`.
    #[inline]
    pub fn potential_gradient_factor(&self, z: Complex64) -> f64 {
        self.lambda * (2.0 * (self.epsilon + z.norm()).ln() + 1.0)
    }
}

/// `λ U ⊙ ln((ε + |U|)²)`.
pub fn nonlinear_term(u: &ComplexField, p: &ModelParams) -> ComplexField {
    u.map(|z| p.nonlinearity(z))
}

/// Discrete mass `M_h = ‖U‖_h²`.
pub fn mass(u: &ComplexField) -> f64 {
    u.norm_sq()
}

/// Potential part `⟨2ελ|U| + 2λ(|U|² - ε²) ln(ε + |U|), 1⟩_h`.
pub fn potential_energy(u: &ComplexField, p: &ModelParams) -> f64 {
    let sum: f64 = u.values().iter().map(|z| p.potential_density(z.norm())).sum();
    sum * u.grid().cell_volume()
}

/// Discrete energy assembled from complex inner products; the imaginary
/// part is pure roundoff.
pub fn energy_complex(op: &SpectralOperator, u: &ComplexField, p: &ModelParams) -> Result<Complex64> {
    let lap = op.laplacian(u)?;
    let kinetic = -lap.inner_product(u)?;
    Ok(kinetic + potential_energy(u, p))
}

/// Discrete energy `E_h`.
pub fn energy(op: &SpectralOperator, u: &ComplexField, p: &ModelParams) -> Result<f64> {
    Ok(energy_complex(op, u, p)?.re)
}

/// `δM/δū = U`.
pub fn grad_mass(u: &ComplexField) -> ComplexField {
    u.clone()
}

/// `δE/δū = -Δ_h U + 2λ U ⊙ ln(ε + |U|) + λU`.
///
/// This is the cancelled closed form; it has no `u/|u|` factor and is
/// exactly zero at `U = 0`.
pub fn grad_energy(op: &SpectralOperator, u: &ComplexField, p: &ModelParams) -> Result<ComplexField> {
    let lap = op.laplacian(u)?;
    lap.zip_with(u, |l, z| z * p.potential_gradient_factor(z) - l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use std::f64::consts::{E, PI};

    fn params(lambda: f64, eps: f64) -> ModelParams {
        ModelParams::new(lambda, eps).unwrap()
    }

    #[test]
    fn parameter_validation() {
        assert!(matches!(ModelParams::new(0.0, 1e-15), Err(Error::Config { ref key, .. }) if key == "lambda"));
        assert!(matches!(ModelParams::new(-1.0, 0.0), Err(Error::Config { ref key, .. }) if key == "epsilon"));
        assert!(ModelParams::new(-1.0, -1e-3).is_err());
        assert!(ModelParams::unchecked(0.0, 1e-15).is_ok());
    }

    #[test]
    fn nonlinear_term_examples() {
        let g = Grid::line(-4.0, 4.0, 16).unwrap();
        let eps = 1e-15;
        let zero = nonlinear_term(&ComplexField::zeros(&g), &params(-1.0, eps));
        assert_eq!(zero.max_abs(), 0.0);

        let unit = ComplexField::constant(&g, (1.0 - eps).into());
        assert!(nonlinear_term(&unit, &params(-1.0, eps)).max_abs() < 1e-15);

        let u = ComplexField::constant(&g, (E - eps).into());
        let n = nonlinear_term(&u, &params(2.0, eps));
        for z in n.values() {
            assert!((z.re - 2.0 * (E - eps) * 2.0).abs() < 1e-13);
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn energy_of_zero_field() {
        let g = Grid::line(-16.0, 16.0, 64).unwrap();
        let op = SpectralOperator::new(&g);
        let p = params(-1.0, 1e-15);
        let e = energy(&op, &ComplexField::zeros(&g), &p).unwrap();
        let want = -2.0 * -1.0 * 1e-30 * (1e-15f64).ln() * 32.0;
        assert!((e - want).abs() <= 1e-12 * want.abs());
        assert!((e + 2.21e-27).abs() < 0.01e-27);
    }

    #[test]
    fn energy_of_unit_modulus_constant() {
        let g = Grid::line(-16.0, 16.0, 64).unwrap();
        let op = SpectralOperator::new(&g);
        let eps = 1e-3;
        let p = params(-1.0, eps);
        let u = ComplexField::constant(&g, Complex64::from_polar(1.0 - eps, 0.7));
        let e = energy(&op, &u, &p).unwrap();
        let want = -2.0 * eps * (1.0 - eps) * 32.0;
        assert!((e - want).abs() < 1e-12 * want.abs(), "{e} vs {want}");
    }

    #[test]
    fn grad_mass_is_identity() {
        let g = Grid::line(0.0, 1.0, 8).unwrap();
        let u = ComplexField::from_fn(&g, |x, _| Complex64::new(x, -x * x));
        assert_eq!(grad_mass(&u), u);
        assert_eq!(grad_mass(&ComplexField::zeros(&g)).max_abs(), 0.0);
    }

    #[test]
    fn grad_energy_vanishes_at_origin() {
        let g = Grid::square(-2.0, 2.0, 8).unwrap();
        let op = SpectralOperator::new(&g);
        let ge = grad_energy(&op, &ComplexField::zeros(&g), &params(-1.0, 1e-15)).unwrap();
        assert_eq!(ge.max_abs(), 0.0);
    }

    #[test]
    fn grad_energy_plane_wave() {
        let g = Grid::line(0.0, 2.0 * PI, 32).unwrap();
        let op = SpectralOperator::new(&g);
        let eps = 1e-15;
        let p = params(-1.0, eps);
        let mu = g.axis(0).wavenumber_scale();
        let u = ComplexField::from_fn(&g, |x, _| Complex64::from_polar(1.0, mu * x));
        let ge = grad_energy(&op, &u, &p).unwrap();
        let factor = mu * mu + 2.0 * p.lambda() * (eps + 1.0f64).ln() + p.lambda();
        let want = u.scale(factor.into());
        // factor ≈ μ² - 1 = 0 for μ = 1; compare against |U| scale
        assert!(ge.sub(&want).unwrap().max_abs() <= 1e-10 * u.max_abs());
    }
}
