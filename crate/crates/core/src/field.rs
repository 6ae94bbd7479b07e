//! Complex grid functions and the discrete `L²` inner product.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A complex-valued function sampled on a periodic [`Grid`], stored row-major.
#[derive(Debug, Clone)]
pub struct ComplexField {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

impl PartialEq for ComplexField {
    fn eq(&self, other: &Self) -> bool {
        self.same_grid(other) && self.values == other.values
    }
}

impl ComplexField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ComplexField {
            grid: Arc::clone(grid),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn constant(grid: &Arc<Grid>, value: Complex64) -> Self {
        ComplexField {
            grid: Arc::clone(grid),
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "{} values supplied for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|z| !z.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(ComplexField {
            grid: Arc::clone(grid),
            values,
        })
    }

    /// Samples `f(x, y)` at every node (`y = 0` in 1D).
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> Complex64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let [x, y] = grid.point(idx);
                f(x, y)
            })
            .collect();
        ComplexField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ComplexField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.is_finite())
    }

    pub fn same_grid(&self, other: &ComplexField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub(crate) fn check_grid(&self, other: &ComplexField) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "fields live on different grids ({:?} vs {:?})",
                self.grid.nodes(),
                other.grid.nodes()
            )))
        }
    }

    /// `⟨U, V⟩_h = h_x h_y Σ u conj(v)`.
    pub fn inner_product(&self, other: &ComplexField) -> Result<Complex64> {
        self.check_grid(other)?;
        let sum: Complex64 = self.values.iter().zip(&other.values).map(|(u, v)| u * v.conj()).sum();
        Ok(sum * self.grid.cell_volume())
    }

    /// `‖U‖_h²`, accumulated as a real sum of `|u|²`.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Largest nodal modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexField {
        ComplexField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &ComplexField,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexField> {
        self.check_grid(other)?;
        Ok(ComplexField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Element-by-element product `U ⊙ V`.
    pub fn hadamard(&self, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        self.map(|z| z * c)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: Complex64, other: &ComplexField) -> Result<ComplexField> {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// Pointwise modulus `|U|` as a real-valued complex field.
    pub fn modulus(&self) -> ComplexField {
        self.map(|z| Complex64::new(z.norm(), 0.0))
    }

    /// Pointwise regularized logarithm `ln((ε + |U|)²) = 2 ln(ε + |U|)`.
    pub fn log_regularized(&self, epsilon: f64) -> ComplexField {
        self.map(|z| Complex64::new(log_regularized(z, epsilon), 0.0))
    }
}

/// `ln((ε + |z|)²)`.
#[inline]
pub fn log_regularized(z: Complex64, epsilon: f64) -> f64 {
    2.0 * (epsilon + z.norm()).ln()
}
