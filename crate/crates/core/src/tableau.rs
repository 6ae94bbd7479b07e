//! Butcher tableaux for the implicit stage systems.

use crate::error::{Error, Result};

/// Coefficients `(A, b, c)` of an `s`-stage Runge–Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    stages: usize,
    /// Row-major `s × s`.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherTableau {
    /// Validates shapes and the row-sum condition `c_i = Σ_j a_ij`.
    pub fn new(a: Vec<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let s = b.len();
        if s == 0 || s > crate::spectral::MAX_STAGES || a.len() != s * s || c.len() != s {
            return Err(Error::config(
                "tableau",
                format!("inconsistent shapes: |a| = {}, |b| = {}, |c| = {}", a.len(), s, c.len()),
            ));
        }
        for i in 0..s {
            let row: f64 = a[i * s..(i + 1) * s].iter().sum();
            if (row - c[i]).abs() > 1e-14 * (1.0 + c[i].abs()) {
                return Err(Error::config(
                    "tableau",
                    format!("row sum {row} of stage {i} differs from c = {}", c[i]),
                ));
            }
        }
        Ok(ButcherTableau { stages: s, a, b, c })
    }

    /// Two-stage Gauss–Legendre collocation, order 4.
    pub fn gauss2() -> Self {
        let r = 3f64.sqrt() / 6.0;
        ButcherTableau {
            stages: 2,
            a: vec![0.25, 0.25 - r, 0.25 + r, 0.25],
            b: vec![0.5, 0.5],
            c: vec![0.5 - r, 0.5 + r],
        }
    }

    /// Implicit midpoint rule (one-stage Gauss), order 2.
    pub fn gauss1() -> Self {
        ButcherTableau {
            stages: 1,
            a: vec![0.5],
            b: vec![1.0],
            c: vec![0.5],
        }
    }

    /// Three-stage Gauss–Legendre collocation, order 6.
    pub fn gauss3() -> Self {
        let r = 15f64.sqrt();
        ButcherTableau {
            stages: 3,
            a: vec![
                5.0 / 36.0,
                2.0 / 9.0 - r / 15.0,
                5.0 / 36.0 - r / 30.0,
                5.0 / 36.0 + r / 24.0,
                2.0 / 9.0,
                5.0 / 36.0 - r / 24.0,
                5.0 / 36.0 + r / 30.0,
                2.0 / 9.0 + r / 15.0,
                5.0 / 36.0,
            ],
            b: vec![5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
            c: vec![0.5 - r / 10.0, 0.5, 0.5 + r / 10.0],
        }
    }

    pub fn stages(&self) -> usize {
        self.stages
    }

    /// Row-major stage matrix.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn a_ij(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.stages + j]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}
