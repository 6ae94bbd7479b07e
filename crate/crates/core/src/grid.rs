//! Periodic tensor-product grids.
//!
//! A [`Grid`] is immutable once built and is shared between fields through
//! an `Arc`. One-dimensional grids are stored as `N_x × 1`, so every field
//! uses the same flat row-major layout with `x` as the slow index.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

const AXIS_NAMES: [&str; 2] = ["x", "y"];

/// One periodic axis `[lower, upper)` sampled at `nodes` equispaced points.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    lower: f64,
    upper: f64,
    nodes: usize,
}

impl Axis {
    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    /// Mesh size `h = (upper - lower) / N`.
    pub fn spacing(&self) -> f64 {
        self.length() / self.nodes as f64
    }

    /// Wavenumber scale `μ = 2π / (upper - lower)`.
    pub fn wavenumber_scale(&self) -> f64 {
        2.0 * PI / self.length()
    }

    /// Coordinate of node `j`; the right endpoint is identified with node 0.
    pub fn coordinate(&self, j: usize) -> f64 {
        self.lower + j as f64 * self.spacing()
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.nodes).map(|j| self.coordinate(j)).collect()
    }

    /// Signed Fourier index of DFT bin `l`. The Nyquist bin `N/2` maps to
    /// `+N/2` when `keep_nyquist` is set and to `0` otherwise.
    pub fn signed_index(&self, l: usize, keep_nyquist: bool) -> f64 {
        let n = self.nodes;
        if l < n / 2 {
            l as f64
        } else if l == n / 2 {
            if keep_nyquist {
                (n / 2) as f64
            } else {
                0.0
            }
        } else {
            l as f64 - n as f64
        }
    }
}

/// Periodic 1D or 2D domain geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    /// Builds a grid from per-axis `(lower, upper)` bounds and node counts.
    ///
    /// Node counts must be even and at least 4.
    pub fn new(bounds: &[(f64, f64)], nodes: &[usize]) -> Result<Arc<Grid>> {
        if bounds.is_empty() || bounds.len() > 2 {
            return Err(Error::config(
                "dims",
                format!("expected 1 or 2 axes, got {}", bounds.len()),
            ));
        }
        if bounds.len() != nodes.len() {
            return Err(Error::config(
                "nodes",
                format!("{} bound pairs but {} node counts", bounds.len(), nodes.len()),
            ));
        }
        let mut axes = Vec::with_capacity(bounds.len());
        for (k, (&(lower, upper), &n)) in bounds.iter().zip(nodes).enumerate() {
            let name = AXIS_NAMES[k];
            if !(lower.is_finite() && upper.is_finite()) || lower >= upper {
                return Err(Error::config(
                    name,
                    format!("bounds must satisfy lower < upper, got [{lower}, {upper}]"),
                ));
            }
            if n < 4 || n % 2 != 0 {
                return Err(Error::config(
                    name,
                    format!("node count must be even and >= 4, got {n}"),
                ));
            }
            axes.push(Axis { lower, upper, nodes: n });
        }
        Ok(Arc::new(Grid { axes }))
    }

    pub fn line(lower: f64, upper: f64, nodes: usize) -> Result<Arc<Grid>> {
        Grid::new(&[(lower, upper)], &[nodes])
    }

    pub fn square(lower: f64, upper: f64, nodes: usize) -> Result<Arc<Grid>> {
        Grid::new(&[(lower, upper), (lower, upper)], &[nodes, nodes])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    /// `N_x`.
    pub fn nx(&self) -> usize {
        self.axes[0].nodes
    }

    /// `N_y`, or 1 for a one-dimensional grid.
    pub fn ny(&self) -> usize {
        self.axes.get(1).map_or(1, |a| a.nodes)
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h_x h_y` of the discrete inner product.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Measure of the domain.
    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.lower, a.upper)).collect()
    }

    pub fn nodes(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.nodes).collect()
    }

    /// Coordinates of flat index `idx` (`x` slow, `y` fast).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let ny = self.ny();
        let (j, k) = (idx / ny, idx % ny);
        let x = self.axes[0].coordinate(j);
        let y = self.axes.get(1).map_or(0.0, |a| a.coordinate(k));
        [x, y]
    }
}
