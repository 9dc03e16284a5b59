//! Uniform periodic grids on the circle and the trapezoidal quadrature rule.
//!
//! The trapezoid rule on a uniform periodic grid is spectrally accurate for
//! smooth integrands, so a modest node count already integrates the
//! exponential densities of this crate to machine precision.

use crate::error::{Error, Result};
use crate::util::{circle_dist, kahan_sum};
use std::f64::consts::TAU;

/// Default node count for circle quadrature.
pub const DEFAULT_GRID_N: usize = 256;

/// Uniform grid of angles theta_i = 2*pi*i/n with weight 2*pi/n per node.
#[derive(Debug, Clone)]
pub struct CircleGrid {
    n: usize,
    nodes: Vec<f64>,
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("grid needs at least 2 nodes, got {n}")));
        }
        let nodes = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        Ok(CircleGrid { n, nodes })
    }

    pub fn default_grid() -> Self {
        Self::new(DEFAULT_GRID_N).expect("default grid size is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    /// Quadrature weight 2*pi/n, identical for every node.
    pub fn weight(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Evaluate a function on all nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&t| f(t)).collect()
    }

    /// Total mass of nodes whose angular distance to the nearest of
    /// `centers` is at most `halfwidth`, for `values` given per node.
    pub fn mass_within(&self, values: &[f64], centers: &[f64], halfwidth: f64) -> Result<f64> {
        if values.len() != self.n {
            return Err(Error::Input(format!(
                "values length {} does not match grid size {}",
                values.len(),
                self.n
            )));
        }
        let w = self.weight();
        let mut mass = 0.0;
        for (i, &theta) in self.nodes.iter().enumerate() {
            let d = centers
                .iter()
                .map(|&c| circle_dist(theta, c))
                .fold(f64::INFINITY, f64::min);
            if d <= halfwidth {
                mass += values[i] * w;
            }
        }
        Ok(mass)
    }
}

/// Periodic trapezoid rule: (2*pi/n) * sum of values.
pub fn periodic_quadrature(values: &[f64], grid: &CircleGrid) -> Result<f64> {
    if values.len() != grid.n() {
        return Err(Error::Input(format!(
            "values length {} does not match grid size {}",
            values.len(),
            grid.n()
        )));
    }
    Ok(grid.weight() * kahan_sum(values.iter().copied()))
}
