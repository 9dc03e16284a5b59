//! Probability densities on quadrature grids and their Fourier representation.

use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::util::kahan_sum;
use std::f64::consts::{PI, TAU};

/// Anything that carries per-node quadrature weights.
///
/// The circle grid weights sum to 2*pi (densities are taken with respect to
/// the angle measure); discrete corpus spaces carry probability weights
/// summing to 1 (densities with respect to mu).
pub trait MeasureSpace {
    fn len(&self) -> usize;
    fn node_weight(&self, i: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn total_mass(&self) -> f64 {
        (0..self.len()).map(|i| self.node_weight(i)).sum()
    }
}

impl MeasureSpace for CircleGrid {
    fn len(&self) -> usize {
        self.n()
    }

    fn node_weight(&self, _i: usize) -> f64 {
        self.weight()
    }
}

/// Nonnegative density sampled per node, normalized against the space's
/// weights: sum_i f_i w_i = 1.
#[derive(Debug, Clone)]
pub struct GridDensity {
    values: Vec<f64>,
}

/// Slack for tiny negative excursions produced by rounding; anything below
/// is rejected, anything inside is clipped to 0.
const NEG_CLIP: f64 = 1e-12;
/// Tolerance on the normalization invariant.
const NORM_TOL: f64 = 1e-10;

impl GridDensity {
    /// Wrap values that already satisfy the invariants.
    pub fn new<S: MeasureSpace>(values: Vec<f64>, space: &S) -> Result<Self> {
        Self::check_shape(&values, space)?;
        let values = Self::clip(values)?;
        let mass = weighted_mass(&values, space);
        if (mass - 1.0).abs() > NORM_TOL {
            return Err(Error::Input(format!(
                "density mass {mass:.12} deviates from 1 beyond {NORM_TOL:e}"
            )));
        }
        Ok(GridDensity { values })
    }

    /// Normalize arbitrary nonnegative values into a density.
    pub fn from_unnormalized<S: MeasureSpace>(values: Vec<f64>, space: &S) -> Result<Self> {
        Self::check_shape(&values, space)?;
        let mut values = Self::clip(values)?;
        let mass = weighted_mass(&values, space);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::Input(format!("cannot normalize values with mass {mass}")));
        }
        for v in &mut values {
            *v /= mass;
        }
        Ok(GridDensity { values })
    }

    /// The uniform density 1/|space|.
    pub fn uniform<S: MeasureSpace>(space: &S) -> Self {
        let total = space.total_mass();
        GridDensity {
            values: vec![1.0 / total; space.len()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sup-norm distance to another density on the same space.
    pub fn linf_distance(&self, other: &GridDensity) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_shape<S: MeasureSpace>(values: &[f64], space: &S) -> Result<()> {
        if values.len() != space.len() {
            return Err(Error::Input(format!(
                "density length {} does not match space size {}",
                values.len(),
                space.len()
            )));
        }
        Ok(())
    }

    fn clip(mut values: Vec<f64>) -> Result<Vec<f64>> {
        for v in &mut values {
            if !v.is_finite() || *v < -NEG_CLIP {
                return Err(Error::Input(format!("density value {v} is negative or non-finite")));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        Ok(values)
    }
}

pub(crate) fn weighted_mass<S: MeasureSpace>(values: &[f64], space: &S) -> f64 {
    kahan_sum(values.iter().enumerate().map(|(i, &v)| v * space.node_weight(i)))
}

/// Truncated even-cosine representation of a circle density:
/// f(theta) = 1/(2*pi) + (1/pi) * sum_j y_j cos(2*j*theta).
///
/// The constant mode is implicit (y_0 = 1), so reconstructions integrate to
/// 1 identically; every coefficient of a true density satisfies |y_j| <= 1.
#[derive(Debug, Clone)]
pub struct FourierDensity {
    coeffs: Vec<f64>,
}

/// Default truncation for equilibrium work; coefficients of the branch
/// densities decay like Bessel-function ratios, far below roundoff at J = 64
/// for the intensities treated here.
pub const DEFAULT_MODES: usize = 64;

impl FourierDensity {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Input("at least one Fourier mode is required".into()));
        }
        for (j, &c) in coeffs.iter().enumerate() {
            if !c.is_finite() || c.abs() > 1.0 + 1e-12 {
                return Err(Error::Input(format!(
                    "coefficient y_{} = {c} violates |y_j| <= 1",
                    j + 1
                )));
            }
        }
        Ok(FourierDensity { coeffs })
    }

    /// Coefficients y_1 .. y_J.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// y_j with the y_0 = 1 convention; zero beyond the truncation.
    pub fn coeff(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            self.coeffs.get(j - 1).copied().unwrap_or(0.0)
        }
    }

    /// Evaluate the truncated series at one angle.
    pub fn eval(&self, theta: f64) -> f64 {
        let mut f = 1.0 / TAU;
        for (j, &y) in self.coeffs.iter().enumerate() {
            f += y / PI * (2.0 * (j + 1) as f64 * theta).cos();
        }
        f
    }

    /// Sample the series on a grid.
    pub fn reconstruct(&self, grid: &CircleGrid) -> Vec<f64> {
        grid.sample(|t| self.eval(t))
    }

    /// Project grid values onto the cosine modes: y_j = integral f cos(2j theta) dtheta.
    pub fn from_grid(values: &[f64], grid: &CircleGrid, modes: usize) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::Input(format!(
                "values length {} does not match grid size {}",
                values.len(),
                grid.n()
            )));
        }
        if modes == 0 || 2 * modes >= grid.n() {
            return Err(Error::Input(format!(
                "mode count {modes} must be positive and below n/2 = {}",
                grid.n() / 2
            )));
        }
        let w = grid.weight();
        let coeffs = (1..=modes)
            .map(|j| {
                w * kahan_sum(
                    grid.nodes()
                        .iter()
                        .zip(values)
                        .map(|(&t, &f)| f * (2.0 * j as f64 * t).cos()),
                )
            })
            .collect();
        FourierDensity::new(coeffs)
    }
}
