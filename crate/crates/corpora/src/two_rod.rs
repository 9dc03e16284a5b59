//! The interacting two-rod model.
//!
//! Two articulated rods interact through the squared difference of their
//! triangle areas, (sin(p1-p2) - sin(q1-q2))^2. Solutions of the mean-field
//! equation are functions of the angle difference theta = p1 - p2 alone, of
//! the form g ~ e^{-b (sin theta - z)^2}, and the order parameter z is
//! determined by the scalar equation [s](b, z) = 0 with
//!
//!   [s](b, z) = <sin theta - z> under the weight e^{-b (sin theta - z)^2}.
//!
//! Equivalently, z is a critical point in z of the rescaled partition
//! integral lambda(z, tau) = b^{1/2} integral e^{-b (sin theta - z)^2},
//! tau = 1/b, which solves the heat equation d_tau lambda = (1/4) d_zz
//! lambda. Besides z = 0 (rods aligned mod pi), a root z_b appears in a
//! layer of width ~ b^{-1/2} near z = 1 and drives the concentration onto
//! right-angle configurations as b grows.

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::grid::CircleGrid;
use crate::util::kahan_sum;
use std::f64::consts::{PI, TAU};

/// Base quadrature size; the two-rod integrands are sharper than the
/// single-rod ones at equal b because the phase (sin theta - z)^2 has
/// near-degenerate minima.
pub const TWO_ROD_GRID_N: usize = 1024;

/// The z domain is capped just short of 1; the integrand is singular in the
/// limit z -> 1 and the continuum problem excludes it.
pub const Z_CAP: f64 = 1.0 - 1e-4;

/// Root tolerance in z.
const Z_TOL: f64 = 1e-10;

/// One root of the two-rod equation with its derived quantities.
#[derive(Debug, Clone)]
pub struct TwoRodSolution {
    pub b: f64,
    /// Order parameter, a root of [s](b, z) = 0 in [0, 1).
    pub z: f64,
    /// gamma = <sin^2 theta> under the solution density.
    pub gamma: f64,
    /// Free energy of the pair density f(p1, p2) = g(p1 - p2) on the
    /// product space, per the difference-variable reduction.
    pub energy: f64,
}

fn grid_size(b: f64) -> usize {
    let n = (8.0 * b.abs().sqrt()) as usize;
    TWO_ROD_GRID_N.max(n.next_multiple_of(4))
}

/// sin/cos tables that respect the reflection symmetry of the grid exactly:
/// sin(2 pi - t) = -sin(t) is imposed bitwise, so odd integrands cancel
/// pairwise in the symmetric sums below.
fn sin_cos_tables(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut sin = vec![0.0; n];
    let mut cos = vec![0.0; n];
    for i in 0..=n / 2 {
        let t = TAU * i as f64 / n as f64;
        sin[i] = t.sin();
        cos[i] = t.cos();
        if i > 0 && i < n / 2 {
            sin[n - i] = -sin[i];
            cos[n - i] = cos[i];
        }
    }
    sin[0] = 0.0;
    if n % 2 == 0 {
        sin[n / 2] = 0.0;
        cos[n / 2] = -1.0;
    }
    (sin, cos)
}

/// Sum over the grid pairing the reflected nodes (i, n-i) first, so values
/// that are exactly antisymmetric cancel without rounding residue.
fn symmetric_sum(values: &[f64]) -> f64 {
    let n = values.len();
    let mut terms = Vec::with_capacity(n / 2 + 1);
    terms.push(values[0]);
    if n % 2 == 0 {
        terms.push(values[n / 2]);
    }
    for i in 1..n.div_ceil(2) {
        terms.push(values[i] + values[n - i]);
    }
    kahan_sum(terms)
}

fn guard_b(b: f64) -> Result<()> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Input(format!("interaction intensity b = {b} must be positive")));
    }
    Ok(())
}

/// [s](b, z): the mean of (sin theta - z) under the weight
/// e^{-b (sin theta - z)^2}. Odd under z -> -z combined with reflection,
/// so [s](b, 0) = 0.
pub fn s_bracket(b: f64, z: f64) -> Result<f64> {
    guard_b(b)?;
    let n = grid_size(b);
    let (sin, _) = sin_cos_tables(n);
    // stabilize the exponent by its minimum over the grid
    let min_s2 = sin
        .iter()
        .map(|&s| (s - z) * (s - z))
        .fold(f64::INFINITY, f64::min);
    let mut num = vec![0.0; n];
    let mut den = vec![0.0; n];
    for i in 0..n {
        let s = sin[i] - z;
        let e = (-b * (s * s - min_s2)).exp();
        num[i] = s * e;
        den[i] = e;
    }
    Ok(symmetric_sum(&num) / symmetric_sum(&den))
}

/// lambda(z, tau) = b^{1/2} integral e^{-b (sin theta - z)^2} dtheta with
/// b = 1/tau. Positive, even in z, and solves d_tau lambda = (1/4) d_zz
/// lambda; as tau -> 0 it approaches 2 sqrt(pi) / sqrt(1 - z^2) on (-1, 1).
pub fn lambda_fn(z: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Input(format!("tau = {tau} must be positive")));
    }
    let b = 1.0 / tau;
    let n = grid_size(b);
    let (sin, _) = sin_cos_tables(n);
    let vals: Vec<f64> = sin
        .iter()
        .map(|&s| {
            let d = s - z;
            (-b * d * d).exp()
        })
        .collect();
    Ok(b.sqrt() * TAU / n as f64 * symmetric_sum(&vals))
}

/// Central-difference residual of the heat identity
/// d_tau lambda - (1/4) d_zz lambda; second order in both steps.
pub fn heat_residual(z: f64, tau: f64, h_z: f64, h_tau: f64) -> Result<f64> {
    if !(h_z > 0.0 && h_tau > 0.0) {
        return Err(Error::Input("steps must be positive".into()));
    }
    if !(z > -1.0 + 2.0 * h_z && z < 1.0 - 2.0 * h_z) {
        return Err(Error::Input(format!(
            "z = {z} too close to the boundary for step {h_z}"
        )));
    }
    if !(tau > h_tau) {
        return Err(Error::Input(format!("tau = {tau} must exceed the step {h_tau}")));
    }
    let d_tau = (lambda_fn(z, tau + h_tau)? - lambda_fn(z, tau - h_tau)?) / (2.0 * h_tau);
    let d_zz = (lambda_fn(z + h_z, tau)? - 2.0 * lambda_fn(z, tau)? + lambda_fn(z - h_z, tau)?)
        / (h_z * h_z);
    Ok(d_tau - 0.25 * d_zz)
}

/// All roots of [s](b, z) = 0 in [0, Z_CAP], in increasing order. z = 0 is
/// always a root; for large b a further root z_b sits in the b^{-1/2} layer
/// near z = 1, so the scan refines there.
pub fn solve_z(b: f64) -> Result<Vec<f64>> {
    guard_b(b)?;
    let mut points: Vec<f64> = (0..=2000).map(|i| Z_CAP * i as f64 / 2000.0).collect();
    let layer = 1.0 - 10.0 / b.sqrt();
    if layer > 0.0 {
        let step = (1e-3_f64).min(1.0 / (10.0 * b.sqrt()));
        let mut zc = layer;
        while zc < Z_CAP {
            points.push(zc);
            zc += step;
        }
        points.sort_by(|a, c| a.partial_cmp(c).unwrap());
        points.dedup();
    }
    let mut roots = vec![0.0];
    let mut prev_z = points[1]; // skip z = 0, a root by symmetry
    let mut prev_s = s_bracket(b, prev_z)?;
    for &zc in &points[2..] {
        let s = s_bracket(b, zc)?;
        if prev_s == 0.0 {
            roots.push(prev_z);
        } else if prev_s * s < 0.0 {
            let mut lo = prev_z;
            let mut hi = zc;
            let mut slo = prev_s;
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if hi - lo < Z_TOL * 0.1 {
                    break;
                }
                let sm = s_bracket(b, mid)?;
                if (slo > 0.0) == (sm > 0.0) {
                    lo = mid;
                    slo = sm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev_z = zc;
        prev_s = s;
    }
    Ok(roots)
}

/// Normalized density over theta = p1 - p2: proportional to
/// e^{-b sin^2 theta + 2 b z sin theta}, equivalently e^{-b (sin theta - z)^2}.
pub fn two_rod_density(b: f64, z: f64) -> Result<(CircleGrid, GridDensity)> {
    guard_b(b)?;
    if !(-1.0 < z && z < 1.0) {
        return Err(Error::Input(format!("z = {z} must lie in (-1, 1)")));
    }
    let n = grid_size(b);
    let grid = CircleGrid::new(n)?;
    let (sin, _) = sin_cos_tables(n);
    let min_s2 = sin
        .iter()
        .map(|&s| (s - z) * (s - z))
        .fold(f64::INFINITY, f64::min);
    let vals: Vec<f64> = sin
        .iter()
        .map(|&s| {
            let d = s - z;
            (-b * (d * d - min_s2)).exp()
        })
        .collect();
    let dens = GridDensity::from_unnormalized(vals, &grid)?;
    Ok((grid, dens))
}

/// gamma = <sin^2 theta> under the two-rod density; in [0, 1].
pub fn gamma_of(b: f64, z: f64) -> Result<f64> {
    let (grid, dens) = two_rod_density(b, z)?;
    let (sin, _) = sin_cos_tables(grid.n());
    let vals: Vec<f64> = dens
        .values()
        .iter()
        .zip(&sin)
        .map(|(&f, &s)| f * s * s)
        .collect();
    Ok(grid.weight() * symmetric_sum(&vals))
}

/// Free energy of the pair density f(p1, p2) = g(p1 - p2) with respect to
/// the uniform probability measure on the torus. Both marginals of the
/// interaction reduce to averages over the difference variable:
/// E = integral g log(2 pi g) dtheta + b (<sin^2> - <sin>^2).
pub fn product_energy(b: f64, z: f64) -> Result<f64> {
    let (grid, dens) = two_rod_density(b, z)?;
    let (sin, _) = sin_cos_tables(grid.n());
    let w = grid.weight();
    let gv = dens.values();
    // integral g log(2 pi g) dtheta: relative entropy against the uniform
    // pair density
    let entropy = w * kahan_sum(gv.iter().map(|&g| if g > 0.0 { g * (TAU * g).ln() } else { 0.0 }));
    let mean_sin = w * symmetric_sum(
        &gv.iter().zip(&sin).map(|(&g, &s)| g * s).collect::<Vec<_>>(),
    );
    let mean_sin2 = w * symmetric_sum(
        &gv.iter().zip(&sin).map(|(&g, &s)| g * s * s).collect::<Vec<_>>(),
    );
    Ok(entropy + b * (mean_sin2 - mean_sin * mean_sin))
}

/// Solve the model at intensity b: every root of [s](b, .) = 0 with its
/// gamma and product-space energy.
pub fn solve(b: f64) -> Result<Vec<TwoRodSolution>> {
    let roots = solve_z(b)?;
    roots
        .into_iter()
        .map(|z| {
            Ok(TwoRodSolution {
                b,
                z,
                gamma: gamma_of(b, z)?,
                energy: product_energy(b, z)?,
            })
        })
        .collect()
}

/// Probability mass of the two-rod density within `halfwidth` radians of
/// the right-angle configurations theta = pi/2 and 3 pi/2.
pub fn right_angle_mass(b: f64, z: f64, halfwidth: f64) -> Result<f64> {
    let (grid, dens) = two_rod_density(b, z)?;
    grid.mass_within(dens.values(), &[PI / 2.0, 3.0 * PI / 2.0], halfwidth)
}

/// Probability mass near the aligned configurations theta = 0 and pi.
pub fn aligned_mass(b: f64, z: f64, halfwidth: f64) -> Result<f64> {
    let (grid, dens) = two_rod_density(b, z)?;
    grid.mass_within(dens.values(), &[0.0, PI], halfwidth)
}
