//! Independent oracles for the integration tests.
//!
//! Everything here is deliberately implemented without touching the solver
//! code paths it checks: Bessel values come from the power series, refined
//! quadrature builds its own grids, and the simplex search enumerates
//! probability vectors directly.

#![allow(dead_code)]

use std::f64::consts::TAU;

/// Modified Bessel function I_nu(x) by direct series summation:
/// sum_k (x/2)^{2k+nu} / (k! (k+nu)!).
pub fn bessel_i_series(nu: usize, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(nu as i32);
    for k in 1..=nu {
        term /= k as f64;
    }
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= half * half / (k * (k + nu as f64));
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
        k += 1.0;
        if k > 500.0 {
            return sum;
        }
    }
}

/// Periodic trapezoid on a grid of the oracle's own choosing.
pub fn refined_quadrature(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let w = TAU / n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        sum += f(TAU * i as f64 / n as f64);
    }
    w * sum
}

/// Central finite difference of first order.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Fourth-order central difference of first order.
pub fn central_diff4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

/// Brute-force free-energy minimum over the probability simplex on a small
/// space: enumerate all mass vectors with entries in steps of `step`.
/// `dist` is row-major m x m, `mu` the weights; energy uses densities
/// f = p/mu against the supplied kernel-of-distance.
pub fn simplex_grid_min(
    dist: &[f64],
    mu: &[f64],
    kernel: impl Fn(f64) -> f64 + Copy,
    b: f64,
    step: f64,
) -> f64 {
    let m = mu.len();
    let k = (1.0 / step).round() as usize;
    let u: Vec<f64> = dist.iter().map(|&d| kernel(d)).collect();
    let mut best = f64::INFINITY;
    let mut masses = vec![0usize; m];
    fn rec(
        i: usize,
        remaining: usize,
        masses: &mut [usize],
        m: usize,
        step: f64,
        u: &[f64],
        mu: &[f64],
        b: f64,
        best: &mut f64,
    ) {
        if i == m - 1 {
            masses[i] = remaining;
            let mut entropy = 0.0;
            let mut interaction = 0.0;
            for a in 0..m {
                let pa = masses[a] as f64 * step;
                if pa > 0.0 {
                    entropy += pa * (pa / mu[a]).ln();
                }
                for c in 0..m {
                    let pc = masses[c] as f64 * step;
                    interaction += u[a * m + c] * pa * pc;
                }
            }
            let e = entropy + 0.5 * b * interaction;
            if e < *best {
                *best = e;
            }
            return;
        }
        for v in 0..=remaining {
            masses[i] = v;
            rec(i + 1, remaining - v, masses, m, step, u, mu, b, best);
        }
    }
    rec(0, k, &mut masses, m, step, &u, mu, b, &mut best);
    best
}

/// Frozen oracle values, computed independently of the crate (power series,
/// high-resolution quadrature, and a reference adaptive ODE integrator).
pub mod frozen {
    /// I_0(1) by series.
    pub const I0_1: f64 = 1.2660658777520084;
    /// I_1(1) by series.
    pub const I1_1: f64 = 0.56515910399248503;
    /// integral of e^{cos 2 theta} over the circle = 2 pi I_0(1).
    pub const INT_EXP_COS: f64 = 7.9549265210128457;
    /// Nontrivial branch root at b = 8.
    pub const R_OF_8: f64 = 3.325848099017028;

    /// Two-rod layer roots z_b (refined scan + bisection, resolution-stable).
    pub const ZB_10: f64 = 0.812692066856025;
    pub const ZB_50: f64 = 0.920731628230019;
    pub const ZB_200: f64 = 0.961095599992418;

    /// gamma = <sin^2> at the layer root / at z = 0.
    pub const GAMMA_200_ZB: f64 = 0.92497998139574;
    pub const GAMMA_10_Z0: f64 = 0.053308431477957;

    /// Pair free energies at b = 200 for the two roots.
    pub const ENERGY_200_Z0: f64 = 3.2202673100574;
    pub const ENERGY_200_ZB: f64 = 2.0394939661554;

    /// Heat-identity central-difference residual at (z, tau, h) =
    /// (0.3, 0.2, 1e-3) and at half the step.
    pub const HEAT_RESID_H: f64 = 1.067679767e-5;
    pub const HEAT_RESID_H2: f64 = 2.671459498e-6;

    /// Aligned-configuration mass of the z = 0, b = 100 density within
    /// 0.15 rad of {0, pi} (window-quantization limited to ~1e-4).
    pub const ALIGNED_MASS_100: f64 = 0.96496;

    /// Reference hierarchy state at t = 1 for J = 32, b = 8,
    /// y1(0) = 0.3, y2(0) = 0.1 (independent adaptive integrator).
    pub const Y1_AT_1_B8: f64 = 0.8310105215639;
    pub const Y2_AT_1_B8: f64 = 0.49937709319272;
    pub const Y3_AT_1_B8: f64 = 0.2296537080631;
}
