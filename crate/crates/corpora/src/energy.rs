//! Mean-field potential, free energy, and the Onsager self-consistency
//! residual on discrete corpus spaces.

use crate::density::GridDensity;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::space::DiscreteCorpusSpace;
use crate::util::{kahan_sum, xlogx};

/// U_i = sum_j u(d_ij) f_j mu_j.
///
/// For conforming kernels the result satisfies 0 <= U <= C and
/// |U_i - U_k| <= L d_ik on every pair.
pub fn potential(space: &DiscreteCorpusSpace, kernel: &KernelSpec, f: &GridDensity) -> Result<Vec<f64>> {
    let m = space.m();
    if f.len() != m {
        return Err(Error::Input(format!(
            "density length {} does not match space size {}",
            f.len(),
            m
        )));
    }
    let fv = f.values();
    let masses: Vec<f64> = (0..m).map(|j| fv[j] * space.mu(j)).collect();
    let mut u = Vec::with_capacity(m);
    for i in 0..m {
        let row = space.dist_row(i);
        u.push(kahan_sum(
            row.iter().zip(&masses).map(|(&d, &fm)| kernel.eval(d) * fm),
        ));
    }
    Ok(u)
}

/// E[f] = sum_i (log f_i + (b/2) U_i) f_i mu_i, with f log f extended by 0
/// where f vanishes.
pub fn free_energy(
    space: &DiscreteCorpusSpace,
    kernel: &KernelSpec,
    f: &GridDensity,
    b: f64,
) -> Result<f64> {
    if !(b >= 0.0) {
        return Err(Error::Input(format!("interaction intensity b = {b} must be >= 0")));
    }
    let u = potential(space, kernel, f)?;
    let fv = f.values();
    let entropy = kahan_sum((0..space.m()).map(|i| xlogx(fv[i]) * space.mu(i)));
    let interaction = kahan_sum((0..space.m()).map(|i| u[i] * fv[i] * space.mu(i)));
    Ok(entropy + 0.5 * b * interaction)
}

/// Normalized Gibbs density e^{-b U} / Z for precomputed potential values.
pub fn boltzmann(space: &DiscreteCorpusSpace, u: &[f64], b: f64) -> Result<GridDensity> {
    if u.len() != space.m() {
        return Err(Error::Input(format!(
            "potential length {} does not match space size {}",
            u.len(),
            space.m()
        )));
    }
    // subtract the minimum exponent so the largest weight is exactly 1
    let min_bu = u
        .iter()
        .map(|&ui| b * ui)
        .fold(f64::INFINITY, f64::min);
    let vals: Vec<f64> = u.iter().map(|&ui| (-(b * ui - min_bu)).exp()).collect();
    GridDensity::from_unnormalized(vals, space)
}

/// Sup-norm defect of the Onsager equation: max_i |f_i - h_i| with
/// h = e^{-bU[f]}/Z.
pub fn onsager_residual(
    space: &DiscreteCorpusSpace,
    kernel: &KernelSpec,
    f: &GridDensity,
    b: f64,
) -> Result<f64> {
    let u = potential(space, kernel, f)?;
    let h = boltzmann(space, &u, b)?;
    Ok(f.linf_distance(&h))
}
