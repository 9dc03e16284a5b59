//! General Onsager solver on discrete metric measure spaces.
//!
//! Two routes to equilibrium are provided and cross-checked: damped
//! fixed-point iteration of f -> e^{-b U[f]} / Z, and entropic
//! (multiplicative-update) descent of the free energy over the probability
//! simplex. Product spaces with sum-of-like-parts kernels compose
//! solutions component-wise, and the concentration report tracks how the
//! solution mass collapses onto the minimizing set of the limiting
//! potential as b grows.

use crate::density::{GridDensity, MeasureSpace};
use crate::energy::{boltzmann, free_energy, potential};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::space::DiscreteCorpusSpace;
use crate::util::kahan_sum;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A space, a kernel conforming on it, and an interaction intensity.
#[derive(Debug, Clone)]
pub struct CorpusProblem {
    pub space: DiscreteCorpusSpace,
    pub kernel: KernelSpec,
    pub b: f64,
}

impl CorpusProblem {
    /// Validates b and kernel conformance (the conformance conditions apply
    /// to the unshifted kernel; explicit offsets are legitimate).
    pub fn new(space: DiscreteCorpusSpace, kernel: KernelSpec, b: f64) -> Result<Self> {
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::Input(format!("interaction intensity b = {b} must be >= 0")));
        }
        kernel.conforms(&space)?;
        Ok(CorpusProblem { space, kernel, b })
    }

    pub fn with_b(&self, b: f64) -> Self {
        CorpusProblem {
            space: self.space.clone(),
            kernel: self.kernel.clone(),
            b,
        }
    }
}

/// How a solver seeds its iteration.
#[derive(Debug, Clone)]
pub enum InitDensity {
    /// Start from the uniform density. On homogeneous spaces this is
    /// itself a fixed point, so nontrivial branches are unreachable.
    Uniform,
    /// Start from 1 + 0.01 * (seeded noise), normalized; the seed is
    /// recorded in the report.
    SeededPerturbation(u64),
    /// Start from an explicit density.
    Explicit(GridDensity),
}

/// Solver output. `converged` implies `residual <= tol`; max_iter produces
/// a non-converged report rather than an error.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub density: GridDensity,
    /// Sup-norm Onsager defect of the returned density.
    pub residual: f64,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Seed of the initial perturbation, when one was used.
    pub seed: Option<u64>,
}

fn initial_density(space: &DiscreteCorpusSpace, init: &InitDensity) -> Result<(GridDensity, Option<u64>)> {
    match init {
        InitDensity::Uniform => Ok((GridDensity::uniform(space), None)),
        InitDensity::SeededPerturbation(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let vals: Vec<f64> = (0..space.m())
                .map(|_| 1.0 + 0.01 * rng.gen_range(-1.0..1.0))
                .collect();
            Ok((GridDensity::from_unnormalized(vals, space)?, Some(*seed)))
        }
        InitDensity::Explicit(f) => {
            if f.len() != space.m() {
                return Err(Error::Input("initial density does not match the space".into()));
            }
            Ok((f.clone(), None))
        }
    }
}

/// Damped iteration f <- (1 - damping) f + damping * e^{-b U[f]} / Z.
pub fn fixed_point_solve(
    problem: &CorpusProblem,
    damping: f64,
    tol: f64,
    max_iter: usize,
    init: &InitDensity,
) -> Result<SolveReport> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Input(format!("damping {damping} must lie in (0, 1]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Input(format!("tolerance {tol} must be positive")));
    }
    let space = &problem.space;
    let (mut f, seed) = initial_density(space, init)?;
    let mut prev: Option<Vec<f64>> = None;
    let mut prev2: Option<Vec<f64>> = None;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for it in 1..=max_iter {
        iterations = it;
        let u = potential(space, &problem.kernel, &f)?;
        let h = boltzmann(space, &u, problem.b)?;
        residual = f.linf_distance(&h);
        if residual <= tol {
            break;
        }
        let mixed: Vec<f64> = f
            .values()
            .iter()
            .zip(h.values())
            .map(|(&a, &c)| (1.0 - damping) * a + damping * c)
            .collect();
        // 2-cycle detection: the iterate returns to its pre-predecessor
        // while making no progress
        if it > 50 {
            if let (Some(p2), Some(p)) = (&prev2, &prev) {
                let back = mixed
                    .iter()
                    .zip(p2)
                    .map(|(a, c)| (a - c).abs())
                    .fold(0.0f64, f64::max);
                let step = mixed
                    .iter()
                    .zip(p)
                    .map(|(a, c)| (a - c).abs())
                    .fold(0.0f64, f64::max);
                if back < 1e-13 && step > 1e3 * back.max(1e-300) && residual > tol {
                    return Err(Error::Oscillation { residual });
                }
            }
        }
        prev2 = prev.take();
        prev = Some(f.values().to_vec());
        f = GridDensity::from_unnormalized(mixed, space)?;
    }
    let energy = free_energy(space, &problem.kernel, &f, problem.b)?;
    Ok(SolveReport {
        converged: residual <= tol,
        residual,
        energy,
        iterations,
        density: f,
        seed,
    })
}

/// Multiplicative-update descent of the free energy over the simplex:
/// f <- normalize(f * e^{-eta (log f + b U[f] - mean)}), with backtracking
/// on eta so accepted steps never increase the energy. Converges when the
/// decrement falls below tol and the Onsager residual is within 10 tol.
pub fn minimize_energy(
    problem: &CorpusProblem,
    tol: f64,
    max_iter: usize,
    init: &InitDensity,
) -> Result<SolveReport> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("tolerance {tol} must be positive")));
    }
    let space = &problem.space;
    let b = problem.b;
    let (mut f, seed) = initial_density(space, init)?;
    let mut energy = free_energy(space, &problem.kernel, &f, b)?;
    let mut eta = 1.0f64;
    let mut iterations = 0;
    let mut converged = false;
    let mut residual;
    let mut decrement = f64::INFINITY;
    loop {
        // the energy surface is quadratically flat at the minimum, so the
        // decrement alone cannot certify the residual; check it directly
        let u = potential(space, &problem.kernel, &f)?;
        let h = boltzmann(space, &u, b)?;
        residual = f.linf_distance(&h);
        if decrement < tol && residual <= 10.0 * tol {
            converged = true;
            break;
        }
        if iterations >= max_iter {
            break;
        }
        iterations += 1;
        let fv = f.values();
        let grad: Vec<f64> = (0..space.m())
            .map(|i| fv[i].max(1e-300).ln() + b * u[i])
            .collect();
        // center the gradient so the update is scale-stable on the simplex
        let mean: f64 = kahan_sum((0..space.m()).map(|i| grad[i] * fv[i] * space.mu(i)));
        let mut step = (eta * 2.0).min(1.0);
        let mut accepted = None;
        // near the minimum the measured energy is flat to rounding; allow
        // plateau steps so the eta = 1 update keeps polishing the residual
        let slack = 4.0 * f64::EPSILON * energy.abs().max(1.0);
        while step >= 1e-14 {
            let cand_vals: Vec<f64> = (0..space.m())
                .map(|i| fv[i] * (-step * (grad[i] - mean)).exp())
                .collect();
            let cand = GridDensity::from_unnormalized(cand_vals, space)?;
            let cand_energy = free_energy(space, &problem.kernel, &cand, b)?;
            if cand_energy <= energy + slack {
                accepted = Some((cand, cand_energy));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_energy)) = accepted else {
            // no step length decreases the energy: numerically stationary
            break;
        };
        eta = step;
        decrement = energy - next_energy;
        f = next;
        energy = next_energy;
    }
    Ok(SolveReport {
        converged,
        residual,
        energy,
        iterations,
        density: f,
        seed,
    })
}

/// Free energy of the normalized ball indicator chi = 1_B / mu(B).
pub fn ball_indicator_energy(problem: &CorpusProblem, center: usize, radius: f64) -> Result<f64> {
    let space = &problem.space;
    if center >= space.m() {
        return Err(Error::Input(format!(
            "center {center} out of range for {} points",
            space.m()
        )));
    }
    let ball = space.ball(center, radius);
    if ball.is_empty() {
        return Err(Error::Input(format!("empty ball at center {center}, radius {radius}")));
    }
    let mu_b: f64 = ball.iter().map(|&j| space.mu(j)).sum();
    let mut vals = vec![0.0; space.m()];
    for &j in &ball {
        vals[j] = 1.0 / mu_b;
    }
    let chi = GridDensity::new(vals, space)?;
    free_energy(space, &problem.kernel, &chi, problem.b)
}

/// Spread max U[1] - min U[1] of the uniform potential; zero certifies that
/// the uniform density solves the Onsager equation on this discretization.
pub fn uniform_solution_residual(problem: &CorpusProblem) -> Result<f64> {
    let u = potential(&problem.space, &problem.kernel, &GridDensity::uniform(&problem.space))?;
    let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = u.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// Cartesian product of component spaces. Points are tuples in row-major
/// order (the last component varies fastest) and the weight is the product
/// of component weights. No joint metric is materialized: sum-of-like-parts
/// kernels only ever need the per-component distances.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    components: Vec<DiscreteCorpusSpace>,
    strides: Vec<usize>,
    len: usize,
}

/// Memory budget for product spaces (number of points).
pub const PRODUCT_BUDGET: usize = 1 << 22;

impl ProductSpace {
    pub fn new(components: Vec<DiscreteCorpusSpace>) -> Result<Self> {
        if components.len() < 2 {
            return Err(Error::Input("a product needs at least two components".into()));
        }
        let mut len = 1usize;
        for c in &components {
            len = len
                .checked_mul(c.m())
                .filter(|&l| l <= PRODUCT_BUDGET)
                .ok_or_else(|| {
                    Error::Budget(format!(
                        "product size exceeds the {PRODUCT_BUDGET}-point budget"
                    ))
                })?;
        }
        let mut strides = vec![1usize; components.len()];
        for k in (0..components.len() - 1).rev() {
            strides[k] = strides[k + 1] * components[k + 1].m();
        }
        Ok(ProductSpace {
            components,
            strides,
            len,
        })
    }

    pub fn components(&self) -> &[DiscreteCorpusSpace] {
        &self.components
    }

    pub fn component_index(&self, idx: usize, k: usize) -> usize {
        idx / self.strides[k] % self.components[k].m()
    }

    /// Product weight of a point.
    pub fn mu(&self, idx: usize) -> f64 {
        self.components
            .iter()
            .enumerate()
            .map(|(k, c)| c.mu(self.component_index(idx, k)))
            .product()
    }

    /// Mass marginal onto component k: sum of f * mu over all other axes,
    /// indexed by the k-th coordinate.
    pub fn marginal_mass(&self, f: &[f64], k: usize) -> Result<Vec<f64>> {
        if f.len() != self.len {
            return Err(Error::Input(format!(
                "density length {} does not match product size {}",
                f.len(),
                self.len
            )));
        }
        let mut masses = vec![0.0; self.components[k].m()];
        for idx in 0..self.len {
            masses[self.component_index(idx, k)] += f[idx] * self.mu(idx);
        }
        Ok(masses)
    }

    /// Compose component densities into the product density
    /// f(p_1..p_N) = prod_k f_k(p_k).
    pub fn compose(&self, factors: &[&GridDensity]) -> Result<Vec<f64>> {
        if factors.len() != self.components.len() {
            return Err(Error::Input(format!(
                "{} factors for {} components",
                factors.len(),
                self.components.len()
            )));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.len() != self.components[k].m() {
                return Err(Error::Input(format!("factor {k} does not match its component")));
            }
        }
        Ok((0..self.len)
            .map(|idx| {
                factors
                    .iter()
                    .enumerate()
                    .map(|(k, f)| f.values()[self.component_index(idx, k)])
                    .product()
            })
            .collect())
    }
}

impl MeasureSpace for ProductSpace {
    fn len(&self) -> usize {
        self.len
    }

    fn node_weight(&self, i: usize) -> f64 {
        self.mu(i)
    }
}

/// Potential of a sum-of-like-parts kernel on the product:
/// U(p_1..p_N) = sum_k U_k(p_k), with U_k the k-th kernel integrated
/// against the k-th marginal of f.
pub fn sum_kernel_potential(
    product: &ProductSpace,
    kernels: &[KernelSpec],
    f: &[f64],
) -> Result<Vec<f64>> {
    if kernels.len() != product.components().len() {
        return Err(Error::Input(format!(
            "{} kernels for {} components",
            kernels.len(),
            product.components().len()
        )));
    }
    let mut per_component: Vec<Vec<f64>> = Vec::with_capacity(kernels.len());
    for (k, kernel) in kernels.iter().enumerate() {
        let comp = &product.components()[k];
        let marg = product.marginal_mass(f, k)?;
        let u_k: Vec<f64> = (0..comp.m())
            .map(|i| {
                kahan_sum(
                    comp.dist_row(i)
                        .iter()
                        .zip(&marg)
                        .map(|(&d, &m)| kernel.eval(d) * m),
                )
            })
            .collect();
        per_component.push(u_k);
    }
    Ok((0..product.len())
        .map(|idx| {
            per_component
                .iter()
                .enumerate()
                .map(|(k, u_k)| u_k[product.component_index(idx, k)])
                .sum()
        })
        .collect())
}

/// Sup-norm Onsager defect of a density on the product under the sum
/// kernel: max |f - e^{-bU}/Z|.
pub fn product_residual(
    product: &ProductSpace,
    kernels: &[KernelSpec],
    f: &[f64],
    b: f64,
) -> Result<f64> {
    let u = sum_kernel_potential(product, kernels, f)?;
    let min_bu = u.iter().map(|&v| b * v).fold(f64::INFINITY, f64::min);
    let gibbs: Vec<f64> = u.iter().map(|&v| (-(b * v - min_bu)).exp()).collect();
    let z = kahan_sum(gibbs.iter().enumerate().map(|(i, &g)| g * product.mu(i)));
    Ok(f.iter()
        .zip(&gibbs)
        .map(|(&fi, &g)| (fi - g / z).abs())
        .fold(0.0, f64::max))
}

/// Compose converged component reports into the product solution; the
/// composite inherits the component residuals under the sum kernel.
pub fn product_compose(product: &ProductSpace, reports: &[&SolveReport]) -> Result<Vec<f64>> {
    for (k, r) in reports.iter().enumerate() {
        if !r.converged {
            return Err(Error::Input(format!("component report {k} did not converge")));
        }
    }
    let factors: Vec<&GridDensity> = reports.iter().map(|r| &r.density).collect();
    product.compose(&factors)
}

/// Concentration diagnostics across a family of solves at increasing b.
#[derive(Debug, Clone)]
pub struct ConcentrationReport {
    /// Potential of the largest-b solve, the computable stand-in for the
    /// limiting potential.
    pub u_inf: Vec<f64>,
    pub min_u: f64,
    /// Nodes within eps of the minimum of u_inf.
    pub sigma_set: Vec<usize>,
    /// Mass each solve places on the sigma set, ordered as the input.
    pub mass_on_sigma: Vec<f64>,
    /// Sup distances between consecutive potentials: how settled the
    /// limiting-potential proxy is.
    pub potential_gaps: Vec<f64>,
    /// Set when u_inf is constant to within eps, making sigma trivially
    /// the whole space.
    pub degenerate: bool,
}

/// Build the concentration report for solves at increasing b.
pub fn concentration_report(
    problem: &CorpusProblem,
    solves: &[(f64, &SolveReport)],
    eps: f64,
) -> Result<ConcentrationReport> {
    if solves.len() < 2 {
        return Err(Error::Input("need solves at two or more intensities".into()));
    }
    for w in solves.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Input("intensities must be strictly increasing".into()));
        }
    }
    if !(eps > 0.0) {
        return Err(Error::Input(format!("eps = {eps} must be positive")));
    }
    let space = &problem.space;
    let potentials: Vec<Vec<f64>> = solves
        .iter()
        .map(|(_, r)| potential(space, &problem.kernel, &r.density))
        .collect::<Result<_>>()?;
    let potential_gaps = potentials
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, c)| (a - c).abs())
                .fold(0.0f64, f64::max)
        })
        .collect();
    let u_inf = potentials.last().expect("nonempty").clone();
    let min_u = u_inf.iter().copied().fold(f64::INFINITY, f64::min);
    let max_u = u_inf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = max_u - min_u <= eps;
    let sigma_set: Vec<usize> = (0..space.m())
        .filter(|&i| u_inf[i] <= min_u + eps)
        .collect();
    let mass_on_sigma = solves
        .iter()
        .map(|(_, r)| {
            kahan_sum(
                sigma_set
                    .iter()
                    .map(|&i| r.density.values()[i] * space.mu(i)),
            )
        })
        .collect();
    Ok(ConcentrationReport {
        u_inf,
        min_u,
        sigma_set,
        mass_on_sigma,
        potential_gaps,
        degenerate,
    })
}

/// Worst-case margin of the ball-mass lower bound mu(B(x, r)) >= c e^{-r^{-k}}
/// over all nodes and the supplied radii. Nonnegative output certifies the
/// assumption at the sampled scales.
pub fn ball_measure_profile(
    space: &DiscreteCorpusSpace,
    k: f64,
    c: f64,
    radii: &[f64],
) -> Result<f64> {
    if !(k > 0.0 && k < 1.0) {
        return Err(Error::Input(format!("exponent k = {k} must lie in (0, 1)")));
    }
    if !(c > 0.0) {
        return Err(Error::Input(format!("constant c = {c} must be positive")));
    }
    if radii.is_empty() {
        return Err(Error::Input("at least one radius is required".into()));
    }
    let mut margin = f64::INFINITY;
    for &r in radii {
        if !(r > 0.0) {
            return Err(Error::Input(format!("radius {r} must be positive")));
        }
        let floor = c * (-r.powf(-k)).exp();
        for x in 0..space.m() {
            margin = margin.min(space.ball_measure(x, r) - floor);
        }
    }
    Ok(margin)
}
