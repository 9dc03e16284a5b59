//! Spectral equilibrium solver for the circle Maier-Saupe model.
//!
//! Equilibria have the form g(r) = Z(r)^{-1} e^{r cos 2theta}; the branch is
//! parametrized by the transcendental equation g_1(r) = 2r/b, which has only
//! the trivial root below the critical intensity b = 4 and exactly one
//! positive root above it.

use crate::density::{FourierDensity, GridDensity};
use crate::error::{Error, Result};
use crate::grid::{CircleGrid, DEFAULT_GRID_N};
use crate::util::kahan_sum;
use std::f64::consts::PI;

/// Exponent guard: e^{|r|} must stay inside double range.
const R_MAX: f64 = 700.0;
/// Root tolerance in r for the branch equation.
const ROOT_TOL: f64 = 1e-12;
/// Coefficients below this magnitude switch from quadrature to the
/// backward recurrence, which keeps full relative precision in the tail.
const TAIL_SWITCH: f64 = 1e-6;

/// One point (r, b, g_1..g_J, db/dr) on the nematic branch.
#[derive(Debug, Clone)]
pub struct BranchPoint {
    pub b: f64,
    pub r: f64,
    pub g: Vec<f64>,
    pub dbdr: f64,
}

impl BranchPoint {
    /// Check the defining equation, the coefficient ordering, and the
    /// positivity of db/dr.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if (self.g[0] - 2.0 * self.r / self.b).abs() > tol {
            return Err(Error::Input(format!(
                "branch point violates g1 = 2r/b at b = {}: defect {:.3e}",
                self.b,
                (self.g[0] - 2.0 * self.r / self.b).abs()
            )));
        }
        if self.r > 0.0 {
            for w in self.g.windows(2) {
                if !(w[1] > 0.0 && w[1] < w[0]) {
                    return Err(Error::Input(format!(
                        "coefficient ordering fails at b = {}: {} -> {}",
                        self.b, w[0], w[1]
                    )));
                }
            }
            if !(self.dbdr > 0.0) {
                return Err(Error::Input(format!("db/dr = {} not positive", self.dbdr)));
            }
        }
        Ok(())
    }
}

/// Quadrature size large enough that aliasing of e^{r cos 2theta} times the
/// first `j_max` cosine modes stays below roundoff.
fn quad_size(r: f64, j_max: usize) -> usize {
    let n = (3.0 * r.abs()) as usize + 4 * j_max + 64;
    DEFAULT_GRID_N.max(n.next_multiple_of(4))
}

fn guard_r(r: f64) -> Result<()> {
    if !r.is_finite() {
        return Err(Error::Input(format!("r = {r} is not finite")));
    }
    if r.abs() > R_MAX {
        return Err(Error::Overflow(format!(
            "|r| = {} exceeds the exponent range (limit {R_MAX})",
            r.abs()
        )));
    }
    Ok(())
}

/// Z(r) = integral of e^{r cos 2theta} over the circle.
pub fn partition_z(r: f64) -> Result<f64> {
    guard_r(r)?;
    let n = quad_size(r, 0);
    let grid = CircleGrid::new(n)?;
    let vals = grid.sample(|t| (r * (2.0 * t).cos()).exp());
    Ok(grid.weight() * kahan_sum(vals.iter().copied()))
}

/// Quadrature values of (Z, g_1..g_j_max); accurate in absolute terms, so
/// coefficients below roundoff come out as noise and are replaced by the
/// recurrence tail in `g_coeffs`.
fn g_head(r: f64, j_max: usize) -> Result<(f64, Vec<f64>)> {
    guard_r(r)?;
    let n = quad_size(r, j_max);
    let grid = CircleGrid::new(n)?;
    // scale the exponent so weights peak at 1 regardless of r
    let w: Vec<f64> = grid.sample(|t| (r * ((2.0 * t).cos() - 1.0)).exp());
    let z_scaled = kahan_sum(w.iter().copied());
    let mut g = Vec::with_capacity(j_max);
    for j in 1..=j_max {
        let num = kahan_sum(
            grid.nodes()
                .iter()
                .zip(&w)
                .map(|(&t, &wi)| wi * (2.0 * j as f64 * t).cos()),
        );
        g.push(num / z_scaled);
    }
    Ok((grid.weight() * z_scaled * r.exp(), g))
}

fn g1(r: f64) -> Result<f64> {
    Ok(g_head(r, 1)?.1[0])
}

/// g_j(r) = (integral e^{r cos 2theta} cos(2j theta) dtheta) / Z(r) for
/// j = 1..J. The head comes from quadrature; once coefficients drop below
/// `TAIL_SWITCH` the stable downward recurrence takes over, matched to the
/// last well-resolved quadrature value. The forward recurrence is unstable
/// and is never used here.
pub fn g_coeffs(r: f64, modes: usize) -> Result<Vec<f64>> {
    if modes < 2 {
        return Err(Error::Input(format!("mode count {modes} must be at least 2")));
    }
    if r == 0.0 {
        return Ok(vec![0.0; modes]);
    }
    // negative r by symmetry: g_j(-r) = (-1)^j g_j(r)
    if r < 0.0 {
        let mut g = g_coeffs(-r, modes)?;
        for (j, v) in g.iter_mut().enumerate() {
            if j % 2 == 0 {
                *v = -*v;
            }
        }
        return Ok(g);
    }
    let (_, mut g) = g_head(r, modes)?;
    let cut = match g.iter().position(|&v| v.abs() < TAIL_SWITCH) {
        Some(pos) if pos + 1 < modes => pos, // g[cut] is the first small one
        _ => return Ok(g),
    };
    // anchor the tail at the last well-resolved head coefficient (or g_0 = 1)
    let (anchor_j, anchor_val) = if cut == 0 { (0, 1.0) } else { (cut, g[cut - 1]) };
    let tail = backward_tail(r, anchor_j, modes)?;
    let factor = anchor_val / tail[0];
    for j in anchor_j + 1..=modes {
        g[j - 1] = tail[j - anchor_j] * factor;
    }
    Ok(g)
}

/// Downward three-term recurrence p_{j-1} = p_{j+1} + (2j/r) p_j seeded well
/// above `modes`; returns p_anchor..p_modes up to a common factor.
fn backward_tail(r: f64, anchor: usize, modes: usize) -> Result<Vec<f64>> {
    let start = modes + 30 + r.abs() as usize;
    let mut p = vec![0.0; start + 2];
    p[start + 1] = 0.0;
    p[start] = 1.0;
    for j in (anchor + 1..=start).rev() {
        p[j - 1] = p[j + 1] + (2.0 * j as f64 / r) * p[j];
        if p[j - 1] > 1e250 {
            for v in p[j - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    if !(p[anchor] > 0.0) || !p[anchor].is_finite() {
        return Err(Error::Input(format!(
            "coefficient recurrence degenerated at r = {r} (anchor {anchor})"
        )));
    }
    Ok(p[anchor..=modes].to_vec())
}

/// Max defect of g_{j+1} = g_{j-1} - (2j/r) g_j over the supplied vector,
/// with the g_0 = 1 convention.
pub fn recursion_check(g: &[f64], r: f64) -> Result<f64> {
    if r == 0.0 {
        return Err(Error::UndefinedRecursion);
    }
    if g.len() < 2 {
        return Err(Error::Input("need at least two coefficients".into()));
    }
    let mut defect = 0.0f64;
    for j in 1..g.len() {
        let prev = if j == 1 { 1.0 } else { g[j - 2] };
        let d = (g[j] - (prev - 2.0 * j as f64 / r * g[j - 1])).abs();
        defect = defect.max(d);
    }
    Ok(defect)
}

/// Nonnegative roots of g_1(r) = 2r/b: {0} for b <= 4, {0, r(b)} above.
/// The negative root is -r(b) by symmetry and is not listed.
pub fn solve_r_of_b(b: f64) -> Result<Vec<f64>> {
    if !(b >= 0.0) {
        return Err(Error::Input(format!("interaction intensity b = {b} must be >= 0")));
    }
    let mut roots = vec![0.0];
    if b <= 4.0 {
        return Ok(roots);
    }
    // any root satisfies r < b/2 because g_1 < 1; the window is padded and
    // clamped to respect the exponent guard
    let window = (2.0 * b).max(5.0).min(R_MAX - 1.0);
    let phi = |r: f64| -> Result<f64> { Ok(g1(r)? - 2.0 * r / b) };
    let scan = 200;
    let mut prev_r = 1e-6;
    let mut prev_phi = phi(prev_r)?;
    let mut found = false;
    for k in 1..=scan {
        let rk = window * k as f64 / scan as f64;
        let pk = phi(rk)?;
        if prev_phi > 0.0 && pk <= 0.0 {
            roots.push(bisect(&phi, prev_r, rk)?);
            found = true;
        }
        prev_r = rk;
        prev_phi = pk;
    }
    if !found {
        // b barely above 4: the root sits below the first scan point;
        // expand g_1(r) = r/2 - r^3/16 to seed Newton
        let mut r = (2.0 * (b - 4.0)).sqrt().max(1e-9);
        for _ in 0..200 {
            let g = g_coeffs(r, 2)?;
            let dphi = 0.5 * (1.0 + g[1]) - g[0] * g[0] - 2.0 / b;
            let step = (g[0] - 2.0 * r / b) / dphi;
            r -= step;
            if step.abs() < ROOT_TOL {
                break;
            }
        }
        if r > ROOT_TOL && r.is_finite() {
            roots.push(r);
        }
    }
    Ok(roots)
}

fn bisect(phi: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = phi(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < ROOT_TOL * 0.1 {
            return Ok(mid);
        }
        let fm = phi(mid)?;
        if (flo > 0.0) == (fm > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Inverse branch function b(r) = 2r/g_1(r); increasing, with limit 4 as
/// r -> 0+.
pub fn b_of_r(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Input(format!("r = {r} must be positive")));
    }
    Ok(2.0 * r / g1(r)?)
}

/// db/dr = (b^2 / 2r) (g_1^2 - g_2), positive along the branch.
pub fn db_dr(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Input(format!("r = {r} must be positive")));
    }
    let g = g_coeffs(r, 2)?;
    let b = 2.0 * r / g[0];
    Ok(b * b / (2.0 * r) * (g[0] * g[0] - g[1]))
}

/// The mean-field projection: K f = (1/2) y_1 cos(2 theta), returned as a
/// cosine-coefficient vector of the same length as the input.
pub fn maier_saupe_potential(y: &FourierDensity) -> Vec<f64> {
    let mut c = vec![0.0; y.truncation()];
    c[0] = 0.5 * y.coeff(1);
    c
}

/// Sweep the branch over [b_min, b_max], warm-starting each root solve from
/// the previous point.
pub fn branch_continuation(
    b_min: f64,
    b_max: f64,
    steps: usize,
    modes: usize,
) -> Result<Vec<BranchPoint>> {
    if !(b_min > 4.0) {
        return Err(Error::Input(format!(
            "b_min = {b_min} must exceed the critical intensity 4 (the branch below is trivial)"
        )));
    }
    if !(b_max > b_min) {
        return Err(Error::Input(format!("b_max = {b_max} must exceed b_min = {b_min}")));
    }
    if steps < 2 {
        return Err(Error::Input(format!("steps = {steps} must be at least 2")));
    }
    let mut points = Vec::with_capacity(steps);
    let mut warm: Option<f64> = None;
    for i in 0..steps {
        let b = b_min + (b_max - b_min) * i as f64 / (steps - 1) as f64;
        let r = match warm {
            Some(r0) => newton_root(b, r0).or_else(|_| nontrivial_root(b))?,
            None => nontrivial_root(b)?,
        };
        warm = Some(r);
        let g = g_coeffs(r, modes)?;
        let dbdr = db_dr(r)?;
        points.push(BranchPoint { b, r, g, dbdr });
    }
    Ok(points)
}

fn nontrivial_root(b: f64) -> Result<f64> {
    solve_r_of_b(b)?
        .into_iter()
        .find(|&r| r > 0.0)
        .ok_or_else(|| Error::Input(format!("no nontrivial root at b = {b}")))
}

fn newton_root(b: f64, r0: f64) -> Result<f64> {
    let mut r = r0;
    for _ in 0..60 {
        let g = g_coeffs(r.max(1e-12), 2)?;
        let phi = g[0] - 2.0 * r / b;
        let dphi = 0.5 * (1.0 + g[1]) - g[0] * g[0] - 2.0 / b;
        let step = phi / dphi;
        r -= step;
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Input(format!("warm-start Newton left the branch at b = {b}")));
        }
        if step.abs() < ROOT_TOL {
            return Ok(r);
        }
    }
    Err(Error::Input(format!("warm-start Newton stalled at b = {b}")))
}

/// Equilibrium density of the nontrivial branch at intensity b on the
/// default grid.
pub fn branch_density(b: f64, grid: &CircleGrid) -> Result<GridDensity> {
    let r = nontrivial_root(b)?;
    let vals = grid.sample(|t| (r * ((2.0 * t).cos() - 1.0)).exp());
    GridDensity::from_unnormalized(vals, grid)
}

/// Probability mass of the branch density within `halfwidth` radians of
/// {0, pi}. Approaches 1 as b grows: the zero-temperature limit is a delta
/// at theta = 0 (mod pi).
pub fn zero_temp_mass(b: f64, halfwidth: f64) -> Result<f64> {
    if !(b > 4.0) {
        return Err(Error::Input(format!(
            "zero-temperature mass needs b > 4 (got {b}); below the transition the density is uniform"
        )));
    }
    if !(halfwidth >= 0.0) {
        return Err(Error::Input(format!("halfwidth {halfwidth} must be nonnegative")));
    }
    let grid = CircleGrid::default_grid();
    let g = branch_density(b, &grid)?;
    grid.mass_within(g.values(), &[0.0, PI], halfwidth)
}
