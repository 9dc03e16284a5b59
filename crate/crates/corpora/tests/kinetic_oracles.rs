//! Oracle checks for the kinetic solvers: equilibrium identification
//! against the branch, an independent reference integrator, the
//! spectral-projection equivalence of the two routes, and the Lyapunov
//! structure of the free energy.

mod common;

use common::frozen;
use corpora::kinetics::{
    dissipation_rate, free_energy_spectral, integrate_pde, integrate_spectral,
    integrate_spectral_at, ode_rhs, pde_rhs, reconstruct, DEFAULT_KINETIC_MODES,
};
use corpora::maier_saupe::{g_coeffs, solve_r_of_b};
use corpora::{CircleGrid, GridDensity};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn seeded_state(seed: u64, modes: usize) -> Vec<f64> {
    // sum |y_j| < 1/2 keeps the reconstruction strictly positive
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=modes)
        .map(|j| 0.3 * rng.gen_range(-1.0..1.0) / (j * j) as f64)
        .collect()
}

#[test]
fn branch_point_is_equilibrium() {
    let b = 8.0;
    let r = solve_r_of_b(b).unwrap()[1];
    let g = g_coeffs(r, DEFAULT_KINETIC_MODES).unwrap();
    let rhs = ode_rhs(&g, b);
    let sup = rhs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    assert!(sup <= 1e-8, "branch point moves at rate {sup}");
}

#[test]
fn hierarchy_matches_reference_integrator() {
    // frozen state from an independent adaptive integrator at t = 1
    let mut y0 = vec![0.0; 32];
    y0[0] = 0.3;
    y0[1] = 0.1;
    let traj = integrate_spectral(&y0, 8.0, 1.0, 1e-12, 1).unwrap();
    let y = &traj.states.last().unwrap().y;
    assert!((y[0] - frozen::Y1_AT_1_B8).abs() < 1e-9, "y1 = {}", y[0]);
    assert!((y[1] - frozen::Y2_AT_1_B8).abs() < 1e-9, "y2 = {}", y[1]);
    assert!((y[2] - frozen::Y3_AT_1_B8).abs() < 1e-9, "y3 = {}", y[2]);
}

#[test]
fn supercritical_trajectory_reaches_branch() {
    let b = 8.0;
    let mut y0 = vec![0.0; DEFAULT_KINETIC_MODES];
    y0[0] = 0.1;
    let traj = integrate_spectral(&y0, b, 5.0, 1e-11, 1).unwrap();
    let y1 = traj.states.last().unwrap().y[0];
    let r = solve_r_of_b(b).unwrap()[1];
    let g1 = g_coeffs(r, 2).unwrap()[0];
    assert!((y1 - g1).abs() < 1e-6, "{y1} vs branch {g1}");
    assert!(traj.final_rhs_norm < 1e-8);
}

#[test]
fn near_equilibrium_states_solve_onsager() {
    // any state the integrator has driven to a standstill satisfies the
    // self-consistency equation on the grid
    let b = 8.0;
    let mut y0 = vec![0.0; DEFAULT_KINETIC_MODES];
    y0[0] = 0.2;
    let traj = integrate_spectral(&y0, b, 20.0, 1e-12, 1).unwrap();
    let y = &traj.states.last().unwrap().y;
    assert!(traj.final_rhs_norm < 1e-10);
    let grid = CircleGrid::default_grid();
    let f = reconstruct(y, &grid);
    let space = corpora::DiscreteCorpusSpace::circle(grid.n()).unwrap();
    let fm = GridDensity::new(f.iter().map(|&v| v * std::f64::consts::TAU).collect(), &space).unwrap();
    let res =
        corpora::energy::onsager_residual(&space, &corpora::KernelSpec::maier_saupe(), &fm, b)
            .unwrap();
    assert!(res < 1e-8, "residual {res}");
}

#[test]
fn pde_rhs_matches_hierarchy_on_projection() {
    // project the grid right-hand side onto the cosine modes and compare
    // with the hierarchy right-hand side of the projected state
    let grid = CircleGrid::new(256).unwrap();
    let modes = 16;
    let y: Vec<f64> = (1..=modes)
        .map(|j| 0.4 / (j * j) as f64 * if j % 2 == 0 { -1.0 } else { 1.0 })
        .collect();
    let f = reconstruct(&y, &grid);
    let b = 8.0;
    let rhs_grid = pde_rhs(&grid, &f, b).unwrap();
    // plain cosine projection; the rhs is not a density, so project by hand
    let w = grid.weight();
    let project = |j: usize| -> f64 {
        grid.nodes()
            .iter()
            .zip(&rhs_grid)
            .map(|(&t, &v)| v * (2.0 * j as f64 * t).cos())
            .sum::<f64>()
            * w
    };
    let rhs_ode = ode_rhs(&y, b);
    for j in 1..=modes {
        let got = project(j);
        assert!(
            (got - rhs_ode[j - 1]).abs() < 1e-8,
            "mode {j}: {got} vs {}",
            rhs_ode[j - 1]
        );
    }
}

#[test]
fn dual_solvers_agree() {
    // identical initial data through both routes
    let b = 8.0;
    let mut y0 = vec![0.0; 32];
    y0[0] = 0.3;
    y0[1] = 0.1;
    let grid = CircleGrid::new(256).unwrap();
    let f0 = GridDensity::new(reconstruct(&y0, &grid), &grid).unwrap();

    let spec = integrate_spectral(&y0, b, 1.0, 1e-11, 1).unwrap();
    let pde = integrate_pde(&grid, &f0, b, &[1.0], 1e-3).unwrap();

    let f_spec = reconstruct(&spec.states.last().unwrap().y, &grid);
    let f_pde = &pde.states.last().unwrap().f;
    let gap = f_spec
        .iter()
        .zip(f_pde)
        .map(|(a, c)| (a - c).abs())
        .fold(0.0f64, f64::max);
    assert!(gap < 1e-4, "L-inf distance {gap}");
    assert!(pde.max_mass_drift < 1e-8);
}

#[test]
fn pde_relaxes_to_branch_density() {
    let b = 8.0;
    let grid = CircleGrid::new(256).unwrap();
    let vals: Vec<f64> = grid.sample(|t| {
        (1.0 + 0.05 * (2.0 * t).cos()) / std::f64::consts::TAU
    });
    let f0 = GridDensity::from_unnormalized(vals, &grid).unwrap();
    let traj = integrate_pde(&grid, &f0, b, &[8.0], 1e-3).unwrap();
    let branch = corpora::maier_saupe::branch_density(b, &grid).unwrap();
    let gap = traj
        .states
        .last()
        .unwrap()
        .f
        .iter()
        .zip(branch.values())
        .map(|(a, c)| (a - c).abs())
        .fold(0.0f64, f64::max);
    assert!(gap < 1e-4, "L-inf gap to branch {gap}");
}

#[test]
fn free_energy_non_increasing_along_random_trajectories() {
    for seed in 0..4u64 {
        for &b in &[3.0, 8.0] {
            let y0 = seeded_state(seed, 24);
            let traj = integrate_spectral(&y0, b, 2.0, 1e-10, 50).unwrap();
            let mut prev = f64::INFINITY;
            for s in &traj.states {
                let e = free_energy_spectral(&s.y, b).unwrap();
                assert!(
                    e <= prev + 1e-9,
                    "energy rose at t = {} (seed {seed}, b = {b})",
                    s.t
                );
                prev = e;
            }
        }
    }
}

#[test]
fn dissipation_matches_energy_slope() {
    let b = 8.0;
    let y0 = seeded_state(3, 24);
    let t0 = 0.1;
    let delta = 1e-3;
    let traj = integrate_spectral_at(&y0, b, &[t0 - delta, t0, t0 + delta], 1e-12).unwrap();
    let e_minus = free_energy_spectral(&traj.states[0].y, b).unwrap();
    let e_plus = free_energy_spectral(&traj.states[2].y, b).unwrap();
    let slope = (e_plus - e_minus) / (2.0 * delta);
    let d = dissipation_rate(&traj.states[1].y, b).unwrap();
    assert!(d < 0.0, "transient should dissipate, d = {d}");
    assert!(
        (slope - d).abs() <= 1e-3 * d.abs(),
        "slope {slope} vs dissipation {d}"
    );
}

#[test]
fn dissipation_vanishes_at_equilibrium() {
    let b = 8.0;
    let r = solve_r_of_b(b).unwrap()[1];
    let g = g_coeffs(r, DEFAULT_KINETIC_MODES).unwrap();
    let d = dissipation_rate(&g, b).unwrap();
    assert!(d.abs() < 1e-8, "dissipation at branch point: {d}");
    // and the branch free energy sits below the uniform level
    let e_branch = free_energy_spectral(&g, b).unwrap();
    let e_uniform = free_energy_spectral(&vec![0.0; DEFAULT_KINETIC_MODES], b).unwrap();
    assert!(e_branch < e_uniform);
}
