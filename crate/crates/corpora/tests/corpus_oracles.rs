//! Oracle checks for the general solver: brute-force simplex search on
//! small spaces, product composition, the sublinear ball-energy bound, and
//! agreement between the two solver routes.

mod common;

use common::simplex_grid_min;
use corpora::corpus::{
    ball_indicator_energy, concentration_report, fixed_point_solve, minimize_energy,
    product_compose, product_residual, sum_kernel_potential, CorpusProblem, InitDensity,
    ProductSpace, SolveReport,
};
use corpora::energy::free_energy;
use corpora::maier_saupe::zero_temp_mass;
use corpora::{DiscreteCorpusSpace, GridDensity, KernelSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random metric space from points in the plane (Euclidean distances obey
/// the triangle inequality by construction).
fn random_space(m: usize, seed: u64) -> DiscreteCorpusSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..m)
        .map(|_| (2.0 * rng.gen_range(0.0..1.0), 2.0 * rng.gen_range(0.0..1.0)))
        .collect();
    let dist: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let dx = pts[i].0 - pts[j].0;
                    let dy = pts[i].1 - pts[j].1;
                    (dx * dx + dy * dy).sqrt()
                })
                .collect()
        })
        .collect();
    let w: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = w.iter().sum();
    let mu = w.into_iter().map(|x| x / total).collect();
    DiscreteCorpusSpace::new(dist, mu, None).unwrap()
}

#[test]
fn minimizer_not_beaten_by_grid_search() {
    let b = 3.0;
    for (m, seed) in [(4usize, 7u64), (5, 11), (6, 13)] {
        let space = random_space(m, seed);
        let kernel = KernelSpec::distance_pow(1.0, space.diameter()).unwrap();
        let problem = CorpusProblem::new(space.clone(), kernel, b).unwrap();
        let report = minimize_energy(&problem, 1e-11, 20_000, &InitDensity::SeededPerturbation(1)).unwrap();
        assert!(report.converged, "m = {m} did not converge");
        let mut dist_flat = Vec::with_capacity(m * m);
        for i in 0..m {
            dist_flat.extend_from_slice(space.dist_row(i));
        }
        let grid_best = simplex_grid_min(&dist_flat, space.weights(), |d| d, b, 0.02);
        assert!(
            grid_best >= report.energy - 1e-2,
            "m = {m}: grid found {grid_best}, solver {}",
            report.energy
        );
    }
}

#[test]
fn solver_routes_agree() {
    // fixed point and energy descent land on the same density
    let space = DiscreteCorpusSpace::circle(64).unwrap();
    let kernel = KernelSpec::maier_saupe();
    let problem = CorpusProblem::new(space, kernel, 8.0).unwrap();
    let tol_fp = 1e-10;
    let tol_min = 1e-11;
    let fp = fixed_point_solve(&problem, 0.5, tol_fp, 20_000, &InitDensity::SeededPerturbation(5)).unwrap();
    let mn = minimize_energy(&problem, tol_min, 20_000, &InitDensity::SeededPerturbation(5)).unwrap();
    assert!(fp.converged && mn.converged);
    let gap = fp.density.linf_distance(&mn.density);
    assert!(gap <= 10.0 * (tol_fp + tol_min), "gap {gap}");
}

#[test]
fn sublinear_ball_energy_versus_linear_uniform() {
    // on a 512-node circle with u(d) = d, the best radius-1/b ball
    // indicator has E/b decreasing while E[1]/b stays constant
    let space = DiscreteCorpusSpace::circle(512).unwrap();
    let kernel = KernelSpec::distance_pow(1.0, space.diameter()).unwrap();
    let uniform = GridDensity::uniform(&space);
    let mut prev_ratio = f64::INFINITY;
    let mut uniform_ratios = Vec::new();
    for &b in &[10.0, 100.0, 1000.0] {
        let problem = CorpusProblem::new(space.clone(), kernel.clone(), b).unwrap();
        let best = (0..space.m())
            .map(|c| ball_indicator_energy(&problem, c, 1.0 / b).unwrap())
            .fold(f64::INFINITY, f64::min);
        let ratio = best / b;
        assert!(ratio < prev_ratio, "E[chi]/b not decreasing at b = {b}");
        prev_ratio = ratio;
        uniform_ratios.push(free_energy(&space, &kernel, &uniform, b).unwrap() / b);
    }
    for w in uniform_ratios.windows(2) {
        assert!((w[0] - w[1]).abs() < 1e-12, "E[1]/b drifted: {w:?}");
    }
}

#[test]
fn product_of_converged_circles() {
    let b = 8.0;
    let n = 64;
    let space = DiscreteCorpusSpace::circle(n).unwrap();
    let kernel = KernelSpec::maier_saupe();
    let problem = CorpusProblem::new(space.clone(), kernel.clone(), b).unwrap();
    let init: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.05 * (2.0 * std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect();
    let init = GridDensity::from_unnormalized(init, &space).unwrap();
    let report =
        fixed_point_solve(&problem, 0.5, 1e-11, 20_000, &InitDensity::Explicit(init)).unwrap();
    assert!(report.converged);

    let product = ProductSpace::new(vec![space.clone(), space.clone()]).unwrap();
    let composite = product_compose(&product, &[&report, &report]).unwrap();
    let res = product_residual(&product, &[kernel.clone(), kernel.clone()], &composite, b).unwrap();
    assert!(res <= 1e-8, "composite residual {res}");

    // marginals recover the factors
    for k in 0..2 {
        let marg = product.marginal_mass(&composite, k).unwrap();
        for (i, &mm) in marg.iter().enumerate() {
            let want = report.density.values()[i] * space.mu(i);
            assert!((mm - want).abs() < 1e-10, "marginal {k} node {i}");
        }
    }

    // the sum-kernel potential of a product density splits per component:
    // U(i,j) - U(i,0) is independent of i
    let u = sum_kernel_potential(&product, &[kernel.clone(), kernel], &composite).unwrap();
    for j in [1usize, 5, 20] {
        let base = u[j] - u[0];
        for i in [1usize, 13, 40] {
            let diff = u[i * n + j] - u[i * n];
            assert!((diff - base).abs() < 1e-12, "potential does not split at ({i},{j})");
        }
    }
}

#[test]
fn composite_zero_temperature_masses_factor() {
    // component concentration masses multiply for the product density
    let b = 128.0;
    let grid_mass = zero_temp_mass(b, 0.15).unwrap();
    let n = 128;
    let space = DiscreteCorpusSpace::circle(n).unwrap();
    let problem = CorpusProblem::new(space.clone(), KernelSpec::maier_saupe(), b).unwrap();
    let init: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.05 * (2.0 * std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect();
    let init = GridDensity::from_unnormalized(init, &space).unwrap();
    let report = fixed_point_solve(&problem, 0.5, 1e-10, 20_000, &InitDensity::Explicit(init)).unwrap();
    assert!(report.converged);
    let product = ProductSpace::new(vec![space.clone(), space.clone()]).unwrap();
    let composite = product_compose(&product, &[&report, &report]).unwrap();

    // mass of the composite on the window product
    let window: Vec<bool> = (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            let d0 = t.min(std::f64::consts::TAU - t);
            let dpi = (t - std::f64::consts::PI).abs();
            d0.min(dpi) <= 0.15
        })
        .collect();
    let mut joint = 0.0;
    let mut single = 0.0;
    for i in 0..n {
        if window[i] {
            single += report.density.values()[i] * space.mu(i);
        }
        for j in 0..n {
            if window[i] && window[j] {
                joint += composite[i * n + j] * product.mu(i * n + j);
            }
        }
    }
    assert!(
        (joint - single * single).abs() < 1e-10,
        "joint {joint} vs factored {}",
        single * single
    );
    // consistent with the spectral route's mass at the same b; the window
    // edge quantizes to each grid's spacing (n = 128 here vs 256 there)
    assert!((single - grid_mass).abs() < 1.5e-2, "{single} vs {grid_mass}");
}

#[test]
fn concentration_masses_track_zero_temp_limit() {
    let n = 256;
    let space = DiscreteCorpusSpace::circle(n).unwrap();
    let kernel = KernelSpec::maier_saupe();
    let mut reports: Vec<(f64, SolveReport)> = Vec::new();
    for &b in &[8.0, 32.0, 128.0] {
        let problem = CorpusProblem::new(space.clone(), kernel.clone(), b).unwrap();
        let init: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.05 * (2.0 * std::f64::consts::TAU * i as f64 / n as f64).cos())
            .collect();
        let init = GridDensity::from_unnormalized(init, &space).unwrap();
        let r = fixed_point_solve(&problem, 0.5, 1e-10, 20_000, &InitDensity::Explicit(init)).unwrap();
        assert!(r.converged, "b = {b}");
        reports.push((b, r));
    }
    let problem = CorpusProblem::new(space, kernel, 128.0).unwrap();
    let pairs: Vec<(f64, &SolveReport)> = reports.iter().map(|(b, r)| (*b, r)).collect();
    // eps tuned so Sigma is about +-0.15 rad around {0, pi}: the potential
    // is 1/2 - (y1/2) cos 2 theta, so eps = (y1/2)(1 - cos 0.3)
    let y1 = 0.9899;
    let eps = 0.5 * y1 * (1.0 - (0.3f64).cos());
    let conc = concentration_report(&problem, &pairs, eps).unwrap();
    assert!(!conc.degenerate);
    for w in conc.mass_on_sigma.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "masses not non-decreasing");
    }
    // mass within +-0.15 rad at b = 128 is 0.9890 (2.39-sigma window);
    // the real check is agreement with the spectral route on the same grid
    let last = *conc.mass_on_sigma.last().unwrap();
    let reference = zero_temp_mass(128.0, 0.15).unwrap();
    assert!(last >= 0.98, "mass {last}");
    assert!((last - reference).abs() < 1e-6, "{last} vs {reference}");

    // test-function decay: mass off Sigma shrinks with b
    let mut off_masses = Vec::new();
    for (_, r) in &reports {
        let mut off = 0.0;
        for i in 0..conc.u_inf.len() {
            if !conc.sigma_set.contains(&i) {
                off += r.density.values()[i] / n as f64;
            }
        }
        off_masses.push(off);
    }
    for w in off_masses.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "off-Sigma mass grew: {off_masses:?}");
    }
}
