//! Command-line driver for the solver suite: branch continuation, kinetic
//! integration, the two-rod model, and the general corpus solver.
//!
//! Exit codes: 0 success, 1 runtime or solver failure, 2 usage or
//! validation failure.

mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use config::Config;
use corpora::corpus::{
    concentration_report, fixed_point_solve, minimize_energy, CorpusProblem, InitDensity,
    SolveReport,
};
use corpora::kinetics::{
    dissipation_rate, free_energy_spectral, integrate_pde, integrate_spectral, reconstruct,
    DEFAULT_KINETIC_MODES,
};
use corpora::maier_saupe::branch_continuation;
use corpora::two_rod::lambda_fn;
use corpora::two_rod::solve as two_rod_solve;
use corpora::{CircleGrid, GridDensity};
use output::{fmt_num, Report};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "corpora", version, about = "Mean-field equilibrium and kinetic solvers for corpora on metric configuration spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Output file; stdout when omitted
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for report-style commands
    #[arg(long, global = true, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Seed for symmetry-breaking initializations
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Circle grid size where a grid is needed
    #[arg(long = "grid-n", global = true, default_value_t = corpora::DEFAULT_GRID_N)]
    grid_n: usize,
    /// Fourier mode count
    #[arg(long = "modes-J", global = true, default_value_t = corpora::DEFAULT_MODES)]
    modes_j: usize,
    /// Solver tolerance override
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Force the O(m^3) triangle-inequality validation on large spaces
    #[arg(long, global = true)]
    validate: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sweep the nematic branch over an intensity range
    MsBranch {
        /// Range min:max:steps with b_min > 4
        #[arg(long)]
        b: String,
    },
    /// Integrate the kinetic hierarchy (or the grid PDE with --pde)
    Kinetics {
        #[arg(long)]
        b: f64,
        /// Initial first-mode amplitude
        #[arg(long, default_value_t = 0.1)]
        y1: f64,
        #[arg(long = "t-end")]
        t_end: f64,
        /// Number of output samples
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Run the grid PDE instead and emit theta, f snapshots
        #[arg(long)]
        pde: bool,
    },
    /// Solve the two-rod model at a list of intensities
    TwoRod {
        /// Comma-separated intensities, e.g. 10,50,200
        #[arg(long)]
        b: Option<String>,
        /// Dump the lambda surface instead: z range min:max:steps
        #[arg(long = "lambda-z")]
        lambda_z: Option<String>,
        /// tau range min:max:steps for the surface dump
        #[arg(long = "lambda-tau")]
        lambda_tau: Option<String>,
    },
    /// Run the general solver from a TOML problem config
    Corpus {
        #[arg(long)]
        config: PathBuf,
    },
    /// Concentration diagnostics across the config's intensity list
    Concentrate {
        #[arg(long)]
        config: PathBuf,
        /// Width of the near-minimum potential set
        #[arg(long)]
        eps: Option<f64>,
    },
}

struct Failure {
    code: u8,
    msg: String,
}

impl From<corpora::Error> for Failure {
    fn from(e: corpora::Error) -> Self {
        use corpora::Error::*;
        let code = match &e {
            Input(_) | Parse(_) | Budget(_) => 2,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        // config and validation problems
        Failure { code: 2, msg: format!("{e:#}") }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, msg: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

/// Parse a plain decimal float (no exponent notation), per the sweep syntax.
fn parse_decimal(s: &str) -> Result<f64, Failure> {
    let core = s.strip_prefix('-').unwrap_or(s);
    let ok = !core.is_empty()
        && core.chars().all(|c| c.is_ascii_digit() || c == '.')
        && core.chars().filter(|&c| c == '.').count() <= 1
        && core.chars().any(|c| c.is_ascii_digit());
    if !ok {
        return Err(Failure {
            code: 2,
            msg: format!("'{s}' is not a plain decimal number"),
        });
    }
    s.parse::<f64>().map_err(|e| Failure {
        code: 2,
        msg: format!("'{s}': {e}"),
    })
}

/// min:max:steps sweep specification.
fn parse_range(s: &str) -> Result<(f64, f64, usize), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Failure {
            code: 2,
            msg: format!("range '{s}' must be min:max:steps"),
        });
    }
    let lo = parse_decimal(parts[0])?;
    let hi = parse_decimal(parts[1])?;
    let steps: usize = parts[2].parse().map_err(|_| Failure {
        code: 2,
        msg: format!("steps '{}' must be a positive integer", parts[2]),
    })?;
    if steps == 0 {
        return Err(Failure { code: 2, msg: "steps must be positive".into() });
    }
    Ok((lo, hi, steps))
}

fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(|t| parse_decimal(t.trim())).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::MsBranch { b } => cmd_ms_branch(g, b),
        Cmd::Kinetics { b, y1, t_end, samples, pde } => {
            cmd_kinetics(g, *b, *y1, *t_end, *samples, *pde)
        }
        Cmd::TwoRod { b, lambda_z, lambda_tau } => {
            cmd_two_rod(g, b.as_deref(), lambda_z.as_deref(), lambda_tau.as_deref())
        }
        Cmd::Corpus { config } => cmd_corpus(g, config, None),
        Cmd::Concentrate { config, eps } => cmd_corpus(g, config, Some(eps.unwrap_or(0.05))),
    }
}

fn cmd_ms_branch(g: &Global, range: &str) -> Result<(), Failure> {
    let (b_min, b_max, steps) = parse_range(range)?;
    let modes = g.modes_j;
    let points = branch_continuation(b_min, b_max, steps, modes)?;
    let params = format!("cmd=ms-branch b={range} modes_j={modes}");
    let mut rep = Report::new(g.seed, &params);
    if g.format == "json" {
        let rows: Vec<serde_json::Value> = points
            .iter()
            .map(|p| {
                serde_json::json!({
                    "b": p.b, "r": p.r, "g": p.g, "dbdr": p.dbdr,
                })
            })
            .collect();
        rep.line(&serde_json::to_string_pretty(&rows).expect("serializable"));
    } else {
        let mut header = vec!["b".to_string(), "r".to_string()];
        header.extend((1..=modes).map(|j| format!("g{j}")));
        header.push("dbdr".to_string());
        rep.csv_row(&header);
        for p in &points {
            let mut row = vec![fmt_num(p.b), fmt_num(p.r)];
            row.extend(p.g.iter().map(|&v| fmt_num(v)));
            row.push(fmt_num(p.dbdr));
            rep.csv_row(&row);
        }
    }
    rep.write(g.out.as_deref())?;
    Ok(())
}

fn cmd_kinetics(
    g: &Global,
    b: f64,
    y1: f64,
    t_end: f64,
    samples: usize,
    pde: bool,
) -> Result<(), Failure> {
    let tol = g.tol.unwrap_or(1e-10);
    let params =
        format!("cmd=kinetics b={b} y1={y1} t_end={t_end} samples={samples} pde={pde} tol={tol:e}");
    let mut rep = Report::new(g.seed, &params);
    if pde {
        let grid = CircleGrid::new(g.grid_n)?;
        let mut y0 = vec![0.0; DEFAULT_KINETIC_MODES.min(grid.n() / 4)];
        y0[0] = y1;
        let f0 = GridDensity::new(reconstruct(&y0, &grid), &grid)?;
        let times: Vec<f64> = (1..=samples.max(1))
            .map(|i| t_end * i as f64 / samples.max(1) as f64)
            .collect();
        let traj = integrate_pde(&grid, &f0, b, &times, 1e-3)?;
        rep.csv_row(&["t".into(), "theta".into(), "f".into()]);
        for s in &traj.states {
            for (i, &v) in s.f.iter().enumerate() {
                rep.csv_row(&[fmt_num(s.t), fmt_num(grid.node(i)), fmt_num(v)]);
            }
        }
    } else {
        let modes = if g.modes_j == corpora::DEFAULT_MODES {
            DEFAULT_KINETIC_MODES
        } else {
            g.modes_j
        };
        let mut y0 = vec![0.0; modes];
        y0[0] = y1;
        let traj = integrate_spectral(&y0, b, t_end, tol, samples)?;
        let mut header = vec!["t".into(), "E".into(), "dissipation".into()];
        header.extend((1..=modes).map(|j| format!("y{j}")));
        rep.csv_row(&header);
        for s in &traj.states {
            let e = free_energy_spectral(&s.y, b)?;
            let d = dissipation_rate(&s.y, b)?;
            let mut row = vec![fmt_num(s.t), fmt_num(e), fmt_num(d)];
            row.extend(s.y.iter().map(|&v| fmt_num(v)));
            rep.csv_row(&row);
        }
    }
    rep.write(g.out.as_deref())?;
    Ok(())
}

fn cmd_two_rod(
    g: &Global,
    b_list: Option<&str>,
    lambda_z: Option<&str>,
    lambda_tau: Option<&str>,
) -> Result<(), Failure> {
    match (lambda_z, lambda_tau) {
        (Some(zr), Some(tr)) => {
            let (z0, z1, nz) = parse_range(zr)?;
            let (t0, t1, nt) = parse_range(tr)?;
            let params = format!("cmd=two-rod lambda_z={zr} lambda_tau={tr}");
            let mut rep = Report::new(g.seed, &params);
            rep.csv_row(&["z".into(), "tau".into(), "lambda".into()]);
            for i in 0..nz {
                let z = if nz == 1 { z0 } else { z0 + (z1 - z0) * i as f64 / (nz - 1) as f64 };
                for j in 0..nt {
                    let tau =
                        if nt == 1 { t0 } else { t0 + (t1 - t0) * j as f64 / (nt - 1) as f64 };
                    rep.csv_row(&[fmt_num(z), fmt_num(tau), fmt_num(lambda_fn(z, tau)?)]);
                }
            }
            rep.write(g.out.as_deref())?;
            Ok(())
        }
        (None, None) => {
            let list = b_list.ok_or(Failure {
                code: 2,
                msg: "two-rod needs --b or a lambda surface range pair".into(),
            })?;
            let bs = parse_list(list)?;
            let params = format!("cmd=two-rod b={list}");
            let mut rep = Report::new(g.seed, &params);
            rep.csv_row(&["b".into(), "z_root".into(), "gamma".into(), "energy".into()]);
            for &b in &bs {
                for sol in two_rod_solve(b)? {
                    rep.csv_row(&[
                        fmt_num(sol.b),
                        fmt_num(sol.z),
                        fmt_num(sol.gamma),
                        fmt_num(sol.energy),
                    ]);
                }
            }
            rep.write(g.out.as_deref())?;
            Ok(())
        }
        _ => Err(Failure {
            code: 2,
            msg: "lambda surface needs both --lambda-z and --lambda-tau".into(),
        }),
    }
}

fn cmd_corpus(g: &Global, config_path: &PathBuf, concentrate_eps: Option<f64>) -> Result<(), Failure> {
    let cfg = Config::load(config_path)?;
    let space = cfg.build_space(g.validate)?;
    let kernel = cfg.build_kernel(&space)?;
    let tol = cfg.solve.tol.or(g.tol).unwrap_or(1e-9);
    let max_iter = cfg.solve.max_iter.unwrap_or(20_000);
    let damping = cfg.solve.damping.unwrap_or(0.5);
    let seed = cfg.solve.seed.unwrap_or(g.seed);
    let solver = cfg.solve.solver.as_deref().unwrap_or("fixed-point");
    let eps_sigma = concentrate_eps.or(cfg.solve.eps_sigma).unwrap_or(0.05);
    if concentrate_eps.is_some() && cfg.solve.b.len() < 2 {
        return Err(Failure {
            code: 2,
            msg: "concentrate needs at least two intensities in solve.b".into(),
        });
    }

    // the ball-of-radius-1/b argument saturates below the mesh scale
    let mesh = {
        let mut m = f64::INFINITY;
        for i in 0..space.m() {
            for j in 0..space.m() {
                let d = space.dist(i, j);
                if d > 0.0 {
                    m = m.min(d);
                }
            }
        }
        m
    };
    for &b in &cfg.solve.b {
        if mesh.is_finite() && b > 1.0 / mesh {
            eprintln!(
                "warning: b = {b} exceeds 1/mesh = {:.3}; balls of radius 1/b saturate at single nodes",
                1.0 / mesh
            );
        }
    }

    let mut reports: Vec<(f64, SolveReport)> = Vec::new();
    for &b in &cfg.solve.b {
        let problem = CorpusProblem::new(space.clone(), kernel.clone(), b)?;
        let init = InitDensity::SeededPerturbation(seed);
        let r = match solver {
            "fixed-point" => fixed_point_solve(&problem, damping, tol, max_iter, &init)?,
            "minimize" => minimize_energy(&problem, tol, max_iter, &init)?,
            other => {
                return Err(Failure {
                    code: 2,
                    msg: format!("unknown solver '{other}' (use fixed-point or minimize)"),
                })
            }
        };
        reports.push((b, r));
    }

    let conc = if cfg.solve.b.len() >= 2 {
        let problem = CorpusProblem::new(
            space.clone(),
            kernel.clone(),
            *cfg.solve.b.last().expect("nonempty"),
        )?;
        let pairs: Vec<(f64, &SolveReport)> = reports.iter().map(|(b, r)| (*b, r)).collect();
        Some(concentration_report(&problem, &pairs, eps_sigma)?)
    } else {
        None
    };

    let params = format!(
        "cmd={} config={} solver={solver} tol={tol:e} damping={damping} eps_sigma={eps_sigma}",
        if concentrate_eps.is_some() { "concentrate" } else { "corpus" },
        config_path.display()
    );

    // flat CSV summary
    let mut rep = Report::new(seed, &params);
    rep.csv_row(&[
        "b".into(),
        "residual".into(),
        "energy".into(),
        "mass_on_sigma".into(),
        "iterations".into(),
    ]);
    for (i, (b, r)) in reports.iter().enumerate() {
        let mass = conc
            .as_ref()
            .map(|c| fmt_num(c.mass_on_sigma[i]))
            .unwrap_or_default();
        rep.csv_row(&[
            fmt_num(*b),
            fmt_num(r.residual),
            fmt_num(r.energy),
            mass,
            r.iterations.to_string(),
        ]);
    }
    let csv_text = rep.into_string();

    // JSON records
    let records: Vec<serde_json::Value> = reports
        .iter()
        .map(|(b, r)| {
            serde_json::json!({
                "b": b,
                "residual": r.residual,
                "energy": r.energy,
                "iterations": r.iterations,
                "converged": r.converged,
                "seed": r.seed,
                "density": r.density.values(),
            })
        })
        .collect();
    let json_doc = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "params": params,
        "reports": records,
        "concentration": conc.as_ref().map(|c| serde_json::json!({
            "sigma_set": c.sigma_set,
            "min_potential": c.min_u,
            "mass_on_sigma": c.mass_on_sigma,
            "potential_gaps": c.potential_gaps,
            "degenerate": c.degenerate,
        })),
    });

    if let Some(path) = &cfg.output.json {
        std::fs::write(path, serde_json::to_string_pretty(&json_doc).expect("serializable"))?;
    }
    if let Some(path) = &cfg.output.csv {
        std::fs::write(path, &csv_text)?;
    }
    match g.out.as_deref() {
        Some(path) => std::fs::write(path, &csv_text)?,
        None => {
            if g.format == "json" {
                println!("{}", serde_json::to_string_pretty(&json_doc).expect("serializable"));
            } else {
                print!("{csv_text}");
            }
        }
    }

    if reports.iter().any(|(_, r)| !r.converged) {
        return Err(Failure {
            code: 1,
            msg: "one or more solves did not converge (see reports)".into(),
        });
    }
    Ok(())
}
