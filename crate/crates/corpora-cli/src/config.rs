//! TOML problem configuration for the general solver commands.

use anyhow::{bail, Context, Result};
use corpora::{DiscreteCorpusSpace, KernelSpec};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub space: SpaceCfg,
    pub kernel: KernelCfg,
    pub solve: SolveCfg,
    #[serde(default)]
    pub output: OutputCfg,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceCfg {
    /// "circle", "file", or "inline".
    pub kind: String,
    pub n: Option<usize>,
    pub path: Option<PathBuf>,
    pub dist: Option<Vec<Vec<f64>>>,
    pub mu: Option<Vec<f64>>,
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCfg {
    pub name: String,
    /// Exponent for distance_p.
    pub p: Option<f64>,
    /// Length for gaussian_well.
    pub l: Option<f64>,
    /// Optional additive constant (for shift experiments).
    pub shift: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveCfg {
    pub b: Vec<f64>,
    /// "fixed-point" (default) or "minimize".
    pub solver: Option<String>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub seed: Option<u64>,
    /// Width of the near-minimum set in the concentration report.
    pub eps_sigma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputCfg {
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: Config = toml::from_str(&text).context("config does not parse")?;
        if cfg.solve.b.is_empty() {
            bail!("solve.b must list at least one intensity");
        }
        for w in cfg.solve.b.windows(2) {
            if w[1] <= w[0] {
                bail!("solve.b must be strictly increasing");
            }
        }
        Ok(cfg)
    }

    pub fn build_space(&self, validate: bool) -> Result<DiscreteCorpusSpace> {
        let s = &self.space;
        let space = match s.kind.as_str() {
            "circle" => {
                let n = s.n.context("space.kind = \"circle\" needs space.n")?;
                DiscreteCorpusSpace::circle(n)?
            }
            "file" => {
                let path = s
                    .path
                    .as_ref()
                    .context("space.kind = \"file\" needs space.path")?;
                DiscreteCorpusSpace::from_file(path)?
            }
            "inline" => {
                let dist = s
                    .dist
                    .clone()
                    .context("space.kind = \"inline\" needs space.dist")?;
                let mu = s.mu.clone().context("space.kind = \"inline\" needs space.mu")?;
                DiscreteCorpusSpace::new(dist, mu, s.labels.clone())?
            }
            other => bail!("unknown space.kind '{other}'"),
        };
        if validate {
            space.validate_triangle()?;
        }
        Ok(space)
    }

    pub fn build_kernel(&self, space: &DiscreteCorpusSpace) -> Result<KernelSpec> {
        let k = &self.kernel;
        let param = match k.name.as_str() {
            "distance_p" => k.p,
            "gaussian_well" => k.l,
            _ => None,
        };
        let mut kernel = KernelSpec::by_name(&k.name, param, space.diameter().max(1e-12))?;
        if let Some(c) = k.shift {
            kernel = kernel.shifted(c);
        }
        kernel.conforms(space)?;
        Ok(kernel)
    }
}
