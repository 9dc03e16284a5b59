//! Finite metric measure spaces: the discretized configuration spaces the
//! general solver runs on.

use crate::density::MeasureSpace;
use crate::error::{Error, Result};
use crate::util::kahan_sum;
use std::f64::consts::TAU;
use std::path::Path;

/// Symmetry / triangle-inequality tolerance used at load time.
const METRIC_TOL: f64 = 1e-9;
/// Weight-normalization tolerance.
const WEIGHT_TOL: f64 = 1e-12;
/// Beyond this size the O(m^3) triangle check is opt-in.
pub const TRIANGLE_AUTO_LIMIT: usize = 512;

/// A finite metric measure space: m points, a symmetric distance matrix with
/// zero diagonal, and positive weights summing to 1.
///
/// Distances may vanish off the diagonal (pseudometrics are accepted); all
/// the estimates used here need symmetry and the triangle inequality only.
#[derive(Debug, Clone)]
pub struct DiscreteCorpusSpace {
    m: usize,
    dist: Vec<f64>, // row-major m x m
    mu: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl DiscreteCorpusSpace {
    pub fn new(dist_rows: Vec<Vec<f64>>, mu: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        let m = dist_rows.len();
        let mut flat = Vec::with_capacity(m * m);
        for row in &dist_rows {
            if row.len() != m {
                return Err(Error::Input(format!(
                    "distance matrix is not square: row of length {} in a {}-point space",
                    row.len(),
                    m
                )));
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(m, flat, mu, labels)
    }

    pub fn from_flat(m: usize, dist: Vec<f64>, mu: Vec<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Input("space needs at least one point".into()));
        }
        if dist.len() != m * m {
            return Err(Error::Input(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                m * m
            )));
        }
        if mu.len() != m {
            return Err(Error::Input(format!("{} weights for {} points", mu.len(), m)));
        }
        if let Some(ref l) = labels {
            if l.len() != m {
                return Err(Error::Input(format!("{} labels for {} points", l.len(), m)));
            }
        }
        for i in 0..m {
            if dist[i * m + i] != 0.0 {
                return Err(Error::Input(format!("nonzero diagonal at point {i}")));
            }
            for j in 0..m {
                let d = dist[i * m + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Input(format!("invalid distance {d} at ({i},{j})")));
                }
                let e = dist[j * m + i];
                if (d - e).abs() > METRIC_TOL {
                    return Err(Error::Input(format!(
                        "distance matrix not symmetric at ({i},{j}): {d} vs {e}"
                    )));
                }
            }
        }
        for (i, &w) in mu.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Input(format!("weight {w} at point {i} is not positive")));
            }
        }
        let total = kahan_sum(mu.iter().copied());
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Input(format!(
                "weights sum to {total:.15}, expected 1 within {WEIGHT_TOL:e}"
            )));
        }
        let space = DiscreteCorpusSpace { m, dist, mu, labels };
        if m <= TRIANGLE_AUTO_LIMIT {
            space.validate_triangle()?;
        }
        Ok(space)
    }

    /// Equispaced circle with arc-length distance and uniform weights.
    pub fn circle(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Input(format!("circle space needs at least 2 points, got {n}")));
        }
        let step = TAU / n as f64;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i.abs_diff(j);
                dist[i * n + j] = step * k.min(n - k) as f64;
            }
        }
        let mu = vec![1.0 / n as f64; n];
        Ok(DiscreteCorpusSpace {
            m: n,
            dist,
            mu,
            labels: None,
        })
    }

    /// O(m^3) triangle-inequality check; automatic for m <= 512, opt-in above.
    pub fn validate_triangle(&self) -> Result<()> {
        let m = self.m;
        for j in 0..m {
            for i in 0..m {
                let dij = self.dist[i * m + j];
                for k in 0..m {
                    if self.dist[i * m + k] > dij + self.dist[j * m + k] + METRIC_TOL {
                        return Err(Error::Input(format!(
                            "triangle inequality fails for ({i},{j},{k}): {} > {} + {}",
                            self.dist[i * m + k],
                            dij,
                            self.dist[j * m + k]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Parse the plain-text space format.
    ///
    /// Tokens separated by whitespace or commas, `#` starts a comment.
    /// Layout: point count m, then optionally m labels, then the m*m
    /// distance matrix row-major, then m weights. Labels are detected from
    /// the token count, so purely numeric labels are allowed.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(|l| l.split([' ', '\t', ',']))
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            return Err(Error::Parse("empty space file".into()));
        }
        let m: usize = tokens[0]
            .parse()
            .map_err(|_| Error::Parse(format!("point count '{}' is not an integer", tokens[0])))?;
        let rest = &tokens[1..];
        let (labels, numeric) = if rest.len() == m * m + m {
            (None, rest)
        } else if rest.len() == m * m + 2 * m {
            (
                Some(rest[..m].iter().map(|s| s.to_string()).collect()),
                &rest[m..],
            )
        } else {
            return Err(Error::Parse(format!(
                "expected {} or {} tokens after the point count, found {}",
                m * m + m,
                m * m + 2 * m,
                rest.len()
            )));
        };
        let mut values = Vec::with_capacity(numeric.len());
        for t in numeric {
            values.push(
                t.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("'{t}' is not a number")))?,
            );
        }
        let dist = values[..m * m].to_vec();
        let mu = values[m * m..].to_vec();
        Self::from_flat(m, dist, mu, labels)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.m + j]
    }

    pub fn dist_row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.m..(i + 1) * self.m]
    }

    pub fn mu(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.mu
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Indices of the closed ball B(center, radius).
    pub fn ball(&self, center: usize, radius: f64) -> Vec<usize> {
        (0..self.m)
            .filter(|&j| self.dist(center, j) <= radius)
            .collect()
    }

    pub fn ball_measure(&self, center: usize, radius: f64) -> f64 {
        self.ball(center, radius).iter().map(|&j| self.mu[j]).sum()
    }
}

impl MeasureSpace for DiscreteCorpusSpace {
    fn len(&self) -> usize {
        self.m
    }

    fn node_weight(&self, i: usize) -> f64 {
        self.mu[i]
    }
}
