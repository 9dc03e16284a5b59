//! Interaction kernels as functions of distance.
//!
//! Conforming kernels are nonnegative, bounded by `bound_c`, Lipschitz with
//! constant `lipschitz_l`, and vanish at zero distance. Kernels are defined
//! up to additive constants; `shifted` produces deliberately offset variants
//! for the shift-invariance checks, and the named constructors normalize
//! their classical forms to the conforming convention.

use crate::error::{Error, Result};
use crate::space::DiscreteCorpusSpace;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelKind {
    /// |sin d|: the classical excluded-volume kernel on the circle.
    OnsagerAbsSin,
    /// sin^2 d, the -cos^2 interaction shifted up by 1.
    MaierSaupe,
    /// d^p with exponent p >= 1.
    DistancePow(f64),
    /// 1 - exp(-d^2/l^2), the Gaussian well shifted up by 1.
    GaussianWell(f64),
    /// Identically zero.
    Zero,
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    kind: KernelKind,
    offset: f64,
    bound_c: f64,
    lipschitz_l: f64,
}

impl KernelSpec {
    pub fn onsager_abs_sin() -> Self {
        KernelSpec {
            kind: KernelKind::OnsagerAbsSin,
            offset: 0.0,
            bound_c: 1.0,
            lipschitz_l: 1.0,
        }
    }

    pub fn maier_saupe() -> Self {
        KernelSpec {
            kind: KernelKind::MaierSaupe,
            offset: 0.0,
            bound_c: 1.0,
            lipschitz_l: 1.0,
        }
    }

    /// d^p on a space of the given diameter; p >= 1 keeps the kernel
    /// Lipschitz at d = 0.
    pub fn distance_pow(p: f64, diameter: f64) -> Result<Self> {
        if !(p >= 1.0) {
            return Err(Error::Input(format!("distance_p exponent {p} must be >= 1")));
        }
        if !(diameter > 0.0) {
            return Err(Error::Input(format!("diameter {diameter} must be positive")));
        }
        Ok(KernelSpec {
            kind: KernelKind::DistancePow(p),
            offset: 0.0,
            bound_c: diameter.powf(p),
            lipschitz_l: if p == 1.0 { 1.0 } else { p * diameter.powf(p - 1.0) },
        })
    }

    pub fn gaussian_well(length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::Input(format!("gaussian_well length {length} must be positive")));
        }
        Ok(KernelSpec {
            kind: KernelKind::GaussianWell(length),
            offset: 0.0,
            // sup |u'| = sqrt(2/e)/l, attained at d = l/sqrt(2)
            bound_c: 1.0,
            lipschitz_l: (2.0f64 / std::f64::consts::E).sqrt() / length,
        })
    }

    pub fn zero() -> Self {
        KernelSpec {
            kind: KernelKind::Zero,
            offset: 0.0,
            bound_c: 0.0,
            lipschitz_l: 0.0,
        }
    }

    /// Look a kernel up by its external name. `distance_p` takes the
    /// exponent, `gaussian_well` the length, both via `param`.
    pub fn by_name(name: &str, param: Option<f64>, diameter: f64) -> Result<Self> {
        match name {
            "onsager_abs_sin" => Ok(Self::onsager_abs_sin()),
            "maier_saupe" => Ok(Self::maier_saupe()),
            "distance_p" => {
                let p = param.ok_or_else(|| Error::Input("distance_p needs an exponent".into()))?;
                Self::distance_pow(p, diameter)
            }
            "gaussian_well" => {
                let l = param.ok_or_else(|| Error::Input("gaussian_well needs a length".into()))?;
                Self::gaussian_well(l)
            }
            "zero" => Ok(Self::zero()),
            other => Err(Error::Input(format!("unknown kernel '{other}'"))),
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn bound_c(&self) -> f64 {
        self.bound_c
    }

    pub fn lipschitz_l(&self) -> f64 {
        self.lipschitz_l
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn eval(&self, d: f64) -> f64 {
        let base = match self.kind {
            KernelKind::OnsagerAbsSin => d.sin().abs(),
            KernelKind::MaierSaupe => {
                let s = d.sin();
                s * s
            }
            KernelKind::DistancePow(p) => {
                if p == 1.0 {
                    d
                } else if p == 2.0 {
                    d * d
                } else {
                    d.powf(p)
                }
            }
            KernelKind::GaussianWell(l) => 1.0 - (-d * d / (l * l)).exp(),
            KernelKind::Zero => 0.0,
        };
        base + self.offset
    }

    /// Same kernel plus a constant. The shifted kernel no longer conforms
    /// to the zero-at-zero convention; free energies move by b*c/2 and
    /// Onsager solutions stay put.
    pub fn shifted(&self, c: f64) -> Self {
        let mut k = self.clone();
        k.offset += c;
        k
    }

    /// Check the conformance conditions on every distance the space
    /// realizes: 0 <= u <= C, |u(d1)-u(d2)| <= L|d1-d2|, u(0) = 0.
    /// The check applies to the unshifted kernel.
    pub fn conforms(&self, space: &DiscreteCorpusSpace) -> Result<()> {
        let unshifted = KernelSpec {
            offset: 0.0,
            ..self.clone()
        };
        if unshifted.eval(0.0) != 0.0 {
            return Err(Error::Input(format!(
                "kernel violates u(0) = 0: u(0) = {}",
                unshifted.eval(0.0)
            )));
        }
        let m = space.m();
        let mut ds: Vec<f64> = Vec::with_capacity(m * (m + 1) / 2);
        for i in 0..m {
            for j in i..m {
                ds.push(space.dist(i, j));
            }
        }
        for &d in &ds {
            let u = unshifted.eval(d);
            if u < -1e-12 || u > self.bound_c + 1e-12 {
                return Err(Error::Input(format!(
                    "kernel value u({d}) = {u} outside [0, {}]",
                    self.bound_c
                )));
            }
        }
        // Lipschitz spot check on sampled pairs (all pairs for small spaces).
        let step = (ds.len() / 64).max(1);
        for (a, &d1) in ds.iter().enumerate().step_by(step) {
            for &d2 in ds.iter().skip(a).step_by(step) {
                let lhs = (unshifted.eval(d1) - unshifted.eval(d2)).abs();
                if lhs > self.lipschitz_l * (d1 - d2).abs() + 1e-10 {
                    return Err(Error::Input(format!(
                        "kernel violates Lipschitz bound between d = {d1} and d = {d2}"
                    )));
                }
            }
        }
        Ok(())
    }
}
