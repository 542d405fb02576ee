//! Gaussian-mixture pair potentials and their `(N, ω)` rescaling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::scaling::BETA_MAX;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `s · A · exp(−|r|²/(2σ²))` on `ℝ³`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub depth: f64,
    pub width: f64,
    pub sign: Sign,
}

impl GaussianTerm {
    pub fn attractive(depth: f64, width: f64) -> Self {
        Self {
            depth,
            width,
            sign: Sign::Minus,
        }
    }

    pub fn repulsive(depth: f64, width: f64) -> Self {
        Self {
            depth,
            width,
            sign: Sign::Plus,
        }
    }

    /// Signed amplitude `s · A`.
    pub fn amplitude(&self) -> f64 {
        self.sign.factor() * self.depth
    }

    pub fn value(&self, r2: f64) -> f64 {
        self.amplitude() * (-0.5 * r2 / (self.width * self.width)).exp()
    }

    pub fn integral(&self) -> f64 {
        self.amplitude() * (2.0 * PI).powf(1.5) * self.width.powi(3)
    }

    fn validate(&self) -> Result<()> {
        if !(self.depth.is_finite() && self.depth >= 0.0) {
            return Err(Error::Domain(format!("Gaussian depth {} must be nonnegative", self.depth)));
        }
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::Domain(format!("Gaussian width {} must be positive", self.width)));
        }
        Ok(())
    }
}

/// One Gaussian of the rescaled pair potential, anisotropic in `(x, z)`:
/// `amplitude · exp(−|x|²/(2σ_x²) − z²/(2σ_z²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledGaussian {
    pub amplitude: f64,
    pub sigma_x: f64,
    pub sigma_z: f64,
}

impl ScaledGaussian {
    pub fn value(&self, x: [f64; 2], z: f64) -> f64 {
        let ex = (x[0] * x[0] + x[1] * x[1]) / (2.0 * self.sigma_x * self.sigma_x);
        let ez = z * z / (2.0 * self.sigma_z * self.sigma_z);
        self.amplitude * (-ex - ez).exp()
    }

    pub fn integral(&self) -> f64 {
        self.amplitude * (2.0 * PI).powf(1.5) * self.sigma_x * self.sigma_x * self.sigma_z
    }
}

/// Number of radial panels for the `L¹`/`L∞` norms of sign-changing mixtures.
const RADIAL_PANELS: usize = 20_000;

/// Pair potential `V` together with its interaction-range exponent `β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub struct PotentialSpec {
    terms: Vec<GaussianTerm>,
    beta: f64,
    integral: f64,
    l1: f64,
    linf: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialRepr {
    terms: Vec<GaussianTerm>,
    beta: f64,
}

impl TryFrom<PotentialRepr> for PotentialSpec {
    type Error = Error;
    fn try_from(r: PotentialRepr) -> Result<Self> {
        PotentialSpec::new(r.terms, r.beta)
    }
}

impl From<PotentialSpec> for PotentialRepr {
    fn from(p: PotentialSpec) -> Self {
        PotentialRepr {
            terms: p.terms,
            beta: p.beta,
        }
    }
}

impl PotentialSpec {
    /// Any finite mixture; see [`Self::focusing`] for the sign condition.
    pub fn new(terms: Vec<GaussianTerm>, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < BETA_MAX) {
            return Err(Error::Domain(format!("beta = {beta} outside (0, 3/7)")));
        }
        for t in &terms {
            t.validate()?;
        }
        let integral = terms.iter().map(GaussianTerm::integral).sum();
        let (l1, linf) = radial_norms(&terms);
        Ok(Self {
            terms,
            beta,
            integral,
            l1,
            linf,
        })
    }

    /// A mixture with `∫V ≤ 0`; sign-changing mixtures are allowed.
    pub fn focusing(terms: Vec<GaussianTerm>, beta: f64) -> Result<Self> {
        let v = Self::new(terms, beta)?;
        if v.integral > 0.0 {
            return Err(Error::Precondition(format!(
                "pair interaction must have nonpositive integral, got {}",
                v.integral
            )));
        }
        Ok(v)
    }

    pub fn zero(beta: f64) -> Result<Self> {
        Self::new(Vec::new(), beta)
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.depth == 0.0)
    }

    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn l1_norm(&self) -> f64 {
        self.l1
    }

    pub fn linf_norm(&self) -> f64 {
        self.linf
    }

    pub fn value(&self, r: [f64; 3]) -> f64 {
        let r2 = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
        self.terms.iter().map(|t| t.value(r2)).sum()
    }

    /// Same mixture with every depth multiplied by `factor ≥ 0`.
    pub fn scaled_by(&self, factor: f64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| GaussianTerm {
                depth: t.depth * factor,
                ..*t
            })
            .collect();
        Self::new(terms, self.beta)
    }

    /// Gaussians of `V_{N,ω}(x, z) = N^{3β} ω^{3β−1} V((Nω)^β x/√ω, (Nω)^β z)`.
    pub fn scaled_terms(&self, n: usize, omega: f64) -> Vec<ScaledGaussian> {
        let nf = n as f64;
        let b = self.beta;
        let pref = nf.powf(3.0 * b) * omega.powf(3.0 * b - 1.0);
        let s_z = (nf * omega).powf(b);
        let s_x = s_z / omega.sqrt();
        self.terms
            .iter()
            .map(|t| ScaledGaussian {
                amplitude: pref * t.amplitude(),
                sigma_x: t.width / s_x,
                sigma_z: t.width / s_z,
            })
            .collect()
    }

    /// Pointwise value of `V_{N,ω}` at the relative coordinate `(x, z)`.
    pub fn scaled_value(&self, n: usize, omega: f64, x: [f64; 2], z: f64) -> f64 {
        let nf = n as f64;
        let b = self.beta;
        let s_z = (nf * omega).powf(b);
        let s_x = s_z / omega.sqrt();
        nf.powf(3.0 * b) * omega.powf(3.0 * b - 1.0) * self.value([s_x * x[0], s_x * x[1], s_z * z])
    }
}

/// `scaled_potential` in free-function form.
pub fn scaled_potential(v: &PotentialSpec, n: usize, omega: f64, x: [f64; 2], z: f64) -> Result<f64> {
    if n < 1 || !(omega >= 1.0) {
        return Err(Error::Precondition(format!("need N ≥ 1 and ω ≥ 1, got N = {n}, ω = {omega}")));
    }
    Ok(v.scaled_value(n, omega, x, z))
}

fn radial_norms(terms: &[GaussianTerm]) -> (f64, f64) {
    if terms.is_empty() {
        return (0.0, 0.0);
    }
    let single_sign = terms.iter().all(|t| t.sign == terms[0].sign);
    if single_sign {
        let l1 = terms.iter().map(|t| t.integral().abs()).sum();
        let linf = terms.iter().map(|t| t.depth).sum();
        return (l1, linf);
    }
    let rmax = 12.0 * terms.iter().map(|t| t.width).fold(0.0, f64::max);
    let h = rmax / RADIAL_PANELS as f64;
    let f = |r: f64| terms.iter().map(|t| t.value(r * r)).sum::<f64>();
    // Composite Simpson on 4π r² |V(r)|.
    let mut acc = 0.0;
    let mut linf = f(0.0).abs();
    for i in 0..=RADIAL_PANELS {
        let r = i as f64 * h;
        let v = f(r);
        linf = linf.max(v.abs());
        let w = if i == 0 || i == RADIAL_PANELS {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * r * r * v.abs();
    }
    (4.0 * PI * acc * h / 3.0, linf)
}
