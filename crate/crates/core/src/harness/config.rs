//! Experiment configuration: a TOML document with strict key checking.
//!
//! ```toml
//! seed = 7
//!
//! [scaling]
//! beta = 0.25
//! n = [2, 3]
//! omega = { rule = "middle" }
//!
//! [potential]
//! terms = [{ depth = 5.2, width = 0.5, sign = "minus" }]
//!
//! [basis]
//! max_level = 2
//! z_points = 16
//! box_length = 24.0
//!
//! [time]
//! t_final = 1.0
//! samples = 10
//! dt = 0.01
//!
//! [initial]
//! mode = "product"
//! profile = { kind = "soliton" }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::operators::{GaussianTerm, PotentialSpec};
use crate::scaling::{omega_window, OmegaWindow, WindowMode};
use crate::spectral::SingleParticleBasis;
use crate::{Error, Result};

/// Largest particle number accepted without `allow_large`.
pub const MAX_PARTICLES: usize = 3;
/// Largest single-particle dimension accepted without `allow_large`.
pub const MAX_SINGLE_DIM: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub scaling: ScalingConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    pub basis: BasisConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
    #[serde(default)]
    pub limits: Limits,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub beta: f64,
    pub n: Vec<usize>,
    pub omega: OmegaRule,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default = "dynamics_window")]
    pub window: WindowMode,
}

fn one() -> f64 {
    1.0
}

fn dynamics_window() -> WindowMode {
    WindowMode::Dynamics
}

/// How `ω` is chosen for each `N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OmegaRule {
    /// Geometric middle of the window.
    Middle,
    /// One value per entry of `n`. Values outside the window are rejected
    /// unless `out_of_window` marks the run as a control.
    Fixed {
        values: Vec<f64>,
        #[serde(default)]
        out_of_window: bool,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    #[serde(default)]
    pub terms: Vec<GaussianTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub max_level: usize,
    /// Defaults to `max_level + 3`.
    pub quad_nodes: Option<usize>,
    pub z_points: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    /// Number of sample intervals in `[0, t_final]`.
    pub samples: usize,
    /// N-body step; defaults to `default_dt(ω)`.
    pub dt: Option<f64>,
    /// NLS step; defaults to the solver default.
    pub nls_dt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub mode: InitialMode,
    #[serde(default)]
    pub profile: Profile,
    /// Cutoff parameter for `product-cutoff`.
    pub kappa: Option<f64>,
    /// Settings for `interacting-ground`.
    pub ground: Option<GroundSetup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialMode {
    Product,
    ProductCutoff,
    InteractingGround,
}

/// Longitudinal profile `φ₀`, normalized on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    /// The unit-mass soliton `sech` profile for the sweep's effective
    /// coupling `c_eff`, or for `coupling` when given.
    Soliton { coupling: Option<f64> },
    Gaussian { width: f64 },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Soliton { coupling: None }
    }
}

/// Trapped ground state: transverse frequency `ω₀ₓ` (used as `ω`), a
/// longitudinal trap and a repulsive Gaussian of depth `v0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundSetup {
    pub omega0x: f64,
    pub z_trap: f64,
    pub v0: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write the final state of every cell to `snapshots/`.
    #[serde(default)]
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    /// Lifts the desk-scale ceilings on `N` and the single-particle dimension.
    #[serde(default)]
    pub allow_large: bool,
}

/// One `(N, ω)` pair of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub omega: f64,
    pub window: OmegaWindow,
    pub in_window: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(hex::encode(digest))
    }

    pub fn potential_spec(&self) -> Result<PotentialSpec> {
        PotentialSpec::focusing(self.potential.terms.clone(), self.scaling.beta)
            .map_err(|e| Error::Config(format!("potential: {e}")))
    }

    pub fn basis(&self) -> Result<SingleParticleBasis> {
        let b = &self.basis;
        let nodes = b.quad_nodes.unwrap_or(b.max_level + 3);
        SingleParticleBasis::new(b.max_level, nodes, b.z_points, b.box_length)
    }

    /// Resolves the `(N, ω)` cells and checks window membership.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let s = &self.scaling;
        let omegas: Vec<(f64, bool)> = match &s.omega {
            OmegaRule::Middle => s
                .n
                .iter()
                .map(|&n| Ok((omega_window(s.beta, n, s.c1, s.c2, s.window)?.geometric_middle(), false)))
                .collect::<Result<_>>()?,
            OmegaRule::Fixed { values, out_of_window } => {
                if values.len() != s.n.len() {
                    return Err(Error::Config(format!(
                        "{} fixed ω values for {} particle numbers",
                        values.len(),
                        s.n.len()
                    )));
                }
                values.iter().map(|&w| (w, *out_of_window)).collect()
            }
        };
        s.n.iter()
            .zip(omegas)
            .enumerate()
            .map(|(index, (&n, (omega, control)))| {
                let window = omega_window(s.beta, n, s.c1, s.c2, s.window)?;
                let in_window = window.contains(omega);
                if !in_window && !control {
                    return Err(Error::OutOfWindow {
                        n,
                        omega,
                        lower: window.lower,
                        upper: window.upper,
                    });
                }
                Ok(Cell {
                    index,
                    n,
                    omega,
                    window,
                    in_window,
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scaling;
        if s.n.is_empty() {
            return Err(Error::Config("scaling.n is empty".into()));
        }
        if s.n.iter().any(|&n| n < 2) {
            return Err(Error::Config("every N must be at least 2".into()));
        }
        let d = self.basis()?.dim();
        if !self.limits.allow_large {
            if let Some(&n) = s.n.iter().find(|&&n| n > MAX_PARTICLES) {
                return Err(Error::TooLarge(format!("N = {n} > {MAX_PARTICLES}; set limits.allow_large")));
            }
            if d > MAX_SINGLE_DIM {
                return Err(Error::TooLarge(format!(
                    "single-particle dimension {d} > {MAX_SINGLE_DIM}; set limits.allow_large"
                )));
            }
        }
        let t = &self.time;
        if !(t.t_final.is_finite() && t.t_final > 0.0) || t.samples == 0 {
            return Err(Error::Config("time.t_final must be positive and time.samples nonzero".into()));
        }
        for dt in [t.dt, t.nls_dt].into_iter().flatten() {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::Config(format!("time step {dt} must be positive")));
            }
        }
        self.potential_spec()?;
        match self.initial.mode {
            InitialMode::ProductCutoff if self.initial.kappa.is_none() => {
                return Err(Error::Config("product-cutoff needs initial.kappa".into()));
            }
            InitialMode::InteractingGround if self.initial.ground.is_none() => {
                return Err(Error::Config("interacting-ground needs [initial.ground]".into()));
            }
            _ => {}
        }
        if let Profile::Gaussian { width } = self.initial.profile {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::Config(format!("profile width {width} must be positive")));
            }
        }
        self.cells()?;
        Ok(())
    }
}
