//! Residual meters for the BBGKY and Gross–Pitaevskii hierarchies, the
//! collision operator `B_{j,k+1}`, and the mollifier rate study.
//!
//! Every meter returns a [`HierarchyResidual`] carrying the sample spacing it
//! was computed with, so convergence under refinement can be checked by
//! comparing two runs.

mod bbgky;
mod collision;
mod delta;
mod gp;

use serde::{Deserialize, Serialize};

pub use bbgky::bbgky_residual;
pub use collision::{collision_op, coupled_collision_op};
pub(crate) use delta::fit_slope;
pub use delta::{delta_rate_study, interaction_convergence, DeltaRateReport, Mollifier, MollifierTerm};
pub use gp::{gp_residual, gp_residual_differential, space_time_norm, GpVariant};

/// Which identity a residual measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualForm {
    Bbgky,
    GpIntegral,
    GpDifferential,
}

/// Hilbert–Schmidt norms of a hierarchy defect at sampled times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyResidual {
    pub k: usize,
    pub form: ResidualForm,
    pub times: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sample spacing used for the time derivative or the `s`-quadrature.
    pub dt: f64,
    /// Truncation of the basis the residual was evaluated in.
    pub basis: String,
}

impl HierarchyResidual {
    /// Largest residual over the sampled times.
    pub fn max(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }
}
