//! Stand-alone measurement studies: sector suppression under growing `ω`
//! and the energy cutoff of initial data.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_nbody_with, uniform_times, KrylovConfig, ManyBodyState, NLSField};
use crate::hierarchy::fit_slope;
use crate::operators::{
    sector_project, spectral_cutoff_with, HamiltonianSpec, PotentialSpec, SectorIndex, SymmetricBlocks,
};
use crate::spectral::SingleParticleBasis;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SectorStudyConfig {
    pub n: usize,
    pub omegas: Vec<f64>,
    pub potential: PotentialSpec,
    pub basis: Arc<SingleParticleBasis>,
    /// Longitudinal profile of the ground-sector product data.
    pub phi0: NLSField,
    pub t_final: f64,
    pub samples: usize,
    pub dt: f64,
}

/// Fitted decay of `sup_t max_{|α| = w} ‖𝒫_α ψ(t)‖` against `ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorExponent {
    pub weight: usize,
    /// One value per entry of `omegas`.
    pub norms: Vec<f64>,
    pub exponent: f64,
    /// `−w/2`.
    pub reference: f64,
    /// `|exponent − reference| ≤ 0.2 |reference|`.
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorStudyReport {
    pub n: usize,
    pub omegas: Vec<f64>,
    pub exponents: Vec<SectorExponent>,
}

/// Evolves `(h ⊗ φ₀)^{⊗N}` at each `ω` and fits the sector norms.
pub fn sector_suppression_study(cfg: &SectorStudyConfig) -> Result<SectorStudyReport> {
    if cfg.omegas.len() < 2 {
        return Err(Error::Precondition("need at least two ω values to fit an exponent".into()));
    }
    let single = cfg.basis.embed_ground(&cfg.phi0.coefficients())?;
    let psi0 = ManyBodyState::product(cfg.basis.clone(), cfg.n, &single)?;
    let times = uniform_times(cfg.t_final, cfg.samples);
    let sectors = SectorIndex::all(cfg.n);
    let weights: Vec<usize> = (1..=cfg.n).collect();
    let mut norms = vec![Vec::with_capacity(cfg.omegas.len()); weights.len()];
    for &omega in &cfg.omegas {
        let h = HamiltonianSpec::new(cfg.n, omega, cfg.potential.clone(), cfg.basis.clone(), 1.0)?;
        let traj = evolve_nbody_with(&h, &psi0, &times, cfg.dt, &KrylovConfig::default(), |_, psi| {
            let mut best = vec![0.0f64; weights.len()];
            for alpha in &sectors {
                let w = alpha.weight();
                if w > 0 {
                    best[w - 1] = best[w - 1].max(sector_project(psi, alpha)?.norm());
                }
            }
            Ok(best)
        })?;
        for (i, column) in norms.iter_mut().enumerate() {
            column.push(traj.samples.iter().map(|s| s[i]).fold(0.0, f64::max));
        }
    }
    let log_omega: Vec<f64> = cfg.omegas.iter().map(|w| w.ln()).collect();
    let exponents = weights
        .iter()
        .zip(norms)
        .map(|(&w, values)| {
            let logs: Vec<f64> = values.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
            let (exponent, _) = fit_slope(&log_omega, &logs);
            let reference = -(w as f64) / 2.0;
            SectorExponent {
                weight: w,
                norms: values,
                exponent,
                reference,
                within_tolerance: (exponent - reference).abs() <= 0.2 * reference.abs(),
            }
        })
        .collect();
    Ok(SectorStudyReport {
        n: cfg.n,
        omegas: cfg.omegas.clone(),
        exponents,
    })
}

/// Energy moments and distance of the cutoff state for one `κ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffPoint {
    pub kappa: f64,
    /// `⟨(H̃ − 2Nω)^k⟩` of the cutoff state, `k = 1, 2`.
    pub moments: [f64; 2],
    /// `2^k N^k / κ^k`, `k = 1, 2`.
    pub bounds: [f64; 2],
    /// `‖ψ_κ − ψ₀‖`.
    pub distance: f64,
    pub retained_norm: f64,
}

impl CutoffPoint {
    pub fn within_bounds(&self) -> bool {
        self.moments.iter().zip(&self.bounds).all(|(m, b)| *m <= *b)
    }
}

/// Applies the spectral cutoff at each `κ` and measures the energy
/// condition and the distance to the original state.
pub fn cutoff_study(h: &HamiltonianSpec, psi0: &ManyBodyState, kappas: &[f64]) -> Result<Vec<CutoffPoint>> {
    let blocks = SymmetricBlocks::new(h.basis(), h.n());
    let n = h.n() as f64;
    kappas
        .iter()
        .map(|&kappa| {
            let cut = spectral_cutoff_with(h, &blocks, psi0, kappa)?;
            let moments = [h.excitation_moment(&cut.state, 1)?, h.excitation_moment(&cut.state, 2)?];
            let bounds = [2.0 * n / kappa, (2.0 * n / kappa).powi(2)];
            Ok(CutoffPoint {
                kappa,
                moments,
                bounds,
                distance: cut.state.distance(psi0)?,
                retained_norm: cut.retained_norm,
            })
        })
        .collect()
}
