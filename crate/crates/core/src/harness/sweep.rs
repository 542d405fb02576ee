//! Convergence sweeps over in-window `(N, ω)` cells.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Cell, ExperimentConfig};
use super::initial::{build_initial_data, InitialInfo};
use crate::dynamics::{
    default_dt, evolve_nbody_with, nls_evolve, uniform_times, KrylovConfig, ManyBodyState, NLSField, NlsConfig,
};
use crate::marginals::{
    dk_metric, factorization_gap, hs_distance, limiting_structure_gap, reduce_marginal, sector_weights,
    DensityMatrix, MetricConfig, SectorWeight,
};
use crate::operators::HamiltonianSpec;
use crate::Result;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest sector weight `|α|` recorded per sample.
const SECTOR_DEPTH: usize = 2;

/// Diagnostics of one cell at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub config_hash: String,
    pub code_version: String,
    pub cell: usize,
    pub n: usize,
    pub omega: f64,
    pub beta: f64,
    pub in_window: bool,
    pub v1: f64,
    pub v_upper: f64,
    pub t: f64,
    /// `Tr|γ^{(1)}(t) − |h⊗φ(t)⟩⟨h⊗φ(t)||`.
    pub factorization_gap: f64,
    pub hs_distance: f64,
    pub dk_distance: f64,
    /// `Tr|γ^{(1)} − |h⟩⟨h| ⊗ Tr_x γ^{(1)}|`.
    pub structure_gap: f64,
    pub sector_weights: Vec<SectorWeight>,
    /// `⟨(α + N⁻¹H̃ − 2ω)^k⟩` for `k = 1, 2`.
    pub energy_moments: [f64; 2],
    pub norm_drift: f64,
}

/// Outcome of one cell. A failed cell carries its error and no records.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Cell,
    pub c_eff: f64,
    pub initial: InitialInfo,
    pub records: Vec<SweepRecord>,
    pub sup_gap: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub final_state: Option<ManyBodyState>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub config_hash: String,
    pub code_version: String,
    pub cells: Vec<CellResult>,
}

impl SweepResult {
    pub fn records(&self) -> impl Iterator<Item = &SweepRecord> {
        self.cells.iter().flat_map(|c| c.records.iter())
    }

    /// `(N, ω, sup gap)` of every successful cell, in cell order.
    pub fn trend(&self) -> Vec<(usize, f64, f64)> {
        self.cells
            .iter()
            .filter_map(|c| c.sup_gap.map(|g| (c.cell.n, c.cell.omega, g)))
            .collect()
    }

    /// Whether the sup gap strictly decreases along the in-window cells.
    pub fn gap_decreases(&self) -> bool {
        let gaps: Vec<f64> = self
            .cells
            .iter()
            .filter(|c| c.cell.in_window)
            .filter_map(|c| c.sup_gap)
            .collect();
        gaps.len() >= 2 && gaps.windows(2).all(|w| w[1] < w[0])
    }
}

/// Evolves every cell, reduces to `γ^{(1)}` and compares against the NLS
/// benchmark with coupling `c_eff`. Cells run in the current rayon pool and
/// are merged by index.
pub fn run_convergence_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let hash = cfg.hash()?;
    let cells = cfg.cells()?;
    let results = cells
        .par_iter()
        .map(|cell| match run_cell(cfg, cell, &hash) {
            Ok(r) => r,
            Err(e) => CellResult {
                cell: *cell,
                c_eff: f64::NAN,
                initial: InitialInfo::default(),
                records: Vec::new(),
                sup_gap: None,
                error: Some(e.to_string()),
                final_state: None,
            },
        })
        .collect();
    Ok(SweepResult {
        config_hash: hash,
        code_version: CODE_VERSION.to_string(),
        cells: results,
    })
}

fn run_cell(cfg: &ExperimentConfig, cell: &Cell, hash: &str) -> Result<CellResult> {
    let init = build_initial_data(cfg, cell)?;
    let basis = init.state.basis().clone();
    let h = HamiltonianSpec::new(cell.n, cell.omega, cfg.potential_spec()?, Arc::clone(&basis), 1.0)?;
    let times = uniform_times(cfg.time.t_final, cfg.time.samples);
    let nls_cfg = NlsConfig {
        dt: cfg.time.nls_dt.unwrap_or(NlsConfig::default().dt),
        ..NlsConfig::default()
    };
    let benchmark = nls_evolve(&init.phi0, &times, &nls_cfg)?;
    let dt = cfg.time.dt.unwrap_or_else(|| default_dt(cell.omega));
    let metric = MetricConfig::default();
    let mut index = 0;
    let mut final_state = None;
    let traj = evolve_nbody_with(&h, &init.state, &times, dt, &KrylovConfig::default(), |t, psi| {
        let record = sample_record(cfg, cell, hash, &h, psi, &benchmark.samples[index], &metric, t)?;
        index += 1;
        if index == times.len() {
            final_state = Some(psi.clone());
        }
        Ok(record)
    })?;
    let mut records = traj.samples;
    for (r, drift) in records.iter_mut().zip(&traj.norm_drift) {
        r.norm_drift = *drift;
    }
    let sup_gap = records.iter().map(|r| r.factorization_gap).fold(0.0, f64::max);
    Ok(CellResult {
        cell: *cell,
        c_eff: init.c_eff,
        initial: init.info,
        records,
        sup_gap: Some(sup_gap),
        error: None,
        final_state,
    })
}

#[allow(clippy::too_many_arguments)]
fn sample_record(
    cfg: &ExperimentConfig,
    cell: &Cell,
    hash: &str,
    h: &HamiltonianSpec,
    psi: &ManyBodyState,
    phi: &NLSField,
    metric: &MetricConfig,
    t: f64,
) -> Result<SweepRecord> {
    let gamma1 = reduce_marginal(psi, 1)?;
    let target_vec = psi.basis().embed_ground(&phi.coefficients())?;
    let target = DensityMatrix::pure(psi.basis().clone(), 1, &target_vec)?;
    Ok(SweepRecord {
        config_hash: hash.to_string(),
        code_version: CODE_VERSION.to_string(),
        cell: cell.index,
        n: cell.n,
        omega: cell.omega,
        beta: cfg.scaling.beta,
        in_window: cell.in_window,
        v1: cell.window.v1,
        v_upper: cell.window.v_upper,
        t,
        factorization_gap: factorization_gap(&gamma1, phi)?,
        hs_distance: hs_distance(&gamma1, &target)?,
        dk_distance: dk_metric(&gamma1, &target, metric)?,
        structure_gap: limiting_structure_gap(&gamma1)?,
        sector_weights: sector_weights(psi, SECTOR_DEPTH.min(psi.n()))?,
        energy_moments: [h.energy_moment(psi, 1)?, h.energy_moment(psi, 2)?],
        norm_drift: 0.0,
    })
}
