//! Initial data for sweep cells.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Cell, ExperimentConfig, GroundSetup, InitialMode, Profile};
use crate::dynamics::{imaginary_time_ground_nbody, GroundConfig, KrylovConfig, ManyBodyState, NLSField};
use crate::marginals::{limiting_structure_gap, reduce_marginal, trace_x};
use crate::operators::{spectral_cutoff, GaussianTerm, HamiltonianSpec, PotentialSpec};
use crate::scaling::coupling_report;
use crate::spectral::SingleParticleBasis;
use crate::{Error, Result};

/// Initial state of one cell with the longitudinal profile used for the NLS
/// benchmark.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub state: ManyBodyState,
    /// Unit-mass `φ₀` carrying the benchmark coupling `c_eff`.
    pub phi0: NLSField,
    pub c_eff: f64,
    pub info: InitialInfo,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialInfo {
    /// `κ` of the spectral cutoff, when applied.
    pub kappa: Option<f64>,
    /// `‖χψ₀‖` before renormalisation.
    pub retained_norm: Option<f64>,
    /// `‖ψ_κ − ψ₀‖`.
    pub cutoff_distance: Option<f64>,
    pub ground_energy: Option<f64>,
    pub ground_iterations: Option<usize>,
    /// `Tr|γ^{(1)} − |h⟩⟨h| ⊗ Tr_x γ^{(1)}|` of the ground state.
    pub structure_gap: Option<f64>,
}

/// `c_eff = |∫V| ∫|h|⁴` of the configured potential.
pub fn effective_coupling(cfg: &ExperimentConfig) -> Result<f64> {
    Ok(coupling_report(&cfg.potential_spec()?, 1.0, 1.0)?.c_eff)
}

/// Unit-mass profile on the grid of `basis`.
pub fn profile_field(basis: &SingleParticleBasis, profile: &Profile, c_eff: f64) -> Result<NLSField> {
    let grid = basis.z_grid().clone();
    let shape = match *profile {
        Profile::Soliton { coupling } => {
            let c = coupling.unwrap_or(c_eff);
            if !(c > 0.0) {
                return Err(Error::Config(
                    "the soliton profile needs a focusing coupling; set profile.coupling for V = 0".into(),
                ));
            }
            NLSField::soliton(grid.clone(), c / 4.0, c, 0.0)?
        }
        Profile::Gaussian { width } => NLSField::gaussian(grid.clone(), width, c_eff)?,
    };
    let norm = shape.mass().sqrt();
    NLSField::new(grid, shape.values().iter().map(|v| v / norm).collect(), c_eff)
}

/// Builds the state of `cell` according to the configured mode.
pub fn build_initial_data(cfg: &ExperimentConfig, cell: &Cell) -> Result<InitialData> {
    let basis = Arc::new(cfg.basis()?);
    let c_eff = effective_coupling(cfg)?;
    let mut info = InitialInfo::default();
    let (state, phi0) = match cfg.initial.mode {
        InitialMode::Product | InitialMode::ProductCutoff => {
            let phi0 = profile_field(&basis, &cfg.initial.profile, c_eff)?;
            let single = basis.embed_ground(&phi0.coefficients())?;
            let psi = ManyBodyState::product(basis.clone(), cell.n, &single)?;
            if cfg.initial.mode == InitialMode::Product {
                (psi, phi0)
            } else {
                let kappa = cfg.initial.kappa.ok_or_else(|| Error::Config("missing initial.kappa".into()))?;
                let h = HamiltonianSpec::new(cell.n, cell.omega, cfg.potential_spec()?, basis.clone(), 1.0)?;
                let cut = spectral_cutoff(&h, &psi, kappa)?;
                info.kappa = Some(cut.kappa);
                info.retained_norm = Some(cut.retained_norm);
                info.cutoff_distance = Some(cut.state.distance(&psi)?);
                (cut.state, phi0)
            }
        }
        InitialMode::InteractingGround => {
            let setup = cfg
                .initial
                .ground
                .ok_or_else(|| Error::Config("missing [initial.ground]".into()))?;
            let ground = trapped_ground_state(basis.clone(), cell.n, cfg.scaling.beta, &setup)?;
            info.ground_energy = Some(ground.energy);
            info.ground_iterations = Some(ground.iterations);
            info.structure_gap = Some(ground.structure_gap);
            let values = basis.z_grid().inverse(&ground.z_mode)?;
            (ground.state, NLSField::new(basis.z_grid().clone(), values, c_eff)?)
        }
    };
    Ok(InitialData {
        state,
        phi0,
        c_eff,
        info,
    })
}

/// Ground state of the trapped, repulsive Hamiltonian at `ω = ω₀ₓ`.
#[derive(Debug, Clone)]
pub struct TrappedGround {
    pub state: ManyBodyState,
    pub energy: f64,
    pub iterations: usize,
    /// Leading eigenvector of `Tr_x γ^{(1)}`, in centred coefficients.
    pub z_mode: Vec<Complex64>,
    pub structure_gap: f64,
}

pub fn trapped_ground_state(
    basis: Arc<SingleParticleBasis>,
    n: usize,
    beta: f64,
    setup: &GroundSetup,
) -> Result<TrappedGround> {
    if setup.v0 < 0.0 {
        return Err(Error::Config(format!("ground-state V0 = {} must be nonnegative", setup.v0)));
    }
    let v = PotentialSpec::new(vec![GaussianTerm::repulsive(setup.v0, setup.width)], beta)?;
    let h = HamiltonianSpec::new(n, setup.omega0x, v, basis.clone(), 1.0)?.with_z_trap(setup.z_trap)?;
    // Start from h ⊗ (lowest longitudinal mode), which is bosonic and not
    // orthogonal to the ground state.
    let mut single = vec![Complex64::new(0.0, 0.0); basis.dim()];
    single[basis.mz() / 2] = Complex64::new(1.0, 0.0);
    let start = ManyBodyState::product(basis.clone(), n, &single)?;
    let cfg = GroundConfig {
        tol: 1e-11,
        ..GroundConfig::default()
    };
    let ground = imaginary_time_ground_nbody(&h, &start, &cfg, &KrylovConfig::default())?;
    let gamma1 = reduce_marginal(&ground.state, 1)?;
    let gz = trace_x(&gamma1)?.to_dense()?;
    let eig = SymmetricEigen::new(gz);
    let top = eig.eigenvalues.imax();
    let z_mode: Vec<Complex64> = eig.eigenvectors.column(top).iter().cloned().collect();
    Ok(TrappedGround {
        structure_gap: limiting_structure_gap(&gamma1)?,
        state: ground.state,
        energy: ground.energy,
        iterations: ground.iterations,
        z_mode,
    })
}
