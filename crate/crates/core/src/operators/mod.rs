//! Scaled pair potentials, the rescaled Hamiltonian, `S̃` weights, sector
//! projections, spectral cutoffs and inequality audits.

mod audits;
mod hamiltonian;
mod pair;
mod potential;
mod sector;
mod spectrum;

pub use audits::{
    check_inequality, cutoff_profile, energy_margin, spectral_cutoff, spectral_cutoff_with,
    stilde_weight, two_body_sobolev_norm, verify_energy_estimate, CutoffResult,
    EnergyEstimateConfig, EnergyEstimateReport, Inequality, InequalityReport,
};
pub use hamiltonian::{HamiltonianSpec, DEFAULT_C3};
pub(crate) use hamiltonian::apply_single_diagonal;
pub use pair::{axis_delta_matrix, axis_pair_matrix, transverse_delta_matrix, PairOperator};
pub use potential::{scaled_potential, GaussianTerm, PotentialSpec, ScaledGaussian, Sign};
pub use sector::{sector_project, SectorIndex};
pub use spectrum::{
    lowest_eigenstates, symmetric_spectrum, BlockSpectrum, SymmetricBlock, SymmetricBlocks,
};
