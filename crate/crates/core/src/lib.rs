//! Numerical laboratory for the focusing many-body problem in a strongly
//! anisotropic harmonic trap.
//!
//! The N-body state lives in the rescaled frame, where the transverse ground
//! state is the fixed Gaussian `h(x) = π^{-1/2} e^{-|x|²/2}` and the
//! confinement strength `ω` only multiplies the transverse part of the
//! Hamiltonian. Single-particle wave functions are expanded in a truncated 2D
//! Hermite basis (transverse) times a periodic Fourier basis (longitudinal).
//!
//! Module map:
//!
//! - [`scaling`]: admissible `(N, ω)` windows and the 3D to 1D coupling constants.
//! - [`spectral`]: Hermite/Fourier bases, quadrature and transforms.
//! - [`operators`]: scaled potentials, the rescaled Hamiltonian, `S̃`, sector
//!   projections, spectral cutoffs and inequality audits.
//! - [`dynamics`]: Krylov real-time propagation, imaginary-time ground states,
//!   and the split-step solver for the 1D focusing cubic NLS.
//! - [`marginals`]: reduced density matrices, partial traces and distances.
//! - [`hierarchy`]: BBGKY and Gross–Pitaevskii residual meters, collision
//!   operator, mollifier rate study.
//! - [`harness`]: experiment configuration, sweeps and persistence.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod hierarchy;
pub mod marginals;
pub mod operators;
pub mod scaling;
pub mod spectral;
pub(crate) mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64;
