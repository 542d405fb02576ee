//! Transverse Hermite basis, longitudinal Fourier grid and their tensor
//! product.

mod basis;
mod fourier;
mod hermite;

pub use basis::{
    hermite_linf_ratio, BasisDescriptor, Hermite2DBasis, HermiteMode, SingleParticleBasis,
    ORDERING_VERSION,
};
pub use fourier::FourierGrid1D;
pub use hermite::{
    gauss_hermite, hermite_derivatives, hermite_functions, hermite_polynomials, hermite_second_derivatives,
    GaussHermite,
};
