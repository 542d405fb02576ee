//! Real-time Krylov propagation, imaginary-time ground states and the
//! split-step solver for the 1D focusing cubic NLS.

mod evolve;
mod ground;
mod krylov;
mod nls;
mod state;

pub use evolve::{default_dt, evolve_nbody, evolve_nbody_with, uniform_times, Trajectory};
pub use ground::{imaginary_time_ground_1d, imaginary_time_ground_nbody, Functional1D, GroundConfig, GroundState};
pub use krylov::{krylov_step, propagate, Exponent, KrylovConfig, KrylovStep, PropagationStats};
pub use nls::{nls_evolve, nls_step_to, soliton_profile, NLSField, NlsConfig};
pub use state::ManyBodyState;
