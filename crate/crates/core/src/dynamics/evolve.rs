//! Real-time N-body propagation `ψ(t) = e^{−itH̃}ψ₀` by Krylov steps.

use serde::{Deserialize, Serialize};

use super::krylov::{propagate, Exponent, KrylovConfig, PropagationStats};
use super::state::ManyBodyState;
use crate::operators::HamiltonianSpec;
use crate::{Error, Result};

/// Samples along a propagation together with conserved-quantity logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub samples: Vec<S>,
    /// Per sample, the largest `|‖ψ‖ − 1|` seen before renormalisation so far.
    pub norm_drift: Vec<f64>,
    /// Per sample, the monitored energy functional.
    pub energy: Vec<f64>,
    pub stats: PropagationStats,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `max_t |E(t) − E(0)| / max(|E(0)|, 1)`.
    pub fn relative_energy_drift(&self) -> f64 {
        let Some(&e0) = self.energy.first() else {
            return 0.0;
        };
        let scale = e0.abs().max(1.0);
        self.energy.iter().map(|e| (e - e0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm_drift.iter().cloned().fold(0.0, f64::max)
    }
}

/// `1e−3 · min(1, 1/ω)`.
pub fn default_dt(omega: f64) -> f64 {
    1e-3 * (1.0 / omega).min(1.0)
}

/// Equally spaced sample times `0, T/m, …, T`.
pub fn uniform_times(t_final: f64, intervals: usize) -> Vec<f64> {
    let m = intervals.max(1);
    (0..=m).map(|i| t_final * i as f64 / m as f64).collect()
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Precondition("no sample times".into()));
    }
    if times[0] < 0.0 || !times.iter().all(|t| t.is_finite()) {
        return Err(Error::Precondition("sample times must be finite and nonnegative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Propagates `ψ₀` under `H̃` and hands the state at every time in `times`
/// to `sample`. The state is renormalised after each sample interval.
pub fn evolve_nbody_with<S, F>(
    spec: &HamiltonianSpec,
    psi0: &ManyBodyState,
    times: &[f64],
    dt: f64,
    cfg: &KrylovConfig,
    mut sample: F,
) -> Result<Trajectory<S>>
where
    F: FnMut(f64, &ManyBodyState) -> Result<S>,
{
    spec.check_state(psi0)?;
    check_times(times)?;
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Precondition(format!("initial state has norm {}", psi0.norm())));
    }
    if psi0.symmetry_defect() > 1e-10 {
        return Err(Error::Precondition(format!(
            "initial state is not bosonic (defect {:.3e})",
            psi0.symmetry_defect()
        )));
    }
    let apply = |v: &[crate::Complex64]| spec.apply_raw(v);
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        samples: Vec::with_capacity(times.len()),
        norm_drift: Vec::with_capacity(times.len()),
        energy: Vec::with_capacity(times.len()),
        stats: PropagationStats::default(),
    };
    let mut psi = psi0.clone();
    let mut now = 0.0;
    let mut drift: f64 = 0.0;
    for &t in times {
        if t > now {
            let next = propagate(&apply, psi.coeffs(), t - now, dt, Exponent::RealTime, cfg, &mut traj.stats)?;
            psi = psi.with_coeffs(next)?;
            drift = drift.max((psi.norm() - 1.0).abs());
            psi.normalize()?;
            now = t;
        }
        traj.energy.push(spec.energy_moment(&psi, 1)?);
        traj.norm_drift.push(drift);
        traj.samples.push(sample(t, &psi)?);
        traj.times.push(t);
    }
    Ok(traj)
}

/// [`evolve_nbody_with`] storing the full state at `intervals + 1` equally
/// spaced times in `[0, T]`.
pub fn evolve_nbody(
    spec: &HamiltonianSpec,
    psi0: &ManyBodyState,
    t_final: f64,
    dt: f64,
    intervals: usize,
) -> Result<Trajectory<ManyBodyState>> {
    evolve_nbody_with(
        spec,
        psi0,
        &uniform_times(t_final, intervals),
        dt,
        &KrylovConfig::default(),
        |_, psi| Ok(psi.clone()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{GaussianTerm, PotentialSpec};
    use crate::spectral::SingleParticleBasis;
    use std::sync::Arc;

    #[test]
    fn rejects_unordered_times() {
        assert!(check_times(&[0.0, 0.5, 0.5]).is_err());
        assert!(check_times(&[]).is_err());
        assert!(check_times(&[0.0, 0.1]).is_ok());
    }

    #[test]
    fn conserves_norm_energy_and_symmetry() {
        let basis = Arc::new(SingleParticleBasis::new(1, 4, 8, 6.0).unwrap());
        let v = PotentialSpec::focusing(vec![GaussianTerm::attractive(3.0, 0.5)], 0.25).unwrap();
        let h = HamiltonianSpec::new(2, 1.5, v, basis.clone(), 1.0).unwrap();
        let psi0 = ManyBodyState::random_symmetric(basis, 2, 3).unwrap();
        let traj = evolve_nbody(&h, &psi0, 0.5, 0.05, 5).unwrap();
        assert_eq!(traj.len(), 6);
        assert!(traj.max_norm_drift() < 1e-10);
        assert!(traj.relative_energy_drift() < 1e-9);
        assert!(traj.samples.iter().all(|s| s.symmetry_defect() < 1e-12));
        let moved = traj.samples[5].distance(&psi0).unwrap();
        assert!(moved > 1e-3);
    }
}
