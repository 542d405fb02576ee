//! Normalised gradient flow (imaginary time plus renormalisation).
//!
//! Both flows only accept steps that do not raise the energy; a step that does
//! is retried with half the imaginary-time step.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::krylov::{propagate, Exponent, KrylovConfig, PropagationStats};
use super::state::ManyBodyState;
use crate::operators::HamiltonianSpec;
use crate::spectral::FourierGrid1D;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundConfig {
    /// Initial imaginary-time step.
    pub dtau: f64,
    /// Stop once successive energies differ by less than this.
    pub tol: f64,
    pub max_iterations: usize,
    /// Smallest step before giving up on a monotone decrease.
    pub min_dtau: f64,
}

impl Default for GroundConfig {
    fn default() -> Self {
        Self {
            dtau: 0.01,
            tol: 1e-12,
            max_iterations: 200_000,
            min_dtau: 1e-10,
        }
    }
}

/// Converged state with its energy and the accepted energy sequence.
///
/// Consecutive trace entries never increase by more than `1e−14·max(|E|, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState<S> {
    pub state: S,
    pub energy: f64,
    pub energy_trace: Vec<f64>,
    pub iterations: usize,
}

/// `E(φ) = ∫|φ′|² + trap·z²|φ|² + quartic·|φ|⁴` on a periodic grid.
///
/// With `trap = 1` and `quartic = 4πNg` this is the 1D functional whose
/// minimiser describes the trapped condensate.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional1D {
    pub grid: FourierGrid1D,
    pub trap: f64,
    pub quartic: f64,
}

impl Functional1D {
    pub fn energy(&self, phi: &[Complex64]) -> Result<f64> {
        let coeffs = self.grid.forward(phi)?;
        let kinetic: f64 = coeffs
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(c, k)| k * k * c.norm_sqr())
            .sum();
        let h = self.grid.spacing();
        let local: f64 = self
            .grid
            .nodes()
            .iter()
            .zip(phi)
            .map(|(z, v)| {
                let r2 = v.norm_sqr();
                self.trap * z * z * r2 + self.quartic * r2 * r2
            })
            .sum::<f64>()
            * h;
        Ok(kinetic + local)
    }

    /// Mass-one Gaussian ground state of `−∂² + trap·z²`.
    pub fn linear_ground(&self) -> Vec<Complex64> {
        let w = if self.trap > 0.0 { self.trap.powf(-0.25) } else { 1.0 };
        let a = (std::f64::consts::PI * w * w).powf(-0.25);
        self.grid
            .nodes()
            .iter()
            .map(|z| Complex64::new(a * (-z * z / (2.0 * w * w)).exp(), 0.0))
            .collect()
    }

    /// One Strang-split step `e^{−τK/2} e^{−τ(trap z² + 2q|φ|²)} e^{−τK/2}`, renormalised.
    fn step(&self, phi: &[Complex64], tau: f64) -> Result<Vec<Complex64>> {
        let half: Vec<f64> = self.grid.wavenumbers().iter().map(|k| (-0.5 * tau * k * k).exp()).collect();
        let mut c = self.grid.forward(phi)?;
        for (a, f) in c.iter_mut().zip(&half) {
            *a *= f;
        }
        let mut v = self.grid.inverse(&c)?;
        for (x, z) in v.iter_mut().zip(self.grid.nodes()) {
            let pot = self.trap * z * z + 2.0 * self.quartic * x.norm_sqr();
            *x *= (-tau * pot).exp();
        }
        let mut c = self.grid.forward(&v)?;
        for (a, f) in c.iter_mut().zip(&half) {
            *a *= f;
        }
        let mut out = self.grid.inverse(&c)?;
        let n = self.grid.norm(&out);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::StepSize(format!("gradient flow lost the state at τ = {tau}")));
        }
        out.iter_mut().for_each(|x| *x /= n);
        Ok(out)
    }
}

fn monotone_flow<S: Clone>(
    initial: S,
    cfg: &GroundConfig,
    energy: impl Fn(&S) -> Result<f64>,
    step: impl Fn(&S, f64) -> Result<S>,
) -> Result<GroundState<S>> {
    let mut state = initial;
    let mut e = energy(&state)?;
    let mut trace = vec![e];
    let mut tau = cfg.dtau;
    for it in 1..=cfg.max_iterations {
        let (next, e_next) = loop {
            let cand = step(&state, tau)?;
            let e_cand = energy(&cand)?;
            // Rounding noise near the minimum is not an energy increase.
            if e_cand <= e + 1e-14 * e.abs().max(1.0) {
                break (cand, e_cand);
            }
            tau *= 0.5;
            if tau < cfg.min_dtau {
                return Err(Error::Convergence {
                    iterations: it,
                    last_change: e_cand - e,
                    energy_trace: trace,
                });
            }
        };
        let change = e - e_next;
        state = next;
        e = e_next;
        trace.push(e);
        if change.abs() < cfg.tol {
            return Ok(GroundState {
                state,
                energy: e,
                energy_trace: trace,
                iterations: it,
            });
        }
    }
    let last_change = trace[trace.len() - 2] - trace[trace.len() - 1];
    Err(Error::Convergence {
        iterations: cfg.max_iterations,
        last_change,
        energy_trace: trace,
    })
}

/// Minimises [`Functional1D`] under `∫|φ|² = 1`, starting from the linear
/// ground state unless `initial` is given.
pub fn imaginary_time_ground_1d(
    functional: &Functional1D,
    initial: Option<Vec<Complex64>>,
    cfg: &GroundConfig,
) -> Result<GroundState<Vec<Complex64>>> {
    let mut phi0 = initial.unwrap_or_else(|| functional.linear_ground());
    if phi0.len() != functional.grid.points() {
        return Err(Error::Shape {
            expected: functional.grid.points(),
            got: phi0.len(),
        });
    }
    let n = functional.grid.norm(&phi0);
    if n == 0.0 {
        return Err(Error::Precondition("initial guess vanishes".into()));
    }
    phi0.iter_mut().for_each(|x| *x /= n);
    monotone_flow(phi0, cfg, |p| functional.energy(p), |p, tau| functional.step(p, tau))
}

/// Ground state of `H̃` (optionally with a longitudinal trap) by Krylov
/// imaginary-time steps `ψ ← e^{−τ(H̃ − E)}ψ / ‖·‖`.
pub fn imaginary_time_ground_nbody(
    spec: &HamiltonianSpec,
    psi0: &ManyBodyState,
    cfg: &GroundConfig,
    krylov: &KrylovConfig,
) -> Result<GroundState<ManyBodyState>> {
    spec.check_state(psi0)?;
    let mut start = psi0.clone();
    start.normalize()?;
    let energy = |psi: &ManyBodyState| spec.expectation(psi);
    let step = |psi: &ManyBodyState, tau: f64| -> Result<ManyBodyState> {
        let shift = spec.expectation(psi)?;
        let apply = |v: &[Complex64]| {
            let mut hv = spec.apply_raw(v);
            for (o, x) in hv.iter_mut().zip(v) {
                *o -= x * shift;
            }
            hv
        };
        let mut stats = PropagationStats::default();
        let next = propagate(&apply, psi.coeffs(), tau, tau, Exponent::ImaginaryTime, krylov, &mut stats)?;
        let mut out = psi.with_coeffs(next)?;
        out.normalize()?;
        Ok(out)
    };
    monotone_flow(start, cfg, energy, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{GaussianTerm, PotentialSpec};
    use crate::spectral::SingleParticleBasis;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn monotone(trace: &[f64]) -> bool {
        trace.windows(2).all(|w| w[1] <= w[0] + 1e-14 * w[0].abs().max(1.0))
    }

    fn functional(q: f64) -> Functional1D {
        Functional1D {
            grid: FourierGrid1D::new(16.0, 128).unwrap(),
            trap: 1.0,
            quartic: q,
        }
    }

    #[test]
    fn harmonic_trap_ground_energy() {
        let f = functional(0.0);
        let g = imaginary_time_ground_1d(&f, None, &GroundConfig::default()).unwrap();
        assert!((g.energy - 1.0).abs() < 1e-10);
        assert!(monotone(&g.energy_trace));
    }

    #[test]
    fn weak_coupling_matches_first_order() {
        let q = 1e-3;
        let f = functional(q);
        // Start away from the minimiser so the flow has work to do.
        let guess: Vec<Complex64> = f
            .grid
            .nodes()
            .iter()
            .map(|z| Complex64::new((-z * z / 3.0).exp(), 0.0))
            .collect();
        let g = imaginary_time_ground_1d(&f, Some(guess), &GroundConfig::default()).unwrap();
        let first_order = 1.0 + q / (2.0 * PI).sqrt();
        assert!((g.energy - first_order).abs() < 1e-5);
        assert!(monotone(&g.energy_trace));
    }

    #[test]
    fn nbody_attractive_ground_is_below_free() {
        let basis = Arc::new(SingleParticleBasis::new(1, 4, 8, 6.0).unwrap());
        let v = PotentialSpec::focusing(vec![GaussianTerm::attractive(2.0, 0.6)], 0.25).unwrap();
        let h = HamiltonianSpec::new(2, 1.5, v, basis.clone(), 1.0).unwrap();
        let mut single = vec![Complex64::new(0.0, 0.0); basis.dim()];
        for (i, c) in single.iter_mut().enumerate() {
            *c = Complex64::new(1.0 / (1.0 + i as f64), 0.0);
        }
        let mut psi0 = ManyBodyState::product(basis.clone(), 2, &single).unwrap();
        psi0.normalize().unwrap();
        let cfg = GroundConfig {
            dtau: 0.5,
            tol: 1e-11,
            ..GroundConfig::default()
        };
        let g = imaginary_time_ground_nbody(&h, &psi0, &cfg, &KrylovConfig::default()).unwrap();
        // Free ground energy: both particles in (ℓ = 0, k = 0).
        assert!(g.energy <= 2.0 * 2.0 * 1.5 + 1e-12);
        assert!(monotone(&g.energy_trace));
        assert!(g.state.symmetry_defect() < 1e-10);
    }
}
