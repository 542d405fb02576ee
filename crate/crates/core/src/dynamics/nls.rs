//! Split-step solver for the 1D focusing cubic NLS `i∂_tφ = −∂_z²φ − c|φ|²φ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::evolve::{check_times, Trajectory};
use super::krylov::PropagationStats;
use crate::spectral::FourierGrid1D;
use crate::{Error, Result};

/// A field on a periodic grid with its coupling and current time.
#[derive(Debug, Clone, PartialEq)]
pub struct NLSField {
    grid: FourierGrid1D,
    values: Vec<Complex64>,
    coupling: f64,
    time: f64,
}

impl NLSField {
    pub fn new(grid: FourierGrid1D, values: Vec<Complex64>, coupling: f64) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::Shape {
                expected: grid.points(),
                got: values.len(),
            });
        }
        if !coupling.is_finite() {
            return Err(Error::Domain(format!("coupling {coupling} is not finite")));
        }
        Ok(Self {
            grid,
            values,
            coupling,
            time: 0.0,
        })
    }

    /// `η√(2/c) sech(η(z − z₀)) e^{iη²t}` at `t = 0`, with mass `4η/c`.
    pub fn soliton(grid: FourierGrid1D, eta: f64, coupling: f64, center: f64) -> Result<Self> {
        if !(eta > 0.0 && coupling > 0.0) {
            return Err(Error::Domain("soliton needs η > 0 and a focusing coupling c > 0".into()));
        }
        let values = soliton_profile(&grid, eta, coupling, center, 0.0);
        Self::new(grid, values, coupling)
    }

    /// Gaussian `e^{−z²/(2w²)}` normalised to unit mass on the grid.
    pub fn gaussian(grid: FourierGrid1D, width: f64, coupling: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::Domain(format!("width {width} must be positive")));
        }
        let mut values: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|z| Complex64::new((-z * z / (2.0 * width * width)).exp(), 0.0))
            .collect();
        let n = grid.norm(&values);
        values.iter_mut().for_each(|v| *v /= n);
        Self::new(grid, values, coupling)
    }

    pub fn grid(&self) -> &FourierGrid1D {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Centred Fourier coefficients.
    pub fn coefficients(&self) -> Vec<Complex64> {
        self.grid.forward(&self.values).expect("length checked at construction")
    }

    /// `∫|φ|²`.
    pub fn mass(&self) -> f64 {
        self.grid.norm(&self.values).powi(2)
    }

    /// `∫|φ′|²`, spectrally.
    pub fn kinetic(&self) -> f64 {
        let k = self.grid.wavenumbers();
        self.coefficients().iter().zip(&k).map(|(c, k)| k * k * c.norm_sqr()).sum()
    }

    /// `∫|φ|⁴`.
    pub fn quartic(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr().powi(2)).sum::<f64>() * self.grid.spacing()
    }

    /// `∫|φ′|² − (c/2)∫|φ|⁴`.
    pub fn energy(&self) -> f64 {
        self.kinetic() - 0.5 * self.coupling * self.quartic()
    }

    /// `Im ∫φ̄φ′`.
    pub fn momentum(&self) -> f64 {
        let k = self.grid.wavenumbers();
        self.coefficients().iter().zip(&k).map(|(c, k)| k * c.norm_sqr()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `‖φ − ψ‖_{L²}` on the shared grid.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::Precondition("fields live on different grids".into()));
        }
        let diff: Vec<Complex64> = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(self.grid.norm(&diff))
    }

    /// `∫z²|φ|²`, the spatial spread.
    pub fn variance(&self) -> f64 {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(z, v)| z * z * v.norm_sqr())
            .sum::<f64>()
            * self.grid.spacing()
    }

    fn with(&self, values: Vec<Complex64>, time: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values,
            coupling: self.coupling,
            time,
        }
    }
}

/// Exact soliton `η√(2/c) sech(η(z − z₀)) e^{iη²t}` sampled on the grid.
pub fn soliton_profile(grid: &FourierGrid1D, eta: f64, coupling: f64, center: f64, t: f64) -> Vec<Complex64> {
    let amp = eta * (2.0 / coupling).sqrt();
    let phase = Complex64::from_polar(1.0, eta * eta * t);
    grid.nodes()
        .iter()
        .map(|z| phase * (amp / (eta * (z - center)).cosh()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlsConfig {
    /// Largest time step.
    pub dt: f64,
    /// Blow-up ceiling as a multiple of the initial sup norm.
    pub ceiling_factor: f64,
    /// Accepted `|∫|φ₀|² − 1|`.
    pub mass_tolerance: f64,
}

impl Default for NlsConfig {
    fn default() -> Self {
        Self {
            dt: 5e-4,
            ceiling_factor: 1e3,
            mass_tolerance: 1e-8,
        }
    }
}

/// Strang-split propagation: half kinetic step in Fourier space, full
/// nonlinear phase on the grid, half kinetic step. Negative `times` are not
/// accepted; use [`nls_step_to`] to run backwards.
pub fn nls_evolve(phi0: &NLSField, times: &[f64], cfg: &NlsConfig) -> Result<Trajectory<NLSField>> {
    check_times(times)?;
    check_initial(phi0, cfg)?;
    let ceiling = cfg.ceiling_factor * phi0.sup_norm();
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        samples: Vec::with_capacity(times.len()),
        norm_drift: Vec::with_capacity(times.len()),
        energy: Vec::with_capacity(times.len()),
        stats: PropagationStats::default(),
    };
    let mass0 = phi0.mass();
    let mut phi = phi0.clone();
    let mut drift: f64 = 0.0;
    for &t in times {
        if t > phi.time {
            phi = step_to(&phi, t, cfg.dt, ceiling, &mut traj.stats)?;
        }
        drift = drift.max((phi.mass() - mass0).abs());
        traj.norm_drift.push(drift);
        traj.energy.push(phi.energy());
        traj.samples.push(phi.clone());
        traj.times.push(t);
    }
    Ok(traj)
}

/// Propagates `φ` from its current time to `target` (either direction).
pub fn nls_step_to(phi: &NLSField, target: f64, cfg: &NlsConfig) -> Result<NLSField> {
    check_initial(phi, cfg)?;
    let ceiling = cfg.ceiling_factor * phi.sup_norm();
    step_to(phi, target, cfg.dt, ceiling, &mut PropagationStats::default())
}

fn check_initial(phi: &NLSField, cfg: &NlsConfig) -> Result<()> {
    if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
        return Err(Error::StepSize(format!("time step {} must be positive", cfg.dt)));
    }
    let mass = phi.mass();
    if (mass - 1.0).abs() > cfg.mass_tolerance {
        return Err(Error::Precondition(format!("initial mass {mass} is not 1")));
    }
    // Both phase rotations per step must stay below π.
    let kmax = std::f64::consts::PI * phi.grid.points() as f64 / phi.grid.box_length();
    let stiffness = (kmax * kmax).max(phi.coupling.abs() * phi.sup_norm().powi(2));
    if cfg.dt * stiffness > std::f64::consts::PI {
        return Err(Error::StepSize(format!(
            "dt = {} does not resolve the stiffness {stiffness:.3e}",
            cfg.dt
        )));
    }
    Ok(())
}

fn step_to(phi: &NLSField, target: f64, dt: f64, ceiling: f64, stats: &mut PropagationStats) -> Result<NLSField> {
    let span = target - phi.time;
    if span == 0.0 {
        return Ok(phi.clone());
    }
    let steps = (span.abs() / dt).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let grid = &phi.grid;
    let half_kinetic: Vec<Complex64> = grid
        .wavenumbers()
        .iter()
        .map(|k| Complex64::from_polar(1.0, -k * k * 0.5 * h))
        .collect();
    let c = phi.coupling;
    let mut coeffs = grid.forward(&phi.values)?;
    for step in 0..steps {
        for (a, f) in coeffs.iter_mut().zip(&half_kinetic) {
            *a *= f;
        }
        let mut values = grid.inverse(&coeffs)?;
        let mut sup: f64 = 0.0;
        for v in values.iter_mut() {
            let r2 = v.norm_sqr();
            sup = sup.max(r2);
            *v *= Complex64::from_polar(1.0, c * r2 * h);
        }
        let sup = sup.sqrt();
        if !sup.is_finite() || sup > ceiling {
            return Err(Error::BlowUp {
                sup,
                ceiling,
                time: phi.time + h * step as f64,
            });
        }
        coeffs = grid.forward(&values)?;
        for (a, f) in coeffs.iter_mut().zip(&half_kinetic) {
            *a *= f;
        }
        stats.steps += 1;
    }
    Ok(phi.with(grid.inverse(&coeffs)?, target))
}
