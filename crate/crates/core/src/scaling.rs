//! Closed-form scaling windows and coupling constants.
//!
//! The admissible joint limit `N, ω → ∞` is restricted to
//! `C₁ N^{v₁(β)} ≤ ω ≤ C₂ N^{v₂(β)}` for the dynamics, and to the wider
//! `C₁ N^{v₁(β)} ≤ ω ≤ C₂ N^{v_E(β)}` for the energy estimate alone.

use serde::{Deserialize, Serialize};

use crate::operators::PotentialSpec;
use crate::spectral::gauss_hermite;
use crate::{Error, Result};

/// Upper end of the admissible interaction-range exponent.
pub const BETA_MAX: f64 = 3.0 / 7.0;

/// One term inside the `min(...)` of the upper exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundTerm {
    Finite(f64),
    /// The `∞ · 1_{β<1/5}` branch.
    Infinite,
}

impl BoundTerm {
    pub fn value(self) -> f64 {
        match self {
            BoundTerm::Finite(v) => v,
            BoundTerm::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, BoundTerm::Finite(v) if v.is_finite())
    }
}

/// Identifies which term of the upper exponent binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperTerm {
    /// `(1 − β)/β`
    Kinetic,
    /// `(3/5 − β)/(β − 1/5)` for `β ≥ 1/5`, `+∞` below.
    SelfInteraction,
    /// `2β/(1 − 2β)`, an exclusive bound.
    Collision,
    /// `(7/8 − β)/β`
    Potential,
}

/// The upper exponent together with the term that realises the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperExponent {
    pub value: f64,
    /// True when the binding term is the exclusive `2β/(1−2β)−` bound.
    pub strict: bool,
    pub binding: UpperTerm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub beta: f64,
    pub v1: f64,
    pub v2_value: f64,
    pub v2_strict: bool,
    pub ve_value: f64,
}

impl ScalingExponents {
    pub fn new(beta: f64) -> Result<Self> {
        let v2 = v2(beta)?;
        Ok(Self {
            beta,
            v1: v1(beta)?,
            v2_value: v2.value,
            v2_strict: v2.strict,
            ve_value: ve(beta)?,
        })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 && beta < BETA_MAX {
        Ok(())
    } else {
        Err(Error::Domain(format!("beta = {beta} outside (0, 3/7)")))
    }
}

/// `v₁(β) = β/(1−β)`.
pub fn v1(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(beta / (1.0 - beta))
}

/// The four terms of `v₂(β)` in order: kinetic, self-interaction, collision, potential.
pub fn v2_terms(beta: f64) -> Result<[BoundTerm; 4]> {
    check_beta(beta)?;
    if beta >= 0.5 {
        return Err(Error::Domain(format!(
            "beta = {beta}: collision term 2β/(1−2β) undefined"
        )));
    }
    let [kinetic, self_int, potential] = ve_terms(beta)?;
    let collision = BoundTerm::Finite(2.0 * beta / (1.0 - 2.0 * beta));
    Ok([kinetic, self_int, collision, potential])
}

/// The three terms of `v_E(β)`: kinetic, self-interaction, potential.
pub fn ve_terms(beta: f64) -> Result<[BoundTerm; 3]> {
    check_beta(beta)?;
    let kinetic = BoundTerm::Finite((1.0 - beta) / beta);
    let self_int = if beta >= 0.2 {
        let denom = beta - 0.2;
        if denom == 0.0 {
            BoundTerm::Infinite
        } else {
            BoundTerm::Finite((0.6 - beta) / denom)
        }
    } else {
        BoundTerm::Infinite
    };
    let potential = BoundTerm::Finite((0.875 - beta) / beta);
    Ok([kinetic, self_int, potential])
}

/// `v₂(β)`, the upper exponent of the dynamics window.
pub fn v2(beta: f64) -> Result<UpperExponent> {
    let terms = v2_terms(beta)?;
    let labels = [
        UpperTerm::Kinetic,
        UpperTerm::SelfInteraction,
        UpperTerm::Collision,
        UpperTerm::Potential,
    ];
    let mut best = (f64::INFINITY, UpperTerm::Kinetic);
    for (term, label) in terms.iter().zip(labels) {
        if term.value() < best.0 {
            best = (term.value(), label);
        }
    }
    // An exclusive bound that ties the minimum still makes the end open.
    let strict = terms[2].value() <= best.0;
    Ok(UpperExponent {
        value: best.0,
        strict,
        binding: if strict { UpperTerm::Collision } else { best.1 },
    })
}

/// `v_E(β)`, the upper exponent of the energy-estimate window.
pub fn ve(beta: f64) -> Result<f64> {
    Ok(ve_terms(beta)?
        .iter()
        .map(|t| t.value())
        .fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowMode {
    Dynamics,
    EnergyOnly,
}

/// Admissible interval of `ω` for a given particle number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaWindow {
    pub beta: f64,
    pub n: usize,
    pub mode: WindowMode,
    pub v1: f64,
    pub v_upper: f64,
    pub lower: f64,
    pub upper: f64,
    pub upper_open: bool,
}

impl OmegaWindow {
    pub fn is_empty(&self) -> bool {
        if self.upper_open {
            self.lower >= self.upper
        } else {
            self.lower > self.upper
        }
    }

    /// Closed endpoints are matched up to a relative rounding slack of `1e-12`.
    pub fn contains(&self, omega: f64) -> bool {
        const SLACK: f64 = 1e-12;
        let below_upper = if self.upper_open {
            omega < self.upper
        } else {
            omega <= self.upper * (1.0 + SLACK)
        };
        omega >= self.lower * (1.0 - SLACK) && below_upper
    }

    /// Geometric middle `C-weighted N^{(v₁ + v_upper)/2}` of the window.
    pub fn geometric_middle(&self) -> f64 {
        (self.lower * self.upper).sqrt()
    }
}

/// `[C₁ N^{v₁}, C₂ N^{v₂ or v_E}]`, open at the top when the strict term binds.
pub fn omega_window(beta: f64, n: usize, c1: f64, c2: f64, mode: WindowMode) -> Result<OmegaWindow> {
    if n < 2 {
        return Err(Error::Precondition(format!("N = {n} < 2")));
    }
    if !(c1 > 0.0 && c2 > 0.0) {
        return Err(Error::Precondition("window constants must be positive".into()));
    }
    let v1 = v1(beta)?;
    let (v_upper, upper_open) = match mode {
        WindowMode::Dynamics => {
            let u = v2(beta)?;
            (u.value, u.strict)
        }
        WindowMode::EnergyOnly => (ve(beta)?, false),
    };
    let nf = n as f64;
    Ok(OmegaWindow {
        beta,
        n,
        mode,
        v1,
        v_upper,
        lower: c1 * nf.powf(v1),
        upper: c2 * nf.powf(v_upper),
        upper_open,
    })
}

/// Coupling constants of the 3D to 1D reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    /// `|∫V|`
    pub b0: f64,
    /// `∫|h|⁴ d²x`, by 2D Gauss–Hermite quadrature.
    pub h_quartic: f64,
    /// Effective 1D coupling `b0 · ∫|h|⁴`.
    pub c_eff: f64,
    /// `g = 8π a ω₀ₓ ∫|h|⁴`.
    pub g: f64,
    /// Scattering length approximation `(a/8π) ∫V`, valid for `β < 1`.
    pub scat: f64,
}

/// Number of Gauss–Hermite nodes per axis for `∫|h|⁴`.
const QUARTIC_NODES: usize = 48;

/// `∫_{ℝ²} |h(x)|⁴ dx` by tensor Gauss–Hermite quadrature.
pub fn h_quartic_integral() -> Result<f64> {
    let rule = gauss_hermite(QUARTIC_NODES)?;
    let psi0 = |x: f64| std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    let axis: f64 = rule
        .nodes
        .iter()
        .zip(&rule.scaled_weights)
        .map(|(&x, &w)| w * psi0(x).powi(4))
        .sum();
    Ok(axis * axis)
}

pub fn coupling_report(potential: &PotentialSpec, a: f64, omega0x: f64) -> Result<CouplingReport> {
    let integral = potential.integral();
    if integral > 0.0 {
        return Err(Error::Precondition(format!(
            "pair interaction must have nonpositive integral, got {integral}"
        )));
    }
    let h_quartic = h_quartic_integral()?;
    let b0 = integral.abs();
    Ok(CouplingReport {
        b0,
        h_quartic,
        c_eff: b0 * h_quartic,
        g: 8.0 * std::f64::consts::PI * a * omega0x * h_quartic,
        scat: a / (8.0 * std::f64::consts::PI) * integral,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{GaussianTerm, PotentialSpec};
    use std::f64::consts::PI;

    #[test]
    fn v1_examples() {
        assert!(v1(1e-9).unwrap() < 1e-8);
        assert!((v1(0.25).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((v1(1.0 / 3.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(v1(0.0).is_err());
        assert!(v1(0.5).is_err());
    }

    #[test]
    fn v2_examples() {
        let u = v2(0.25).unwrap();
        assert!((u.value - 1.0).abs() < 1e-15 && u.strict);
        let u = v2(0.1).unwrap();
        assert!((u.value - 0.25).abs() < 1e-15 && u.strict);
        let u = v2(0.4).unwrap();
        assert!((u.value - 1.0).abs() < 1e-12 && !u.strict);
        assert_eq!(u.binding, UpperTerm::SelfInteraction);
    }

    #[test]
    fn indicator_branch_is_infinite_at_one_fifth() {
        let t = ve_terms(0.2).unwrap();
        assert_eq!(t[1], BoundTerm::Infinite);
        let t = ve_terms(0.1).unwrap();
        assert_eq!(t[1], BoundTerm::Infinite);
        assert!((ve(0.2).unwrap() - 3.375).abs() < 1e-12);
    }

    #[test]
    fn ve_examples() {
        assert!((ve(0.25).unwrap() - 2.5).abs() < 1e-15);
        assert!((ve(0.1).unwrap() - 7.75).abs() < 1e-15);
        assert!((ve(1.0 / 3.0).unwrap() - 13.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn window_examples() {
        let w = omega_window(0.25, 16, 1.0, 1.0, WindowMode::Dynamics).unwrap();
        assert!((w.lower - 16f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((w.upper - 16.0).abs() < 1e-12);
        assert!(w.upper_open && !w.contains(16.0) && w.contains(15.999));
        let w = omega_window(0.25, 16, 1.0, 1.0, WindowMode::EnergyOnly).unwrap();
        assert!((w.upper - 1024.0).abs() < 1e-9);
        assert!(!w.upper_open && w.contains(1024.0));
        let w = omega_window(0.4, 4, 1.0, 1.0, WindowMode::Dynamics).unwrap();
        assert!((w.lower - 4f64.powf(2.0 / 3.0)).abs() < 1e-12);
        assert!((w.upper - 4.0).abs() < 1e-12);
        assert!(!w.upper_open && w.contains(4.0));
        assert!(omega_window(0.25, 1, 1.0, 1.0, WindowMode::Dynamics).is_err());
    }

    #[test]
    fn empty_window_is_signalled() {
        let w = omega_window(0.25, 16, 100.0, 1.0, WindowMode::Dynamics).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn coupling_examples() {
        let depth = 0.7;
        let width = 0.8;
        let v = PotentialSpec::new(vec![GaussianTerm::attractive(depth, width)], 0.25).unwrap();
        let r = coupling_report(&v, 0.01, 3.0).unwrap();
        let analytic = depth * (2.0 * PI).powf(1.5) * width.powi(3);
        assert!((r.b0 - analytic).abs() < 1e-12);
        assert!((r.h_quartic - 1.0 / (2.0 * PI)).abs() < 1e-10);
        assert_eq!(r.c_eff, r.b0 * r.h_quartic);
        assert!((r.g - 8.0 * PI * 0.01 * 3.0 * r.h_quartic).abs() < 1e-15);
        assert!((r.scat + 0.01 / (8.0 * PI) * analytic).abs() < 1e-15);

        let zero = PotentialSpec::new(vec![], 0.25).unwrap();
        let r = coupling_report(&zero, 0.01, 1.0).unwrap();
        assert_eq!(r.b0, 0.0);
        assert_eq!(r.c_eff, 0.0);

        let repulsive = PotentialSpec::new(vec![GaussianTerm::repulsive(1.0, 1.0)], 0.25).unwrap();
        assert!(matches!(coupling_report(&repulsive, 0.01, 1.0), Err(Error::Precondition(_))));
    }
}
