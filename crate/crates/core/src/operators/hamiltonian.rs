//! The rescaled N-body Hamiltonian
//! `H̃ = Σ_j [−∂²_{z_j} + ω(−Δ_{x_j} + |x_j|²)] + N⁻¹ Σ_{i<j} V_{N,ω}(r_i − r_j)`
//! and the diagonal weights `S̃_j`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::pair::PairOperator;
use super::potential::PotentialSpec;
use crate::dynamics::ManyBodyState;
use crate::spectral::SingleParticleBasis;
use crate::tensor::Shape;
use crate::{Error, Result};

/// Default absolute constant in `α = C₃‖V‖²_{L¹} + 1`.
pub const DEFAULT_C3: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct HamiltonianSpec {
    n: usize,
    omega: f64,
    potential: PotentialSpec,
    basis: Arc<SingleParticleBasis>,
    c3: f64,
    one_body: Vec<f64>,
    stilde_sq: Vec<f64>,
    pair: PairOperator,
    z_trap: Option<ZTrap>,
    full_diagonal: Vec<f64>,
}

/// Longitudinal trap `w² z²` in the Fourier basis (dense `M_z × M_z`).
#[derive(Debug, Clone)]
struct ZTrap {
    strength: f64,
    matrix: Vec<f64>,
}

impl HamiltonianSpec {
    pub fn new(
        n: usize,
        omega: f64,
        potential: PotentialSpec,
        basis: Arc<SingleParticleBasis>,
        c3: f64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("particle number must be positive".into()));
        }
        if !(omega.is_finite() && omega >= 1.0) {
            return Err(Error::Precondition(format!("confinement ω = {omega} must be at least 1")));
        }
        if !(c3.is_finite() && c3 >= 0.0) {
            return Err(Error::Precondition(format!("C3 = {c3} must be nonnegative")));
        }
        let scale = 1.0 / n as f64;
        let gaussians = if n >= 2 { potential.scaled_terms(n, omega) } else { Vec::new() };
        let pair = PairOperator::new(&basis, &gaussians, scale)?;
        let one_body = basis.one_body_diagonal(omega);
        let stilde_sq = basis.stilde_sq_diagonal(omega);
        let shape = Shape::new(basis.dim(), n);
        let full_diagonal = sum_diagonal(&one_body, shape);
        Ok(Self {
            n,
            omega,
            potential,
            basis,
            c3,
            one_body,
            stilde_sq,
            pair,
            z_trap: None,
            full_diagonal,
        })
    }

    /// Adds the longitudinal trap `Σ_j strength · z_j²`.
    pub fn with_z_trap(mut self, strength: f64) -> Result<Self> {
        if !(strength.is_finite() && strength >= 0.0) {
            return Err(Error::Precondition(format!("trap strength {strength} must be nonnegative")));
        }
        let grid = self.basis.z_grid();
        let mz = grid.points();
        let l = grid.box_length();
        let mut matrix = vec![0.0; mz * mz];
        for p in 0..mz {
            for q in 0..mz {
                matrix[p * mz + q] = if p == q {
                    l * l / 12.0
                } else {
                    let dq = p as i64 - q as i64;
                    let kappa = 2.0 * PI * dq as f64 / l;
                    let sign = if dq.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    2.0 * sign / (kappa * kappa)
                } * strength;
            }
        }
        self.z_trap = Some(ZTrap { strength, matrix });
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn basis(&self) -> &Arc<SingleParticleBasis> {
        &self.basis
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }

    /// `α = C₃‖V‖²_{L¹} + 1`.
    pub fn alpha(&self) -> f64 {
        self.c3 * self.potential.l1_norm().powi(2) + 1.0
    }

    pub fn z_trap_strength(&self) -> Option<f64> {
        self.z_trap.as_ref().map(|t| t.strength)
    }

    pub fn has_interaction(&self) -> bool {
        !self.pair.is_zero()
    }

    pub fn pair(&self) -> &PairOperator {
        &self.pair
    }

    pub fn one_body_diagonal(&self) -> &[f64] {
        &self.one_body
    }

    pub fn stilde_sq_diagonal(&self) -> &[f64] {
        &self.stilde_sq
    }

    pub(crate) fn shape(&self) -> Shape {
        Shape::new(self.basis.dim(), self.n)
    }

    pub fn state_len(&self) -> usize {
        self.shape().len()
    }

    pub fn check_state(&self, psi: &ManyBodyState) -> Result<()> {
        if psi.n() != self.n || psi.basis().descriptor() != self.basis.descriptor() {
            return Err(Error::Shape {
                expected: self.state_len(),
                got: psi.coeffs().len(),
            });
        }
        Ok(())
    }

    /// `H̃ψ` on raw coefficients.
    pub fn apply_raw(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let shape = self.shape();
        let mut out = self.pair.apply_all_pairs(psi, shape);
        for ((o, p), e) in out.iter_mut().zip(psi).zip(&self.full_diagonal) {
            *o += p * e;
        }
        if let Some(trap) = &self.z_trap {
            self.apply_z_trap_into(trap, psi, &mut out);
        }
        out
    }

    pub fn apply(&self, psi: &ManyBodyState) -> Result<ManyBodyState> {
        self.check_state(psi)?;
        psi.with_coeffs(self.apply_raw(psi.coeffs()))
    }

    /// `⟨ψ, H̃ψ⟩`.
    pub fn expectation(&self, psi: &ManyBodyState) -> Result<f64> {
        self.check_state(psi)?;
        let h = self.apply_raw(psi.coeffs());
        Ok(crate::tensor::inner(psi.coeffs(), &h).re)
    }

    fn apply_z_trap_into(&self, trap: &ZTrap, psi: &[Complex64], out: &mut [Complex64]) {
        let shape = self.shape();
        let mz = self.basis.mz();
        for j in 0..shape.n {
            let stride = shape.stride(j);
            for base in shape.bases(&[j]) {
                for a in 0..self.basis.mx() {
                    let off = base + a * mz * stride;
                    for p in 0..mz {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for q in 0..mz {
                            acc += psi[off + q * stride] * trap.matrix[p * mz + q];
                        }
                        out[off + p * stride] += acc;
                    }
                }
            }
        }
    }

    /// Entrywise `S̃_j^{power}` on particle `j` (0-based); `power ∈ {1, 2}`.
    pub fn apply_stilde(&self, psi: &ManyBodyState, j: usize, power: u32) -> Result<ManyBodyState> {
        self.check_state(psi)?;
        if j >= self.n {
            return Err(Error::Domain(format!("particle {j} out of range for N = {}", self.n)));
        }
        let diag: Vec<f64> = match power {
            1 => self.stilde_sq.iter().map(|v| v.sqrt()).collect(),
            2 => self.stilde_sq.clone(),
            _ => return Err(Error::Domain(format!("S̃ power {power} not in {{1, 2}}"))),
        };
        psi.with_coeffs(apply_single_diagonal(psi.coeffs(), self.shape(), j, &diag))
    }

    /// `⟨ψ, (α + N⁻¹H̃ − 2ω)^k ψ⟩` by repeated application.
    pub fn energy_moment(&self, psi: &ManyBodyState, k: u32) -> Result<f64> {
        self.shifted_moment(psi, k, self.alpha() - 2.0 * self.omega, 1.0 / self.n as f64)
    }

    /// `⟨ψ, (H̃ − 2Nω)^k ψ⟩`.
    pub fn excitation_moment(&self, psi: &ManyBodyState, k: u32) -> Result<f64> {
        self.shifted_moment(psi, k, -2.0 * self.n as f64 * self.omega, 1.0)
    }

    /// `⟨ψ, (shift + scale·H̃)^k ψ⟩`, using `⟨Bᵐψ, Bᵐψ⟩` for even powers.
    fn shifted_moment(&self, psi: &ManyBodyState, k: u32, shift: f64, scale: f64) -> Result<f64> {
        self.check_state(psi)?;
        if k == 0 {
            return Ok(psi.norm().powi(2));
        }
        let apply = |v: &[Complex64]| -> Vec<Complex64> {
            let mut h = self.apply_raw(v);
            for (o, x) in h.iter_mut().zip(v) {
                *o = *o * scale + x * shift;
            }
            h
        };
        let half = k / 2;
        let mut v = psi.coeffs().to_vec();
        for _ in 0..half {
            v = apply(&v);
        }
        if k % 2 == 0 {
            Ok(crate::tensor::norm(&v).powi(2))
        } else {
            let w = apply(&v);
            Ok(crate::tensor::inner(&v, &w).re)
        }
    }
}

/// `Σ_j e(s_j)` for every entry of the tensor.
pub(crate) fn sum_diagonal(single: &[f64], shape: Shape) -> Vec<f64> {
    let mut out = vec![0.0];
    for _ in 0..shape.n {
        let mut next = Vec::with_capacity(out.len() * single.len());
        for &prev in &out {
            next.extend(single.iter().map(|e| prev + e));
        }
        out = next;
    }
    out
}

/// Multiplies particle `j` by the single-particle diagonal `diag`.
pub(crate) fn apply_single_diagonal(psi: &[Complex64], shape: Shape, j: usize, diag: &[f64]) -> Vec<Complex64> {
    let stride = shape.stride(j);
    psi.iter()
        .enumerate()
        .map(|(idx, v)| v * diag[(idx / stride) % shape.d])
        .collect()
}
