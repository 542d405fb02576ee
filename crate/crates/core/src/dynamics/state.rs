//! Bosonic N-particle coefficient tensors in the rescaled frame.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::spectral::SingleParticleBasis;
use crate::tensor::{self, Shape};
use crate::{Error, Result};

/// Coefficients of `ψ̃` in the product basis, row-major with particle 0
/// slowest: entry `(s₀, …, s_{N−1})` sits at `Σ_j s_j d^{N−1−j}`.
#[derive(Debug, Clone)]
pub struct ManyBodyState {
    n: usize,
    basis: Arc<SingleParticleBasis>,
    coeffs: Vec<Complex64>,
}

impl ManyBodyState {
    pub fn new(basis: Arc<SingleParticleBasis>, n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("particle number must be positive".into()));
        }
        let expected = basis.dim().pow(n as u32);
        if coeffs.len() != expected {
            return Err(Error::Shape {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self { n, basis, coeffs })
    }

    pub fn zeros(basis: Arc<SingleParticleBasis>, n: usize) -> Result<Self> {
        let len = basis.dim().pow(n as u32);
        Self::new(basis, n, vec![Complex64::new(0.0, 0.0); len])
    }

    /// `⊗_{j<N} u` for a single-particle coefficient vector `u`.
    pub fn product(basis: Arc<SingleParticleBasis>, n: usize, single: &[Complex64]) -> Result<Self> {
        if single.len() != basis.dim() {
            return Err(Error::Shape {
                expected: basis.dim(),
                got: single.len(),
            });
        }
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..n {
            let mut next = Vec::with_capacity(coeffs.len() * single.len());
            for c in &coeffs {
                next.extend(single.iter().map(|u| c * u));
            }
            coeffs = next;
        }
        Self::new(basis, n, coeffs)
    }

    /// Normalised symmetric state with Gaussian random coefficients.
    pub fn random_symmetric(basis: Arc<SingleParticleBasis>, n: usize, seed: u64) -> Result<Self> {
        let len = basis.dim().pow(n as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let shape = Shape::new(basis.dim(), n);
        let mut s = Self::new(basis, n, tensor::symmetrize(&raw, shape))?;
        s.normalize()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn basis(&self) -> &Arc<SingleParticleBasis> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub(crate) fn shape(&self) -> Shape {
        Shape::new(self.basis.dim(), self.n)
    }

    /// Same particle number and an identical single-particle basis.
    pub fn same_space(&self, other: &Self) -> bool {
        self.n == other.n && self.basis.descriptor() == other.basis.descriptor()
    }

    pub fn with_coeffs(&self, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(self.basis.clone(), self.n, coeffs)
    }

    pub fn norm(&self) -> f64 {
        tensor::norm(&self.coeffs)
    }

    /// Divides by the norm and returns the norm before normalisation.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::Precondition(format!("cannot normalise a state of norm {norm}")));
        }
        self.coeffs.iter_mut().for_each(|c| *c /= norm);
        Ok(norm)
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same(other)?;
        Ok(tensor::inner(&self.coeffs, &other.coeffs))
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check_same(other)?;
        Ok(tensor::diff_norm(&self.coeffs, &other.coeffs))
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.coeffs.len(),
                got: other.coeffs.len(),
            })
        }
    }

    /// Exchange particles `i` and `j` (0-based).
    pub fn transposed(&self, i: usize, j: usize) -> Result<Self> {
        if i >= self.n || j >= self.n {
            return Err(Error::Domain(format!("particle index out of range for N = {}", self.n)));
        }
        let coeffs = tensor::transpose(&self.coeffs, self.shape(), i, j);
        self.with_coeffs(coeffs)
    }

    pub fn symmetrized(&self) -> Self {
        let coeffs = tensor::symmetrize(&self.coeffs, self.shape());
        Self {
            coeffs,
            ..self.clone()
        }
    }

    /// `‖ψ − Sym ψ‖`.
    pub fn symmetry_defect(&self) -> f64 {
        tensor::diff_norm(&self.coeffs, &tensor::symmetrize(&self.coeffs, self.shape()))
    }
}
