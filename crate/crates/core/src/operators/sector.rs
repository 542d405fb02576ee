//! Transverse ground/excited sector projections `𝒫_α`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::ManyBodyState;
use crate::spectral::SingleParticleBasis;
use crate::tensor::Shape;
use crate::{Error, Result};

/// Per-particle flags: `false` selects the transverse ground level, `true`
/// selects levels `ℓ ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorIndex(Vec<bool>);

impl SectorIndex {
    pub fn new(flags: Vec<bool>) -> Self {
        Self(flags)
    }

    pub fn ground(k: usize) -> Self {
        Self(vec![false; k])
    }

    /// All `2^k` sectors, ordered by the binary value of the flags.
    pub fn all(k: usize) -> Vec<Self> {
        (0..1usize << k)
            .map(|bits| Self((0..k).map(|j| bits >> (k - 1 - j) & 1 == 1).collect()))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flags(&self) -> &[bool] {
        &self.0
    }

    /// `|α|`, the number of excited particles.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&f| f).count()
    }

    /// Whether the single-particle index `s` on particle `j` belongs to the sector.
    pub(crate) fn admits(&self, basis: &SingleParticleBasis, j: usize, s: usize) -> bool {
        (basis.level(s) >= 1) == self.0[j]
    }

    /// Membership of every entry of a tensor with the given shape.
    pub(crate) fn mask(&self, basis: &SingleParticleBasis, shape: Shape) -> Vec<bool> {
        let excited: Vec<bool> = (0..shape.d).map(|s| basis.level(s) >= 1).collect();
        (0..shape.len())
            .map(|idx| {
                let mut rem = idx;
                for j in (0..shape.n).rev() {
                    if excited[rem % shape.d] != self.0[j] {
                        return false;
                    }
                    rem /= shape.d;
                }
                true
            })
            .collect()
    }
}

impl fmt::Display for SectorIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// `𝒫_α ψ`.
pub fn sector_project(psi: &ManyBodyState, alpha: &SectorIndex) -> Result<ManyBodyState> {
    if alpha.len() != psi.n() {
        return Err(Error::Shape {
            expected: psi.n(),
            got: alpha.len(),
        });
    }
    let mask = alpha.mask(psi.basis(), psi.shape());
    let coeffs = psi
        .coeffs()
        .iter()
        .zip(&mask)
        .map(|(c, &keep)| if keep { *c } else { num_complex::Complex64::new(0.0, 0.0) })
        .collect();
    psi.with_coeffs(coeffs)
}
