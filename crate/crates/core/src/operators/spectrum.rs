//! Dense symmetric-subspace blocks of `H̃` at fixed total longitudinal momentum.
//!
//! The pair interaction conserves `Σ_j p_j`, so on bosonic states `H̃`
//! decomposes into blocks spanned by the normalised symmetrisations
//! `|S⟩ = D^{-1/2} Σ_{u ∈ orbit(S)} |u⟩` of sorted multi-indices `S`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::hamiltonian::HamiltonianSpec;
use crate::spectral::SingleParticleBasis;
use crate::tensor::{permutations, Shape};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct SymmetricBlock {
    momentum: i64,
    /// Sorted multi-index of each basis vector.
    members: Vec<Vec<usize>>,
    /// Distinct permutations of each member, as digit vectors.
    orbits: Vec<Vec<Vec<usize>>>,
    shape: Shape,
}

impl SymmetricBlock {
    pub fn momentum(&self) -> i64 {
        self.momentum
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// `c_S = ⟨S|ψ⟩`.
    pub fn project(&self, psi: &[Complex64]) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim(),
            self.orbits.iter().map(|orbit| {
                let scale = 1.0 / (orbit.len() as f64).sqrt();
                orbit.iter().map(|u| psi[self.shape.compose(u)]).sum::<Complex64>() * scale
            }),
        )
    }

    /// `out += Σ_S c_S |S⟩`.
    pub fn embed(&self, coeffs: &DVector<Complex64>, out: &mut [Complex64]) {
        for (orbit, c) in self.orbits.iter().zip(coeffs.iter()) {
            let v = c / (orbit.len() as f64).sqrt();
            for u in orbit {
                out[self.shape.compose(u)] += v;
            }
        }
    }

    /// Diagonal of a product-basis diagonal operator `f(u)` compressed to the
    /// block: `(1/D) Σ_{u ∈ orbit(S)} f(u)`.
    pub fn diagonal_average(&self, f: impl Fn(&[usize]) -> f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.orbits
                .iter()
                .map(|orbit| orbit.iter().map(|u| f(u)).sum::<f64>() / orbit.len() as f64),
        )
    }

    /// Matrix of `H̃` on the block.
    pub fn hamiltonian(&self, h: &HamiltonianSpec) -> Result<DMatrix<f64>> {
        if h.z_trap_strength().is_some() {
            return Err(Error::Precondition(
                "a longitudinal trap breaks the momentum decomposition".into(),
            ));
        }
        if h.n() != self.shape.n || h.basis().dim() != self.shape.d {
            return Err(Error::Shape {
                expected: self.shape.len(),
                got: h.state_len(),
            });
        }
        let dim = self.dim();
        let one = h.one_body_diagonal();
        let pair = h.pair();
        let n = self.shape.n;
        let mut m = DMatrix::zeros(dim, dim);
        for a in 0..dim {
            let diag: f64 = self.members[a].iter().map(|&s| one[s]).sum();
            m[(a, a)] += diag;
        }
        if pair.is_zero() || n < 2 {
            return Ok(m);
        }
        for b in 0..dim {
            let v0 = &self.members[b];
            let db = self.orbits[b].len() as f64;
            for a in 0..dim {
                let da = self.orbits[a].len() as f64;
                let mut acc = 0.0;
                for u in &self.orbits[a] {
                    for i in 0..n {
                        for j in i + 1..n {
                            if (0..n).all(|k| k == i || k == j || u[k] == v0[k]) {
                                acc += pair.element(u[i], u[j], v0[i], v0[j]);
                            }
                        }
                    }
                }
                m[(a, b)] += acc * (db / da).sqrt();
            }
        }
        Ok(m)
    }
}

/// All momentum blocks of the bosonic `N`-particle space.
#[derive(Debug, Clone)]
pub struct SymmetricBlocks {
    blocks: Vec<SymmetricBlock>,
    shape: Shape,
}

impl SymmetricBlocks {
    pub fn new(basis: &SingleParticleBasis, n: usize) -> Self {
        let shape = Shape::new(basis.dim(), n);
        let perms = permutations(n);
        let mut grouped: BTreeMap<i64, (Vec<Vec<usize>>, Vec<Vec<Vec<usize>>>)> = BTreeMap::new();
        let mut current = vec![0usize; n];
        loop {
            let p: i64 = current.iter().map(|&s| basis.momentum_index(s)).sum();
            let mut orbit: Vec<Vec<usize>> = perms
                .iter()
                .map(|perm| perm.iter().map(|&k| current[k]).collect())
                .collect();
            orbit.sort();
            orbit.dedup();
            let entry = grouped.entry(p).or_default();
            entry.0.push(current.clone());
            entry.1.push(orbit);
            // Next nondecreasing multi-index.
            let mut pos = n;
            while pos > 0 && current[pos - 1] == shape.d - 1 {
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
            let v = current[pos - 1] + 1;
            for slot in current.iter_mut().skip(pos - 1) {
                *slot = v;
            }
        }
        let blocks = grouped
            .into_iter()
            .map(|(momentum, (members, orbits))| SymmetricBlock {
                momentum,
                members,
                orbits,
                shape,
            })
            .collect();
        Self { blocks, shape }
    }

    pub fn blocks(&self) -> &[SymmetricBlock] {
        &self.blocks
    }

    /// Total dimension of the symmetric subspace.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(SymmetricBlock::dim).sum()
    }

    pub fn state_len(&self) -> usize {
        self.shape.len()
    }
}

/// Eigen-decomposition of `H̃` on one block.
#[derive(Debug, Clone)]
pub struct BlockSpectrum {
    pub momentum: i64,
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<f64>,
}

/// Spectral decomposition of `H̃` on the whole bosonic space.
pub fn symmetric_spectrum(h: &HamiltonianSpec, blocks: &SymmetricBlocks) -> Result<Vec<BlockSpectrum>> {
    blocks
        .blocks()
        .iter()
        .map(|b| {
            let m = b.hamiltonian(h)?;
            let eig = SymmetricEigen::new(m);
            Ok(BlockSpectrum {
                momentum: b.momentum(),
                eigenvalues: eig.eigenvalues,
                eigenvectors: eig.eigenvectors,
            })
        })
        .collect()
}

/// The `count` lowest eigenvectors of `H̃` on the bosonic space as raw tensors,
/// with their eigenvalues.
pub fn lowest_eigenstates(
    h: &HamiltonianSpec,
    blocks: &SymmetricBlocks,
    spectra: &[BlockSpectrum],
    count: usize,
) -> Vec<(f64, Vec<Complex64>)> {
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (bi, s) in spectra.iter().enumerate() {
        for (i, &e) in s.eigenvalues.iter().enumerate() {
            all.push((e, bi, i));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.into_iter()
        .take(count)
        .map(|(e, bi, i)| {
            let block = &blocks.blocks()[bi];
            let col = spectra[bi].eigenvectors.column(i);
            let coeffs = DVector::from_iterator(col.len(), col.iter().map(|&v| Complex64::new(v, 0.0)));
            let mut out = vec![Complex64::new(0.0, 0.0); h.state_len()];
            block.embed(&coeffs, &mut out);
            (e, out)
        })
        .collect()
}
