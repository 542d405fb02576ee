//! Factorization gaps, sector weights and the limiting-structure gap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::{trace_x, DensityMatrix, Kernel, DENSE_LIMIT};
use super::metrics::{hermitian_trace_norm, kernel_trace_distance, product_trace_norm};
use crate::dynamics::{ManyBodyState, NLSField};
use crate::operators::{sector_project, SectorIndex};
use crate::{Error, Result};

/// `Tr|γ^{(1)} − |h⊗φ⟩⟨h⊗φ||`.
pub fn factorization_gap(gamma1: &DensityMatrix, phi: &NLSField) -> Result<f64> {
    if gamma1.k() != 1 {
        return Err(Error::Precondition(format!("expected a one-particle density, got k = {}", gamma1.k())));
    }
    let basis = gamma1.basis();
    if basis.z_grid() != phi.grid() {
        return Err(Error::Precondition("NLS grid differs from the longitudinal basis grid".into()));
    }
    let mass = phi.mass();
    if (mass - 1.0).abs() > 1e-8 {
        return Err(Error::Precondition(format!("φ has mass {mass}")));
    }
    let v = basis.embed_ground(&phi.coefficients())?;
    let target = Kernel::from_factor(DMatrix::from_column_slice(v.len(), 1, &v));
    kernel_trace_distance(&gamma1.kernel, &target)
}

/// `Tr|γ^{(1)} − |h⟩⟨h| ⊗ Tr_x γ^{(1)}|`.
pub fn limiting_structure_gap(gamma1: &DensityMatrix) -> Result<f64> {
    if gamma1.k() != 1 {
        return Err(Error::Precondition(format!("expected a one-particle density, got k = {}", gamma1.k())));
    }
    let basis = gamma1.basis();
    let gz = trace_x(gamma1)?.to_dense()?;
    let (mz, d) = (basis.mz(), basis.dim());
    // The ground transverse mode is x-index 0, so h ⊗ (·) occupies indices 0..M_z.
    let mut lifted = DMatrix::zeros(d, d);
    for b in 0..mz {
        for a in 0..mz {
            lifted[(basis.index(0, a), basis.index(0, b))] = gz[(a, b)];
        }
    }
    Ok(hermitian_trace_norm(gamma1.to_dense()? - lifted))
}

/// One entry of a sector-weight table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorWeight {
    pub alpha: String,
    /// Right index for two-sided density projections.
    pub beta: Option<String>,
    pub weight: usize,
    pub value: f64,
}

fn sectors_up_to(k: usize, max_weight: usize) -> Vec<SectorIndex> {
    SectorIndex::all(k).into_iter().filter(|a| a.weight() <= max_weight).collect()
}

/// `‖𝒫_α ψ‖` for every `α` with `|α| ≤ max_weight`.
pub fn sector_weights(psi: &ManyBodyState, max_weight: usize) -> Result<Vec<SectorWeight>> {
    sectors_up_to(psi.n(), max_weight)
        .into_iter()
        .map(|alpha| {
            let value = sector_project(psi, &alpha)?.norm();
            Ok(SectorWeight {
                alpha: alpha.to_string(),
                beta: None,
                weight: alpha.weight(),
                value,
            })
        })
        .collect()
}

/// `𝒫_α γ 𝒫_β` as a dense kernel.
pub fn sector_project_density(gamma: &DensityMatrix, alpha: &SectorIndex, beta: &SectorIndex) -> Result<DMatrix<Complex64>> {
    for s in [alpha, beta] {
        if s.len() != gamma.k() {
            return Err(Error::Shape {
                expected: gamma.k(),
                got: s.len(),
            });
        }
    }
    let m = gamma.to_dense()?;
    let rows = sector_rows(gamma, alpha);
    let cols = sector_rows(gamma, beta);
    Ok(DMatrix::from_fn(m.nrows(), m.ncols(), |a, b| {
        if rows[a] && cols[b] {
            m[(a, b)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

fn sector_rows(gamma: &DensityMatrix, alpha: &SectorIndex) -> Vec<bool> {
    let basis = gamma.basis().clone();
    gamma.row_mask(|j, s| alpha.admits(&basis, j, s))
}

/// `Tr|𝒫_α γ 𝒫_β|` for every pair with `|α|, |β| ≤ max_weight`.
pub fn sector_weights_marginal(gamma: &DensityMatrix, max_weight: usize) -> Result<Vec<SectorWeight>> {
    let sectors = sectors_up_to(gamma.k(), max_weight);
    let masks: Vec<Vec<bool>> = sectors.iter().map(|s| sector_rows(gamma, s)).collect();
    let mut out = Vec::new();
    for (a, alpha) in sectors.iter().enumerate() {
        for (b, beta) in sectors.iter().enumerate() {
            let value = match &gamma.kernel {
                Kernel::Factored(f) => {
                    let keep = |mask: &[bool]| {
                        let rows: Vec<usize> = (0..f.nrows()).filter(|&i| mask[i]).collect();
                        DMatrix::from_fn(rows.len(), f.ncols(), |i, c| f[(rows[i], c)])
                    };
                    let (fa, fb) = (keep(&masks[a]), keep(&masks[b]));
                    if fa.nrows() == 0 || fb.nrows() == 0 {
                        0.0
                    } else {
                        product_trace_norm(fa, fb)
                    }
                }
                Kernel::Dense(m) => {
                    let rows: Vec<usize> = (0..m.nrows()).filter(|&i| masks[a][i]).collect();
                    let cols: Vec<usize> = (0..m.ncols()).filter(|&i| masks[b][i]).collect();
                    if rows.is_empty() || cols.is_empty() {
                        0.0
                    } else {
                        let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])]);
                        sub.svd(false, false).singular_values.iter().sum()
                    }
                }
            };
            out.push(SectorWeight {
                alpha: alpha.to_string(),
                beta: Some(beta.to_string()),
                weight: alpha.weight() + beta.weight(),
                value,
            });
        }
    }
    if gamma.dim() > DENSE_LIMIT && !gamma.is_factored() {
        return Err(Error::TooLarge(format!("dense kernel of dimension {}", gamma.dim())));
    }
    Ok(out)
}
