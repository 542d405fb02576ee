//! Trace, Hilbert–Schmidt and weak-type `d_k` distances between densities.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::{DensityMatrix, Kernel, ReducedZDensity, DENSE_LIMIT};
use crate::spectral::SingleParticleBasis;
use crate::{Error, Result};

mod sealed {
    use super::Kernel;
    use crate::Result;

    pub trait HasKernel {
        fn kernel(&self) -> &Kernel;
        fn check_same(&self, other: &Self) -> Result<()>;
    }
}

/// Densities accepted by [`trace_distance`] and [`hs_distance`].
pub trait Marginal: sealed::HasKernel {}

impl sealed::HasKernel for DensityMatrix {
    fn kernel(&self) -> &Kernel {
        &self.kernel
    }
    fn check_same(&self, other: &Self) -> Result<()> {
        self.same_space(other)
    }
}

impl sealed::HasKernel for ReducedZDensity {
    fn kernel(&self) -> &Kernel {
        &self.kernel
    }
    fn check_same(&self, other: &Self) -> Result<()> {
        self.same_space(other)
    }
}

impl Marginal for DensityMatrix {}
impl Marginal for ReducedZDensity {}

/// `Σ|λ|` of a Hermitian matrix.
pub(crate) fn hermitian_trace_norm(m: DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(m).eigenvalues.iter().map(|l| l.abs()).sum()
}

/// Trace norm of `X J X†` with `J = diag(signs)`, via `X = QR`.
pub(crate) fn low_rank_trace_norm(x: DMatrix<Complex64>, signs: &[f64]) -> f64 {
    if x.ncols() >= x.nrows() {
        let xs = DMatrix::from_fn(x.nrows(), x.ncols(), |a, c| x[(a, c)] * signs[c]);
        return hermitian_trace_norm(&xs * x.adjoint());
    }
    let r = x.qr().r();
    let rs = DMatrix::from_fn(r.nrows(), r.ncols(), |a, c| r[(a, c)] * signs[c]);
    hermitian_trace_norm(&rs * r.adjoint())
}

/// Nuclear norm of `A B†` for tall factors.
pub(crate) fn product_trace_norm(a: DMatrix<Complex64>, b: DMatrix<Complex64>) -> f64 {
    let reduce = |m: DMatrix<Complex64>| if m.ncols() < m.nrows() { m.qr().r() } else { m };
    let (ra, rb) = if a.ncols() < a.nrows() && b.ncols() < b.nrows() {
        (reduce(a), reduce(b))
    } else {
        return (a * b.adjoint()).svd(false, false).singular_values.iter().sum();
    };
    (ra * rb.adjoint()).svd(false, false).singular_values.iter().sum()
}

/// Randomised estimate of the trace norm of a Hermitian operator given by
/// its action, from a rank-`rank` range finder with two power iterations.
/// The estimate never exceeds the true value.
pub(crate) fn randomized_trace_norm(
    apply: impl Fn(&DMatrix<Complex64>) -> DMatrix<Complex64>,
    dim: usize,
    rank: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cols = (rank + 10).min(dim);
    let omega = DMatrix::from_fn(dim, cols, |_, _| {
        Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
    });
    let mut q = apply(&omega).qr().q();
    for _ in 0..2 {
        q = apply(&q).qr().q();
    }
    let small = q.adjoint() * apply(&q);
    let herm = (&small + small.adjoint()) * Complex64::new(0.5, 0.0);
    hermitian_trace_norm(herm)
}

fn factor_of(kernel: &Kernel) -> Option<&DMatrix<Complex64>> {
    match kernel {
        Kernel::Factored(f) => Some(f),
        Kernel::Dense(_) => None,
    }
}

/// `Tr|γ₁ − γ₂|`.
pub fn trace_distance<M: Marginal>(g1: &M, g2: &M) -> Result<f64> {
    g1.check_same(g2)?;
    kernel_trace_distance(g1.kernel(), g2.kernel())
}

pub(crate) fn kernel_trace_distance(k1: &Kernel, k2: &Kernel) -> Result<f64> {
    let dim = k1.dim();
    if dim <= DENSE_LIMIT {
        return Ok(hermitian_trace_norm(k1.to_dense()? - k2.to_dense()?));
    }
    match (factor_of(k1), factor_of(k2)) {
        (Some(f1), Some(f2)) => {
            let (r1, r2) = (f1.ncols(), f2.ncols());
            if r1 + r2 <= DENSE_LIMIT {
                let mut x = DMatrix::zeros(dim, r1 + r2);
                x.columns_mut(0, r1).copy_from(f1);
                x.columns_mut(r1, r2).copy_from(f2);
                let signs: Vec<f64> = (0..r1 + r2).map(|c| if c < r1 { 1.0 } else { -1.0 }).collect();
                Ok(low_rank_trace_norm(x, &signs))
            } else {
                let apply = |v: &DMatrix<Complex64>| f1 * (f1.adjoint() * v) - f2 * (f2.adjoint() * v);
                Ok(randomized_trace_norm(apply, dim, DENSE_LIMIT / 8, 0x7d))
            }
        }
        _ => Err(Error::TooLarge(format!("dense kernel of dimension {dim}"))),
    }
}

/// `‖γ₁ − γ₂‖_HS`.
pub fn hs_distance<M: Marginal>(g1: &M, g2: &M) -> Result<f64> {
    g1.check_same(g2)?;
    let (k1, k2) = (g1.kernel(), g2.kernel());
    if k1.dim() <= DENSE_LIMIT {
        let diff = k1.to_dense()? - k2.to_dense()?;
        return Ok(diff.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt());
    }
    match (factor_of(k1), factor_of(k2)) {
        (Some(f1), Some(f2)) => {
            let fro2 = |m: DMatrix<Complex64>| m.iter().map(|c| c.norm_sqr()).sum::<f64>();
            let v = fro2(f1.adjoint() * f1) + fro2(f2.adjoint() * f2) - 2.0 * fro2(f1.adjoint() * f2);
            Ok(v.max(0.0).sqrt())
        }
        _ => Err(Error::TooLarge(format!("dense kernel of dimension {}", k1.dim()))),
    }
}

/// Single-particle spectral projection `{s : |p(s)| ≤ max_momentum, ℓ(s) ≤ max_level}`;
/// the test operator is its k-fold tensor power, so `‖J‖_op = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOperator {
    pub max_momentum: i64,
    pub max_level: usize,
}

/// Finite family `{J_i}` with weights `2^{−i}`, `i = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricConfig {
    pub family: Vec<TestOperator>,
}

impl Default for MetricConfig {
    /// Band limits `|p| ≤ M` and level caps `ℓ ≤ log₂M − 1` for `M ∈ {2, 4, 8}`.
    fn default() -> Self {
        Self {
            family: [2i64, 4, 8]
                .iter()
                .map(|&m| TestOperator {
                    max_momentum: m,
                    max_level: m.trailing_zeros() as usize - 1,
                })
                .collect(),
        }
    }
}

impl MetricConfig {
    pub fn weights(&self) -> Vec<f64> {
        (1..=self.family.len()).map(|i| 0.5f64.powi(i as i32)).collect()
    }
}

fn band_trace_difference(diag1: &[f64], diag2: &[f64], rows: &[bool]) -> f64 {
    diag1
        .iter()
        .zip(diag2)
        .zip(rows)
        .filter(|(_, &keep)| keep)
        .map(|((a, b), _)| a - b)
        .sum::<f64>()
}

fn dk_from_rows(
    k1: &Kernel,
    k2: &Kernel,
    cfg: &MetricConfig,
    rows_of: impl Fn(&TestOperator) -> Vec<bool> + Sync,
) -> Result<f64> {
    if cfg.family.is_empty() {
        return Err(Error::Precondition("empty test-operator family".into()));
    }
    let (d1, d2) = (k1.diagonal(), k2.diagonal());
    let weights = cfg.weights();
    // Collected before summing so the result does not depend on scheduling.
    let terms: Vec<f64> = cfg
        .family
        .par_iter()
        .zip(weights.par_iter())
        .map(|(op, w)| w * band_trace_difference(&d1, &d2, &rows_of(op)).abs())
        .collect();
    Ok(terms.iter().sum())
}

fn band_rows(k: usize, local: usize, admit: impl Fn(usize) -> bool) -> Vec<bool> {
    let shape = crate::tensor::Shape::new(local, k);
    let single: Vec<bool> = (0..local).map(admit).collect();
    (0..shape.len()).map(|idx| shape.digits(idx).iter().all(|&s| single[s])).collect()
}

fn admits(basis: &SingleParticleBasis, op: &TestOperator, s: usize) -> bool {
    basis.momentum_index(s).abs() <= op.max_momentum && basis.level(s) <= op.max_level
}

/// `Σ_i 2^{−i} |Tr J_i(γ₁ − γ₂)|`.
pub fn dk_metric(g1: &DensityMatrix, g2: &DensityMatrix, cfg: &MetricConfig) -> Result<f64> {
    g1.same_space(g2)?;
    let basis = g1.basis().clone();
    dk_from_rows(&g1.kernel, &g2.kernel, cfg, |op| {
        band_rows(g1.k(), basis.dim(), |s| admits(&basis, op, s))
    })
}

/// [`dk_metric`] for longitudinal densities (level caps are ignored).
pub fn dk_metric_z(g1: &ReducedZDensity, g2: &ReducedZDensity, cfg: &MetricConfig) -> Result<f64> {
    g1.same_space(g2)?;
    let grid = g1.grid().clone();
    dk_from_rows(&g1.kernel, &g2.kernel, cfg, |op| {
        band_rows(g1.k(), grid.points(), |m| grid.momentum_index(m).abs() <= op.max_momentum)
    })
}
