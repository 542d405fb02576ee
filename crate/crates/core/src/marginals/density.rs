//! Reduced density matrices and partial traces.
//!
//! A kernel is stored either densely or as a factor `F` with `γ = F F†`.
//! Reductions of pure states produce factors directly from the state tensor,
//! and partial traces of factors are pure reshapes. Factors whose row count
//! does not exceed their column count are collapsed to dense form.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::dynamics::ManyBodyState;
use crate::spectral::{FourierGrid1D, SingleParticleBasis};
use crate::{Error, Result};

/// Largest kernel dimension held densely.
pub const DENSE_LIMIT: usize = 4096;

/// Storage of a density kernel; not nameable outside the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Dense(DMatrix<Complex64>),
    /// `γ = F F†`.
    Factored(DMatrix<Complex64>),
}

impl Kernel {
    /// Collapses wide or square factors to dense form.
    pub(crate) fn from_factor(f: DMatrix<Complex64>) -> Self {
        if f.nrows() <= f.ncols() && f.nrows() <= DENSE_LIMIT {
            Kernel::Dense(&f * f.adjoint())
        } else {
            Kernel::Factored(f)
        }
    }

    pub(crate) fn dim(&self) -> usize {
        match self {
            Kernel::Dense(m) => m.nrows(),
            Kernel::Factored(f) => f.nrows(),
        }
    }

    pub(crate) fn trace(&self) -> f64 {
        match self {
            Kernel::Dense(m) => m.diagonal().iter().map(|c| c.re).sum(),
            Kernel::Factored(f) => f.iter().map(|c| c.norm_sqr()).sum(),
        }
    }

    /// Real diagonal `γ(a, a)`.
    pub(crate) fn diagonal(&self) -> Vec<f64> {
        match self {
            Kernel::Dense(m) => m.diagonal().iter().map(|c| c.re).collect(),
            Kernel::Factored(f) => f.row_iter().map(|r| r.iter().map(|c| c.norm_sqr()).sum()).collect(),
        }
    }

    pub(crate) fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        match self {
            Kernel::Dense(m) => Ok(m.clone()),
            Kernel::Factored(f) => {
                if f.nrows() > DENSE_LIMIT {
                    return Err(Error::TooLarge(format!(
                        "kernel of dimension {} exceeds the dense limit {DENSE_LIMIT}",
                        f.nrows()
                    )));
                }
                Ok(f * f.adjoint())
            }
        }
    }

    /// `γ'[k, k'] = Σ_t γ[row(k, t), row(k', t)]`.
    pub(crate) fn contract(&self, kept: usize, traced: usize, row: impl Fn(usize, usize) -> usize) -> Self {
        match self {
            Kernel::Dense(m) => {
                let mut out = DMatrix::zeros(kept, kept);
                for t in 0..traced {
                    for b in 0..kept {
                        let rb = row(b, t);
                        for a in 0..kept {
                            out[(a, b)] += m[(row(a, t), rb)];
                        }
                    }
                }
                Kernel::Dense(out)
            }
            Kernel::Factored(f) => {
                let r = f.ncols();
                let mut out = DMatrix::zeros(kept, traced * r);
                for c in 0..r {
                    for t in 0..traced {
                        for a in 0..kept {
                            out[(a, t * r + c)] = f[(row(a, t), c)];
                        }
                    }
                }
                Kernel::from_factor(out)
            }
        }
    }

    /// Eigenvalues in decreasing order (nonzero ones only for factors).
    pub(crate) fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut ev: Vec<f64> = match self {
            Kernel::Dense(m) => SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().collect(),
            Kernel::Factored(f) => {
                if f.ncols() > DENSE_LIMIT {
                    return Err(Error::TooLarge(format!("factor rank {} exceeds the dense limit", f.ncols())));
                }
                SymmetricEigen::new(f.adjoint() * f).eigenvalues.iter().cloned().collect()
            }
        };
        ev.sort_by(|a, b| b.total_cmp(a));
        Ok(ev)
    }

    /// `F` with `F F† = γ`; requires a positive semidefinite dense kernel.
    pub(crate) fn factor(&self) -> Result<DMatrix<Complex64>> {
        match self {
            Kernel::Factored(f) => Ok(f.clone()),
            Kernel::Dense(m) => {
                let eig = SymmetricEigen::new(m.clone());
                let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
                if eig.eigenvalues.iter().any(|&e| e < -1e-12 * top.max(1.0)) {
                    return Err(Error::Precondition("kernel is not positive semidefinite".into()));
                }
                let cols: Vec<usize> = (0..m.nrows()).filter(|&i| eig.eigenvalues[i] > 1e-15 * top).collect();
                Ok(DMatrix::from_fn(m.nrows(), cols.len(), |a, c| {
                    eig.eigenvectors[(a, cols[c])] * eig.eigenvalues[cols[c]].sqrt()
                }))
            }
        }
    }

    pub(crate) fn hermiticity_defect(&self) -> f64 {
        match self {
            Kernel::Dense(m) => max_abs(&(m - m.adjoint())),
            Kernel::Factored(_) => 0.0,
        }
    }
}

/// Largest entry modulus.
pub(crate) fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn check_dense(m: &DMatrix<Complex64>, expected: usize) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::Shape {
            expected,
            got: m.nrows().max(m.ncols()),
        });
    }
    Ok(())
}

/// `γ^{(k)}` over the k-fold single-particle basis, particle 0 slowest.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    k: usize,
    basis: Arc<SingleParticleBasis>,
    pub(crate) kernel: Kernel,
}

impl DensityMatrix {
    pub fn from_dense(basis: Arc<SingleParticleBasis>, k: usize, kernel: DMatrix<Complex64>) -> Result<Self> {
        check_dense(&kernel, basis.dim().pow(k as u32))?;
        Ok(Self {
            k,
            basis,
            kernel: Kernel::Dense(kernel),
        })
    }

    /// `F F†` for a `d^k × r` factor.
    pub fn from_factor(basis: Arc<SingleParticleBasis>, k: usize, factor: DMatrix<Complex64>) -> Result<Self> {
        let expected = basis.dim().pow(k as u32);
        if factor.nrows() != expected {
            return Err(Error::Shape {
                expected,
                got: factor.nrows(),
            });
        }
        Ok(Self {
            k,
            basis,
            kernel: Kernel::from_factor(factor),
        })
    }

    /// `|v⟩⟨v|`.
    pub fn pure(basis: Arc<SingleParticleBasis>, k: usize, v: &[Complex64]) -> Result<Self> {
        Self::from_factor(basis, k, DMatrix::from_column_slice(v.len(), 1, v))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn basis(&self) -> &Arc<SingleParticleBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn is_factored(&self) -> bool {
        matches!(self.kernel, Kernel::Factored(_))
    }

    pub fn trace(&self) -> f64 {
        self.kernel.trace()
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.kernel.to_dense()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.kernel.eigenvalues()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.kernel.hermiticity_defect()
    }

    /// Factor `F` with `F F† = γ` (eigen-factor for dense kernels).
    pub fn factor(&self) -> Result<DMatrix<Complex64>> {
        self.kernel.factor()
    }

    /// Largest entry of `γ − P γ P†` over all relabelings `P` of the k
    /// particles (dense kernels only).
    pub fn permutation_defect(&self) -> Result<f64> {
        let m = self.to_dense()?;
        let shape = crate::tensor::Shape::new(self.basis.dim(), self.k);
        let mut worst: f64 = 0.0;
        for perm in crate::tensor::permutations(self.k) {
            let map: Vec<usize> = (0..shape.len())
                .map(|idx| {
                    let digits = shape.digits(idx);
                    let moved: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
                    shape.compose(&moved)
                })
                .collect();
            for b in 0..shape.len() {
                for a in 0..shape.len() {
                    worst = worst.max((m[(a, b)] - m[(map[a], map[b])]).norm());
                }
            }
        }
        Ok(worst)
    }

    pub(crate) fn same_space(&self, other: &Self) -> Result<()> {
        if self.k != other.k || self.basis.descriptor() != other.basis.descriptor() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Per-row flag: every particle index `s_j` admitted by `pred(j, s_j)`.
    pub(crate) fn row_mask(&self, pred: impl Fn(usize, usize) -> bool) -> Vec<bool> {
        let shape = crate::tensor::Shape::new(self.basis.dim(), self.k);
        (0..shape.len())
            .map(|idx| shape.digits(idx).iter().enumerate().all(|(j, &s)| pred(j, s)))
            .collect()
    }
}

/// `γ_z^{(k)} = Tr_x γ^{(k)}` over the k-fold longitudinal Fourier basis.
#[derive(Debug, Clone)]
pub struct ReducedZDensity {
    k: usize,
    grid: FourierGrid1D,
    pub(crate) kernel: Kernel,
}

impl ReducedZDensity {
    pub fn from_dense(grid: FourierGrid1D, k: usize, kernel: DMatrix<Complex64>) -> Result<Self> {
        check_dense(&kernel, grid.points().pow(k as u32))?;
        Ok(Self {
            k,
            grid,
            kernel: Kernel::Dense(kernel),
        })
    }

    pub fn from_factor(grid: FourierGrid1D, k: usize, factor: DMatrix<Complex64>) -> Result<Self> {
        let expected = grid.points().pow(k as u32);
        if factor.nrows() != expected {
            return Err(Error::Shape {
                expected,
                got: factor.nrows(),
            });
        }
        Ok(Self {
            k,
            grid,
            kernel: Kernel::from_factor(factor),
        })
    }

    /// `(|φ⟩⟨φ|)^{⊗k}` for centred coefficients `φ`.
    pub fn product(grid: FourierGrid1D, k: usize, phi: &[Complex64]) -> Result<Self> {
        if phi.len() != grid.points() {
            return Err(Error::Shape {
                expected: grid.points(),
                got: phi.len(),
            });
        }
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..k {
            v = v.iter().flat_map(|a| phi.iter().map(move |b| a * b)).collect();
        }
        Self::from_factor(grid, k, DMatrix::from_column_slice(v.len(), 1, &v))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grid(&self) -> &FourierGrid1D {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.kernel.dim()
    }

    pub fn trace(&self) -> f64 {
        self.kernel.trace()
    }

    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.kernel.to_dense()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.kernel.eigenvalues()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.kernel.hermiticity_defect()
    }

    /// Factor of the kernel (a dense kernel is factored by its eigenvectors,
    /// dropping eigenvalues below `1e−15` of the largest).
    pub fn factor(&self) -> Result<DMatrix<Complex64>> {
        self.kernel.factor()
    }

    pub(crate) fn same_space(&self, other: &Self) -> Result<()> {
        if self.k != other.k || self.grid != other.grid {
            return Err(Error::Shape {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// `Tr_{z_k}` of a `k`-particle density.
    pub fn trace_last(&self) -> Result<Self> {
        if self.k < 2 {
            return Err(Error::Precondition("cannot trace out the only particle".into()));
        }
        let m = self.grid.points();
        let kept = m.pow(self.k as u32 - 1);
        Ok(Self {
            k: self.k - 1,
            grid: self.grid.clone(),
            kernel: self.kernel.contract(kept, m, |a, t| a * m + t),
        })
    }
}

/// `γ^{(k)} = Tr_{k+1..N} |ψ⟩⟨ψ|`.
pub fn reduce_marginal(psi: &ManyBodyState, k: usize) -> Result<DensityMatrix> {
    if k == 0 || k > psi.n() {
        return Err(Error::Precondition(format!("k = {k} outside 1..={}", psi.n())));
    }
    let d = psi.basis().dim();
    let rows = d.pow(k as u32);
    let cols = d.pow((psi.n() - k) as u32);
    let c = psi.coeffs();
    // Row-major tensor: the first k particles form the leading index.
    let factor = DMatrix::from_fn(rows, cols, |a, b| c[a * cols + b]);
    DensityMatrix::from_factor(psi.basis().clone(), k, factor)
}

/// What [`partial_trace`] removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceMode {
    LastParticle,
    XComponent,
}

/// Result of [`partial_trace`].
#[derive(Debug, Clone)]
pub enum Traced {
    Full(DensityMatrix),
    Z(ReducedZDensity),
}

impl Traced {
    pub fn trace(&self) -> f64 {
        match self {
            Traced::Full(g) => g.trace(),
            Traced::Z(g) => g.trace(),
        }
    }
}

pub fn partial_trace(gamma: &DensityMatrix, mode: TraceMode) -> Result<Traced> {
    match mode {
        TraceMode::LastParticle => trace_last(gamma).map(Traced::Full),
        TraceMode::XComponent => trace_x(gamma).map(Traced::Z),
    }
}

/// `Tr_{k}` of a `k`-particle density.
pub fn trace_last(gamma: &DensityMatrix) -> Result<DensityMatrix> {
    if gamma.k < 2 {
        return Err(Error::Precondition("cannot trace out the only particle".into()));
    }
    let d = gamma.basis.dim();
    let kept = d.pow(gamma.k as u32 - 1);
    Ok(DensityMatrix {
        k: gamma.k - 1,
        basis: gamma.basis.clone(),
        kernel: gamma.kernel.contract(kept, d, |a, t| a * d + t),
    })
}

/// `Tr_x γ^{(k)}`.
pub fn trace_x(gamma: &DensityMatrix) -> Result<ReducedZDensity> {
    let basis = &gamma.basis;
    let (mx, mz, d, k) = (basis.mx(), basis.mz(), basis.dim(), gamma.k);
    let kept = mz.pow(k as u32);
    let traced = mx.pow(k as u32);
    let row = |zs: usize, xs: usize| {
        let (mut zs, mut xs) = (zs, xs);
        let mut idx = 0;
        let mut stride = 1;
        for _ in 0..k {
            idx += basis.index(xs % mx, zs % mz) * stride;
            stride *= d;
            xs /= mx;
            zs /= mz;
        }
        idx
    };
    Ok(ReducedZDensity {
        k,
        grid: basis.z_grid().clone(),
        kernel: gamma.kernel.contract(kept, traced, row),
    })
}
