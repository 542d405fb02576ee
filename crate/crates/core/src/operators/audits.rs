//! Numerical audits: the energy estimate, coercivity of `S̃`, the two-body
//! Sobolev bound, and the spectral cutoff of initial data.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{apply_single_diagonal, HamiltonianSpec};
use super::spectrum::{lowest_eigenstates, symmetric_spectrum, SymmetricBlocks};
use crate::dynamics::ManyBodyState;
use crate::scaling::{omega_window, WindowMode};
use crate::spectral::SingleParticleBasis;
use crate::tensor;
use crate::{Error, Result};

/// Quintic smoothstep cutoff: `1` for `s ≤ 1`, `0` for `s ≥ 2`.
pub fn cutoff_profile(s: f64) -> f64 {
    if s <= 1.0 {
        1.0
    } else if s >= 2.0 {
        0.0
    } else {
        let t = s - 1.0;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

/// Relative norm below which a filtered state counts as annihilated.
const DEGENERATE_NORM: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CutoffResult {
    pub state: ManyBodyState,
    pub kappa: f64,
    /// `‖χ ψ₀‖` before renormalisation.
    pub retained_norm: f64,
}

/// `χ(κ(H̃ − 2Nω)/N) ψ₀`, renormalised, by filtering the eigen-expansion of
/// a bosonic `ψ₀`.
pub fn spectral_cutoff(h: &HamiltonianSpec, psi0: &ManyBodyState, kappa: f64) -> Result<CutoffResult> {
    let blocks = SymmetricBlocks::new(h.basis(), h.n());
    spectral_cutoff_with(h, &blocks, psi0, kappa)
}

/// [`spectral_cutoff`] reusing a precomputed block decomposition.
pub fn spectral_cutoff_with(
    h: &HamiltonianSpec,
    blocks: &SymmetricBlocks,
    psi0: &ManyBodyState,
    kappa: f64,
) -> Result<CutoffResult> {
    h.check_state(psi0)?;
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::Domain(format!("cutoff parameter κ = {kappa} must be positive")));
    }
    if psi0.symmetry_defect() > 1e-10 * psi0.norm().max(1.0) {
        return Err(Error::Precondition("spectral cutoff needs a bosonic state".into()));
    }
    let n = h.n() as f64;
    let shift = 2.0 * n * h.omega();
    let mut out = vec![Complex64::new(0.0, 0.0); h.state_len()];
    for block in blocks.blocks() {
        let c = block.project(psi0.coeffs());
        if c.iter().all(|v| v.norm() == 0.0) {
            continue;
        }
        let eig = SymmetricEigen::new(block.hamiltonian(h)?);
        let q = eig.eigenvectors.map(|v| Complex64::new(v, 0.0));
        let mut modal = q.adjoint() * &c;
        for (m, &e) in modal.iter_mut().zip(eig.eigenvalues.iter()) {
            *m *= cutoff_profile(kappa * (e - shift) / n);
        }
        block.embed(&(q * modal), &mut out);
    }
    let retained = tensor::norm(&out);
    if retained <= DEGENERATE_NORM * psi0.norm() {
        return Err(Error::DegenerateCutoff(kappa));
    }
    out.iter_mut().for_each(|v| *v /= retained);
    Ok(CutoffResult {
        state: psi0.with_coeffs(out)?,
        kappa,
        retained_norm: retained,
    })
}

/// `‖S̃^{(k)}ψ‖² + N⁻¹‖S̃₁S̃^{(k−1)}ψ‖²` for `1 ≤ k ≤ N`.
pub fn stilde_weight(h: &HamiltonianSpec, psi: &ManyBodyState, k: usize) -> Result<f64> {
    h.check_state(psi)?;
    if k == 0 || k > h.n() {
        return Err(Error::Domain(format!("order k = {k} outside 1..={}", h.n())));
    }
    let shape = h.shape();
    let root: Vec<f64> = h.stilde_sq_diagonal().iter().map(|v| v.sqrt()).collect();
    let mut lower = psi.coeffs().to_vec();
    for j in 0..k - 1 {
        lower = apply_single_diagonal(&lower, shape, j, &root);
    }
    let full = apply_single_diagonal(&lower, shape, k - 1, &root);
    let extra = apply_single_diagonal(&lower, shape, 0, &root);
    Ok(tensor::norm(&full).powi(2) + tensor::norm(&extra).powi(2) / h.n() as f64)
}

/// `⟨(α + N⁻¹H̃ − 2ω)^k ψ, ψ⟩ − 2^{−k}(‖S̃^{(k)}ψ‖² + N⁻¹‖S̃₁S̃^{(k−1)}ψ‖²)`.
pub fn energy_margin(h: &HamiltonianSpec, psi: &ManyBodyState, k: usize) -> Result<f64> {
    let moment = h.energy_moment(psi, k as u32)?;
    Ok(moment - stilde_weight(h, psi, k)? / 2f64.powi(k as i32))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimateConfig {
    pub k: usize,
    pub random_trials: usize,
    pub eigenvectors: usize,
    pub seed: u64,
    pub c1: f64,
    pub c2: f64,
    /// Refuse out-of-window `(N, ω)` instead of only flagging it.
    pub enforce_window: bool,
}

impl Default for EnergyEstimateConfig {
    fn default() -> Self {
        Self {
            k: 1,
            random_trials: 20,
            eigenvectors: 8,
            seed: 0,
            c1: 1.0,
            c2: 1.0,
            enforce_window: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyEstimateReport {
    pub name: String,
    pub k: usize,
    pub n: usize,
    pub omega: f64,
    pub beta: f64,
    pub c3: f64,
    pub alpha: f64,
    pub in_window: bool,
    /// Exact minimum over the bosonic subspace (dense block eigensolve).
    pub block_min_margin: f64,
    pub random_min_margin: f64,
    pub eigenvector_min_margin: f64,
    pub worst_margin: f64,
    /// Smallest `C₃ ≥ 0` making the block minimum nonnegative.
    pub calibrated_c3: f64,
}

/// Margin operator on one block for a given `α`.
fn block_margin_matrix(
    hblock: &DMatrix<f64>,
    weights: &DVector<f64>,
    alpha: f64,
    n: usize,
    omega: f64,
    k: usize,
) -> DMatrix<f64> {
    let dim = hblock.nrows();
    let mut a = hblock / n as f64;
    for i in 0..dim {
        a[(i, i)] += alpha - 2.0 * omega;
    }
    let mut power = a.clone();
    for _ in 1..k {
        power = &power * &a;
    }
    let scale = 1.0 / 2f64.powi(k as i32);
    for i in 0..dim {
        power[(i, i)] -= scale * weights[i];
    }
    power
}

fn min_block_margin(
    blocks: &[(DMatrix<f64>, DVector<f64>)],
    alpha: f64,
    n: usize,
    omega: f64,
    k: usize,
) -> f64 {
    blocks
        .iter()
        .map(|(hb, w)| {
            let m = block_margin_matrix(hb, w, alpha, n, omega, k);
            let m = (&m + m.transpose()) * 0.5;
            SymmetricEigen::new(m).eigenvalues.min()
        })
        .fold(f64::INFINITY, f64::min)
}

const CALIBRATION_STEPS: usize = 60;
const CALIBRATION_CAP: f64 = 1e8;

/// Audits the energy estimate of order `k` on the truncated bosonic space.
pub fn verify_energy_estimate(h: &HamiltonianSpec, cfg: &EnergyEstimateConfig) -> Result<EnergyEstimateReport> {
    let n = h.n();
    let k = cfg.k;
    if k == 0 || k > n {
        return Err(Error::Domain(format!("order k = {k} outside 1..={n}")));
    }
    let beta = h.potential().beta();
    let in_window = n >= 2
        && omega_window(beta, n, cfg.c1, cfg.c2, WindowMode::EnergyOnly)?.contains(h.omega());
    if cfg.enforce_window && !in_window {
        let w = omega_window(beta, n.max(2), cfg.c1, cfg.c2, WindowMode::EnergyOnly)?;
        return Err(Error::OutOfWindow {
            n,
            omega: h.omega(),
            lower: w.lower,
            upper: w.upper,
        });
    }
    let blocks = SymmetricBlocks::new(h.basis(), n);
    let stilde = h.stilde_sq_diagonal();
    let mut dense = Vec::with_capacity(blocks.blocks().len());
    for b in blocks.blocks() {
        let hb = b.hamiltonian(h)?;
        let w = b.diagonal_average(|u| {
            let lower: f64 = u[..k - 1].iter().map(|&s| stilde[s]).product();
            lower * stilde[u[k - 1]] + lower * stilde[u[0]] / n as f64
        });
        dense.push((hb, w));
    }
    let alpha = h.alpha();
    let block_min = min_block_margin(&dense, alpha, n, h.omega(), k);

    let mut random_min = f64::INFINITY;
    for t in 0..cfg.random_trials {
        let psi = ManyBodyState::random_symmetric(h.basis().clone(), n, cfg.seed.wrapping_add(t as u64))?;
        random_min = random_min.min(energy_margin(h, &psi, k)?);
    }

    let spectra = symmetric_spectrum(h, &blocks)?;
    let mut eig_min = f64::INFINITY;
    for (_, coeffs) in lowest_eigenstates(h, &blocks, &spectra, cfg.eigenvectors) {
        let psi = ManyBodyState::new(h.basis().clone(), n, coeffs)?;
        eig_min = eig_min.min(energy_margin(h, &psi, k)?);
    }

    let l1sq = h.potential().l1_norm().powi(2);
    let margin_at = |c3: f64| min_block_margin(&dense, c3 * l1sq + 1.0, n, h.omega(), k);
    let calibrated_c3 = if l1sq == 0.0 || margin_at(0.0) >= 0.0 {
        0.0
    } else {
        let mut hi = 1.0;
        while margin_at(hi) < 0.0 {
            hi *= 2.0;
            if hi > CALIBRATION_CAP {
                return Err(Error::Convergence {
                    iterations: 0,
                    last_change: hi,
                    energy_trace: Vec::new(),
                });
            }
        }
        let mut lo = 0.0;
        for _ in 0..CALIBRATION_STEPS {
            let mid = 0.5 * (lo + hi);
            if margin_at(mid) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };

    let worst = block_min.min(random_min).min(eig_min);
    Ok(EnergyEstimateReport {
        name: format!("energy-estimate-k{k}"),
        k,
        n,
        omega: h.omega(),
        beta,
        c3: h.c3(),
        alpha,
        in_window,
        block_min_margin: block_min,
        random_min_margin: random_min,
        eigenvector_min_margin: eig_min,
        worst_margin: worst,
        calibrated_c3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// `S̃² ≥ c(1 − Δ_r)`
    Coercivity1,
    /// `S̃² P_{≥1} ≥ c P_{≥1}(1 − ∂_z² − ωΔ_x + ω|x|²) P_{≥1}`
    Coercivity2,
    /// `S̃² P_{≥1} ≥ c ω P_{≥1}`
    Coercivity3,
    /// `‖L₁⁻¹L₂⁻¹ V_{N,ω}(r₁ − r₂) L₁⁻¹L₂⁻¹‖ ≤ C‖V‖_{L¹}`
    EsySobolev,
}

impl Inequality {
    pub fn name(self) -> &'static str {
        match self {
            Inequality::Coercivity1 => "coercivity-1",
            Inequality::Coercivity2 => "coercivity-2",
            Inequality::Coercivity3 => "coercivity-3",
            Inequality::EsySobolev => "esy-sobolev",
        }
    }

    /// Constant against which the margin is reported.
    pub fn reference_constant(self) -> f64 {
        match self {
            Inequality::Coercivity1 | Inequality::Coercivity2 => 1.0 / 3.0,
            Inequality::Coercivity3 | Inequality::EsySobolev => 1.0,
        }
    }

    pub fn all() -> [Inequality; 4] {
        [
            Inequality::Coercivity1,
            Inequality::Coercivity2,
            Inequality::Coercivity3,
            Inequality::EsySobolev,
        ]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub omega: f64,
    pub n: usize,
    /// Margin at the reference constant (nonnegative when the inequality holds).
    pub margin: f64,
    /// Best constant on the truncated space: the largest `c` for the
    /// coercivity bounds, `‖·‖_op / ‖V‖_{L¹}` for the Sobolev bound.
    pub empirical_constant: f64,
}

/// Galerkin matrix of `−d²/dx²` on `ψ₀ … ψ_{L−1}`.
fn axis_kinetic(levels: usize) -> DMatrix<f64> {
    // ψ_n' = √(n/2) ψ_{n−1} − √((n+1)/2) ψ_{n+1}; rows index ψ₀ … ψ_L.
    let mut d = DMatrix::zeros(levels + 1, levels);
    for n in 0..levels {
        if n > 0 {
            d[(n - 1, n)] = (n as f64 / 2.0).sqrt();
        }
        d[(n + 1, n)] = -((n + 1) as f64 / 2.0).sqrt();
    }
    d.transpose() * d
}

/// `1 + k² − Δ_x` on the transverse modes for each Fourier slot.
fn sobolev_blocks(basis: &SingleParticleBasis) -> Vec<DMatrix<f64>> {
    let levels = basis.x_basis().max_level();
    let t = axis_kinetic(levels);
    let modes = basis.x_basis().modes();
    let mx = modes.len();
    let mut tx = DMatrix::zeros(mx, mx);
    for (a, ma) in modes.iter().enumerate() {
        for (b, mb) in modes.iter().enumerate() {
            let mut v = 0.0;
            if ma.n2 == mb.n2 {
                v += t[(ma.n1, mb.n1)];
            }
            if ma.n1 == mb.n1 {
                v += t[(ma.n2, mb.n2)];
            }
            tx[(a, b)] = v;
        }
    }
    (0..basis.mz())
        .map(|m| {
            let k = basis.z_grid().wavenumber(m);
            let mut blk = tx.clone();
            for i in 0..mx {
                blk[(i, i)] += 1.0 + k * k;
            }
            blk
        })
        .collect()
}

/// Smallest `c` with `lhs ≥ c·rhs`, for `rhs` positive definite.
fn generalized_min(lhs: &DMatrix<f64>, rhs: &DMatrix<f64>) -> f64 {
    let r = SymmetricEigen::new(rhs.clone());
    let inv_sqrt = &r.eigenvectors
        * DMatrix::from_diagonal(&r.eigenvalues.map(|v| 1.0 / v.sqrt()))
        * r.eigenvectors.transpose();
    let m = &inv_sqrt * lhs * &inv_sqrt;
    SymmetricEigen::new((&m + m.transpose()) * 0.5).eigenvalues.min()
}

pub fn check_inequality(which: Inequality, h: &HamiltonianSpec) -> Result<InequalityReport> {
    let basis = h.basis();
    let omega = h.omega();
    let c_ref = which.reference_constant();
    let mx = basis.mx();
    let levels: Vec<usize> = (0..mx).map(|a| basis.x_basis().mode(a).level).collect();
    let (margin, constant) = match which {
        Inequality::Coercivity1 => {
            let mut margin = f64::INFINITY;
            let mut constant = f64::INFINITY;
            for (m, rhs) in sobolev_blocks(basis).into_iter().enumerate() {
                let lhs = DMatrix::from_diagonal(&DVector::from_iterator(
                    mx,
                    (0..mx).map(|a| h.stilde_sq_diagonal()[basis.index(a, m)]),
                ));
                let diff = &lhs - &rhs * c_ref;
                margin = margin.min(SymmetricEigen::new(diff).eigenvalues.min());
                constant = constant.min(generalized_min(&lhs, &rhs));
            }
            (margin, constant)
        }
        Inequality::Coercivity2 | Inequality::Coercivity3 => {
            let mut margin = f64::INFINITY;
            let mut constant = f64::INFINITY;
            for s in 0..basis.dim() {
                let (a, _) = basis.split(s);
                if levels[a] == 0 {
                    continue;
                }
                let lhs = h.stilde_sq_diagonal()[s];
                let rhs = match which {
                    Inequality::Coercivity2 => h.one_body_diagonal()[s] + 1.0,
                    _ => omega,
                };
                margin = margin.min(lhs - c_ref * rhs);
                constant = constant.min(lhs / rhs);
            }
            (margin, constant)
        }
        Inequality::EsySobolev => {
            let norm = two_body_sobolev_norm(h)?;
            let l1 = h.potential().l1_norm();
            let constant = if l1 > 0.0 { norm / l1 } else { 0.0 };
            (c_ref * l1 - norm, constant)
        }
    };
    Ok(InequalityReport {
        name: which.name().to_string(),
        omega,
        n: h.n(),
        margin,
        empirical_constant: constant,
    })
}

/// `‖L₁⁻¹L₂⁻¹ V_{N,ω}(r₁ − r₂) L₁⁻¹L₂⁻¹‖_op` on the truncated two-particle space.
pub fn two_body_sobolev_norm(h: &HamiltonianSpec) -> Result<f64> {
    let basis = h.basis();
    let n = h.n().max(2);
    let gaussians = h.potential().scaled_terms(n, h.omega());
    let pair = super::pair::PairOperator::new(basis, &gaussians, 1.0)?;
    if pair.is_zero() {
        return Ok(0.0);
    }
    let mx = basis.mx();
    let mz = basis.mz();
    let inv_sqrt: Vec<DMatrix<f64>> = sobolev_blocks(basis)
        .into_iter()
        .map(|b| {
            let e = SymmetricEigen::new(b);
            &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(|v| 1.0 / v.sqrt())) * e.eigenvectors.transpose()
        })
        .collect();
    let mut best = 0.0f64;
    for total in 0..(2 * mz - 1) {
        let pairs: Vec<(usize, usize)> = (0..mz)
            .filter_map(|p1| (total >= p1 && total - p1 < mz).then(|| (p1, total - p1)))
            .collect();
        let mut states = Vec::new();
        for &(p1, p2) in &pairs {
            for a1 in 0..mx {
                for a2 in 0..mx {
                    states.push((a1, p1, a2, p2));
                }
            }
        }
        let dim = states.len();
        let mut v = DMatrix::zeros(dim, dim);
        let mut w = DMatrix::zeros(dim, dim);
        for (i, &(a1, p1, a2, p2)) in states.iter().enumerate() {
            for (j, &(b1, q1, b2, q2)) in states.iter().enumerate() {
                v[(i, j)] = pair.element(basis.index(a1, p1), basis.index(a2, p2), basis.index(b1, q1), basis.index(b2, q2));
                if p1 == q1 && p2 == q2 {
                    w[(i, j)] = inv_sqrt[p1][(a1, b1)] * inv_sqrt[p2][(a2, b2)];
                }
            }
        }
        let b = &w * v * &w;
        let e = SymmetricEigen::new((&b + b.transpose()) * 0.5);
        best = best.max(e.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{GaussianTerm, PotentialSpec};
    use std::sync::Arc;

    #[test]
    fn cutoff_profile_shape() {
        assert_eq!(cutoff_profile(-3.0), 1.0);
        assert_eq!(cutoff_profile(1.0), 1.0);
        assert_eq!(cutoff_profile(2.0), 0.0);
        assert!((cutoff_profile(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = cutoff_profile(1.0 + i as f64 / 100.0);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn axis_kinetic_diagonal() {
        // ⟨ψ_n, −ψ_n''⟩ = n + 1/2
        let t = axis_kinetic(5);
        for n in 0..5 {
            assert!((t[(n, n)] - (n as f64 + 0.5)).abs() < 1e-14);
        }
    }

    fn spec(omega: f64) -> HamiltonianSpec {
        let basis = Arc::new(SingleParticleBasis::new(3, 6, 8, 8.0).unwrap());
        let v = PotentialSpec::focusing(vec![GaussianTerm::attractive(2.0, 0.6)], 0.25).unwrap();
        HamiltonianSpec::new(2, omega, v, basis, 1.0).unwrap()
    }

    #[test]
    fn coercivity_checks_hold() {
        let h = spec(16.0);
        for which in [Inequality::Coercivity1, Inequality::Coercivity2, Inequality::Coercivity3] {
            let r = check_inequality(which, &h).unwrap();
            assert!(r.margin >= 0.0, "{which:?}: {r:?}");
        }
        let r3 = check_inequality(Inequality::Coercivity3, &h).unwrap();
        assert!(r3.empirical_constant * 16.0 >= 16.0);
    }

    #[test]
    fn sobolev_norm_is_linear_in_v() {
        let h = spec(2.0);
        let basis = h.basis().clone();
        let doubled = HamiltonianSpec::new(2, 2.0, h.potential().scaled_by(2.0).unwrap(), basis, 1.0).unwrap();
        let a = two_body_sobolev_norm(&h).unwrap();
        let b = two_body_sobolev_norm(&doubled).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-10 * b);
    }
}
