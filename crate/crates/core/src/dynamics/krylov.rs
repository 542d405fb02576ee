//! Lanczos approximation of `e^{−i t H} v` and `e^{−t H} v` for Hermitian `H`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::tensor::{inner, norm};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    /// Maximal Krylov subspace dimension.
    pub dim: usize,
    /// Accepted local error estimate per step, relative to `‖v‖`.
    pub tol: f64,
    /// Maximal number of consecutive step halvings.
    pub max_halvings: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            dim: 20,
            tol: 1e-13,
            max_halvings: 30,
        }
    }
}

/// Which exponential to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    /// `e^{−i t H}`
    RealTime,
    /// `e^{−t H}`
    ImaginaryTime,
}

/// Result of one Krylov step.
#[derive(Debug, Clone)]
pub struct KrylovStep {
    pub value: Vec<Complex64>,
    pub error_estimate: f64,
    pub subspace_dim: usize,
}

/// Single Lanczos step with full reorthogonalisation.
pub fn krylov_step<F>(apply: &F, v: &[Complex64], t: f64, kind: Exponent, dim: usize) -> Result<KrylovStep>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    let beta0 = norm(v);
    if beta0 == 0.0 {
        return Ok(KrylovStep {
            value: v.to_vec(),
            error_estimate: 0.0,
            subspace_dim: 0,
        });
    }
    let dim = dim.clamp(1, v.len());
    let mut basis: Vec<Vec<Complex64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alphas = Vec::with_capacity(dim);
    let mut betas: Vec<f64> = Vec::with_capacity(dim);
    let mut residual_beta = 0.0;
    for j in 0..dim {
        let mut w = apply(&basis[j]);
        let a = inner(&basis[j], &w).re;
        alphas.push(a);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = inner(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= qi * c;
                }
            }
        }
        let b = norm(&w);
        if !b.is_finite() {
            return Err(Error::StepSize(format!("Lanczos produced a non-finite vector at step {j}")));
        }
        if b <= 1e-14 * (a.abs() + 1.0) || j + 1 == dim {
            residual_beta = if j + 1 == dim { b } else { 0.0 };
            break;
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    let m = alphas.len();
    let mut tri = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        tri[(i, i)] = alphas[i];
        if i + 1 < m {
            tri[(i, i + 1)] = betas[i];
            tri[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(tri);
    let q = &eig.eigenvectors;
    let coeffs: Vec<Complex64> = (0..m)
        .map(|r| {
            (0..m)
                .map(|c| {
                    let lam = eig.eigenvalues[c];
                    let f = match kind {
                        Exponent::RealTime => Complex64::from_polar(1.0, -t * lam),
                        Exponent::ImaginaryTime => Complex64::new((-t * lam).exp(), 0.0),
                    };
                    f * (q[(r, c)] * q[(0, c)])
                })
                .sum::<Complex64>()
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (qv, c) in basis.iter().take(m).zip(&coeffs) {
        let c = c * beta0;
        for (o, x) in out.iter_mut().zip(qv) {
            *o += x * c;
        }
    }
    let error_estimate = residual_beta * coeffs[m - 1].norm();
    Ok(KrylovStep {
        value: out,
        error_estimate,
        subspace_dim: m,
    })
}

/// Statistics of an adaptive propagation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PropagationStats {
    pub steps: usize,
    pub halvings: usize,
    pub max_error_estimate: f64,
}

/// `e^{−i t H} v` (or `e^{−t H} v`) by steps of at most `dt`, halving a step
/// whenever the Lanczos error estimate exceeds `cfg.tol · ‖v‖`.
pub fn propagate<F>(
    apply: &F,
    v: &[Complex64],
    t: f64,
    dt: f64,
    kind: Exponent,
    cfg: &KrylovConfig,
    stats: &mut PropagationStats,
) -> Result<Vec<Complex64>>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::StepSize(format!("time step {dt} must be positive")));
    }
    let mut state = v.to_vec();
    let total = t.abs();
    let sign = t.signum();
    let mut done = 0.0;
    let mut h = dt.min(total);
    while total - done > 1e-14 * total.max(1.0) {
        h = h.min(total - done);
        let scale = norm(&state).max(f64::MIN_POSITIVE);
        let mut halvings = 0;
        loop {
            let step = krylov_step(apply, &state, sign * h, kind, cfg.dim)?;
            if step.error_estimate <= cfg.tol * scale {
                stats.max_error_estimate = stats.max_error_estimate.max(step.error_estimate / scale);
                state = step.value;
                break;
            }
            halvings += 1;
            stats.halvings += 1;
            if halvings > cfg.max_halvings {
                return Err(Error::StepSize(format!(
                    "Krylov error estimate {:.3e} above tolerance after {halvings} halvings (step {h:.3e})",
                    step.error_estimate / scale
                )));
            }
            h *= 0.5;
        }
        done += h;
        stats.steps += 1;
        if halvings == 0 {
            h = (2.0 * h).min(dt);
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Dense Hermitian test matrix.
    fn matrix(n: usize) -> Vec<Vec<Complex64>> {
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            m[i][i] = Complex64::new(i as f64 * 0.7 - 2.0, 0.0);
            for j in i + 1..n {
                let v = Complex64::new(((i * 7 + j * 3) as f64).sin() * 0.3, ((i + 2 * j) as f64).cos() * 0.2);
                m[i][j] = v;
                m[j][i] = v.conj();
            }
        }
        m
    }

    fn apply_dense(m: &[Vec<Complex64>]) -> impl Fn(&[Complex64]) -> Vec<Complex64> + '_ {
        move |v: &[Complex64]| m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// Reference via full eigendecomposition of the Hermitian matrix.
    fn reference(m: &[Vec<Complex64>], v: &[Complex64], t: f64) -> Vec<Complex64> {
        let n = m.len();
        let dm = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
        let eig = nalgebra::SymmetricEigen::new(dm);
        let q = eig.eigenvectors;
        let vv = nalgebra::DVector::from_column_slice(v);
        let mut c = q.adjoint() * vv;
        for (ci, &l) in c.iter_mut().zip(eig.eigenvalues.iter()) {
            *ci *= Complex64::from_polar(1.0, -t * l);
        }
        (q * c).iter().cloned().collect()
    }

    #[test]
    fn matches_dense_exponential() {
        let m = matrix(30);
        let v: Vec<Complex64> = (0..30).map(|i| Complex64::new(1.0 / (1.0 + i as f64), 0.1 * i as f64)).collect();
        let mut stats = PropagationStats::default();
        let out = propagate(&apply_dense(&m), &v, 1.3, 0.25, Exponent::RealTime, &KrylovConfig::default(), &mut stats).unwrap();
        let r = reference(&m, &v, 1.3);
        let err = out.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
        assert!((norm(&out) - norm(&v)).abs() < 1e-12);
    }

    #[test]
    fn happy_breakdown_is_exact() {
        let m = matrix(4);
        let v = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0)];
        let step = krylov_step(&apply_dense(&m), &v, 2.0, Exponent::RealTime, 20).unwrap();
        assert!(step.subspace_dim <= 4);
        let r = reference(&m, &v, 2.0);
        let err = step.value.iter().zip(&r).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn imaginary_time_decays_toward_ground() {
        let m = matrix(12);
        let v: Vec<Complex64> = (0..12).map(|i| Complex64::new(1.0, i as f64 * 0.01)).collect();
        let mut stats = PropagationStats::default();
        let out = propagate(&apply_dense(&m), &v, 5.0, 0.5, Exponent::ImaginaryTime, &KrylovConfig::default(), &mut stats).unwrap();
        let hv = apply_dense(&m)(&out);
        let e = inner(&out, &hv).re / norm(&out).powi(2);
        let dm = nalgebra::DMatrix::from_fn(12, 12, |i, j| m[i][j]);
        let emin = nalgebra::SymmetricEigen::new(dm).eigenvalues.min();
        assert!(e - emin < 1e-3);
    }
}
