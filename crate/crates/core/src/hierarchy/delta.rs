//! How fast `f_α(r_j − r_{k+1})` approaches `δ(r_j − r_{k+1})` inside a trace,
//! and the same comparison for the scaled pair potential along `(N, ω)` cells.
//!
//! Both sides are exact Galerkin matrices in the single-particle basis, so the
//! measured error contains no quadrature contribution of its own.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::marginals::DensityMatrix;
use crate::operators::{PairOperator, PotentialSpec, ScaledGaussian};
use crate::tensor::Shape;
use crate::{Error, Result};

type C = Complex64;

/// One isotropic Gaussian `w (2πσ²)^{−3/2} e^{−|r|²/(2σ²)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierTerm {
    pub weight: f64,
    pub sigma: f64,
}

/// A mollifier `f` built from isotropic Gaussians; `∫f = Σ w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mollifier {
    pub terms: Vec<MollifierTerm>,
}

impl Mollifier {
    /// Unit-width normalised Gaussian.
    pub fn gaussian() -> Self {
        Self {
            terms: vec![MollifierTerm { weight: 1.0, sigma: 1.0 }],
        }
    }

    /// `2g₁ − g₂`: unit mass, positive at the origin and negative in the tail.
    pub fn sign_changing() -> Self {
        Self {
            terms: vec![
                MollifierTerm { weight: 2.0, sigma: 1.0 },
                MollifierTerm { weight: -1.0, sigma: 2.0 },
            ],
        }
    }

    pub fn integral(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    pub fn value(&self, r2: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let s2 = t.sigma * t.sigma;
                t.weight * (2.0 * std::f64::consts::PI * s2).powf(-1.5) * (-0.5 * r2 / s2).exp()
            })
            .sum()
    }

    /// Gaussians of `f_α(r) = α^{−3} f(r/α)`.
    pub fn scaled(&self, alpha: f64) -> Vec<ScaledGaussian> {
        self.terms
            .iter()
            .map(|t| {
                let s = alpha * t.sigma;
                ScaledGaussian {
                    amplitude: t.weight * (2.0 * std::f64::consts::PI * s * s).powf(-1.5),
                    sigma_x: s,
                    sigma_z: s,
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRateReport {
    pub kappa: f64,
    pub alphas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log α`.
    pub slope: f64,
    /// Two standard errors of the slope.
    pub slope_width: f64,
    /// Errors strictly decrease with `α`.
    pub monotone: bool,
    pub passes: bool,
}

/// `Tr (J ⊗ 1) V_{j,k} γ` for a `(k+1)`-particle density and a `k`-particle `J`.
fn paired_trace(op: &PairOperator, gamma: &DensityMatrix, j: usize, test_op: &DMatrix<C>) -> Result<C> {
    let parts = gamma.k();
    let d = gamma.basis().dim();
    let shape = Shape::new(d, parts);
    let f = gamma.factor()?;
    let mut total = C::new(0.0, 0.0);
    for col in f.column_iter() {
        let v: Vec<C> = col.iter().cloned().collect();
        let mut w = vec![C::new(0.0, 0.0); v.len()];
        op.apply_pair_into(&v, shape, j, parts - 1, &mut w);
        let rows = test_op.nrows();
        let wm = DMatrix::from_fn(rows, d, |a, b| w[a * d + b]);
        let vm = DMatrix::from_fn(rows, d, |a, b| v[a * d + b]);
        total += vm.dotc(&(test_op * wm));
    }
    Ok(total)
}

fn check_inputs(gamma: &DensityMatrix, j: usize, test_op: &DMatrix<C>) -> Result<()> {
    let k = gamma.k().checked_sub(1).filter(|&k| k >= 1).ok_or_else(|| {
        Error::Precondition("the comparison needs a density over at least two particles".into())
    })?;
    if j >= k {
        return Err(Error::Precondition(format!("pair index j = {j} must be below k = {k}")));
    }
    let rows = gamma.basis().dim().pow(k as u32);
    if test_op.nrows() != rows || test_op.ncols() != rows {
        return Err(Error::Shape {
            expected: rows,
            got: test_op.nrows(),
        });
    }
    Ok(())
}

/// Least-squares slope and its standard error.
pub(crate) fn fit_slope(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    if x.len() < 3 {
        return (slope, f64::NAN);
    }
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - my - slope * (a - mx)).powi(2))
        .sum();
    (slope, (rss / (n - 2.0) / sxx).sqrt())
}

/// Measures `|Tr J^{(k)} (f_α − δ)(r_j − r_{k+1}) γ^{(k+1)}|` for each `α` and
/// fits the decay exponent; `passes` records `slope ≥ κ`.
pub fn delta_rate_study(
    f: &Mollifier,
    gamma: &DensityMatrix,
    j: usize,
    test_op: &DMatrix<C>,
    kappa: f64,
    alphas: &[f64],
) -> Result<DeltaRateReport> {
    if (f.integral() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!("mollifier has mass {} instead of 1", f.integral())));
    }
    if !(kappa > 0.0 && kappa < 0.5) {
        return Err(Error::Domain(format!("κ = {kappa} must lie in (0, 1/2)")));
    }
    if alphas.len() < 2 || alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Precondition("need at least two positive scales α".into()));
    }
    check_inputs(gamma, j, test_op)?;
    let basis = gamma.basis();
    let delta = paired_trace(&PairOperator::delta(basis, 1.0)?, gamma, j, test_op)?;
    let errors = alphas
        .iter()
        .map(|&a| {
            let op = PairOperator::new(basis, &f.scaled(a), 1.0)?;
            Ok((paired_trace(&op, gamma, j, test_op)? - delta).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    let lx: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.max(f64::MIN_POSITIVE).ln()).collect();
    let (slope, se) = fit_slope(&lx, &ly);
    let mut order: Vec<usize> = (0..alphas.len()).collect();
    order.sort_by(|&a, &b| alphas[a].total_cmp(&alphas[b]));
    let monotone = order.windows(2).all(|w| errors[w[0]] < errors[w[1]]);
    Ok(DeltaRateReport {
        kappa,
        alphas: alphas.to_vec(),
        errors,
        slope,
        slope_width: 2.0 * se,
        monotone,
        passes: slope >= kappa,
    })
}

/// `|Tr J (V_{N,ω}(r_j − r_{k+1}) − (∫V) δ(r_j − r_{k+1})) γ^{(k+1)}|` for each cell.
pub fn interaction_convergence(
    potential: &PotentialSpec,
    cells: &[(usize, f64)],
    gamma: &DensityMatrix,
    j: usize,
    test_op: &DMatrix<C>,
) -> Result<Vec<f64>> {
    check_inputs(gamma, j, test_op)?;
    let basis = gamma.basis();
    let delta = paired_trace(&PairOperator::delta(basis, potential.integral())?, gamma, j, test_op)?;
    cells
        .iter()
        .map(|&(n, omega)| {
            let op = PairOperator::new(basis, &potential.scaled_terms(n, omega), 1.0)?;
            Ok((paired_trace(&op, gamma, j, test_op)? - delta).norm())
        })
        .collect()
}
