//! Gross–Pitaevskii hierarchy defects along a factorized NLS trajectory.
//!
//! For `γ_z^{(k)}(t) = |φ(t)⟩⟨φ(t)|^{⊗k}` the integral-form defect is
//!
//! `γ(t) − U(t)γ(t₀) − i c Σ_j ∫_{t₀}^t U(t − s) B_{j,k+1} γ^{(k+1)}(s) ds`
//!
//! with `U(t)γ[P; P'] = e^{−it(ε_P − ε_{P'})} γ[P; P']`, `ε_P = Σ k_{p_i}²`.
//! The integral is the trapezoid rule over the trajectory samples, applied to
//! `U(−s)B(s)` so that each sample is visited once.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::collision::{collision_pair, commutator_from_pair};
use super::{HierarchyResidual, ResidualForm};
use crate::dynamics::{NLSField, Trajectory};
use crate::marginals::DENSE_LIMIT;
use crate::operators::transverse_delta_matrix;
use crate::scaling::h_quartic_integral;
use crate::spectral::{FourierGrid1D, SingleParticleBasis};
use crate::{Error, Result};

type C = Complex64;

/// Which hierarchy the defect refers to.
#[derive(Debug, Clone)]
pub enum GpVariant {
    /// `B_{j,k+1}` with coupling `c`; the trajectory must carry the same `c`.
    OneDimensional { coupling: f64 },
    /// `Tr_x Tr_{z_{k+1}}[δ(r_j − r_{k+1}), γ̃^{(k+1)}]` with strength `b₀`,
    /// evaluated on `|h⊗φ⟩⟨h⊗φ|^{⊗(k+1)}` in `basis`. The trajectory must
    /// carry `c = b₀ ∫|h|⁴`.
    Coupled { b0: f64, basis: Arc<SingleParticleBasis> },
}

/// Per-sample ingredients: `γ^{(k)}` and `strength · Σ_j B_j γ^{(k+1)}`.
struct Sampler<'a> {
    grid: FourierGrid1D,
    k: usize,
    variant: &'a GpVariant,
    strength: f64,
    transverse: Vec<f64>,
}

impl<'a> Sampler<'a> {
    fn new(traj: &Trajectory<NLSField>, k: usize, variant: &'a GpVariant) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("hierarchy order k must be at least 1".into()));
        }
        let first = traj
            .samples
            .first()
            .ok_or_else(|| Error::Sampling("empty trajectory".into()))?;
        let grid = first.grid().clone();
        if traj.samples.iter().any(|s| s.grid() != &grid) {
            return Err(Error::Precondition("trajectory samples live on different grids".into()));
        }
        if grid.points().pow(k as u32) > DENSE_LIMIT {
            return Err(Error::TooLarge(format!("{}^{k} exceeds the dense limit", grid.points())));
        }
        let c = first.coupling();
        let (expected, strength, transverse) = match variant {
            GpVariant::OneDimensional { coupling } => (*coupling, *coupling, vec![1.0]),
            GpVariant::Coupled { b0, basis } => {
                if basis.z_grid() != &grid {
                    return Err(Error::Precondition("basis grid differs from the trajectory grid".into()));
                }
                (b0 * h_quartic_integral()?, *b0, transverse_delta_matrix(basis)?)
            }
        };
        if (c - expected).abs() > 1e-12 * c.abs().max(1.0) {
            return Err(Error::Config(format!(
                "trajectory coupling {c} does not match the hierarchy coupling {expected}"
            )));
        }
        Ok(Self {
            grid,
            k,
            variant,
            strength,
            transverse,
        })
    }

    fn tensor_power(v: &[C], k: usize) -> Vec<C> {
        let mut out = vec![C::new(1.0, 0.0)];
        for _ in 0..k {
            out = out.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        }
        out
    }

    fn gamma(&self, phi: &NLSField) -> DMatrix<C> {
        let v = Self::tensor_power(&phi.coefficients(), self.k);
        let col = DMatrix::from_column_slice(v.len(), 1, &v);
        &col * col.adjoint()
    }

    fn source(&self, phi: &NLSField) -> Result<DMatrix<C>> {
        let coeffs = phi.coefficients();
        let (single, mx) = match self.variant {
            GpVariant::OneDimensional { .. } => (coeffs, 1),
            GpVariant::Coupled { basis, .. } => (basis.embed_ground(&coeffs)?, basis.mx()),
        };
        let v = Self::tensor_power(&single, self.k + 1);
        let factor = DMatrix::from_column_slice(v.len(), 1, &v);
        let rows = self.grid.points().pow(self.k as u32);
        let mut total = DMatrix::zeros(rows, rows);
        for j in 0..self.k {
            let (x, y) = collision_pair(&factor, &self.grid, mx, &self.transverse, self.k, j)?;
            total += commutator_from_pair(&x, &y);
        }
        Ok(total * C::new(self.strength, 0.0))
    }

    /// `ε_P` for every `k`-particle coefficient index.
    fn energies(&self) -> Vec<f64> {
        let k2: Vec<f64> = self.grid.wavenumbers().iter().map(|k| k * k).collect();
        let mut out = vec![0.0];
        for _ in 0..self.k {
            out = out.iter().flat_map(|e| k2.iter().map(move |q| e + q)).collect();
        }
        out
    }

    fn describe(&self) -> String {
        match self.variant {
            GpVariant::OneDimensional { .. } => {
                format!("Mz={} Lz={}", self.grid.points(), self.grid.box_length())
            }
            GpVariant::Coupled { basis, .. } => format!(
                "levels={} Mz={} Lz={}",
                basis.x_basis().max_level(),
                self.grid.points(),
                self.grid.box_length()
            ),
        }
    }
}

/// `A ↦ U(t)A` for the free longitudinal propagator.
fn free_propagate(a: &DMatrix<C>, eps: &[f64], t: f64) -> DMatrix<C> {
    let phase: Vec<C> = eps.iter().map(|e| C::from_polar(1.0, -t * e)).collect();
    DMatrix::from_fn(a.nrows(), a.ncols(), |p, q| a[(p, q)] * phase[p] * phase[q].conj())
}

fn max_spacing(times: &[f64]) -> f64 {
    times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Integral-form defect at every trajectory sample.
pub fn gp_residual(traj: &Trajectory<NLSField>, k: usize, variant: &GpVariant) -> Result<HierarchyResidual> {
    let sampler = Sampler::new(traj, k, variant)?;
    if traj.len() < 2 {
        return Err(Error::Sampling("the s-integral needs at least two samples".into()));
    }
    let eps = sampler.energies();
    let t0 = traj.times[0];
    let gamma0 = sampler.gamma(&traj.samples[0]);
    let rows = gamma0.nrows();
    let mut acc = DMatrix::<C>::zeros(rows, rows);
    let mut prev = free_propagate(&sampler.source(&traj.samples[0])?, &eps, -0.0);
    let mut residuals = vec![0.0];
    for n in 1..traj.len() {
        let s = traj.times[n] - t0;
        let w = free_propagate(&sampler.source(&traj.samples[n])?, &eps, -s);
        let h = traj.times[n] - traj.times[n - 1];
        acc += (&prev + &w) * C::new(0.5 * h, 0.0);
        prev = w;
        let predicted = free_propagate(&(&gamma0 + &acc * C::new(0.0, 1.0)), &eps, s);
        let defect = sampler.gamma(&traj.samples[n]) - predicted;
        residuals.push(defect.norm());
    }
    Ok(HierarchyResidual {
        k,
        form: ResidualForm::GpIntegral,
        times: traj.times.clone(),
        residuals,
        dt: max_spacing(&traj.times),
        basis: sampler.describe(),
    })
}

fn check_uniform(times: &[f64]) -> Result<f64> {
    let h = times[1] - times[0];
    if times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300)) {
        return Err(Error::Sampling("central differences need equally spaced samples".into()));
    }
    Ok(h)
}

/// Differential-form defect `i∂_tγ − Σ_j[−∂²_{z_j}, γ] + c Σ_j B_{j,k+1}γ^{(k+1)}`
/// at interior samples, with a central difference in time.
pub fn gp_residual_differential(
    traj: &Trajectory<NLSField>,
    k: usize,
    variant: &GpVariant,
) -> Result<HierarchyResidual> {
    let sampler = Sampler::new(traj, k, variant)?;
    if traj.len() < 3 {
        return Err(Error::Sampling("central differences need at least three samples".into()));
    }
    let h = check_uniform(&traj.times)?;
    let eps = sampler.energies();
    let residuals = (1..traj.len() - 1)
        .into_par_iter()
        .map(|i| {
            let dg = sampler.gamma(&traj.samples[i + 1]) - sampler.gamma(&traj.samples[i - 1]);
            let g = sampler.gamma(&traj.samples[i]);
            let comm = DMatrix::from_fn(g.nrows(), g.ncols(), |p, q| g[(p, q)] * (eps[p] - eps[q]));
            let r = dg * C::new(0.0, 0.5 / h) - comm + sampler.source(&traj.samples[i])?;
            Ok(r.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(HierarchyResidual {
        k,
        form: ResidualForm::GpDifferential,
        times: traj.times[1..traj.len() - 1].to_vec(),
        residuals,
        dt: h,
        basis: sampler.describe(),
    })
}

/// `∫ ‖∏_i ⟨∂_{z_i}⟩^ε ⟨∂_{z'_i}⟩^ε B_{j,k+1}γ^{(k+1)}(t)‖_{L²} dt` for each `j`,
/// trapezoid in time, for the one-dimensional hierarchy on `|φ⟩⟨φ|^{⊗(k+1)}`.
pub fn space_time_norm(traj: &Trajectory<NLSField>, k: usize, eps: f64) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("ε = {eps} must be positive")));
    }
    let variant = GpVariant::OneDimensional {
        coupling: traj.samples.first().map(|s| s.coupling()).unwrap_or(0.0),
    };
    let sampler = Sampler::new(traj, k, &variant)?;
    let grid = &sampler.grid;
    let bracket: Vec<f64> = grid.wavenumbers().iter().map(|q| (1.0 + q * q).powf(0.5 * eps)).collect();
    let mut weight = vec![1.0];
    for _ in 0..k {
        weight = weight.iter().flat_map(|w| bracket.iter().map(move |b| w * b)).collect();
    }
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let norms: Vec<f64> = traj
            .samples
            .par_iter()
            .map(|phi| {
                let v = Sampler::tensor_power(&phi.coefficients(), k + 1);
                let factor = DMatrix::from_column_slice(v.len(), 1, &v);
                let (x, y) = collision_pair(&factor, grid, 1, &[1.0], k, j)?;
                let b = commutator_from_pair(&x, &y);
                Ok(DMatrix::from_fn(b.nrows(), b.ncols(), |p, q| b[(p, q)] * weight[p] * weight[q]).norm())
            })
            .collect::<Result<Vec<f64>>>()?;
        let integral = traj
            .times
            .windows(2)
            .zip(norms.windows(2))
            .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
            .sum();
        out.push(integral);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{nls_evolve, uniform_times, NlsConfig};

    fn soliton_traj(c: f64, samples: usize, t: f64) -> Trajectory<NLSField> {
        let grid = FourierGrid1D::new(20.0, 32).unwrap();
        let phi = if c > 0.0 {
            // Unit grid mass; the exact profile misses it by quadrature error.
            let s = NLSField::soliton(grid.clone(), c / 4.0, c, 0.0).unwrap();
            let m = s.mass().sqrt();
            NLSField::new(grid, s.values().iter().map(|v| v / m).collect(), c).unwrap()
        } else {
            NLSField::gaussian(grid, 1.0, 0.0).unwrap()
        };
        nls_evolve(&phi, &uniform_times(t, samples), &NlsConfig::default()).unwrap()
    }

    #[test]
    fn free_defect_is_rounding_only() {
        let traj = soliton_traj(0.0, 20, 0.5);
        let r = gp_residual(&traj, 1, &GpVariant::OneDimensional { coupling: 0.0 }).unwrap();
        assert!(r.max() < 1e-9, "{}", r.max());
    }

    #[test]
    fn coupling_mismatch_is_a_config_error() {
        let traj = soliton_traj(4.0, 4, 0.01);
        let err = gp_residual(&traj, 1, &GpVariant::OneDimensional { coupling: 3.0 }).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn soliton_defect_shrinks_with_sampling() {
        let coarse = gp_residual(&soliton_traj(4.0, 50, 0.2), 1, &GpVariant::OneDimensional { coupling: 4.0 }).unwrap();
        let fine = gp_residual(&soliton_traj(4.0, 100, 0.2), 1, &GpVariant::OneDimensional { coupling: 4.0 }).unwrap();
        let ratio = coarse.max() / fine.max();
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn differential_form_agrees() {
        let traj = soliton_traj(4.0, 100, 0.2);
        let v = GpVariant::OneDimensional { coupling: 4.0 };
        let d = gp_residual_differential(&traj, 1, &v).unwrap();
        let i = gp_residual(&traj, 1, &v).unwrap();
        assert!(d.max() < 1e-2 && i.max() < 1e-3, "{} {}", d.max(), i.max());
    }

    #[test]
    fn space_time_norm_is_finite_and_grows_with_eps() {
        let traj = soliton_traj(4.0, 10, 0.1);
        let a = space_time_norm(&traj, 1, 0.25).unwrap();
        let b = space_time_norm(&traj, 1, 0.5).unwrap();
        assert!(a[0] > 0.0 && b[0] > a[0]);
    }
}
