//! BBGKY residual along an N-body trajectory.
//!
//! Every term of the hierarchy is a partial trace of an operator applied to
//! the state, so each has the form `Tr_{k+1..N}|Φ⟩⟨ψ| = A_Φ A_ψ†` with
//! `A_ψ` the `d^k × d^{N−k}` reshape of `ψ`. The residual is assembled as a
//! sum of such products and its Hilbert–Schmidt norm is taken either densely
//! or through Gram matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{HierarchyResidual, ResidualForm};
use crate::dynamics::{ManyBodyState, Trajectory};
use crate::marginals::DENSE_LIMIT;
use crate::operators::{apply_single_diagonal, HamiltonianSpec};
use crate::tensor::Shape;
use crate::{Error, Result};

type C = Complex64;

fn reshape(v: &[C], rows: usize) -> DMatrix<C> {
    let cols = v.len() / rows;
    DMatrix::from_fn(rows, cols, |a, b| v[a * cols + b])
}

/// `‖Σ_m c_m L_m R_m†‖_HS`.
fn hs_norm_of_products(terms: &[(C, DMatrix<C>, DMatrix<C>)]) -> f64 {
    let rows = terms[0].1.nrows();
    let cols: usize = terms.iter().map(|t| t.1.ncols()).sum();
    let mut l = DMatrix::zeros(rows, cols);
    let mut r = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for (c, a, b) in terms {
        let w = a.ncols();
        l.columns_mut(at, w).copy_from(&(a * *c));
        r.columns_mut(at, w).copy_from(b);
        at += w;
    }
    if rows <= DENSE_LIMIT && rows <= cols {
        (&l * r.adjoint()).norm()
    } else {
        // ‖L R†‖² = Tr[(L†L)(R†R)].
        let gl = l.adjoint() * &l;
        let gr = r.adjoint() * &r;
        gl.component_mul(&gr.transpose()).iter().map(|z| z.re).sum::<f64>().max(0.0).sqrt()
    }
}

/// `‖ i∂_tγ^{(k)} − Σ_j[h_j, γ^{(k)}] − Σ_{i<j≤k}[V_{ij}/N, γ^{(k)}]
/// − ((N−k)/N) Σ_j Tr_{k+1}[V_{j,k+1}, γ^{(k+1)}] ‖_HS` at interior samples,
/// with a central difference over the sample spacing `dt_fd`.
pub fn bbgky_residual(
    spec: &HamiltonianSpec,
    traj: &Trajectory<ManyBodyState>,
    k: usize,
    dt_fd: f64,
) -> Result<HierarchyResidual> {
    let n = spec.n();
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("k = {k} outside 1..={n}")));
    }
    if spec.z_trap_strength().is_some() {
        return Err(Error::Precondition("the residual meter covers the trap-free Hamiltonian only".into()));
    }
    if traj.len() < 3 {
        return Err(Error::Sampling(format!("{} samples cannot support a central difference", traj.len())));
    }
    if traj
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt_fd).abs() > 1e-9 * dt_fd.abs().max(1e-300))
    {
        return Err(Error::Sampling(format!("samples are not spaced by dt_fd = {dt_fd}")));
    }
    for psi in &traj.samples {
        spec.check_state(psi)?;
    }
    let d = spec.basis().dim();
    let shape = Shape::new(d, n);
    let rows = d.pow(k as u32);
    let diag = spec.one_body_diagonal();
    let pair = spec.pair();
    let zero = C::new(0.0, 0.0);
    let one = C::new(1.0, 0.0);
    let residuals = (1..traj.len() - 1)
        .into_par_iter()
        .map(|i| {
            let psi = traj.samples[i].coeffs();
            let a = reshape(psi, rows);
            let plus = reshape(traj.samples[i + 1].coeffs(), rows);
            let minus = reshape(traj.samples[i - 1].coeffs(), rows);
            let half = C::new(0.0, 0.5 / dt_fd);
            let mut terms = vec![(half, plus.clone(), plus), (-half, minus.clone(), minus)];
            // [X, γ] contributes −A_X A† + A A_X†.
            let mut commutator = |phi: Vec<C>, weight: f64| {
                let ax = reshape(&phi, rows);
                terms.push((-one * weight, ax.clone(), a.clone()));
                terms.push((one * weight, a.clone(), ax));
            };
            for j in 0..k {
                commutator(apply_single_diagonal(psi, shape, j, diag), 1.0);
            }
            if !pair.is_zero() {
                for p in 0..k {
                    for q in p + 1..k {
                        let mut out = vec![zero; psi.len()];
                        pair.apply_pair_into(psi, shape, p, q, &mut out);
                        commutator(out, 1.0);
                    }
                }
                if k < n {
                    // N − k equal copies of the (j, k+1) term by symmetry.
                    for j in 0..k {
                        let mut out = vec![zero; psi.len()];
                        pair.apply_pair_into(psi, shape, j, k, &mut out);
                        commutator(out, (n - k) as f64);
                    }
                }
            }
            hs_norm_of_products(&terms)
        })
        .collect();
    Ok(HierarchyResidual {
        k,
        form: ResidualForm::Bbgky,
        times: traj.times[1..traj.len() - 1].to_vec(),
        residuals,
        dt: dt_fd,
        basis: format!(
            "levels={} Mz={} Lz={}",
            spec.basis().x_basis().max_level(),
            spec.basis().mz(),
            spec.basis().z_grid().box_length()
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_nbody;
    use crate::operators::{GaussianTerm, PotentialSpec};
    use crate::spectral::SingleParticleBasis;
    use std::sync::Arc;

    fn spec(n: usize, v: PotentialSpec) -> HamiltonianSpec {
        let basis = Arc::new(SingleParticleBasis::new(2, 6, 8, 8.0).unwrap());
        HamiltonianSpec::new(n, 1.5, v, basis, 1.0).unwrap()
    }

    fn run(h: &HamiltonianSpec, k: usize, dt_fd: f64) -> f64 {
        let psi0 = ManyBodyState::random_symmetric(h.basis().clone(), h.n(), 3).unwrap();
        let traj = evolve_nbody(h, &psi0, 2.0 * dt_fd, dt_fd, 2).unwrap();
        bbgky_residual(h, &traj, k, dt_fd).unwrap().max()
    }

    #[test]
    fn gram_and_dense_norms_agree() {
        let a = DMatrix::from_fn(3, 5, |i, j| C::new(i as f64 - j as f64, 0.5 * (i * j) as f64));
        let b = DMatrix::from_fn(3, 5, |i, j| C::new((i + j) as f64, -1.0));
        let dense = (&a * b.adjoint() * C::new(0.0, 2.0)).norm();
        let terms = vec![(C::new(0.0, 2.0), a, b)];
        assert!((hs_norm_of_products(&terms) - dense).abs() < 1e-12 * dense);
        let gl = terms[0].1.adjoint() * &terms[0].1 * C::new(4.0, 0.0);
        let gr = terms[0].2.adjoint() * &terms[0].2;
        let gram = gl.component_mul(&gr.transpose()).iter().map(|z| z.re).sum::<f64>().sqrt();
        assert!((gram - dense).abs() < 1e-10 * dense);
    }

    #[test]
    fn interacting_residual_is_second_order() {
        let v = PotentialSpec::focusing(vec![GaussianTerm::attractive(2.0, 0.6)], 0.25).unwrap();
        let h = spec(2, v);
        let coarse = run(&h, 1, 2e-3);
        let fine = run(&h, 1, 1e-3);
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.3, "ratio {ratio}");
    }

    #[test]
    fn top_order_has_no_trace_term() {
        let v = PotentialSpec::focusing(vec![GaussianTerm::attractive(2.0, 0.6)], 0.25).unwrap();
        let h = spec(2, v);
        // k = N is the von Neumann equation of the full state.
        assert!(run(&h, 2, 1e-3) / run(&h, 2, 2e-3) < 0.3);
    }

    #[test]
    fn uneven_sampling_is_rejected() {
        let h = spec(2, PotentialSpec::zero(0.25).unwrap());
        let psi0 = ManyBodyState::random_symmetric(h.basis().clone(), 2, 1).unwrap();
        let traj = evolve_nbody(&h, &psi0, 0.01, 1e-3, 2).unwrap();
        assert!(matches!(bbgky_residual(&h, &traj, 1, 1e-3), Err(Error::Sampling(_))));
    }
}
