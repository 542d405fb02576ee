use std::sync::Arc;

use focusing_core::dynamics::{ManyBodyState, NLSField};
use focusing_core::marginals::*;
use focusing_core::spectral::SingleParticleBasis;
use focusing_core::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn basis() -> Arc<SingleParticleBasis> {
    Arc::new(SingleParticleBasis::new(2, 6, 8, 10.0).unwrap())
}

fn unit(b: &SingleParticleBasis, seed: u64) -> Vec<Complex64> {
    // A random one-particle state is the one-particle "N = 1" symmetric state.
    let mut v: Vec<Complex64> = (0..b.dim())
        .map(|i| {
            let x = ((i as u64 + 1) * (seed + 7)) as f64;
            Complex64::new((x * 0.37).sin(), (x * 0.11).cos())
        })
        .collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
    v
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm()
}

#[test]
fn product_state_marginal_is_the_projector() {
    let b = basis();
    let u = unit(&b, 1);
    let psi = ManyBodyState::product(b.clone(), 3, &u).unwrap();
    for k in 1..=3 {
        let gamma = reduce_marginal(&psi, k).unwrap();
        let mut v = vec![Complex64::new(1.0, 0.0)];
        for _ in 0..k {
            v = v.iter().flat_map(|a| u.iter().map(move |c| a * c)).collect();
        }
        let target = DensityMatrix::pure(b.clone(), k, &v).unwrap();
        assert!(trace_distance(&gamma, &target).unwrap() < 1e-12);
    }
}

#[test]
fn pure_state_distances_match_closed_forms() {
    let b = basis();
    for seeds in [(1, 2), (3, 9), (5, 6)] {
        let (u, v) = (unit(&b, seeds.0), unit(&b, seeds.1));
        let s = (1.0 - overlap(&u, &v).powi(2)).max(0.0).sqrt();
        let gu = DensityMatrix::pure(b.clone(), 1, &u).unwrap();
        let gv = DensityMatrix::pure(b.clone(), 1, &v).unwrap();
        let t = trace_distance(&gu, &gv).unwrap();
        assert!((t - 2.0 * s).abs() < 1e-10);
        assert!((hs_distance(&gu, &gv).unwrap() - 2f64.sqrt() * s).abs() < 1e-10);
    }
}

#[test]
fn factorization_gap_vanishes_for_matching_product_data() {
    let b = basis();
    let phi = NLSField::gaussian(b.z_grid().clone(), 1.1, 0.0).unwrap();
    let single = b.embed_ground(&phi.coefficients()).unwrap();
    let psi = ManyBodyState::product(b.clone(), 2, &single).unwrap();
    let gamma = reduce_marginal(&psi, 1).unwrap();
    assert!(factorization_gap(&gamma, &phi).unwrap() < 1e-12);
    assert!(limiting_structure_gap(&gamma).unwrap() < 1e-12);
    let other = NLSField::gaussian(b.z_grid().clone(), 2.0, 0.0).unwrap();
    assert!(factorization_gap(&gamma, &other).unwrap() > 1e-3);
}

#[test]
fn metric_vanishes_on_identical_arguments() {
    let psi = ManyBodyState::random_symmetric(basis(), 2, 3).unwrap();
    let g = reduce_marginal(&psi, 1).unwrap();
    assert_eq!(dk_metric(&g, &g, &MetricConfig::default()).unwrap(), 0.0);
    assert!(trace_distance(&g, &g).unwrap() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn marginals_are_density_matrices(seed in 0u64..1000, n in 2usize..4) {
        let psi = ManyBodyState::random_symmetric(basis(), n, seed).unwrap();
        for k in 1..=n.min(2) {
            let g = reduce_marginal(&psi, k).unwrap();
            prop_assert!((g.trace() - 1.0).abs() < 1e-12);
            prop_assert!(g.hermiticity_defect() < 1e-12);
            prop_assert!(g.eigenvalues().unwrap().iter().all(|&e| e > -1e-12));
            if k == 2 {
                prop_assert!(g.permutation_defect().unwrap() < 1e-12);
            }
        }
        if n == 3 {
            let upper = trace_last(&reduce_marginal(&psi, 2).unwrap()).unwrap().to_dense().unwrap();
            let lower = reduce_marginal(&psi, 1).unwrap().to_dense().unwrap();
            prop_assert!((upper - lower).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn distances_are_symmetric_and_ordered(a in 0u64..500, b in 0u64..500) {
        let basis = basis();
        let ga = reduce_marginal(&ManyBodyState::random_symmetric(basis.clone(), 2, a).unwrap(), 1).unwrap();
        let gb = reduce_marginal(&ManyBodyState::random_symmetric(basis, 2, b).unwrap(), 1).unwrap();
        let t = trace_distance(&ga, &gb).unwrap();
        prop_assert!((t - trace_distance(&gb, &ga).unwrap()).abs() < 1e-12);
        // HS ≤ trace norm, and |Tr J(γ₁ − γ₂)| ≤ Tr|γ₁ − γ₂| for each projection J.
        prop_assert!(hs_distance(&ga, &gb).unwrap() <= t + 1e-12);
        prop_assert!(dk_metric(&ga, &gb, &MetricConfig::default()).unwrap() <= t + 1e-12);
        prop_assert!(t <= 2.0 + 1e-12);
    }

    #[test]
    fn x_trace_preserves_the_trace(seed in 0u64..1000) {
        let psi = ManyBodyState::random_symmetric(basis(), 2, seed).unwrap();
        let g = reduce_marginal(&psi, 1).unwrap();
        let gz = trace_x(&g).unwrap();
        prop_assert!((gz.trace() - 1.0).abs() < 1e-12);
        let dense: DMatrix<Complex64> = gz.to_dense().unwrap();
        prop_assert!((&dense - dense.adjoint()).iter().all(|z| z.norm() < 1e-12));
    }
}
