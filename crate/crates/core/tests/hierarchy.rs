use std::sync::Arc;

use focusing_core::dynamics::{nls_evolve, uniform_times, ManyBodyState, NLSField, NlsConfig};
use focusing_core::hierarchy::*;
use focusing_core::marginals::{reduce_marginal, DensityMatrix, ReducedZDensity};
use focusing_core::spectral::{FourierGrid1D, SingleParticleBasis};
use focusing_core::{Complex64, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn field(grid: &FourierGrid1D, shift: f64, tilt: f64) -> Vec<Complex64> {
    let v: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|z| Complex64::from_polar((-(z - shift).powi(2) / 2.0).exp(), tilt * z))
        .collect();
    let n = grid.norm(&v);
    grid.forward(&v.into_iter().map(|x| x / n).collect::<Vec<_>>()).unwrap()
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn stationary_soliton_has_a_small_gp_defect() {
    let grid = FourierGrid1D::new(20.0, 32).unwrap();
    let s = NLSField::soliton(grid.clone(), 1.0, 4.0, 0.0).unwrap();
    let m = s.mass().sqrt();
    let phi = NLSField::new(grid, s.values().iter().map(|v| v / m).collect(), 4.0).unwrap();
    let traj = nls_evolve(&phi, &uniform_times(0.2, 100), &NlsConfig::default()).unwrap();
    let r = gp_residual(&traj, 1, &GpVariant::OneDimensional { coupling: 4.0 }).unwrap();
    assert_eq!(r.form, ResidualForm::GpIntegral);
    assert!(r.max() < 1e-5, "{}", r.max());
}

#[test]
fn bbgky_rejects_out_of_range_order() {
    let b = Arc::new(SingleParticleBasis::new(2, 6, 8, 8.0).unwrap());
    let h = focusing_core::operators::HamiltonianSpec::new(
        2,
        1.5,
        focusing_core::operators::PotentialSpec::zero(0.25).unwrap(),
        b.clone(),
        1.0,
    )
    .unwrap();
    let psi = ManyBodyState::random_symmetric(b, 2, 1).unwrap();
    let traj = focusing_core::dynamics::evolve_nbody(&h, &psi, 2e-3, 1e-3, 2).unwrap();
    assert!(matches!(bbgky_residual(&h, &traj, 3, 1e-3), Err(Error::Precondition(_))));
}

#[test]
fn mollifiers_have_unit_mass() {
    for f in [Mollifier::gaussian(), Mollifier::sign_changing()] {
        assert!((f.integral() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn coupled_operator_is_trace_free_on_entangled_data() {
    let b = Arc::new(SingleParticleBasis::new(2, 6, 8, 8.0).unwrap());
    let psi = ManyBodyState::random_symmetric(b, 2, 8).unwrap();
    let gamma: DensityMatrix = reduce_marginal(&psi, 2).unwrap();
    let out = coupled_collision_op(&gamma, 0).unwrap().to_dense().unwrap();
    assert!(out.trace().norm() < 1e-12);
    assert!(max_abs(&(&out + out.adjoint())) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn collision_output_is_anti_hermitian_and_trace_free(
        shift in -2.0f64..2.0, tilt in -1.5f64..1.5, k in 1usize..3,
    ) {
        let grid = FourierGrid1D::new(12.0, 16).unwrap();
        let phi = field(&grid, shift, tilt);
        let gamma = ReducedZDensity::product(grid, k + 1, &phi).unwrap();
        for j in 0..k {
            let b = collision_op(&gamma, j).unwrap().to_dense().unwrap();
            prop_assert!(b.trace().norm() < 1e-12);
            prop_assert!(max_abs(&(&b + b.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn collision_is_linear_in_the_density(shift in -2.0f64..2.0, w in 0.05f64..0.95) {
        let grid = FourierGrid1D::new(12.0, 16).unwrap();
        let a = ReducedZDensity::product(grid.clone(), 2, &field(&grid, shift, 0.3)).unwrap();
        let c = ReducedZDensity::product(grid.clone(), 2, &field(&grid, -shift, -0.5)).unwrap();
        let mix = ReducedZDensity::from_dense(
            grid,
            2,
            a.to_dense().unwrap() * Complex64::new(w, 0.0) + c.to_dense().unwrap() * Complex64::new(1.0 - w, 0.0),
        ).unwrap();
        let lhs = collision_op(&mix, 0).unwrap().to_dense().unwrap();
        let rhs = collision_op(&a, 0).unwrap().to_dense().unwrap() * Complex64::new(w, 0.0)
            + collision_op(&c, 0).unwrap().to_dense().unwrap() * Complex64::new(1.0 - w, 0.0);
        prop_assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }
}
