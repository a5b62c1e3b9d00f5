mod common;

use common::{dense, grid_1d, sorted_eigenvalues};
use coopbif_core::discretization::assemble_laplacian;
use coopbif_core::spectral::{analyze_coupling, discrete_spectrum, rayleigh_quotient, CouplingMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle_2x2(m: &CouplingMatrix) -> (f64, f64) {
    let a = nalgebra::Matrix2::new(m.a, m.b, m.c, m.d);
    let ev = a.complex_eigenvalues();
    let (x, y) = (ev[0].re, ev[1].re);
    (x.max(y), x.min(y))
}

#[test]
fn principal_pair_matches_dense_oracle() {
    let lap = assemble_laplacian(&grid_1d(127));
    let ds = discrete_spectrum(&lap, 3).unwrap();
    let eig = sorted_eigenvalues(dense(lap.matrix()));
    for (got, want) in ds.values.iter().zip(&eig[..3]) {
        assert!((got - want).abs() <= 1e-10 * want);
    }
    assert!(ds.phi1().iter().all(|p| *p > 0.0));
}

#[test]
fn rayleigh_quotient_is_minimized_by_phi1() {
    let lap = assemble_laplacian(&grid_1d(63));
    let ds = discrete_spectrum(&lap, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut least = f64::INFINITY;
    for _ in 0..1000 {
        let field: Vec<f64> = (0..63).map(|_| rng.random_range(-1.0..1.0)).collect();
        least = least.min(rayleigh_quotient(&lap, &field).unwrap());
    }
    assert!(least >= ds.lambda1() - 1e-10);
    // perturbations of φ₁ stay above λ₁ too
    for _ in 0..100 {
        let field: Vec<f64> = ds.phi1().iter().map(|p| p + 1e-3 * rng.random_range(-1.0..1.0)).collect();
        assert!(rayleigh_quotient(&lap, &field).unwrap() >= ds.lambda1() - 1e-10);
    }
}

#[test]
fn schrodinger_principal_vector_positive_for_random_potentials() {
    let lap = assemble_laplacian(&grid_1d(31));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let psi: Vec<f64> = (0..31).map(|_| rng.random_range(0.0..50.0)).collect();
        let op = lap.with_potential(&psi).unwrap();
        let ds = discrete_spectrum(&op, 1).unwrap();
        assert!(ds.phi1().iter().all(|p| *p > 0.0));
        let eig = sorted_eigenvalues(dense(op.matrix()));
        assert!((ds.lambda1() - eig[0]).abs() <= 1e-10 * eig[0]);
    }
}

#[test]
fn positive_matrices_have_opposite_sign_second_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let m = CouplingMatrix::new(
            rng.random_range(0.01..10.0),
            rng.random_range(0.01..10.0),
            rng.random_range(0.01..10.0),
            rng.random_range(0.01..10.0),
        )
        .unwrap();
        let cs = analyze_coupling(&m);
        assert!(cs.z_strictly_positive);
        assert!(cs.w[0] * cs.w[1] < 0.0, "{m:?} -> {:?}", cs.w);
        let (l, mu) = oracle_2x2(&m);
        assert!((cs.lambda - l).abs() <= 1e-12 * l.abs().max(1.0));
        assert!((cs.mu - mu).abs() <= 1e-12 * l.abs().max(1.0));
    }
}

proptest! {
    #[test]
    fn coupling_analysis_is_scale_equivariant(
        a in -5.0f64..5.0, b in 0.1f64..5.0, c in 0.1f64..5.0, d in -5.0f64..5.0, s in 0.01f64..100.0,
    ) {
        let m = CouplingMatrix::new(a, b, c, d).unwrap();
        let x = analyze_coupling(&m);
        let y = analyze_coupling(&m.scaled(s));
        let tol = 1e-12 * s * m.frobenius_norm();
        prop_assert!((y.lambda - s * x.lambda).abs() <= tol);
        prop_assert!((y.mu - s * x.mu).abs() <= tol);
        for k in 0..2 {
            prop_assert!((y.z[k] - x.z[k]).abs() <= 1e-12);
            prop_assert!((y.w[k] - x.w[k]).abs() <= 1e-12);
        }
    }

    #[test]
    fn trace_and_determinant_are_reproduced(
        a in -5.0f64..5.0, b in 0.0f64..5.0, c in 0.0f64..5.0, d in -5.0f64..5.0,
    ) {
        let m = CouplingMatrix::new(a, b, c, d).unwrap();
        let cs = analyze_coupling(&m);
        let scale = 1.0 + m.frobenius_norm().powi(2);
        prop_assert!((cs.lambda + cs.mu - m.trace()).abs() <= 1e-12 * scale);
        prop_assert!((cs.lambda * cs.mu - m.determinant()).abs() <= 1e-10 * scale);
        let az = m.apply(cs.z);
        prop_assert!((az[0] - cs.lambda * cs.z[0]).abs() <= 1e-10 * scale);
        prop_assert!((az[1] - cs.lambda * cs.z[1]).abs() <= 1e-10 * scale);
    }
}
