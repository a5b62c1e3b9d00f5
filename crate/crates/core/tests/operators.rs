mod common;

use common::{acceptance, grid_1d, system};
use coopbif_core::operators::{Classification, NewtonOptions};
use coopbif_core::spectral::CouplingMatrix;
use coopbif_core::StateField;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> StateField {
    StateField::new(
        (0..n).map(|_| rng.random_range(lo..hi)).collect(),
        (0..n).map(|_| rng.random_range(lo..hi)).collect(),
    )
    .unwrap()
}

/// `u = v = cφ₁` with `c = (3t − λ₁)/(2hΣφ₁)` solves the acceptance
/// scenario exactly: the nonlocal coefficient is the constant `2hcΣφ₁`.
fn exact_acceptance_solution(t: f64, phi1: &[f64], lambda1: f64, h: f64) -> StateField {
    let c = (3.0 * t - lambda1) / (2.0 * h * phi1.iter().sum::<f64>());
    let u: Vec<f64> = phi1.iter().map(|p| c * p).collect();
    StateField::new(u.clone(), u).unwrap()
}

fn s_operator_norm_estimate(n: usize) -> f64 {
    let sys = system(grid_1d(n), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
    let ones = StateField::new(vec![1.0; n], vec![1.0; n]).unwrap();
    // S is monotone for a nonnegative coupling, so the constant field attains the sup-norm bound
    sys.apply_s(&ones).unwrap().sup_norm() / ones.sup_norm()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn s_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let sys = system(grid_1d(31), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_field(&mut rng, 31, -1.0, 1.0);
        let y = random_field(&mut rng, 31, -1.0, 1.0);
        let lhs = sys.apply_s(&x.scaled(a).add(&y.scaled(b))).unwrap();
        let rhs = sys.apply_s(&x).unwrap().scaled(a).add(&sys.apply_s(&y).unwrap().scaled(b));
        prop_assert!(lhs.sub(&rhs).sup_norm() <= 1e-11 * (x.sup_norm() + y.sup_norm()));
    }

    #[test]
    fn s_is_bounded(seed in any::<u64>()) {
        let sys = system(grid_1d(31), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        let c = s_operator_norm_estimate(31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_field(&mut rng, 31, -1.0, 1.0);
        prop_assert!(sys.apply_s(&x).unwrap().sup_norm() <= c * x.sup_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn residual_is_odd(seed in any::<u64>(), t in 0.0f64..10.0) {
        let sys = system(grid_1d(31), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_field(&mut rng, 31, -2.0, 2.0);
        let r = sys.residual(t, &x).unwrap();
        let m = sys.residual(t, &x.scaled(-1.0)).unwrap();
        prop_assert!(r.add(&m).sup_norm() <= 1e-12 * (1.0 + r.sup_norm()));
    }
}

#[test]
fn s_norm_is_logged() {
    for n in [31, 63, 127] {
        println!("n = {n}: ‖S‖∞ ≈ {:.6}", s_operator_norm_estimate(n));
    }
}

#[test]
fn g_is_superlinear_at_zero() {
    let sys = system(grid_1d(31), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let gamma = 1.0;
    for _ in 0..10 {
        let x = random_field(&mut rng, 31, -1.0, 1.0);
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|eps| sys.apply_g(&x.scaled(*eps)).unwrap().sup_norm() / (eps * x.sup_norm()))
            .collect();
        // each decade shrinks the ratio by 10^γ: measured order ≥ γ
        for w in ratios.windows(2) {
            let order = (w[0] / w[1]).log10();
            assert!(order >= gamma - 1e-9, "order {order}");
        }
        let c = ratios[0] / 1e-1f64.powf(gamma);
        for (eps, r) in [1e-1f64, 1e-2, 1e-3].iter().zip(&ratios) {
            assert!(*r <= c * eps.powf(gamma) * (1.0 + 1e-9));
        }
    }
}

#[test]
fn jacobian_defect_is_first_order() {
    let sys = system(grid_1d(31), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_field(&mut rng, 31, 0.2, 1.0);
    let t = 4.0;
    let jac = sys.jacobian(t, &x);
    let r0 = sys.residual(t, &x).unwrap().to_flat();
    for _ in 0..5 {
        let d = random_field(&mut rng, 31, -1.0, 1.0);
        let jd = jac.mul_vec(&d.to_flat());
        let defect = |h: f64| {
            let r1 = sys.residual(t, &x.add(&d.scaled(h))).unwrap().to_flat();
            r1.iter().zip(&r0).zip(&jd).map(|((a, b), j)| ((a - b) / h - j).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (defect(1e-3), defect(5e-4));
        let ratio = e1 / e2;
        assert!((ratio - 2.0).abs() < 0.2, "defects {e1:e} {e2:e}");
    }
}

#[test]
fn newton_keeps_exchange_symmetry() {
    let sys = system(grid_1d(63), CouplingMatrix::new(2.0, 1.0, 1.0, 2.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u: Vec<f64> = (0..63).map(|_| rng.random_range(0.1..2.0)).collect();
    let start = StateField::new(u.clone(), u).unwrap();
    let mut iterates = 0;
    let out = sys
        .newton_solve_observed(6.0, &start, &NewtonOptions::default(), |_, s| {
            iterates += 1;
            let d = s.u.iter().zip(&s.v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-10, "iterate split by {d:e}");
        })
        .unwrap();
    assert!(out.converged && iterates == out.iterations);
}

#[test]
fn newton_reaches_the_exact_solution_at_twice_t1() {
    let p = acceptance(127);
    let t = 2.0 * p.t1();
    let out = p.system().newton_solve(t, &p.seed(1e-1).unwrap(), &NewtonOptions::default());
    let out = match out.unwrap() {
        o if o.classification == Classification::PositiveSolution => o,
        // the small seed may fall back to zero; the multi-start family must not
        _ => p.positive_probe(t, &NewtonOptions::default()).unwrap().expect("positive solution at 2t₁"),
    };
    assert!(out.residual <= 1e-10);
    let h = p.system().grid().cell_measure();
    let exact = exact_acceptance_solution(t, p.spectrum().phi1(), p.spectrum().lambda1(), h);
    assert!(out.state.sub(&exact).sup_norm() <= 1e-8 * exact.sup_norm());
}

#[test]
fn random_starts_below_threshold_collapse_to_zero() {
    let p = acceptance(63);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..20 {
        let start = random_field(&mut rng, 63, 0.0, 5.0);
        let out = p.system().newton_solve(0.5 * p.t1(), &start, &NewtonOptions::default()).unwrap();
        assert_eq!(out.classification, Classification::Zero);
    }
}
