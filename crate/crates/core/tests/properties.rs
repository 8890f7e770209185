use proptest::prelude::*;
use qretro_core::channels::apply_dilation;
use qretro_core::estimators::{personick_estimator, schrodinger_risk};
use qretro_core::linalg::{
    eig_hermitian, jordan_product, jordan_trace_identity_check, partial_trace, solve_jordan, tensor,
};
use qretro_core::random::{self, instance_rng};
use qretro_core::{ComplexMatrix, DensityOperator, HermitianOperator, QuantumChannel, C64};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 200,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn jordan_product_of_hermitians_is_hermitian(seed in any::<u64>(), d in 2usize..=8) {
        let mut rng = instance_rng(seed, 0);
        let x = random::hermitian(&mut rng, d);
        let y = random::hermitian(&mut rng, d);
        let j = jordan_product(&x, &y).unwrap();
        prop_assert!(j.hermiticity_defect() <= 1e-12 * (1.0 + j.max_abs()));
    }

    #[test]
    fn jordan_trace_identity(seed in any::<u64>(), d in 2usize..=8) {
        let mut rng = instance_rng(seed, 1);
        let x = random::hermitian(&mut rng, d);
        let y = random::hermitian(&mut rng, d);
        let z = random::hermitian(&mut rng, d);
        let gap = jordan_trace_identity_check(&x, &y, &z).unwrap();
        let scale = x.frobenius_norm() * y.frobenius_norm() * z.frobenius_norm();
        prop_assert!(gap <= 1e-12 * (1.0 + scale), "gap {gap:e}");
    }

    #[test]
    fn partial_trace_is_linear_and_respects_products(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let mut rng = instance_rng(seed, 2);
        let a = random::complex_matrix(&mut rng, da, da);
        let b = random::complex_matrix(&mut rng, db, db);
        let c = random::complex_matrix(&mut rng, da * db, da * db);
        let s = C64::new(0.3, -1.2);
        let ab = tensor(&a, &b);
        let kept = partial_trace(&ab, &[da, db], &[0]).unwrap();
        let expected = a.scale(b.trace());
        prop_assert!((&kept - &expected).max_abs() <= 1e-12 * (1.0 + expected.max_abs()));
        let lhs = partial_trace(&(&ab + &c.scale(s)), &[da, db], &[1]).unwrap();
        let rhs = &partial_trace(&ab, &[da, db], &[1]).unwrap()
            + &partial_trace(&c, &[da, db], &[1]).unwrap().scale(s);
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn solve_jordan_round_trip(seed in any::<u64>(), d in 2usize..=6) {
        let mut rng = instance_rng(seed, 3);
        let a = random::density_operator(&mut rng, d).into_hermitian();
        let x = random::hermitian_operator(&mut rng, d);
        let b = a.jordan(&x).unwrap();
        let sol = solve_jordan(&a, &b).unwrap();
        prop_assert_eq!(sol.support_rank, d);
        let back = a.jordan(&sol.solution).unwrap();
        prop_assert!((back.matrix() - b.matrix()).max_abs() <= 1e-9 * (1.0 + b.max_abs()));
    }

    #[test]
    fn channels_preserve_trace_and_positivity(
        seed in any::<u64>(),
        d_in in 2usize..=4,
        d_out in 2usize..=4,
        n_kraus in 1usize..=4,
    ) {
        let mut rng = instance_rng(seed, 4);
        let k = random::channel(&mut rng, d_in, d_out, n_kraus);
        prop_assert!(k.validate_cptp().unwrap().accepted);
        let rho = random::density_operator(&mut rng, d_in);
        let out = k.apply_density(&rho).unwrap();
        prop_assert!((out.trace_re() - 1.0).abs() <= 1e-12);
        prop_assert!(eig_hermitian(&out).unwrap().min_eigenvalue() >= -1e-12);
    }

    #[test]
    fn dilation_channel_matches_explicit_partial_trace(seed in any::<u64>(), da in 2usize..=3, db in 2usize..=3) {
        let mut rng = instance_rng(seed, 5);
        let u = random::unitary(&mut rng, da * db);
        let env = random::density_operator(&mut rng, db);
        let rho = random::density_operator(&mut rng, da);
        for keep in 0..2 {
            let k = QuantumChannel::from_dilation(&u, &env, &[da, db], keep).unwrap();
            let via_kraus = k.apply(rho.matrix()).unwrap();
            let explicit = apply_dilation(&u, &env, &[da, db], keep, &rho).unwrap();
            prop_assert!((&via_kraus - &explicit).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn personick_risk_is_stationary(seed in any::<u64>(), d in 2usize..=4, d_out in 2usize..=4) {
        let mut rng = instance_rng(seed, 6);
        let rho = random::density_operator(&mut rng, d);
        let x = random::hermitian_operator(&mut rng, d);
        let k = random::channel(&mut rng, d, d_out, 2);
        let best = personick_estimator(&rho, &x, &k).unwrap();
        prop_assert!(best.min_risk >= -1e-9);
        let direct = schrodinger_risk(&rho, &x, &k, &best.estimator).unwrap();
        prop_assert!((direct - best.min_risk).abs() <= 1e-9 * (1.0 + direct.abs()));
        let h = random::hermitian_operator(&mut rng, d_out);
        for eps in [1e-3, 1e-1, 1.0] {
            let moved = best.estimator.add(&h.scale(eps));
            prop_assert!(schrodinger_risk(&rho, &x, &k, &moved).unwrap() >= best.min_risk - 1e-9);
        }
    }

    #[test]
    fn hermitian_constructor_symmetrizes_small_defects(seed in any::<u64>(), d in 2usize..=5) {
        let mut rng = instance_rng(seed, 7);
        let h = random::hermitian(&mut rng, d);
        let noise = random::complex_matrix(&mut rng, d, d).scale_real(1e-13);
        let op = HermitianOperator::new(&h + &noise).unwrap();
        prop_assert_eq!(op.hermiticity_defect(), 0.0);
    }
}

#[test]
fn product_state_density_has_unit_trace() {
    let mut rng = instance_rng(11, 0);
    let a = random::density(&mut rng, 2);
    let b = random::density(&mut rng, 3);
    let ab = DensityOperator::new(tensor(&a, &b)).unwrap();
    assert!((ab.trace_re() - 1.0).abs() < 1e-14);
    let zero = ComplexMatrix::zeros(2, 2);
    assert!(DensityOperator::new(zero).is_err());
}
