mod common;

use common::*;
use proptest::prelude::*;
use ssm_core::bounds::{self, forward_difference, restrict_parity, BoundConvention, BoundQuery, Parity};
use ssm_core::constructors::default_nodes;
use ssm_core::rng;
use ssm_core::{
    bilinear_discretize, construct_complex_dft, construct_real_vandermonde, convolve_truncated, Complex64,
    DiagonalSsm, ScalarSeries, TargetSpec,
};

fn real_system(n: usize) -> impl Strategy<Value = DiagonalSsm> {
    (
        prop::collection::vec(-0.999f64..0.999, n),
        prop::collection::vec(-2.0f64..2.0, n),
        prop::collection::vec(-2.0f64..2.0, n),
    )
        .prop_map(|(a, b, c)| DiagonalSsm::real(&a, &b, &c).unwrap())
}

fn complex_system(n: usize) -> impl Strategy<Value = DiagonalSsm> {
    let entry = |r: f64| (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(m, p)| Complex64::from_polar(m, p));
    (
        prop::collection::vec(entry(0.999), n),
        prop::collection::vec(entry(2.0), n),
        prop::collection::vec(entry(2.0), n),
    )
        .prop_map(|(a, b, c)| DiagonalSsm::complex(a, b, c).unwrap())
}

fn any_system() -> impl Strategy<Value = DiagonalSsm> {
    (1usize..=8).prop_flat_map(|n| prop_oneof![real_system(n), complex_system(n)])
}

fn series(len: impl Into<prop::collection::SizeRange>) -> impl Strategy<Value = ScalarSeries> {
    prop::collection::vec(-1.0f64..1.0, len).prop_map(|v| ScalarSeries::new(v).unwrap())
}

fn iterated(values: &[f64], order: usize) -> Vec<f64> {
    let mut v = values.to_vec();
    for _ in 0..order {
        v = v.windows(2).map(|w| w[1] - w[0]).collect();
    }
    v
}

proptest! {
    #[test]
    fn recursion_equals_convolution(ssm in any_system(), input in series(1..=32)) {
        let (out, _) = ssm.apply(&input).unwrap();
        let ir = ssm.impulse_response(input.len()).unwrap();
        let conv = convolve_truncated(&input, &ir);
        prop_assert!(max_abs_diff(out.values(), conv.values()) <= 1e-10);
    }

    #[test]
    fn impulse_response_is_finite(ssm in any_system(), t in 1usize..200) {
        let ir = ssm.impulse_response(t).unwrap();
        prop_assert_eq!(ir.len(), t);
        prop_assert!(ir.values().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn apply_is_linear(ssm in any_system(), s in series(20), u in series(20), alpha in -3.0f64..3.0) {
        let (ys, _) = ssm.apply(&s).unwrap();
        let (yu, _) = ssm.apply(&u).unwrap();
        let (ycomb, _) = ssm.apply(&u.axpy(alpha, &s).unwrap()).unwrap();
        let expect = yu.axpy(alpha, &ys).unwrap();
        prop_assert!(max_abs_diff(ycomb.values(), expect.values()) <= 1e-9);
    }

    #[test]
    fn apply_is_time_invariant(ssm in any_system(), s in series(24), k in 0usize..24) {
        let (y_delayed_in, _) = ssm.apply(&s.delay(k)).unwrap();
        let (y, _) = ssm.apply(&s).unwrap();
        let y_delayed_out = y.delay(k);
        prop_assert!(max_abs_diff(y_delayed_in.values(), y_delayed_out.values()) <= 1e-10);
    }

    #[test]
    fn odd_entries_change_sign_at_most_n_minus_one(n in 1usize..=6, seed in any::<u64>(), t in 2usize..300) {
        let mut r = rng::seeded(seed);
        let ssm = random_real_stable(&mut r, n);
        let ir = ssm.impulse_response(t).unwrap();
        let odd = restrict_parity(&ir, Parity::Odd);
        prop_assert!(bounds::sign_changes(&odd, 1e-12) < n);
    }

    #[test]
    fn bilinear_keeps_poles_inside(re in -50.0f64..-1e-6, im in -50.0f64..50.0, delta in 1e-4f64..10.0) {
        let a = [Complex64::new(re, im)];
        let one = [Complex64::new(1.0, 0.0)];
        let d = bilinear_discretize(&a, &one, &one, delta).unwrap();
        prop_assert!(d.a()[0].norm() <= 1.0);
    }

    #[test]
    fn closed_form_difference_matches_iterated(s in series(2..=40), order in 1usize..=20) {
        prop_assume!(order < s.len());
        let closed = forward_difference(&s, order).unwrap();
        let iter = iterated(s.values(), order);
        let tol = 1e-9 * s.norm_inf().max(f64::MIN_POSITIVE) * 2f64.powi(order as i32);
        prop_assert!(max_abs_diff(closed.values(), &iter) <= tol);
    }

    #[test]
    fn forward_difference_is_linear(s in series(30), u in series(30), alpha in -2.0f64..2.0, order in 1usize..=20) {
        let lhs = forward_difference(&u.axpy(alpha, &s).unwrap(), order).unwrap();
        let rhs = forward_difference(&u, order).unwrap()
            .axpy(alpha, &forward_difference(&s, order).unwrap()).unwrap();
        // Above order 10 the differences reach 2^order in magnitude and the
        // comparison is made relative to that scale.
        let tol = 1e-10 * 2f64.powi(order.saturating_sub(10) as i32);
        prop_assert!(max_abs_diff(lhs.values(), rhs.values()) <= tol);
    }

    #[test]
    fn general_bound_is_sound(n in 1usize..=16, seed in any::<u64>(), t in 4usize..=48, log_eps in -3.0f64..0.0) {
        let mut r = rng::seeded(seed);
        let ssm = random_real_stable(&mut r, n);
        let ir = ssm.impulse_response(t).unwrap();
        let noise = random_series(&mut r, t);
        let eps_target = 10f64.powf(log_eps);
        let target = noise.axpy(eps_target / noise.norm_l1(), &ir).unwrap();
        let eps = ssm_core::approximation_error(&ir, &target).unwrap();
        let query = BoundQuery::new(target, eps).unwrap().with_convention(BoundConvention::Shifted);
        let report = bounds::lower_bound_general(&query).unwrap();
        prop_assert!(report.bound <= n as f64 * ssm.coupling_inf_norm() + 1e-6,
            "bound {} vs {}", report.bound, n as f64 * ssm.coupling_inf_norm());
    }

    #[test]
    fn quantization_robustness_non_increasing_in_q(seed in any::<u64>(), t in 6usize..=10) {
        use ssm_core::quantization::{estimate_robustness, QuantizationSpec};
        let mut r = rng::seeded(seed);
        let target = random_series(&mut r, t);
        let built = construct_real_vandermonde(&target, None).unwrap();
        let eps = built.residual_l1 + 0.5;
        let mut prev: Option<ssm_core::QuantizationReport> = None;
        for q in [0.0, 0.1, 0.5, 1.0] {
            let spec = QuantizationSpec::new(q, eps, target.clone(), 4000, seed).unwrap();
            let cur = estimate_robustness(&built.ssm, &spec).unwrap();
            if let Some(p) = prev {
                prop_assert!(cur.empirical_robustness <= p.empirical_robustness + 2.0 * (cur.wilson_halfwidth + p.wilson_halfwidth));
            }
            prev = Some(cur);
        }
    }
}

#[test]
fn dft_corpus_exact_with_norm_certificates() {
    for t in [1usize, 2, 4, 16, 64, 256] {
        for s in 0..100u64 {
            let mut r = rng::substream(0xD1F7, (t as u64) << 8 | s);
            let target = random_series(&mut r, t);
            let built = construct_complex_dft(&target).unwrap();
            assert!(built.residual_l1 <= 1e-7 * target.norm_l1().max(1.0), "t={t} seed={s}");
            assert!(built.b_norm2 <= 2.0 * target.norm_l2() + 1e-9);
            assert!((built.c_norm2 - 1.0).abs() <= 1e-12);
            if t >= 2 {
                assert!(built.ssm.is_stable());
            }
        }
    }
}

#[test]
fn vandermonde_exact_at_small_horizons() {
    let mut r = rng::seeded(10);
    for t in 1..=10 {
        for _ in 0..20 {
            let target = random_series(&mut r, t);
            let built = construct_real_vandermonde(&target, None).unwrap();
            assert!(built.residual_l1 <= 1e-6 * target.norm_l1().max(1.0), "t={t}: {}", built.residual_l1);
            assert_eq!(built.ssm.a_re(), default_nodes(t));
        }
    }
}

#[test]
fn vandermonde_blow_up_witness() {
    for t in [16usize, 20, 24] {
        let target = TargetSpec::copy(t).generate().unwrap();
        let built = construct_real_vandermonde(&target, None).unwrap();
        let floor = bounds::lower_bound_copy(t, 0.0).unwrap();
        let coupling = built.ssm.coupling_inf_norm();
        eprintln!("t={t}: residual {:.3e}, ‖c⊙b‖∞ {coupling:.3e}, floor {floor:.3e}", built.residual_l1);
        if built.residual_l1 <= 1.0 / (8.0 * (t as f64).sqrt()) {
            assert!(coupling >= floor);
        }
    }
}

#[test]
fn copy_difference_pin() {
    for t in [8usize, 16, 24, 32, 40, 64] {
        let k = (t - 1) / 2;
        if k % 2 == 0 {
            continue;
        }
        let d = k.div_ceil(2);
        let m = (k + 1) / 4;
        let even = restrict_parity(&TargetSpec::copy(t).generate().unwrap(), Parity::Even);
        let diff = forward_difference(&even, d).unwrap();
        let expect = bounds::binomial(d as u32, m as u32).unwrap() as f64;
        assert_eq!(diff.values()[m - 1].abs(), expect, "t={t}");
    }
}

#[test]
fn oscillatory_difference_pin() {
    let t = 64;
    let odd = restrict_parity(&TargetSpec::oscillatory(t).generate().unwrap(), Parity::Odd);
    for d in 1..12 {
        let diff = forward_difference(&odd, d).unwrap();
        for (i, v) in diff.values().iter().enumerate() {
            let m = i + 1;
            let sign = if (m + d - 1) % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(*v, sign * 2f64.powi(d as i32));
        }
    }
}

#[test]
fn alternating_witness_approximates() {
    let (t, eps) = (64, 0.1);
    let ssm = bounds::alternating_witness(t, eps).unwrap();
    assert_eq!(ssm.dim(), 1);
    let target = TargetSpec::alternating(t).generate().unwrap();
    let err = ssm_core::approximation_error(&ssm.impulse_response(t).unwrap(), &target).unwrap();
    assert!(err <= eps, "{err}");
}

#[test]
fn random_target_reproducible() {
    let a = TargetSpec::random(0.7, 99, 50).generate().unwrap();
    let b = TargetSpec::random(0.7, 99, 50).generate().unwrap();
    assert_eq!(a, b);
    assert!(a.values().iter().all(|x| x.abs() <= 0.7));
}

#[test]
fn delay_targets_have_unit_norm() {
    for t in 1..20 {
        for k in 0..t {
            assert_eq!(TargetSpec::delay(k, t).generate().unwrap().norm_l1(), 1.0);
        }
    }
}
