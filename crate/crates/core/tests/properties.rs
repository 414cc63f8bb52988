//! Invariants of each module, checked on generated inputs.

use cocycle_core::avalanche::{ap_check, random_hyperbolic_chain};
use cocycle_core::cocycle::{
    almost_mathieu, jacobi, jacobi_periodic, schrodinger, Cocycle, Mat2, TrigPoly, TrigPolyMatrix,
};
use cocycle_core::deviation::{fourier_coeffs, ldt_empirical, lojasiewicz_fit, Profile};
use cocycle_core::lyapunov::{det_log_integral, l_n_renormalized, l_prime_n, QuadratureSpec};
use cocycle_core::multiscale::{
    cov_invariance_check, induction_schedule, liouville_ladder, Constants, InductionParams, LiouvilleParams,
};
use cocycle_core::torus::{
    build_automorphism, dist_to_z, freq_norm, gcd_all, golden_mean, min_dot_norm, rational_dependence, Automorphism,
    Frequency,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn unit_interval() -> impl Strategy<Value = f64> {
    0.0..1.0f64
}

fn trig_poly(d: usize, max_k: i64, terms: usize) -> impl Strategy<Value = TrigPoly> {
    prop::collection::vec(
        (prop::collection::vec(-max_k..=max_k, d), -1.0..1.0f64, -1.0..1.0f64),
        1..=terms,
    )
    .prop_map(move |ts| TrigPoly::from_terms(d, ts.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im)))).unwrap())
}

fn real_trig_poly(d: usize, max_k: i64, terms: usize) -> impl Strategy<Value = TrigPoly> {
    trig_poly(d, max_k, terms).prop_map(|p| p.add(&p.conj_reflect()).unwrap().scale(Complex64::new(0.5, 0.0)))
}

fn matrix_poly(d: usize) -> impl Strategy<Value = TrigPolyMatrix> {
    [
        trig_poly(d, 2, 3),
        trig_poly(d, 2, 3),
        trig_poly(d, 2, 3),
        trig_poly(d, 2, 3),
    ]
    .prop_map(|[a, b, c, e]| TrigPolyMatrix::from_entries([&a, &b, &c, &e], 0.5).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn freq_norm_is_invariant_under_integer_shift_and_reflection(
        w in prop::collection::vec(unit_interval(), 1..4),
        q in 1u64..1000,
        j in 0usize..3,
    ) {
        let base = freq_norm(&Frequency::new(w.clone()).unwrap(), q);
        let j = j % w.len();
        let mut shifted = w.clone();
        shifted[j] += 1.0;
        let mut reflected = w.clone();
        reflected[j] = 1.0 - reflected[j];
        prop_assert!((freq_norm(&Frequency::new(shifted).unwrap(), q) - base).abs() < 1e-12 * q as f64);
        prop_assert!((freq_norm(&Frequency::new(reflected).unwrap(), q) - base).abs() < 1e-12 * q as f64);
    }

    #[test]
    fn min_dot_norm_is_non_increasing_in_k(w in prop::collection::vec(unit_interval(), 1..3), k in 1u64..20) {
        let w = Frequency::new(w).unwrap();
        let a = min_dot_norm(&w, k).unwrap().delta;
        let b = min_dot_norm(&w, k + 1).unwrap().delta;
        prop_assert!(b <= a);
    }

    #[test]
    fn automorphism_completes_its_first_row(k in prop::collection::vec(-30i64..=30, 1..5)) {
        prop_assume!(k.iter().any(|&v| v != 0) && gcd_all(&k) == 1 && !(k.len() == 1 && k[0] == -1));
        let b = build_automorphism(&k).unwrap();
        prop_assert_eq!(b.determinant(), 1);
        prop_assert_eq!(&b.entries()[0], &k);
        let d = k.len();
        for i in 0..d {
            for j in 0..d {
                let e: i64 = (0..d).map(|l| b.entries()[i][l] * b.inverse()[l][j]).sum();
                prop_assert_eq!(e, i64::from(i == j));
            }
        }
    }

    #[test]
    fn rational_dependence_reports_exact_integers(p in 1i64..12, q in 1i64..12, g in unit_interval()) {
        let w = Frequency::new(vec![p as f64 / q as f64, g]).unwrap();
        if let Some(k) = rational_dependence(&w, 12, 0.0).unwrap() {
            prop_assert_eq!(dist_to_z(w.dot(&k)), 0.0);
        }
    }

    #[test]
    fn single_step_is_the_matrix_norm(a in matrix_poly(2), x in prop::collection::vec(unit_interval(), 2)) {
        let c = Cocycle::new(a.clone(), Frequency::new(vec![golden_mean(), 0.3]).unwrap()).unwrap();
        let r = c.iterate_log_norm(1, &x);
        let direct = a.eval(&x).norm().ln();
        prop_assert!((r.log_norm_avg - direct).abs() <= 1e-14 * direct.abs().max(1.0));
    }

    #[test]
    fn iterates_are_submultiplicative(a in matrix_poly(1), x in unit_interval(), m in 1u64..30, n in 1u64..30) {
        let w = Frequency::golden();
        let c = Cocycle::new(a, w.clone()).unwrap();
        let whole = c.iterate_log_norm(m + n, &[x]);
        let head = c.iterate_log_norm(n, &[x]);
        let tail = c.iterate_log_norm(m, &[x + n as f64 * w.components()[0]]);
        prop_assume!(!whole.underflowed && !head.underflowed && !tail.underflowed);
        let lhs = (m + n) as f64 * whole.log_norm_avg;
        let rhs = m as f64 * tail.log_norm_avg + n as f64 * head.log_norm_avg;
        prop_assert!(lhs <= rhs + 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn sl2_log_norms_are_non_negative(
        v in real_trig_poly(1, 3, 3),
        e in -3.0..3.0f64,
        x in unit_interval(),
        n in 1u64..200,
    ) {
        let c = Cocycle::new(schrodinger(&v, e, 0.5).unwrap(), Frequency::golden()).unwrap();
        prop_assert!(c.iterate_log_norm(n, &[x]).log_norm_avg >= -1e-15);
    }

    #[test]
    fn det_scalar_matches_pointwise_determinant(a in matrix_poly(2), x in prop::collection::vec(unit_interval(), 2)) {
        let lhs = a.det_scalar().eval(&x);
        let rhs = a.eval(&x).det();
        prop_assert!((lhs - rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
    }

    #[test]
    fn zero_periodic_background_is_the_iterate(
        q in 1usize..5,
        e in -2.0..2.0f64,
        x in unit_interval(),
        v in real_trig_poly(1, 2, 2),
    ) {
        let w = Frequency::golden();
        let a = TrigPoly::cosine(vec![1], 1.0).add(&TrigPoly::constant(1, Complex64::new(1.5, 0.0))).unwrap();
        let j = jacobi(&v, &a, e, &w, 0.5).unwrap();
        let p = jacobi_periodic(&v, &a, &vec![0.0; q], e, &w, 0.5).unwrap();
        let mut iterate = Mat2::IDENTITY;
        for s in 0..q {
            iterate = j.eval(&[x + s as f64 * w.components()[0]]) * iterate;
        }
        let got = p.eval(&[x]);
        prop_assert!((got - iterate).max_abs() < 1e-10 * (1.0 + iterate.max_abs()));
    }

    #[test]
    fn ap_residual_is_conjugation_and_phase_invariant(seed in any::<u64>(), theta in 0.0..6.3f64, alpha in 0.0..6.3f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chain = random_hyperbolic_chain(&mut rng, 20, 1e3, 101.0 / 99.0);
        let u = Mat2::rotation(theta) * Mat2::diag(Complex64::from_polar(1.0, alpha), Complex64::from_polar(1.0, -alpha));
        let u_inv = u.conj_transpose();
        let base = ap_check(&chain, 10.0).unwrap();
        let conj: Vec<Mat2> = chain.iter().map(|m| u * *m * u_inv).collect();
        // -1 is the only unit scalar besides 1 that keeps det = 1
        let phased: Vec<Mat2> = chain.iter().map(|m| m.scale_real(-1.0)).collect();
        for other in [ap_check(&conj, 10.0).unwrap(), ap_check(&phased, 10.0).unwrap()] {
            prop_assert!((other.residual - base.residual).abs() < 1e-10);
            prop_assert!((other.mu - base.mu).abs() < 1e-10 * base.mu);
            prop_assert!((other.max_gap - base.max_gap).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_diagonal_chains_telescope_exactly(s in 1.5..1e6f64, n in 3usize..200) {
        let chain = vec![Mat2::real(s, 0.0, 0.0, s.recip()); n];
        prop_assert_eq!(ap_check(&chain, 10.0).unwrap().residual, 0.0);
    }

    #[test]
    fn dft_mean_and_energy_identities(
        values in prop::collection::vec(-5.0..5.0f64, 64),
        d2 in any::<bool>(),
    ) {
        let (d, m) = if d2 { (2, 8) } else { (1, 64) };
        let p = Profile::from_values(d, m, 0.5, 1, values).unwrap();
        let f = fourier_coeffs(&p, 2).unwrap();
        prop_assert!((f.coeff(&vec![0; d]).re - p.mean).abs() < 1e-12);
        prop_assert!((f.energy - f.mean_square).abs() < 1e-10);
    }

    #[test]
    fn ldt_fraction_is_non_increasing(values in prop::collection::vec(-5.0..5.0f64, 32), k in prop::collection::vec(0.0..5.0f64, 5)) {
        let p = Profile::from_values(1, 32, 0.5, 1, values).unwrap();
        let mut k = k;
        k.sort_by(f64::total_cmp);
        let fr: Vec<f64> = k.iter().map(|&t| ldt_empirical(&p, t).measured_fraction).collect();
        prop_assert!(fr.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sublevel_fractions_shrink_with_threshold(g in trig_poly(1, 4, 4)) {
        prop_assume!(!g.is_zero());
        let ts: Vec<f64> = (0..6).map(|i| 0.5f64.powi(i)).collect();
        let r = lojasiewicz_fit(&g, &ts, 1024).unwrap();
        prop_assert!(r.estimates.windows(2).all(|w| w[0].measured_fraction >= w[1].measured_fraction));
    }

    #[test]
    fn liouville_ladders_replay_and_respect_the_cap(q0 in 1u64..8, p in 0u64..8, e in 1e-14..1e-11f64, n0_exp in 12u32..18) {
        let w = (p % q0) as f64 / q0 as f64 + e;
        let params = LiouvilleParams {
            n0: q0 << n0_exp,
            q0,
            omega: Frequency::new(vec![w]).unwrap(),
            rho: 0.5,
            kappa: 0.2,
            constants: Constants { big_c: 5.0, ..Constants::default() },
            max_scale: 1 << 60,
        };
        let Ok(ladder) = liouville_ladder(&params) else { return Ok(()) };
        ladder.check_invariants().unwrap();
        prop_assert!(ladder.scales.windows(2).all(|s| s[0] < s[1]));
        let norm = freq_norm(&params.omega, q0);
        let cap = 0.2f64.powi(5) * 0.5f64.powi(4) * q0 as f64 / norm;
        if norm > 0.0 {
            prop_assert!(ladder.scales[1..].iter().all(|&n| (n as f64) < cap));
        }
        prop_assert_eq!(ladder.replay().unwrap().to_json(), ladder.to_json());
    }

    #[test]
    fn induction_step_budgets_are_summable(k0 in 2u64..30, e in 2u32..4, c in 0.05..1.0f64) {
        // x^{e^s} <= x (x^{e-1})^s with x = K0^{-c}, so the series is at most 2x once x^{e-1} <= 1/2
        prop_assume!((k0 as f64).powf(c * (e - 1) as f64) >= 2.0);
        let w = Frequency::golden();
        let delta0 = min_dot_norm(&w, k0).unwrap().delta;
        let params = InductionParams {
            omega: w,
            d1: 0,
            q0: 1,
            k0,
            delta0,
            eps0: 0.0,
            n0: (0.5 * (k0 * k0) as f64 / delta0).ceil() as u64,
            rho: 1.0,
            constants: Constants { small_c: c, ..Constants::default() },
            k_exponent: e,
            max_scale: u64::MAX,
            scan_limit: 1e6,
        };
        let ladder = induction_schedule(&params).unwrap();
        ladder.check_invariants().unwrap();
        let steps: f64 = ladder
            .step_flags
            .iter()
            .filter(|f| f.truncated_by == "eq:RestrN1Cond")
            .map(|f| f.budget)
            .sum();
        prop_assert!(steps <= 2.0 * (k0 as f64).powf(-c));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn change_of_variables_is_exact_on_the_lattice(
        ops in prop::collection::vec((any::<bool>(), -2i64..=2), 1..4),
        v in real_trig_poly(2, 1, 2),
        e in -2.0..2.0f64,
    ) {
        // products of elementary shears generate SL(2, Z)
        let mut m = [[1i64, 0], [0, 1]];
        for (upper, t) in ops {
            m = if upper {
                [[m[0][0] + t * m[1][0], m[0][1] + t * m[1][1]], m[1]]
            } else {
                [m[0], [m[1][0] + t * m[0][0], m[1][1] + t * m[0][1]]]
            };
        }
        let b = Automorphism::new(m.iter().map(|r| r.to_vec()).collect()).unwrap();
        let c = Cocycle::new(schrodinger(&v, e, 0.5).unwrap(), Frequency::new(vec![golden_mean(), 2f64.sqrt() - 1.0]).unwrap()).unwrap();
        prop_assert!(cov_invariance_check(&c, &b, 12, 16).unwrap() <= 1e-10);
    }

    #[test]
    fn renormalization_identity_is_exact_on_shift_closed_grids(e in -2.0..2.0f64, p in 1u64..8, n in 1u64..20) {
        let a = TrigPoly::cosine(vec![1], 1.0);
        let w = Frequency::new(vec![p as f64 / 8.0]).unwrap();
        let j = jacobi(&TrigPoly::zero(1), &a, e, &w, 0.5).unwrap();
        let c = Cocycle::new(j.clone(), w).unwrap();
        let q = QuadratureSpec::uniform(64);
        let ln = l_n_renormalized(&c, n, &q).unwrap().value;
        let lp = l_prime_n(&c, n, &q).unwrap().value;
        let det = det_log_integral(&j, &q).unwrap().value;
        prop_assert!((ln - lp + 0.5 * det).abs() < 1e-10);
    }

    #[test]
    fn sl2_exponents_are_subadditive(lambda in 0.5..3.0f64, e in -2.0..2.0f64, n in 1u64..16) {
        let c = Cocycle::new(almost_mathieu(lambda, e, 0.5).unwrap(), Frequency::golden()).unwrap();
        let q = QuadratureSpec::uniform(512);
        let one = l_prime_n(&c, n, &q).unwrap();
        let two = l_prime_n(&c, 2 * n, &q).unwrap();
        prop_assert!(two.value <= one.value + 1e-3);
        prop_assert_eq!(one.excised_mass, 0.0);
    }
}
