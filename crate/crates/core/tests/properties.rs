mod common;

use proptest::prelude::*;

use smoothsieve::dde::solve_f;
use smoothsieve::iterints::{build_table_with, SieveKernel, TableConfig};
use smoothsieve::multfun::{m_sum, m_sum_smooth, MultFuncSpec};
use smoothsieve::primes::generate_primes;
use smoothsieve::verify::check_buchstab;
use smoothsieve::zhang::{first_k_tuple, is_admissible, zhang_coefficient, SieveParams, TupleSpec};

use common::{beta_threshold, is_squarefree, largest_prime_factor, ln_beta_base};

fn tuple_strategy() -> impl Strategy<Value = TupleSpec> {
    prop::collection::btree_set(-40i64..40, 1..8).prop_map(|s| TupleSpec::new(s.into_iter().collect()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nu_p_bounded(tuple in tuple_strategy(), pi in 0usize..40) {
        let primes = generate_primes(200);
        let p = primes.primes()[pi];
        let nu = tuple.nu_p(p);
        prop_assert!(nu <= tuple.k().min(p as usize));
        if p > tuple.diameter() {
            prop_assert_eq!(nu, tuple.k());
        }
    }

    #[test]
    fn admissibility_matches_definition(tuple in tuple_strategy()) {
        let direct = generate_primes(tuple.k() as u64)
            .primes()
            .iter()
            .all(|&p| {
                let mut seen = vec![false; p as usize];
                for h in tuple.offsets() {
                    seen[(-h).rem_euclid(p as i64) as usize] = true;
                }
                seen.iter().any(|s| !s)
            });
        prop_assert_eq!(is_admissible(&tuple), direct);
    }

    #[test]
    fn smooth_sum_matches_trial_division(x in 1u64..600, z in 2u64..40, q in 1u64..40, m in 0u32..3) {
        let g = MultFuncSpec::one_over_phi();
        let got = m_sum_smooth::<f64>(&g, x as f64, m, q, z as f64).unwrap().value;
        let mut want = 0.0;
        for n in 1..=x {
            if is_squarefree(n) && largest_prime_factor(n) < z && num_integer::gcd(n, q) == 1 {
                let mut phi = 1u64;
                let mut r = n;
                let mut p = 2;
                while r > 1 {
                    if r % p == 0 { phi *= p - 1; r /= p; }
                    p += 1;
                }
                want += ((x as f64) / n as f64).ln().powi(m as i32) / phi as f64;
            }
        }
        prop_assert!((got - want).abs() <= 1e-12 * (1.0 + want.abs()));
    }

    #[test]
    fn buchstab_random(x in 20u64..3000, zf in 0.0f64..1.0, q in 1u64..60, m in 0u32..3) {
        let z = 2.0 + zf * (x as f64 - 2.0);
        let g = MultFuncSpec::two_omega_over_n();
        prop_assert!(check_buchstab(&g, x as f64, q, z, m).unwrap() < 1e-10);
    }

    #[test]
    fn sum_monotone_in_x_for_positive_g(x in 2.0f64..5000.0, dx in 0.0f64..500.0) {
        let g = MultFuncSpec::one_over_n();
        let a = m_sum::<f64>(&g, x, 1, 1).unwrap().value;
        let b = m_sum::<f64>(&g, x + dx, 1, 1).unwrap().value;
        prop_assert!(b >= a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coefficient_increasing_in_theta_at_fixed_u(k in 2u32..6, l in 1u32..4, u in 0.5f64..3.0, a in 0.1f64..0.9, d in 0.01f64..0.1) {
        let (t1, t2) = (a, (a + d).min(1.0));
        let c1 = zhang_coefficient(&SieveParams::with_u(k, k + l, t1, u).unwrap(), 1e-7).unwrap();
        let c2 = zhang_coefficient(&SieveParams::with_u(k, k + l, t2, u).unwrap(), 1e-7).unwrap();
        prop_assert!(c2.coefficient > c1.coefficient);
        prop_assert!(c1.cancellation >= 0.0 && c1.cancellation <= 1.0);
    }

    #[test]
    fn unsmoothed_collapse(k in 2u32..12, l in 1u32..6, theta in 0.1f64..1.0, u in 0.2f64..1.0) {
        let r = zhang_coefficient(&SieveParams::with_u(k, k + l, theta, u).unwrap(), 1e-8).unwrap();
        let ik = ln_beta_base(k as u64, (k + l) as u64).exp();
        let ik1 = ln_beta_base(k as u64 - 1, (k + l) as u64).exp();
        let want = k as f64 * theta / 2.0 * ik1 - ik;
        prop_assert!((r.coefficient - want).abs() <= 10.0 * 1e-8 * ik.max(ik1));
        prop_assert_eq!(r.sign() > 0, theta > beta_threshold(k as u64, (k + l) as u64));
    }

    #[test]
    fn f_bounded_and_nonincreasing_for_positive_k(k in 1i64..4, m in 1i64..5, u in 1.0f64..6.0) {
        let sol = solve_f::<f64>(k, m, 6.0, 1e-11).unwrap();
        let v = sol.eval(u).unwrap();
        prop_assert!(v > 0.0 && v <= 1.0);
        prop_assert!(sol.derivative(u).unwrap() <= 1e-12);
    }
}

#[test]
fn first_k_tuples_admissible() {
    for k in 1..=200 {
        assert!(is_admissible(&first_k_tuple(k).unwrap()), "k = {k}");
    }
}

#[test]
fn f32_solution_tracks_f64() {
    let a = solve_f::<f64>(2, 3, 4.0, 1e-10).unwrap();
    let b = solve_f::<f32>(2, 3, 4.0, 1e-4).unwrap();
    for i in 0..=40 {
        let u = i as f64 * 0.1;
        assert!((a.eval(u).unwrap() - b.eval(u as f32).unwrap() as f64).abs() < 1e-5);
    }
    let ka = SieveKernel::<f64>::new(2, 4, 2.5, 1e-10).unwrap();
    let kb = SieveKernel::<f32>::new(2, 4, 2.5, 1e-4).unwrap();
    let (va, vb) = (ka.ln_i_base(0.8), kb.ln_i_base(0.8));
    assert!((va - vb).abs() < 1e-5, "{va} {vb}");
}

#[test]
fn table_grid_refinement_is_stable() {
    // doubling n_t, n_v and the gap rule changes values by less than tol
    let tol = 1e-7;
    for (s, m, u) in [(2u32, 4u32, 2.5f64), (4, 7, 4.0)] {
        let kernel = SieveKernel::<f64>::new(s, m, u, 1e-13).unwrap();
        let base = TableConfig { n_t: 33, n_v: 17, gap_nodes: 8, max_n_t: 257 };
        let coarse = build_table_with(&kernel, u, tol, base).unwrap();
        let fine_cfg = TableConfig { n_t: 2 * coarse.n_t() - 1, n_v: 2 * coarse.n_v() - 1, gap_nodes: 16, max_n_t: 1025 };
        let fine = build_table_with(&kernel, u, tol, fine_cfg).unwrap();
        let scale = kernel.i_base_scaled(1.0);
        for i in 0..20 {
            let t = (i as f64 * 0.37).fract();
            let v = 0.05 + (i as f64 * 0.61).fract() * (u - 0.05);
            let d = (coarse.eval_scaled(t, v).unwrap() - fine.eval_scaled(t, v).unwrap()).abs() / scale;
            assert!(d < tol, "(s={s}, m={m}) at ({t}, {v}): {d:e}");
        }
    }
}

#[test]
fn zhang_scale_kernel_is_finite_in_log_space() {
    let k = 3_500u32;
    let r = zhang_coefficient(&SieveParams::with_u(k, k + 60, 0.6, 1.0).unwrap(), 1e-6).unwrap();
    assert!(r.ln_i_k.is_finite() && r.ln_i_km1.is_finite());
    assert!(r.experimental);
    assert_eq!(r.sign() > 0, 0.6 > beta_threshold(k as u64, (k + 60) as u64));
}

#[test]
fn literal_residual_within_solver_tolerance() {
    use rand::{Rng, SeedableRng};
    let tol = 1e-8;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for (k, m) in [(1, 1), (1, 2), (-1, 2), (2, 3), (-2, 4)] {
        let sol = solve_f::<f64>(k, m, 5.0, tol).unwrap();
        for panel in 1..5 {
            for _ in 0..100 {
                let u = panel as f64 + rng.gen_range(1e-9..1.0);
                let r = sol.dde_residual(u).unwrap().abs();
                assert!(r < tol * (1.0 + sol.eval(u).unwrap().abs()), "({k},{m}) u={u}: {r:e}");
            }
        }
        assert!(sol.knot_jump() < tol);
    }
}
