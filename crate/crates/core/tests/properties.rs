use num_complex::Complex64;
use proptest::prelude::*;
use sqrtsieve::arith::{gcd, mul_mod, reduce};
use sqrtsieve::bilinear::{energy_profile, ones, unit_phases};
use sqrtsieve::expsum::sample_params;
use sqrtsieve::rng::seeded;
use sqrtsieve::sieve::{FareyCounter, LsInstance};
use sqrtsieve::*;
use std::f64::consts::TAU;

fn odd(n: u64) -> u64 {
    2 * n + 1
}

fn fm(n: u64) -> FactoredModulus {
    FactoredModulus::new(n).unwrap()
}

fn rat(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jacobi_is_multiplicative(a in -5000i64..5000, b in -5000i64..5000, c1 in 0u64..500, c2 in 0u64..500) {
        let (c1, c2) = (odd(c1), odd(c2));
        let ab = jacobi(a * b, c1).unwrap();
        prop_assert_eq!(ab, jacobi(a, c1).unwrap() * jacobi(b, c1).unwrap());
        let top = jacobi(a, c1 * c2).unwrap();
        prop_assert_eq!(top, jacobi(a, c1).unwrap() * jacobi(a, c2).unwrap());
    }

    #[test]
    fn roots_close_under_negation(s in -100_000i64..100_000, n in 0u64..5000) {
        let r = odd(n);
        let set = sqrt_mod(s, &fm(r)).unwrap();
        for &k in set.roots() {
            prop_assert_eq!(mul_mod(k, k, r), reduce(s, r));
            prop_assert!(set.roots().contains(&((r - k) % r)));
        }
    }

    #[test]
    fn crt_round_trip(x in 0u64..1_000_000_000, m1 in 1u64..30000, m2 in 1u64..30000) {
        prop_assume!(gcd(m1, m2) == 1);
        let parts = [
            arith::ResidueClass::new((x % m1) as i64, m1).unwrap(),
            arith::ResidueClass::new((x % m2) as i64, m2).unwrap(),
        ];
        let c = crt_combine(&parts).unwrap();
        prop_assert_eq!(c.value(), x % (m1 * m2));
    }

    #[test]
    fn gauss_closed_form_matches_direct(a in -2000i64..2000, b in -2000i64..2000, n in 0u64..400) {
        let p = GaussSumParams::new(a, b, odd(n)).unwrap();
        let d = gauss_closed_form(&p).unwrap() - gauss_direct(&p).unwrap();
        prop_assert!(d.norm() <= 1e-6 * (odd(n) as f64).sqrt());
    }

    #[test]
    fn energy_is_symmetric(n in 3u64..150, j in 1i64..50, m in 1u64..20, h in 1u64..20) {
        let r = odd(n);
        prop_assume!(gcd(j as u64, r) == 1 && 2 * m <= r && h <= m);
        let prof = energy_profile(&fm(r), j, m, h).unwrap();
        for d in 1..r as usize {
            prop_assert_eq!(prof[d], prof[r as usize - d]);
        }
    }

    #[test]
    fn farey_symmetry_and_monotonicity(
        q_max in 1u64..25, an in -3000i128..3000, ad in 1i128..400, dn in 1i128..50, dd in 100i128..100_000,
    ) {
        let alpha = rat(an, ad);
        let delta = rat(dn, dd);
        let counter = FareyCounter::new(q_max).unwrap();
        let base = counter.count(alpha, delta);
        prop_assert_eq!(counter.count(-alpha, delta), base);
        prop_assert_eq!(counter.count(alpha + rat(1, 1), delta), base);
        prop_assert!(counter.count(alpha, delta * rat(3, 2)) >= base);
        let bigger = FareyCounter::new(q_max + 1).unwrap();
        prop_assert!(bigger.count(alpha, delta) >= base);
    }
}

#[test]
fn root_counts_sum_to_modulus() {
    for r in (1..400u64).step_by(2) {
        let m = fm(r);
        let total: usize = (0..r as i64).map(|s| sqrt_mod(s, &m).unwrap().len()).sum();
        assert_eq!(total as u64, r);
    }
}

#[test]
fn farey_count_matches_double_loop() {
    let mut rng = seeded(7);
    use rand::Rng;
    for _ in 0..60 {
        let q_max = rng.random_range(1..=40u64);
        let alpha = rat(rng.random_range(-5000..5000), rng.random_range(1..2000));
        let delta = rat(1, rng.random_range(2..200_000));
        let want: u64 = (1..=q_max as i128)
            .map(|q| {
                let q2 = q * q;
                let lo = ((alpha - delta) * rat(q2, 1)).floor().to_integer() - 1;
                let hi = ((alpha + delta) * rat(q2, 1)).ceil().to_integer() + 1;
                (lo..=hi)
                    .filter(|&a| {
                        let x = rat(a, q2) - alpha;
                        gcd(a.unsigned_abs() as u64, q as u64) == 1 && x <= delta && -x <= delta
                    })
                    .count() as u64
            })
            .sum();
        let got = farey_count(&FareyQuery::new(q_max, delta, alpha).unwrap()).unwrap();
        assert_eq!(got, want);
    }
}

#[test]
fn sigma_matches_triple_loop() {
    let mut rng = seeded(3);
    use rand::Rng;
    for _ in 0..40 {
        let r = odd(rng.random_range(1..60));
        let m_range = rng.random_range(1..=r);
        let l_range = rng.random_range(0..=r.min(8));
        let j = loop {
            let j = rng.random_range(1..r as i64 + 1);
            if gcd(j as u64, r) == 1 {
                break j;
            }
        };
        let amp = if l_range == 0 {
            0.3
        } else {
            1.0 / l_range as f64
        };
        let alpha = unit_phases(&mut rng, 2 * l_range as usize + 1);
        let beta = unit_phases(&mut rng, m_range as usize);
        let phase = PhaseFn::ScaledSqrt { amplitude: amp };
        let inst = BilinearInstance::new(
            fm(r),
            j,
            l_range,
            m_range,
            alpha.clone(),
            beta.clone(),
            phase,
            amp / 2.0,
        )
        .unwrap();
        let mut want = Complex64::new(0.0, 0.0);
        for (il, a) in alpha.iter().enumerate() {
            let l = il as f64 - l_range as f64;
            for (im, b) in beta.iter().enumerate() {
                let m = im as i64 + 1;
                for k in 0..r as i64 {
                    if (k * k - j * m).rem_euclid(r as i64) == 0 {
                        let x = l * k as f64 / r as f64 - l * amp * (m as f64).sqrt();
                        want += a * b * Complex64::from_polar(1.0, TAU * x);
                    }
                }
            }
        }
        let got = sigma_eval(&inst).unwrap();
        assert!((got - want).norm() < 1e-8 * (l_range.max(1) * m_range) as f64);
    }
}

#[test]
fn quadform_single_coefficient_counts_units() {
    for q in 1..=8u64 {
        let inst = LsInstance::new(q, 3, vec![Complex64::new(0.0, 2.0)]).unwrap();
        let want: u64 = (1..=q).map(|k| fm(k * k).phi()).sum();
        assert!(
            (sieve::ls_quadform_square_moduli(&inst).unwrap() - 4.0 * want as f64).abs() < 1e-9
        );
    }
}

#[test]
fn quadform_matches_independent_evaluation() {
    let mut rng = seeded(11);
    let coeffs = unit_phases(&mut rng, 40);
    let inst = LsInstance::new(6, -17, coeffs.clone()).unwrap();
    let mut want = 0.0;
    for q in 1..=6i64 {
        for a in 1..=q * q {
            if gcd(a as u64, q as u64) != 1 {
                continue;
            }
            let s: Complex64 = coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    c * Complex64::from_polar(
                        1.0,
                        TAU * ((-17 + 1 + i as i64) * a) as f64 / (q * q) as f64,
                    )
                })
                .sum();
            want += s.norm_sqr();
        }
    }
    let got = sieve::ls_quadform_square_moduli(&inst).unwrap();
    assert!((got - want).abs() < 1e-8 * want);
    let bound = (40.0 + 6f64.powi(4) - 1.0) * inst.z();
    assert!(got <= bound);
}

#[test]
fn relation_check_small_instances() {
    let zero = LsInstance::new(3, 0, vec![Complex64::new(0.0, 0.0); 27]).unwrap();
    assert_eq!(ls_relation_check(&zero).unwrap().lhs, 0.0);
    let one = LsInstance::new(3, 0, vec![Complex64::new(1.0, 0.0)]).unwrap();
    let rc = ls_relation_check(&one).unwrap();
    assert!((rc.lhs - (1 + 2 + 6) as f64).abs() < 1e-9);
    assert!(rc.max_p >= 1);
    let full = LsInstance::new(5, 0, ones(125)).unwrap();
    let rc = ls_relation_check(&full).unwrap();
    assert!(rc.max_p >= 1 && rc.lhs > 0.0);
}

#[test]
fn local_factors_multiply_to_whole_sum() {
    let mut rng = seeded(19);
    for n in [45u64, 105, 225, 1001, 3375] {
        let params = sample_params(&mut rng, fm(n));
        let whole = esum_eval(&params).unwrap();
        let (_, product) = expsum::product_decomposition(&params).unwrap();
        assert!((whole - product).norm() < 1e-8 * (n as f64).sqrt());
    }
}
