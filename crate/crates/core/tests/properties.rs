//! Randomised invariants.

use petersson::arith::{self, factor, smooth_divisors_up_to, Factored};
use petersson::characters::{Mod8Sign, QuadraticCharacter};
use petersson::expsums::{gab_bruteforce, gab_crt_factor, kloosterman};
use petersson::spectral::{apply_relation, invert_relation, sign_orthogonality, t_mn_identity_check, HeckeSystem};
use petersson::verify::SyntheticRelation;
use petersson::Error;
use proptest::prelude::*;

fn square_free_odd(max: u64) -> impl Strategy<Value = u64> {
    (1..=max).prop_filter("odd square-free", |&d| d % 2 == 1 && factor(d).unwrap().is_square_free())
}

fn conductor() -> impl Strategy<Value = QuadraticCharacter> {
    conductor_up_to(150)
}

fn conductor_up_to(odd_max: u64) -> impl Strategy<Value = QuadraticCharacter> {
    (square_free_odd(odd_max), prop_oneof![Just(1u64), Just(4), Just(8)], any::<bool>()).prop_map(|(odd, even, sign)| {
        let sign8 = if sign { Mod8Sign::Odd } else { Mod8Sign::Even };
        QuadraticCharacter::new(odd * even, sign8).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn factorization_reassembles(n in 1u64..u64::MAX / 2) {
        let f = factor(n).unwrap();
        let product: u64 = f.factors().iter().map(|&(p, e)| p.pow(e)).product();
        prop_assert_eq!(product, n);
        for w in f.factors().windows(2) {
            prop_assert!(w[0].0 < w[1].0);
        }
        for p in f.primes() {
            prop_assert!(arith::is_prime(p));
        }
    }

    #[test]
    fn kloosterman_is_symmetric(m in -300i64..300, n in -300i64..300, c in 1u64..400) {
        let s = kloosterman(m, n, c);
        prop_assert!((s - kloosterman(n, m, c)).abs() < 1e-8);
        prop_assert!((s - kloosterman(-m, -n, c)).abs() < 1e-8);
        prop_assert!((s - kloosterman(m + c as i64, n, c)).abs() < 1e-8);
        for a in [1i64, 2, 3, 5, 7] {
            if arith::gcd_i(a, c) == 1 {
                prop_assert!((s - kloosterman(a * m, arith::mod_inv(a, c).unwrap() as i64 * n, c)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn characters_are_periodic_and_multiplicative(chi in conductor(), a in -2000i64..2000, b in -2000i64..2000) {
        let q = chi.q() as i64;
        prop_assert_eq!(chi.value(a), chi.value(a + q));
        prop_assert_eq!(chi.value(a * b), chi.value(a) * chi.value(b));
        prop_assert_eq!(chi.value(a) == 0, arith::gcd_i(a, chi.q()) != 1);
    }

    #[test]
    fn relation_inverts(seed in any::<u64>(), level in prop::sample::select(vec![1u64, 2, 3, 6]), m in 1u64..500, n in 1u64..500) {
        let spec = SyntheticRelation::new(seed, 2);
        let g = |args: &[u64], l: u64| -> Result<f64, Error> {
            Ok(((args[0] * 31 + args[1] * 17 + l * 7) % 101) as f64 / 101.0 - 0.5)
        };
        let f = |args: &[u64], l: u64| apply_relation(&spec, g, args, &factor(l)?);
        let level = factor(level).unwrap();
        let recovered = invert_relation(&spec, f, &[m, n], &level).unwrap();
        prop_assert!((recovered - g(&[m, n], level.n()).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn synthetic_eigenvalues_are_multiplicative(seed in any::<u64>(), m in 1u64..400, n in 1u64..400) {
        let f = HeckeSystem::synthetic(factor(15).unwrap(), 2, 160_000, seed).unwrap();
        let lm = f.lambda_n(m).unwrap();
        let ln = f.lambda_n(n).unwrap();
        if arith::gcd(m, n) == 1 {
            prop_assert!((f.lambda_n(m * n).unwrap() - lm * ln).abs() < 1e-9 * (1.0 + (lm * ln).abs()));
        }
        // Hecke relation λ(m)λ(n) = Σ_{d|(m,n), (d,N)=1} λ(mn/d²)
        let g = factor(arith::gcd(m, n)).unwrap();
        let hecke: f64 = g
            .divisors()
            .into_iter()
            .filter(|&d| arith::gcd(d, 15) == 1)
            .map(|d| f.lambda_n(m * n / (d * d)).unwrap())
            .sum();
        prop_assert!((hecke - lm * ln).abs() < 1e-8 * (1.0 + (lm * ln).abs()));
        prop_assert!(f.lambda_p(2).unwrap().abs() <= 2.0);
    }

    #[test]
    fn t_mn_closed_form_matches_sum(seed in any::<u64>(), l in square_free_odd(105), m in 1u64..200, n in 1u64..200) {
        prop_assume!(arith::gcd(l, 2) == 1 && l > 1);
        let f = HeckeSystem::synthetic(factor(2).unwrap(), 2, 2000, seed).unwrap();
        match t_mn_identity_check(&f, &factor(l).unwrap(), m, n) {
            Ok(report) => prop_assert!(report.difference < 1e-9 * (1.0 + report.direct.abs()), "{:?}", report),
            Err(Error::Degenerate(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn sign_characters_are_orthogonal(l in (1u64..=210).prop_filter("square-free", |&l| factor(l).unwrap().is_square_free()), picks in prop::array::uniform3(any::<prop::sample::Index>())) {
        let lf = factor(l).unwrap();
        let divisors = lf.divisors();
        let [u, v, t] = picks.map(|i| *i.get(&divisors));
        let (sum, predicted) = sign_orthogonality(&lf, u, v, t).unwrap();
        prop_assert_eq!(sum, predicted);
    }

    #[test]
    fn smooth_divisors_are_supported_on_l(l in (1u64..=2310).prop_filter("square-free", |&l| factor(l).unwrap().is_square_free()), y in 1u64..5000) {
        let lf = factor(l).unwrap();
        let ells: Vec<Factored> = smooth_divisors_up_to(&lf, y).unwrap();
        for w in ells.windows(2) {
            prop_assert!(w[0].n() < w[1].n());
        }
        for ell in &ells {
            prop_assert!(ell.n() <= y);
            prop_assert_eq!(ell.n() % ell.radical().n(), 0);
            prop_assert_eq!(l % ell.radical().n(), 0);
        }
        let brute = (1..=y).filter(|&n| l % factor(n).unwrap().radical().n() == 0).count();
        prop_assert_eq!(ells.len(), brute);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn crt_factorization_matches_brute_force(
        chi in conductor_up_to(15),
        m in prop::array::uniform3(-40i64..40),
        a in 1u64..4,
        b in 1u64..4,
        c in 1u64..40,
    ) {
        prop_assume!(arith::lcm(c, chi.q()).unwrap() <= 360);
        let brute = gab_bruteforce(m, a, b, c, &chi).unwrap();
        let split = gab_crt_factor(m, a, b, c, &chi);
        prop_assume!(split.is_ok());
        let split = split.unwrap();
        let diff = (brute.value - split.product()).norm();
        prop_assert!(diff < 1e-8 * (1.0 + brute.value.norm()), "brute {} crt {}", brute.value, split.product());
    }
}
