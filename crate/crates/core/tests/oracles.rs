//! Independent reference computations checked against the library.

use std::f64::consts::PI;

use petersson::arith::{self, factor, Factored, PrimeSieve};
use petersson::characters::{enumerate_characters, gauss_sum, jacobi, Mod8Sign, QuadraticCharacter};
use petersson::chebyshev::{cheb_coeff, cheb_coeff_quadrature};
use petersson::expsums::{kloosterman, kloosterman_multiplicative, kloosterman_row, principal_g};
use petersson::lfun::{v_function, VKind};
use petersson::spectral::{bessel_j, crude_bound_ratio, delta_geometric_grid, f_phi_coefficients, HeckeSystem, SignCharacter};
use petersson::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIEVE_LIMIT: usize = 1_000_000;

/// Linear sieve giving μ and φ for every n ≤ limit.
fn mobius_phi_sieve(limit: usize) -> (Vec<i8>, Vec<u64>) {
    let mut mu = vec![0i8; limit + 1];
    let mut phi = vec![0u64; limit + 1];
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    mu[1] = 1;
    phi[1] = 1;
    for i in 2..=limit {
        if !composite[i] {
            primes.push(i);
            mu[i] = -1;
            phi[i] = (i - 1) as u64;
        }
        for &p in &primes {
            let k = i * p;
            if k > limit {
                break;
            }
            composite[k] = true;
            if i % p == 0 {
                mu[k] = 0;
                phi[k] = phi[i] * p as u64;
                break;
            }
            mu[k] = -mu[i];
            phi[k] = phi[i] * (p as u64 - 1);
        }
    }
    (mu, phi)
}

fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

#[test]
fn arithmetic_functions_match_a_sieve() {
    let (mu, phi) = mobius_phi_sieve(SIEVE_LIMIT);
    let table = PrimeSieve::new(SIEVE_LIMIT);
    for n in 1..=SIEVE_LIMIT as u64 {
        let f = factor(n).unwrap();
        assert_eq!(f.mobius(), i64::from(mu[n as usize]), "μ({n})");
        assert_eq!(f.euler_phi(), phi[n as usize], "φ({n})");
        assert_eq!(f.n(), n);
        assert_eq!(table.factor(n), f, "sieve factorization of {n}");
    }
    for n in (1..SIEVE_LIMIT as u64).step_by(997) {
        assert_eq!(factor(n).unwrap().factors(), trial_division(n).as_slice(), "factors of {n}");
    }
}

#[test]
fn large_factorizations_match_trial_division() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let n: u64 = rng.gen_range(1..1u64 << 36);
        assert_eq!(factor(n).unwrap().factors(), trial_division(n).as_slice(), "factors of {n}");
    }
}

#[test]
fn nu_is_completely_multiplicative() {
    let nus: Vec<u64> = (0..=1000u64).map(|n| if n == 0 { 0 } else { factor(n).unwrap().nu().unwrap() }).collect();
    assert_eq!(nus[1], 1);
    assert_eq!(nus[7], 8);
    assert_eq!(nus[12], 36);
    for a in 1..=1000u64 {
        for b in 1..=1000u64 {
            let ab = factor(a * b).unwrap().nu().unwrap();
            assert_eq!(ab, nus[a as usize] * nus[b as usize], "ν({a}·{b})");
        }
    }
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

#[test]
fn legendre_symbol_matches_euler_criterion() {
    for p in 3..=500u64 {
        if !arith::is_prime(p) {
            continue;
        }
        let chi = QuadraticCharacter::new(p, Mod8Sign::Even).unwrap();
        for n in 0..=500i64 {
            let e = pow_mod(n as u64 % p, (p - 1) / 2, p);
            let expected = match e {
                0 => 0,
                1 => 1,
                _ => {
                    assert_eq!(e, p - 1);
                    -1
                }
            };
            assert_eq!(chi.value(n), expected, "({n}/{p})");
            assert_eq!(jacobi(n, p), expected);
        }
    }
}

#[test]
fn quadratic_characters_are_periodic_and_multiplicative() {
    for q in 1..=500u64 {
        let Ok(chi) = QuadraticCharacter::new(q, Mod8Sign::Odd) else { continue };
        for n in -50..=500i64 {
            assert_eq!(chi.value(n), chi.value(n + q as i64), "period of χ_{q}");
            let expected = if arith::gcd_i(n, q) == 1 { chi.value(n).abs() } else { 0 };
            assert_eq!(chi.value(n).abs(), expected);
        }
        for a in 1..=40i64 {
            for b in 1..=40i64 {
                assert_eq!(chi.value(a * b), chi.value(a) * chi.value(b));
            }
        }
        let g = chi.gauss_sum();
        let expected = if chi.parity() == 1 { Complex64::new((q as f64).sqrt(), 0.0) } else { Complex64::new(0.0, (q as f64).sqrt()) };
        assert!((g - expected).norm() < 1e-9 * q as f64, "Gauss sum of χ_{q}");
    }
}

#[test]
fn dirichlet_characters_are_orthogonal() {
    for m in 1..=200u64 {
        let chars = enumerate_characters(m).unwrap();
        let phi = factor(m).unwrap().euler_phi();
        assert_eq!(chars.len() as u64, phi, "number of characters mod {m}");
        let tables: Vec<Vec<Complex64>> = chars.iter().map(|c| c.table()).collect();
        for (i, a) in tables.iter().enumerate() {
            for (j, b) in tables.iter().enumerate().skip(i) {
                let inner: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                let expected = if i == j { phi as f64 } else { 0.0 };
                assert!((inner - expected).norm() < 1e-9 * m as f64, "⟨χ_{i}, χ_{j}⟩ mod {m}");
            }
        }
        for chi in &chars {
            if chi.is_primitive() {
                let g = gauss_sum(chi).norm_sqr();
                assert!((g - m as f64).abs() < 1e-9 * m as f64, "|τ|² mod {m}");
            }
        }
    }
}

/// Kloosterman sum straight from the definition, with its own exponentials.
fn kloosterman_reference(m: i64, n: i64, c: u64) -> f64 {
    let mut s = 0.0;
    for x in 0..c {
        if arith::gcd(x, c) != 1 {
            continue;
        }
        let xi = (1..=c).find(|y| (x * y) % c == 1 % c).unwrap();
        let k = (m.rem_euclid(c as i64) as u128 * x as u128 + n.rem_euclid(c as i64) as u128 * xi as u128) % c as u128;
        s += (2.0 * PI * k as f64 / c as f64).cos();
    }
    s
}

#[test]
fn kloosterman_matches_definition() {
    for c in 1..=60u64 {
        for m in -3..=8i64 {
            for n in [1i64, 2, 5, -7, 30] {
                let reference = kloosterman_reference(m, n, c);
                assert!((kloosterman(m, n, c) - reference).abs() < 1e-10, "S({m},{n};{c})");
            }
        }
        let row = kloosterman_row(3, c);
        for (t, v) in row.iter().enumerate() {
            assert!((v - kloosterman_reference(t as i64, 3, c)).abs() < 1e-9, "row S({t},3;{c})");
        }
    }
}

#[test]
fn kloosterman_twisted_multiplicativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 300 {
        let c1: u64 = rng.gen_range(2..=100);
        let c2: u64 = rng.gen_range(2..=100);
        if arith::gcd(c1, c2) != 1 {
            continue;
        }
        let m: i64 = rng.gen_range(-500..=500);
        let n: i64 = rng.gen_range(-500..=500);
        let c1_bar = arith::mod_inv(c1 as i64, c2).unwrap() as i64;
        let c2_bar = arith::mod_inv(c2 as i64, c1).unwrap() as i64;
        let split = kloosterman(m * c2_bar, n * c2_bar, c1) * kloosterman(m * c1_bar, n * c1_bar, c2);
        let whole = kloosterman(m, n, c1 * c2);
        assert!((whole - split).abs() < 1e-8, "S({m},{n};{c1}·{c2})");
        let local = kloosterman_multiplicative(m, n, &factor(c1 * c2).unwrap());
        assert!((whole - local).abs() < 1e-8);
        checked += 1;
    }
}

#[test]
fn weil_bound_on_prime_moduli() {
    for p in (3..2000u64).filter(|&p| arith::is_prime(p)) {
        let row = kloosterman_row(1, p);
        for v in row.iter().skip(1) {
            assert!(v.abs() <= 2.0 * (p as f64).sqrt() + 1e-9, "Weil bound mod {p}");
        }
    }
}

#[test]
fn chebyshev_coefficients_match_quadrature() {
    for n in 0..=20 {
        for j in 0..=n {
            let exact = cheb_coeff(j, n).unwrap() as f64;
            let quad = cheb_coeff_quadrature(j, n, 4000);
            assert!((exact - quad).abs() < 1e-6 * exact.max(1.0), "c_{{{j},{n}}}: {exact} vs {quad}");
        }
    }
}

#[test]
fn bessel_matches_reference_table() {
    let mut reader = csv_rows(include_str!("data/bessel_reference.csv"));
    let header = reader.next().unwrap();
    assert_eq!(header, vec!["nu", "x", "j"]);
    let mut rows = 0;
    for row in reader {
        let nu: u32 = row[0].parse().unwrap();
        let x: f64 = row[1].parse().unwrap();
        let expected: f64 = row[2].parse().unwrap();
        let got = bessel_j(nu, x);
        let tol = 1e-12 * (1.0 + x.sqrt()) + 1e-12 * expected.abs();
        assert!((got - expected).abs() <= tol, "J_{nu}({x}) = {got}, reference {expected}");
        rows += 1;
    }
    assert!(rows >= 200);
}

fn csv_rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| l.split(',').map(str::trim).collect())
}

#[test]
fn crude_bound_constant_on_level_eleven() {
    let level = factor(11).unwrap();
    let pairs: Vec<(u64, u64)> = (1..=12).flat_map(|m| (1..=12).map(move |n| (m, n))).collect();
    let values = delta_geometric_grid(&level, 2, &pairs, 20_000).unwrap();
    for (&(m, n), est) in pairs.iter().zip(&values) {
        let ratio = crude_bound_ratio(&level, m, n, est.value).unwrap();
        assert!(ratio <= 2.0 + est.tail_bound, "Δ₁₁({m},{n}) ratio {ratio}");
    }
}

#[test]
fn twisted_dirichlet_coefficients_factor() {
    for (modulus, seed) in [(6u64, 1u64), (30, 2), (7, 3)] {
        let f = HeckeSystem::synthetic(factor(11).unwrap(), 2, 400, seed).unwrap();
        let l = factor(modulus).unwrap();
        for phi in SignCharacter::all(&l).unwrap() {
            let (direct, product) = f_phi_coefficients(&f, &phi, 200).unwrap();
            for (i, (a, b)) in direct.iter().zip(&product).enumerate() {
                assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "coefficient {} for L = {modulus}", i + 1);
            }
        }
    }
}

/// `K₁(w) = ∫₀^∞ e^{−w cosh t} cosh t dt` by the trapezoid rule, which
/// converges geometrically for this integrand.
fn bessel_k1(w: f64) -> f64 {
    let h: f64 = 1e-3;
    let mut s = 0.5 * (-w).exp();
    let mut t = h;
    loop {
        let term = (-w * t.cosh()).exp() * t.cosh();
        s += term;
        if term < 1e-300 || t > 40.0 {
            break;
        }
        t += h;
    }
    s * h
}

#[test]
fn cutoff_functions_have_closed_forms() {
    for y in [1e-4, 0.01, 0.1, 0.5, 1.0, 2.0, 4.0] {
        let x = 2.0 * PI * y;
        let v1_2 = v_function(VKind::V1, 2, y).unwrap();
        assert!((v1_2 - (-x).exp()).abs() < 1e-9, "V₁ weight 2 at {y}");
        let v1_4 = v_function(VKind::V1, 4, y).unwrap();
        assert!((v1_4 - (-x).exp() * (1.0 + x)).abs() < 1e-9, "V₁ weight 4 at {y}");
        let v1_6 = v_function(VKind::V1, 6, y).unwrap();
        assert!((v1_6 - (-x).exp() * (1.0 + x + x * x / 2.0)).abs() < 1e-9, "V₁ weight 6 at {y}");
        // Γ(u+1)² inverts to 2zK₀(2√z); integrating against dz/z gives wK₁(w)
        let w = 4.0 * PI * y.sqrt();
        let v2_2 = v_function(VKind::V2, 2, y).unwrap();
        assert!((v2_2 - w * bessel_k1(w)).abs() < 1e-8, "V₂ weight 2 at {y}: {v2_2} vs {}", w * bessel_k1(w));
    }
    for kind in [VKind::V1, VKind::V2] {
        let mut previous = 1.0;
        for k in 0..40 {
            let y = 1e-3 * 1.4f64.powi(k);
            let v = v_function(kind, 4, y).unwrap();
            assert!(v <= previous + 1e-10 && v > -1e-10, "{kind:?} is decreasing and non-negative");
            previous = v;
        }
        assert!(v_function(kind, 2, 1e-6).unwrap() > 0.99);
        assert!(v_function(kind, 2, 30.0).unwrap() < 1e-6);
        assert!(v_function(kind, 3, 1.0).is_err());
        assert!(v_function(kind, 2, 0.0).is_err());
    }
}

#[test]
fn principal_g_is_multiplicative() {
    let square_free_odd: Vec<u64> = (3..=105u64).step_by(2).filter(|&d| factor(d).unwrap().is_square_free()).collect();
    let g = |d: u64| principal_g(d, 400).unwrap();
    for &d1 in &square_free_odd {
        for &d2 in &square_free_odd {
            if d1 < d2 && d1 * d2 <= 105 && arith::gcd(d1, d2) == 1 {
                let whole = g(d1 * d2);
                let split = g(d1) * g(d2);
                assert!((whole - split).norm() < 1e-9, "g({d1}·{d2}) = {whole}, product {split}");
            }
        }
    }
    assert!((g(5) - Complex64::new(2.0, 0.0)).norm() < 1e-9);
    assert!(g(3).norm() < 1e-9);
}

#[test]
fn factored_divisors_are_complete() {
    for n in 1..=2000u64 {
        let f: Factored = factor(n).unwrap();
        let divisors = f.divisors();
        let expected: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
        let mut sorted = divisors.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, expected, "divisors of {n}");
        assert_eq!(f.tau() as usize, expected.len());
    }
}
