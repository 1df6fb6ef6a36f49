//! Complete exponential sums: Kloosterman sums, Ramanujan sums and the triple
//! sums `G_{A,B}`.

mod gsum;
mod kloosterman;

pub use gsum::{
    gab_bruteforce, gab_bruteforce_all_m3, gab_bruteforce_with_guard, gab_closed_c2, gab_closed_even, gab_crt_factor, gab_degenerate,
    h_extract_table, h_star_table, principal_g, CrtFactor, CrtFactorization, DegenerateEvaluation, FactorPart, GRoute, GSumParams,
    GSumResult, DEFAULT_BRUTE_GUARD,
};
pub use kloosterman::{
    kloosterman, kloosterman_multiplicative, kloosterman_row, kloosterman_selberg, kloosterman_table, KloostermanSweep, SweepStep,
};

use crate::arith;
use crate::numeric::KahanSum;

/// Ramanujan sum `R_k(n) = Σ_{d | (n,k)} d·μ(k/d)`, with `(0,k) = k`.
pub fn ramanujan(n: i64, k: u64) -> i64 {
    assert!(k >= 1, "Ramanujan sum needs k ≥ 1");
    let g = arith::gcd_i(n, k);
    arith::factor(g).expect("g ≥ 1").divisors().into_iter().map(|d| d as i64 * arith::factor(k / d).expect("k/d ≥ 1").mobius()).sum()
}

/// Partial sum of `Σ_{m ≤ terms, (m,b)=1} R_{q}(m) m^{-s}` next to its limit
/// `μ(q)·ζ^{(b)}(s)·∏_{p|q}(1 − p^{1−s})`, where `ζ^{(b)}` omits the Euler
/// factors at primes dividing `b`. Requires `q` square-free and `(q,b) = 1`.
pub fn ramanujan_dirichlet_series(q: u64, b: u64, s: f64, terms: u64) -> crate::Result<(f64, f64)> {
    let qf = arith::factor(q)?;
    if !qf.is_square_free() || arith::gcd(q, b) != 1 {
        return Err(crate::Error::Precondition(format!("need q = {q} square-free and coprime to {b}")));
    }
    let mut partial = KahanSum::new();
    for m in 1..=terms {
        if arith::gcd(m, b) == 1 {
            partial.add(ramanujan(m as i64, q) as f64 * (m as f64).powf(-s));
        }
    }
    // ζ(s) by direct summation with an Euler–Maclaurin tail
    let n = 10_000u64;
    let mut zeta = KahanSum::new();
    for k in 1..n {
        zeta.add((k as f64).powf(-s));
    }
    let nf = n as f64;
    zeta.add(nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s / 12.0 * nf.powf(-s - 1.0));
    let mut limit = zeta.value() * qf.mobius() as f64;
    for p in arith::factor(b.max(1))?.primes() {
        limit *= 1.0 - (p as f64).powf(-s);
    }
    for p in qf.primes() {
        limit *= 1.0 - (p as f64).powf(1.0 - s);
    }
    Ok((partial.value(), limit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramanujan_examples() {
        assert_eq!(ramanujan(17, 1), 1);
        assert_eq!(ramanujan(1, 2), -1);
        assert_eq!(ramanujan(3, 6), -2);
        for k in 1..30u64 {
            for n in -10..10i64 {
                assert!((ramanujan(n, k) as f64 - kloosterman(n, 0, k)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ramanujan_series_converges() {
        for (q, b) in [(3u64, 2u64), (5, 6), (15, 2), (7, 10)] {
            let (partial, limit) = ramanujan_dirichlet_series(q, b, 2.0, 100_000).unwrap();
            assert!((partial - limit).abs() < 1e-6, "q={q} b={b}: {partial} vs {limit}");
        }
    }
}
