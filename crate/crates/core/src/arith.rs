//! Integer arithmetic and multiplicative functions.
//!
//! Everything multiplicative goes through [`Factored`], an integer carried
//! together with its prime factorization.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const TRIAL_DIVISION_LIMIT: u64 = 1_000_000;

/// A positive integer with its canonical factorization.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Factored {
    n: u64,
    factors: Vec<(u64, u32)>,
}

impl fmt::Debug for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)?;
        if !self.factors.is_empty() {
            write!(f, " = ")?;
            for (i, (p, e)) in self.factors.iter().enumerate() {
                if i > 0 {
                    write!(f, "·")?;
                }
                if *e == 1 {
                    write!(f, "{p}")?;
                } else {
                    write!(f, "{p}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Factored {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.n)
    }
}

impl Factored {
    pub fn one() -> Self {
        Factored { n: 1, factors: Vec::new() }
    }

    /// Builds from (prime, exponent) pairs in any order. Exponent-zero entries
    /// are dropped and repeated primes merged.
    pub fn from_factors(pairs: &[(u64, u32)]) -> Result<Self> {
        let mut factors: Vec<(u64, u32)> = pairs.iter().copied().filter(|&(_, e)| e > 0).collect();
        factors.sort_unstable();
        let mut merged: Vec<(u64, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            if !is_prime(p) {
                return Err(Error::Precondition(format!("{p} is not prime")));
            }
            match merged.last_mut() {
                Some(last) if last.0 == p => last.1 += e,
                _ => merged.push((p, e)),
            }
        }
        let mut n: u64 = 1;
        for &(p, e) in &merged {
            n = checked_pow(p, e).and_then(|pe| n.checked_mul(pe)).ok_or(Error::Overflow("Factored::from_factors"))?;
        }
        Ok(Factored { n, factors: merged })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn is_one(&self) -> bool {
        self.n == 1
    }

    pub fn is_square_free(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Exponent of `p` in `n` (zero if `p` does not divide `n`).
    pub fn valuation(&self, p: u64) -> u32 {
        self.factors.iter().find(|&&(q, _)| q == p).map_or(0, |&(_, e)| e)
    }

    pub fn divides(&self, m: u64) -> bool {
        m % self.n == 0
    }

    pub fn mul(&self, other: &Factored) -> Result<Factored> {
        let mut pairs = self.factors.clone();
        pairs.extend_from_slice(&other.factors);
        Factored::from_factors(&pairs)
    }

    /// `self / d`, requiring `d | self`.
    pub fn div(&self, d: &Factored) -> Result<Factored> {
        if self.n % d.n != 0 {
            return Err(Error::Precondition(format!("{} does not divide {}", d.n, self.n)));
        }
        let factors = self.factors.iter().map(|&(p, e)| (p, e - d.valuation(p))).filter(|&(_, e)| e > 0).collect();
        Ok(Factored { n: self.n / d.n, factors })
    }

    /// gcd with an arbitrary integer, keeping the factorization.
    pub fn gcd_with(&self, m: u64) -> Factored {
        let mut factors = Vec::new();
        let mut n = 1;
        for &(p, e) in &self.factors {
            let mut k = 0;
            let mut r = m;
            while k < e && r != 0 && r % p == 0 {
                r /= p;
                k += 1;
            }
            if m == 0 {
                k = e;
            }
            if k > 0 {
                factors.push((p, k));
                n *= p.pow(k);
            }
        }
        Factored { n, factors }
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Divisors together with their factorizations, ascending.
    pub fn factored_divisors(&self) -> Vec<Factored> {
        let mut out = vec![Factored::one()];
        for &(p, e) in &self.factors {
            let len = out.len();
            let mut pk = 1u64;
            for k in 1..=e {
                pk *= p;
                for i in 0..len {
                    let mut factors = out[i].factors.clone();
                    factors.push((p, k));
                    out.push(Factored { n: out[i].n * pk, factors });
                }
            }
        }
        out.sort_unstable_by_key(|d| d.n);
        out
    }

    pub fn mobius(&self) -> i64 {
        if self.is_square_free() {
            if self.factors.len() % 2 == 0 {
                1
            } else {
                -1
            }
        } else {
            0
        }
    }

    /// The completely multiplicative ν with ν(p) = p + 1.
    pub fn nu(&self) -> Result<u64> {
        let mut acc: u64 = 1;
        for &(p, e) in &self.factors {
            let pe = checked_pow(p + 1, e).ok_or(Error::Overflow("nu"))?;
            acc = acc.checked_mul(pe).ok_or(Error::Overflow("nu"))?;
        }
        Ok(acc)
    }

    /// ν as a float, for weights where only the size matters.
    pub fn nu_f64(&self) -> f64 {
        self.factors.iter().map(|&(p, e)| ((p + 1) as f64).powi(e as i32)).product()
    }

    pub fn radical(&self) -> Factored {
        let factors: Vec<(u64, u32)> = self.factors.iter().map(|&(p, _)| (p, 1)).collect();
        let n = factors.iter().map(|&(p, _)| p).product();
        Factored { n, factors }
    }

    pub fn euler_phi(&self) -> u64 {
        self.factors.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
    }

    /// Number of divisors.
    pub fn tau(&self) -> u64 {
        self.factors.iter().map(|&(_, e)| u64::from(e) + 1).product()
    }

    /// Number of ordered factorizations into three factors.
    pub fn tau3(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(_, e)| {
                let e = u64::from(e);
                (e + 1) * (e + 2) / 2
            })
            .product()
    }
}

impl TryFrom<u64> for Factored {
    type Error = Error;
    fn try_from(n: u64) -> Result<Self> {
        factor(n)
    }
}

fn checked_pow(base: u64, exp: u32) -> Option<u64> {
    base.checked_pow(exp)
}

/// Canonical factorization of `1 ≤ n < 2^63`.
pub fn factor(n: u64) -> Result<Factored> {
    if n == 0 {
        return Err(Error::Precondition("cannot factor 0".into()));
    }
    if n >= 1 << 63 {
        return Err(Error::Precondition(format!("{n} exceeds the 63-bit factoring range")));
    }
    let mut factors = Vec::new();
    let mut m = n;
    for p in [2u64, 3, 5] {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    // wheel mod 30
    const STEPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while p <= TRIAL_DIVISION_LIMIT && p * p <= m {
        let mut e = 0;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
        p += STEPS[i];
        i = (i + 1) % 8;
    }
    if m > 1 {
        let mut rest = Vec::new();
        split_large(m, &mut rest);
        rest.sort_unstable();
        for q in rest {
            match factors.last_mut() {
                Some(last) if last.0 == q => last.1 += 1,
                _ => factors.push((q, 1)),
            }
        }
    }
    Ok(Factored { n, factors })
}

fn split_large(m: u64, out: &mut Vec<u64>) {
    if m == 1 {
        return;
    }
    if is_prime(m) {
        out.push(m);
        return;
    }
    let d = pollard_rho(m);
    split_large(d, out);
    split_large(m / d, out);
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant; `n` is odd, composite and free of small factors.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..(128.min(r - k)) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += 128;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// gcd of a signed value with a modulus; gcd(0, c) = c.
pub fn gcd_i(a: i64, b: u64) -> u64 {
    gcd(a.unsigned_abs(), b)
}

pub fn lcm(a: u64, b: u64) -> Result<u64> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b)).checked_mul(b).ok_or(Error::Overflow("lcm"))
}

/// Inverse of `a` modulo `m`, if it exists. Modulo 1 every residue is 0.
pub fn mod_inv(a: i64, m: u64) -> Option<u64> {
    if m == 0 {
        return None;
    }
    if m == 1 {
        return Some(0);
    }
    let a = a.rem_euclid(m as i64) as i128;
    let (mut r0, mut r1) = (m as i128, a);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    if r0 != 1 {
        return None;
    }
    Some(s0.rem_euclid(m as i128) as u64)
}

/// Reduces a signed integer to `[0, m)`.
pub fn reduce(a: i64, m: u64) -> u64 {
    a.rem_euclid(m as i64) as u64
}

/// Reduces a signed 128-bit integer to `[0, m)`.
pub fn reduce_wide(a: i128, m: u64) -> u64 {
    a.rem_euclid(m as i128) as u64
}

/// Simultaneous solution of `x ≡ r_i (mod m_i)` for pairwise coprime moduli.
/// Returns `(x, M)` with `0 ≤ x < M = ∏ m_i`.
pub fn crt(residues: &[u64], moduli: &[u64]) -> Result<(u64, u64)> {
    if residues.len() != moduli.len() {
        return Err(Error::Precondition("crt: length mismatch".into()));
    }
    let mut x: u64 = 0;
    let mut m: u64 = 1;
    for (&r, &mi) in residues.iter().zip(moduli) {
        if mi == 0 {
            return Err(Error::Precondition("crt: zero modulus".into()));
        }
        if gcd(m, mi) != 1 {
            return Err(Error::Precondition(format!("crt: moduli {m} and {mi} are not coprime")));
        }
        let new_m = m.checked_mul(mi).ok_or(Error::Overflow("crt"))?;
        // x + m·t ≡ r (mod mi)
        let inv = mod_inv(m as i64 % mi as i64, mi).unwrap_or(0);
        let diff = (r % mi + mi - x % mi) % mi;
        let t = mul_mod(diff, inv, mi);
        x = ((x as u128 + m as u128 * t as u128) % new_m as u128) as u64;
        m = new_m;
    }
    Ok((x, m))
}

/// Splits `n = n'·n''` with `gcd(n', s) = 1` and `n'' | s^∞`.
/// Zero is treated as divisible by everything: `0 = 1·0` is not meaningful, so
/// `n = 0` returns `(1, 0)`.
pub fn coprime_split(n: i64, s: u64) -> (i64, u64) {
    if n == 0 {
        return (1, 0);
    }
    let sign = n.signum();
    let mut a = n.unsigned_abs();
    let mut b = 1u64;
    let mut g = gcd(a, s);
    while g > 1 {
        a /= g;
        b *= g;
        g = gcd(a, g);
    }
    (sign * a as i64, b)
}

/// All `ℓ ≤ y` whose prime factors divide the square-free `l`, ascending.
pub fn smooth_divisors_up_to(l: &Factored, y: u64) -> Result<Vec<Factored>> {
    if !l.is_square_free() {
        return Err(Error::Precondition(format!("{} is not square-free", l.n)));
    }
    let primes: Vec<u64> = l.primes().collect();
    let mut out = Vec::new();
    if y == 0 {
        return Ok(out);
    }
    // Each ℓ is generated exactly once: from ℓ/p where p is its largest prime.
    // Entries are (ℓ, exponent vector, index of largest prime used).
    let mut heap: BinaryHeap<Reverse<(u64, Vec<u32>, usize)>> = BinaryHeap::new();
    heap.push(Reverse((1, vec![0; primes.len()], 0)));
    while let Some(Reverse((n, exps, from))) = heap.pop() {
        for (i, &p) in primes.iter().enumerate().skip(from) {
            if let Some(next) = n.checked_mul(p) {
                if next <= y {
                    let mut e = exps.clone();
                    e[i] += 1;
                    heap.push(Reverse((next, e, i)));
                }
            }
        }
        let factors = primes.iter().zip(&exps).filter(|(_, &e)| e > 0).map(|(&p, &e)| (p, e)).collect();
        out.push(Factored { n, factors });
    }
    Ok(out)
}

/// Smallest-prime-factor table for fast factorization of every `n ≤ limit`.
pub struct PrimeSieve {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl PrimeSieve {
    pub fn new(limit: usize) -> Self {
        let mut spf = vec![0u32; limit + 1];
        let mut primes = Vec::new();
        for i in 2..=limit {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            for &p in &primes {
                let ip = i * p as usize;
                if p > spf[i] || ip > limit {
                    break;
                }
                spf[ip] = p;
            }
        }
        PrimeSieve { spf, primes }
    }

    pub fn limit(&self) -> usize {
        self.spf.len() - 1
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn factor(&self, n: u64) -> Factored {
        assert!(n >= 1 && n as usize <= self.limit(), "{n} outside sieve range");
        let mut m = n as usize;
        let mut factors: Vec<(u64, u32)> = Vec::new();
        while m > 1 {
            let p = self.spf[m] as usize;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            factors.push((p as u64, e));
        }
        Factored { n, factors }
    }
}

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x * x > n {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|s| s <= n) {
        x += 1;
    }
    x
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

pub fn mobius(n: &Factored) -> i64 {
    n.mobius()
}

pub fn nu(n: &Factored) -> Result<u64> {
    n.nu()
}

pub fn radical(n: &Factored) -> Factored {
    n.radical()
}

pub fn euler_phi(n: &Factored) -> u64 {
    n.euler_phi()
}

pub fn divisors(n: &Factored) -> Vec<u64> {
    n.divisors()
}
