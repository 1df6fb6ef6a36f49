//! Kloosterman sums: direct evaluation, full tables `t ↦ S(t,1;c)`, and a
//! sweep over all moduli `c ≡ 0 (mod N)` up to a cutoff for batches of pairs.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex as FftComplex;
use rustfft::FftPlanner;

use crate::arith::{self, Factored, PrimeSieve};
use crate::numeric::{KahanSum, RootTable};

/// `S(m,n;c) = Σ_{x mod c, (x,c)=1} e((mx + n·x̄)/c)`, by direct enumeration.
/// `S(m,n;1) = 1`.
pub fn kloosterman(m: i64, n: i64, c: u64) -> f64 {
    assert!(c >= 1, "Kloosterman modulus must be positive");
    if c == 1 {
        return 1.0;
    }
    let roots = RootTable::new(c);
    let mr = arith::reduce(m, c) as u128;
    let nr = arith::reduce(n, c) as u128;
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for x in 1..c {
        if let Some(xi) = arith::mod_inv(x as i64, c) {
            let k = ((mr * x as u128 + nr * xi as u128) % c as u128) as u64;
            let z = roots.get(k);
            re.add(z.re);
            im.add(z.im);
        }
    }
    debug_assert!(im.value().abs() < 1e-10 * (c as f64).max(1.0), "Kloosterman sum must be real");
    re.value()
}

/// Table of `S(t,1;c)` for every residue `t`; see [`kloosterman_row`].
pub fn kloosterman_table(c: u64) -> Vec<f64> {
    kloosterman_row(1, c)
}

/// Table of `S(t,n;c)` for every residue `t`, computed with one FFT:
/// `S(t,n;c) = Σ_x h(x) e(tx/c)` where `h(x) = e(n·x̄/c)` on units.
pub fn kloosterman_row(n: i64, c: u64) -> Vec<f64> {
    if c == 1 {
        return vec![1.0];
    }
    let roots = RootTable::new(c);
    let nr = arith::reduce(n, c) as u128;
    let mut buf: Vec<FftComplex<f64>> = vec![FftComplex::new(0.0, 0.0); c as usize];
    for (x, slot) in buf.iter_mut().enumerate().skip(1) {
        if let Some(xi) = arith::mod_inv(x as i64, c) {
            let z = roots.get((nr * xi as u128 % c as u128) as u64);
            *slot = FftComplex::new(z.re, z.im);
        }
    }
    let mut planner = FftPlanner::<f64>::new();
    // rustfft's inverse transform uses the kernel e(+tx/c) and does not normalize.
    planner.plan_fft_inverse(c as usize).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

/// `S(m,n;c)` via the Selberg identity `Σ_{d|(m,n,c)} d·S(mn/d²,1;c/d)`,
/// reading values from per-modulus tables supplied by `table`.
pub fn kloosterman_selberg(m: i64, n: i64, c: u64, mut table: impl FnMut(u64) -> Arc<Vec<f64>>) -> f64 {
    let g = arith::gcd(arith::gcd_i(m, c), arith::gcd_i(n, c));
    let mut s = KahanSum::new();
    for d in arith::factor(g).expect("g ≥ 1").divisors() {
        let cd = c / d;
        let t = ((m / d as i64) as i128 * (n / d as i64) as i128).rem_euclid(cd as i128) as usize;
        s.add(d as f64 * table(cd)[t]);
    }
    s.value()
}

// Primes above this bound are handled by dedicated per-prime passes.
const SMALL_PRIME_POWER: u64 = 4096;

/// Evaluator of `S(t,1;p)` at one large prime: a full FFT table when many
/// evaluations are expected, otherwise `O(p)` direct sums over precomputed
/// cosines and inverses.
enum LargePrime {
    Table { p: u64, table: Vec<f64> },
    Direct { p: u64, cos: Vec<f64>, inv: Vec<u32> },
}

impl LargePrime {
    fn new(p: u64, expected_evaluations: usize) -> Self {
        // an FFT costs a few multiples of p·log p; a direct sum costs p
        let fft_cost = 5.0 * (p as f64).log2();
        if expected_evaluations as f64 > fft_cost {
            return LargePrime::Table { p, table: kloosterman_table(p) };
        }
        let roots = RootTable::new(p);
        let cos = (0..p).map(|k| roots.cos(k)).collect();
        // inverses from powers of a primitive root: (g^k)^{-1} = g^{p-1-k}
        let g = primitive_root_prime(p);
        let mut pw = vec![0u32; (p - 1) as usize];
        let mut x = 1u64;
        for slot in pw.iter_mut() {
            *slot = x as u32;
            x = x * g % p;
        }
        let mut inv = vec![0u32; p as usize];
        for k in 0..(p - 1) as usize {
            inv[pw[k] as usize] = pw[(p as usize - 1 - k) % (p as usize - 1)];
        }
        LargePrime::Direct { p, cos, inv }
    }

    fn prime(&self) -> u64 {
        match self {
            LargePrime::Table { p, .. } | LargePrime::Direct { p, .. } => *p,
        }
    }

    /// `S(t,1;p)`.
    fn eval(&self, t: u64) -> f64 {
        let (p, cos, inv) = match self {
            LargePrime::Table { p, table } => return table[(t % p) as usize],
            LargePrime::Direct { p, cos, inv } => (*p, cos, inv),
        };
        let t = t % p;
        let mut tx = 0u64;
        let mut s = KahanSum::new();
        let mut block = 0.0;
        for x in 1..p as usize {
            tx += t;
            if tx >= p {
                tx -= p;
            }
            let mut k = tx + u64::from(inv[x]);
            if k >= p {
                k -= p;
            }
            block += cos[k as usize];
            if x % 256 == 0 {
                s.add(block);
                block = 0.0;
            }
        }
        s.add(block);
        s.value()
    }
}

fn primitive_root_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let qs: Vec<u64> = arith::factor(p - 1).expect("p ≥ 2").primes().collect();
    (2..p)
        .find(|&g| {
            qs.iter().all(|&q| {
                let (mut acc, mut b, mut e) = (1u64, g, (p - 1) / q);
                while e > 0 {
                    if e & 1 == 1 {
                        acc = acc * b % p;
                    }
                    b = b * b % p;
                    e >>= 1;
                }
                acc != 1
            })
        })
        .expect("primitive root exists")
}

/// Evaluates `S(m,n;c)` for a batch of pairs at every `c ≡ 0 (mod level)`
/// with `c ≤ c_max`.
///
/// Sums are assembled prime power by prime power through twisted
/// multiplicativity `S(m,n;c) = ∏_{P‖c} S(m·s̄, n·s̄; P)`, `s = c/P`, with
/// FFT tables for prime powers up to 4096 (and all higher prime powers with
/// exponent ≥ 2). Moduli with a prime factor above 4096 are visited after the
/// others, grouped by that prime, so each large prime is prepared once.
pub struct KloostermanSweep {
    level: u64,
    c_max: u64,
    sieve: PrimeSieve,
    tables: HashMap<u64, Arc<Vec<f64>>>,
}

/// One modulus visited by [`KloostermanSweep::run`].
pub struct SweepStep<'a> {
    pub c: u64,
    /// `S(m_i, n_i; c)` for each input pair, in input order.
    pub values: &'a [f64],
}

impl KloostermanSweep {
    pub fn new(level: u64, c_max: u64) -> Self {
        assert!(level >= 1);
        assert!(c_max < SMALL_PRIME_POWER * SMALL_PRIME_POWER, "c_max beyond the sweep's design range");
        let sieve = PrimeSieve::new(c_max.max(2) as usize);
        let mut wanted = Vec::new();
        for &p in sieve.primes() {
            let p = u64::from(p);
            let mut pk = p;
            let mut k = 1;
            while pk <= c_max {
                if pk <= SMALL_PRIME_POWER || k >= 2 {
                    wanted.push(pk);
                }
                pk = match pk.checked_mul(p) {
                    Some(v) => v,
                    None => break,
                };
                k += 1;
            }
        }
        let tables = wanted.par_iter().map(|&pk| (pk, Arc::new(kloosterman_table(pk)))).collect();
        KloostermanSweep { level, c_max, sieve, tables }
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn c_max(&self) -> u64 {
        self.c_max
    }

    fn table(&self, pk: u64) -> &[f64] {
        if pk == 1 {
            return &[1.0];
        }
        self.tables.get(&pk).map(|t| t.as_slice()).expect("prime-power table prepared")
    }

    /// Local factor `S(a·s̄, b·s̄; p^k)` given the cofactor inverse `s̄`.
    fn local(&self, p: u64, k: u32, pk: u64, sbar: u64, m: u64, n: u64, large: Option<&LargePrime>) -> f64 {
        let vm = valuation_capped(m, p, k);
        let vn = valuation_capped(n, p, k);
        let s2 = (sbar as u128 * sbar as u128 % pk as u128) as u64;
        let jmax = vm.min(vn);
        let mut total = 0.0;
        let mut pj = 1u64;
        for j in 0..=jmax {
            let modulus = pk / pj;
            let mm = (m / pj) % modulus;
            let nn = (n / pj) % modulus;
            let t = (mm as u128 * nn as u128 % modulus as u128 * (s2 % modulus) as u128 % modulus as u128) as u64;
            let v = match (large, j) {
                (Some(lp), 0) => lp.eval(t),
                _ => self.table(modulus)[t as usize],
            };
            total += pj as f64 * v;
            pj *= p;
        }
        total
    }

    fn values_at(&self, f: &Factored, pairs: &[(u64, u64)], large: Option<&LargePrime>, out: &mut Vec<f64>) {
        let c = f.n();
        // cofactor inverses per prime power, shared by all pairs
        let locals: Vec<(u64, u32, u64, u64)> = f
            .factors()
            .iter()
            .map(|&(p, k)| {
                let pk = p.pow(k);
                let sbar = arith::mod_inv((c / pk) as i64, pk).expect("coprime cofactor");
                (p, k, pk, sbar)
            })
            .collect();
        out.clear();
        out.par_extend(pairs.par_iter().map(|&(m, n)| {
            let mut prod = 1.0;
            for &(p, k, pk, sbar) in &locals {
                let lp = large.filter(|lp| lp.prime() == pk);
                prod *= self.local(p, k, pk, sbar, m, n, lp);
                if prod == 0.0 {
                    break;
                }
            }
            prod
        }));
    }

    /// Visits every modulus in a fixed order (independent of thread count).
    pub fn run(&self, pairs: &[(u64, u64)], mut visit: impl FnMut(SweepStep<'_>)) {
        let mut values = Vec::with_capacity(pairs.len());
        let mut deferred: Vec<(u64, u64)> = Vec::new();
        let mut c = self.level;
        while c <= self.c_max {
            let f = if c == 1 { Factored::one() } else { self.sieve.factor(c) };
            match f.factors().iter().find(|&&(p, _)| p > SMALL_PRIME_POWER) {
                Some(&(p, _)) => deferred.push((p, c)),
                None => {
                    self.values_at(&f, pairs, None, &mut values);
                    visit(SweepStep { c, values: &values });
                }
            }
            c += self.level;
        }
        deferred.sort_unstable();
        let mut i = 0;
        while i < deferred.len() {
            let p = deferred[i].0;
            let count = deferred[i..].iter().take_while(|d| d.0 == p).count();
            let lp = LargePrime::new(p, count * pairs.len());
            while i < deferred.len() && deferred[i].0 == p {
                let c = deferred[i].1;
                let f = self.sieve.factor(c);
                self.values_at(&f, pairs, Some(&lp), &mut values);
                visit(SweepStep { c, values: &values });
                i += 1;
            }
        }
    }
}

fn valuation_capped(x: u64, p: u64, cap: u32) -> u32 {
    let mut v = 0;
    let mut y = x;
    while v < cap && y % p == 0 {
        y /= p;
        v += 1;
    }
    v
}

/// `S(m,n;c)` through twisted multiplicativity over the prime powers of `c`,
/// each local sum enumerated directly. Independent of [`kloosterman`] apart
/// from the root table, and used to cross-check it.
pub fn kloosterman_multiplicative(m: i64, n: i64, c: &Factored) -> f64 {
    let mut prod = 1.0;
    for &(p, k) in c.factors() {
        let pk = p.pow(k);
        let s = c.n() / pk;
        let sbar = arith::mod_inv(s as i64, pk).expect("coprime cofactor") as i128;
        let a = (m as i128 * sbar).rem_euclid(pk as i128) as i64;
        let b = (n as i128 * sbar).rem_euclid(pk as i128) as i64;
        prod *= kloosterman(a, b, pk);
    }
    prod
}
