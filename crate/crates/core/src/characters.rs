//! Dirichlet characters: the real primitive characters `χ_q`, full character
//! groups for small moduli, and Gauss sums.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, factor, Factored};
use crate::numeric::{ComplexKahanSum, RootTable};
use crate::{Error, Result};

/// Largest modulus accepted by [`enumerate_characters`].
pub const MAX_ENUMERATION_MODULUS: u64 = 10_000;

/// Which of the two primitive real characters of conductor 8 is meant.
///
/// `Even` is `n ↦ (2/n)` with `χ(−1) = 1`; `Odd` is `n ↦ (−2/n)` with
/// `χ(−1) = −1`. Both take the value `−1` at 5.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mod8Sign {
    #[default]
    Even,
    Odd,
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i8 {
    assert!(n % 2 == 1, "Jacobi symbol needs an odd modulus");
    let mut a = arith::reduce(a, n);
    let mut n = n;
    let mut result = 1i8;
    while a != 0 {
        let tz = a.trailing_zeros();
        a >>= tz;
        if tz % 2 == 1 && (n % 8 == 3 || n % 8 == 5) {
            result = -result;
        }
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// A real primitive character `χ_q(n) = (n/q_o)·χ_{q_e}(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticCharacter {
    q: Factored,
    q_o: u64,
    q_e: u64,
    sign8: Mod8Sign,
}

impl QuadraticCharacter {
    /// The character of conductor `q`. `sign8` selects the conductor-8 factor
    /// and is ignored unless `8 ‖ q`.
    pub fn new(q: u64, sign8: Mod8Sign) -> Result<Self> {
        let q = factor(q)?;
        Self::from_factored(q, sign8)
    }

    pub fn from_factored(q: Factored, sign8: Mod8Sign) -> Result<Self> {
        let v2 = q.valuation(2);
        let q_e = match v2 {
            0 => 1,
            2 => 4,
            3 => 8,
            _ => return Err(Error::Precondition(format!("{} is not the conductor of a real primitive character", q.n()))),
        };
        let q_o = q.n() / q_e;
        if q.factors().iter().any(|&(p, e)| p != 2 && e > 1) {
            return Err(Error::Precondition(format!("odd part of {} is not square-free", q.n())));
        }
        Ok(QuadraticCharacter { q, q_o, q_e, sign8: if q_e == 8 { sign8 } else { Mod8Sign::Even } })
    }

    /// The trivial character (conductor 1).
    pub fn trivial() -> Self {
        QuadraticCharacter { q: Factored::one(), q_o: 1, q_e: 1, sign8: Mod8Sign::Even }
    }

    pub fn conductor(&self) -> &Factored {
        &self.q
    }

    pub fn q(&self) -> u64 {
        self.q.n()
    }

    pub fn q_o(&self) -> u64 {
        self.q_o
    }

    pub fn q_e(&self) -> u64 {
        self.q_e
    }

    pub fn sign8(&self) -> Mod8Sign {
        self.sign8
    }

    /// The odd factor `(·/q_o)` as a character of its own.
    pub fn odd_part(&self) -> QuadraticCharacter {
        QuadraticCharacter { q: factor(self.q_o).expect("q_o ≥ 1"), q_o: self.q_o, q_e: 1, sign8: Mod8Sign::Even }
    }

    /// The 2-power factor `χ_{q_e}` as a character of its own.
    pub fn even_part(&self) -> QuadraticCharacter {
        QuadraticCharacter { q: factor(self.q_e).expect("q_e ≥ 1"), q_o: 1, q_e: self.q_e, sign8: self.sign8 }
    }

    pub fn value(&self, n: i64) -> i8 {
        let even = even_value(self.q_e, self.sign8, n);
        if even == 0 || self.q_o == 1 {
            return even;
        }
        even * jacobi(n, self.q_o)
    }

    /// `χ(−1)`.
    pub fn parity(&self) -> i8 {
        self.value(-1)
    }

    /// Gauss sum `Σ_{x mod q} χ(x) e(x/q)`; equals `√q` or `i√q`.
    pub fn gauss_sum(&self) -> Complex64 {
        let q = self.q();
        let roots = RootTable::new(q);
        let mut s = ComplexKahanSum::new();
        for x in 0..q {
            let v = self.value(x as i64);
            if v != 0 {
                s.add(roots.get(x) * f64::from(v));
            }
        }
        s.value()
    }
}

/// Value of the character of conductor `q_e ∈ {1,4,8}`.
pub fn even_value(q_e: u64, sign8: Mod8Sign, n: i64) -> i8 {
    match q_e {
        1 => 1,
        4 => match n.rem_euclid(4) {
            1 => 1,
            3 => -1,
            _ => 0,
        },
        8 => match (n.rem_euclid(8), sign8) {
            (1, _) => 1,
            (7, Mod8Sign::Even) | (3, Mod8Sign::Odd) => 1,
            (3, Mod8Sign::Even) | (5, _) | (7, Mod8Sign::Odd) => -1,
            _ => 0,
        },
        _ => panic!("invalid conductor {q_e} for the 2-part"),
    }
}

/// `χ_q(n)`; see [`QuadraticCharacter`].
pub fn chi_q(q: &Factored, n: i64, sign8: Mod8Sign) -> Result<i8> {
    Ok(QuadraticCharacter::from_factored(q.clone(), sign8)?.value(n))
}

/// Unit group of `Z/mZ` written as a product of cyclic groups, with discrete
/// logarithm tables per prime-power component.
#[derive(Debug)]
struct UnitGroup {
    modulus: u64,
    /// (prime power, generator, order, log table indexed by residue mod the prime power)
    cyclic: Vec<CyclicFactor>,
    exponent: u64,
    roots: RootTable,
}

#[derive(Debug)]
struct CyclicFactor {
    prime_power: u64,
    order: u64,
    logs: Vec<u32>,
}

const NOT_A_UNIT: u32 = u32::MAX;

impl UnitGroup {
    fn new(modulus: u64) -> Result<Self> {
        let f = factor(modulus)?;
        let mut cyclic = Vec::new();
        for &(p, e) in f.factors() {
            let pe = p.pow(e);
            if p == 2 {
                if e >= 2 {
                    cyclic.push(cyclic_factor(pe, pe - 1, 2));
                }
                if e >= 3 {
                    cyclic.push(cyclic_factor(pe, 5, pe / 4));
                }
            } else {
                let order = (p - 1) * p.pow(e - 1);
                let g = primitive_root(pe, p, order);
                cyclic.push(cyclic_factor(pe, g, order));
            }
        }
        let exponent = cyclic.iter().fold(1u64, |acc, c| arith::lcm(acc, c.order).expect("small modulus"));
        Ok(UnitGroup { modulus, cyclic, exponent, roots: RootTable::new(exponent) })
    }

    /// Discrete log coordinates of a unit, or `None` for a non-unit.
    fn logs(&self, n: i64) -> Option<Vec<u64>> {
        let mut out = Vec::with_capacity(self.cyclic.len());
        for c in &self.cyclic {
            let r = arith::reduce(n, c.prime_power) as usize;
            let l = c.logs[r];
            if l == NOT_A_UNIT {
                return None;
            }
            out.push(u64::from(l));
        }
        if self.modulus > 1 && arith::gcd_i(n, self.modulus) != 1 {
            return None;
        }
        Some(out)
    }
}

// The 2-power case stores logs to base −1 (order 2) and base 5 (order 2^{e−2})
// as two separate factors sharing the prime power; the tables below resolve
// each coordinate independently.
fn cyclic_factor(pe: u64, g: u64, order: u64) -> CyclicFactor {
    let mut logs = vec![NOT_A_UNIT; pe as usize];
    if pe % 2 == 0 && g == pe - 1 {
        // coordinate along −1: x ≡ ±5^k, sign read off mod 4
        for x in (1..pe).step_by(2) {
            logs[x as usize] = if x % 4 == 1 { 0 } else { 1 };
        }
        return CyclicFactor { prime_power: pe, order, logs };
    }
    if pe % 2 == 0 {
        // coordinate along 5: log of ±x
        let mut x = 1u64;
        for k in 0..order {
            logs[x as usize] = k as u32;
            logs[(pe - x) as usize] = k as u32;
            x = x * 5 % pe;
        }
        return CyclicFactor { prime_power: pe, order, logs };
    }
    let mut x = 1u64;
    for k in 0..order {
        logs[x as usize] = k as u32;
        x = x * g % pe;
    }
    CyclicFactor { prime_power: pe, order, logs }
}

fn primitive_root(pe: u64, p: u64, order: u64) -> u64 {
    let odd_primes: Vec<u64> = factor(order).expect("order ≥ 1").primes().collect();
    (2..pe)
        .find(|&g| {
            g % p != 0
                && odd_primes.iter().all(|&r| {
                    let mut acc = 1u64;
                    let mut b = g;
                    let mut e = order / r;
                    while e > 0 {
                        if e & 1 == 1 {
                            acc = acc * b % pe;
                        }
                        b = b * b % pe;
                        e >>= 1;
                    }
                    acc != 1
                })
        })
        .unwrap_or(1)
}

/// A Dirichlet character to a small modulus.
///
/// Values are stored as exponents `k` with `χ(n) = e(k/E)` for the group
/// exponent `E`, computed on demand from the shared discrete-log tables.
#[derive(Clone, Debug)]
pub struct DirichletCharacter {
    group: Arc<UnitGroup>,
    coords: Vec<u64>,
    order: u64,
    conductor: u64,
}

impl DirichletCharacter {
    pub fn modulus(&self) -> u64 {
        self.group.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.group.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    /// Exponent `k` with `χ(n) = e(k/E)`, or `None` off the units.
    pub fn exponent_of(&self, n: i64) -> Option<u64> {
        let logs = self.group.logs(n)?;
        let e = self.group.exponent;
        let mut k = 0u64;
        for ((l, a), c) in logs.iter().zip(&self.coords).zip(&self.group.cyclic) {
            k = (k + l * a % c.order * (e / c.order)) % e;
        }
        Some(k)
    }

    pub fn value(&self, n: i64) -> Complex64 {
        match self.exponent_of(n) {
            Some(k) => self.group.roots.get(k),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Full value table indexed by residue.
    pub fn table(&self) -> Vec<Complex64> {
        (0..self.modulus()).map(|n| self.value(n as i64)).collect()
    }

    /// Whether every value is real (±1 or 0).
    pub fn is_real(&self) -> bool {
        self.order <= 2
    }
}

/// All `φ(m)` characters modulo `m`; the principal character comes first.
pub fn enumerate_characters(modulus: u64) -> Result<Vec<DirichletCharacter>> {
    if modulus == 0 || modulus > MAX_ENUMERATION_MODULUS {
        return Err(Error::Precondition(format!("modulus {modulus} outside 1..={MAX_ENUMERATION_MODULUS}")));
    }
    let group = Arc::new(UnitGroup::new(modulus)?);
    let orders: Vec<u64> = group.cyclic.iter().map(|c| c.order).collect();
    let count: u64 = orders.iter().product();
    let mut out = Vec::with_capacity(count as usize);
    let proper_divisors: Vec<u64> = factor(modulus)?.divisors().into_iter().filter(|&d| d < modulus).collect();
    for idx in 0..count {
        let mut coords = Vec::with_capacity(orders.len());
        let mut r = idx;
        for &o in &orders {
            coords.push(r % o);
            r /= o;
        }
        let order = coords.iter().zip(&orders).fold(1u64, |acc, (&a, &o)| arith::lcm(acc, o / arith::gcd(a, o)).expect("small"));
        let mut chi = DirichletCharacter { group: group.clone(), coords, order, conductor: modulus };
        chi.conductor = conductor_of(&chi, &proper_divisors);
        out.push(chi);
    }
    Ok(out)
}

// Smallest d | m such that χ is trivial on units ≡ 1 (mod d).
fn conductor_of(chi: &DirichletCharacter, proper_divisors: &[u64]) -> u64 {
    let m = chi.modulus();
    for &d in proper_divisors {
        let trivial = (0..m / d).all(|t| {
            let x = 1 + d * t;
            match chi.exponent_of(x as i64) {
                Some(k) => k == 0,
                None => true,
            }
        });
        if trivial {
            return d;
        }
    }
    m
}

/// `τ(χ) = Σ_{x mod m} χ(x) e(x/m)` with compensated summation.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let m = chi.modulus();
    let roots = RootTable::new(m);
    let mut s = ComplexKahanSum::new();
    for x in 0..m {
        s.add(chi.value(x as i64) * roots.get(x));
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi_q_examples() {
        assert_eq!(QuadraticCharacter::new(5, Mod8Sign::Even).unwrap().value(2), -1);
        assert_eq!(QuadraticCharacter::new(4, Mod8Sign::Even).unwrap().value(3), -1);
        assert_eq!(QuadraticCharacter::new(15, Mod8Sign::Even).unwrap().value(15), 0);
        assert!(QuadraticCharacter::new(9, Mod8Sign::Even).is_err());
        assert!(QuadraticCharacter::new(16, Mod8Sign::Even).is_err());
        assert!(QuadraticCharacter::new(2, Mod8Sign::Even).is_err());
    }

    #[test]
    fn mod8_variants() {
        let even = QuadraticCharacter::new(8, Mod8Sign::Even).unwrap();
        let odd = QuadraticCharacter::new(8, Mod8Sign::Odd).unwrap();
        assert_eq!([1, 3, 5, 7].map(|n| even.value(n)), [1, -1, -1, 1]);
        assert_eq!([1, 3, 5, 7].map(|n| odd.value(n)), [1, 1, -1, -1]);
        assert_eq!(even.parity(), 1);
        assert_eq!(odd.parity(), -1);
    }

    #[test]
    fn enumeration_examples() {
        let one = enumerate_characters(1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].is_principal());
        let five = enumerate_characters(5).unwrap();
        let mut orders: Vec<u64> = five.iter().map(DirichletCharacter::order).collect();
        orders.sort_unstable();
        assert_eq!(orders, vec![1, 2, 4, 4]);
        let eight = enumerate_characters(8).unwrap();
        assert_eq!(eight.len(), 4);
        assert!(eight.iter().all(DirichletCharacter::is_real));
        assert_eq!(eight.iter().filter(|c| c.is_primitive()).count(), 2);
    }

    #[test]
    fn gauss_sum_examples() {
        assert!((gauss_sum(&enumerate_characters(1).unwrap()[0]) - 1.0).norm() < 1e-15);
        let chi5 = QuadraticCharacter::new(5, Mod8Sign::Even).unwrap();
        assert!((chi5.gauss_sum() - 5f64.sqrt()).norm() < 1e-12);
        let chi3 = QuadraticCharacter::new(3, Mod8Sign::Even).unwrap();
        assert!((chi3.gauss_sum() - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12);
    }
}
