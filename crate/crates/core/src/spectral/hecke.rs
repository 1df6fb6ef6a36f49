//! Hecke eigenvalue systems, sign characters on square-free levels, and the
//! identities for the sign-character basis of an oldclass.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arith::{self, Factored};
use crate::chebyshev;
use crate::{Error, Result};

/// Where the eigenvalues of a [`HeckeSystem`] came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    /// `λ(p) = 2cos θ_p` with `θ_p` uniform, drawn from a seeded generator.
    Synthetic { seed: u64 },
    /// Ratios `Δ_N(p,1)/Δ_N(1,1)` of geometric Petersson sums on a
    /// one-dimensional space.
    DerivedGeometric { c_max: u64 },
}

/// Normalised Hecke eigenvalues of a newform of square-free level, stored
/// prime by prime up to a bound.
#[derive(Clone, Debug, Serialize)]
pub struct HeckeSystem {
    level: Factored,
    weight: u32,
    prime_bound: u64,
    unramified: BTreeMap<u64, f64>,
    ramified: BTreeMap<u64, i8>,
    provenance: Provenance,
}

impl HeckeSystem {
    /// Validates and assembles a system. `unramified` must cover every prime
    /// up to `prime_bound` not dividing the level, and `ramified` every prime
    /// of the level.
    pub fn from_parts(
        level: Factored,
        weight: u32,
        prime_bound: u64,
        unramified: BTreeMap<u64, f64>,
        ramified: BTreeMap<u64, i8>,
        provenance: Provenance,
    ) -> Result<Self> {
        check_weight(weight)?;
        if !level.is_square_free() {
            return Err(Error::Precondition(format!("level {} is not square-free", level.n())));
        }
        for p in level.primes() {
            match ramified.get(&p) {
                Some(1) | Some(-1) => {}
                _ => return Err(Error::Precondition(format!("missing ramified sign at {p}"))),
            }
        }
        if let Some(p) = ramified.keys().find(|&&p| level.n() % p != 0) {
            return Err(Error::Precondition(format!("ramified sign given at {p}, which does not divide the level")));
        }
        for &p in arith::PrimeSieve::new(prime_bound.max(2) as usize).primes() {
            let p = u64::from(p);
            if level.n() % p == 0 {
                continue;
            }
            match unramified.get(&p) {
                Some(l) if l.abs() <= 2.0 + 1e-6 => {}
                Some(l) => return Err(Error::Precondition(format!("|λ({p})| = {} exceeds 2", l.abs()))),
                None => return Err(Error::Precondition(format!("missing λ({p})"))),
            }
        }
        Ok(HeckeSystem { level, weight, prime_bound, unramified, ramified, provenance })
    }

    /// A synthetic system: `λ(p) = 2cos θ_p` with `θ_p` uniform on `[0, π]`
    /// and uniformly random ramified signs.
    pub fn synthetic(level: Factored, weight: u32, prime_bound: u64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut unramified = BTreeMap::new();
        for &p in arith::PrimeSieve::new(prime_bound.max(2) as usize).primes() {
            let theta: f64 = rng.gen_range(0.0..PI);
            if level.n() % u64::from(p) != 0 {
                unramified.insert(u64::from(p), 2.0 * theta.cos());
            }
        }
        let ramified = level.primes().map(|p| (p, if rng.gen_bool(0.5) { 1 } else { -1 })).collect();
        HeckeSystem::from_parts(level, weight, prime_bound, unramified, ramified, Provenance::Synthetic { seed })
    }

    pub fn level(&self) -> &Factored {
        &self.level
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn prime_bound(&self) -> u64 {
        self.prime_bound
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// `ε_p` for `p` dividing the level.
    pub fn ramified_sign(&self, p: u64) -> Option<i8> {
        self.ramified.get(&p).copied()
    }

    /// The same system with `ε_p` replaced.
    pub fn with_ramified_sign(&self, p: u64, sign: i8) -> Result<Self> {
        if !self.ramified.contains_key(&p) || sign.abs() != 1 {
            return Err(Error::Precondition(format!("cannot set ε_{p} = {sign}")));
        }
        let mut out = self.clone();
        out.ramified.insert(p, sign);
        Ok(out)
    }

    /// `λ(p)`.
    pub fn lambda_p(&self, p: u64) -> Result<f64> {
        if let Some(&s) = self.ramified.get(&p) {
            return Ok(f64::from(s) / (p as f64).sqrt());
        }
        self.unramified
            .get(&p)
            .copied()
            .ok_or_else(|| Error::Budget(format!("λ({p}) lies beyond the stored prime bound {}", self.prime_bound)))
    }

    /// `λ(p^k)` through the Hecke recurrence (unramified) or `λ(p)^k`
    /// (ramified).
    pub fn lambda_prime_power(&self, p: u64, k: u32) -> Result<f64> {
        let l = self.lambda_p(p)?;
        if self.ramified.contains_key(&p) {
            return Ok(l.powi(k as i32));
        }
        let (mut prev, mut cur) = (1.0, l);
        if k == 0 {
            return Ok(1.0);
        }
        for _ in 1..k {
            let next = l * cur - prev;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }

    /// `λ(n)`, multiplicative in `n`.
    pub fn lambda_n(&self, n: u64) -> Result<f64> {
        self.lambda_factored(&arith::factor(n)?)
    }

    pub fn lambda_factored(&self, n: &Factored) -> Result<f64> {
        n.factors().iter().map(|&(p, k)| self.lambda_prime_power(p, k)).product()
    }

    /// The completely multiplicative `λ*(ℓ) = ∏ λ(p)^{v_p(ℓ)}`.
    pub fn lambda_star(&self, ell: &Factored) -> Result<f64> {
        ell.factors().iter().map(|&(p, k)| Ok(self.lambda_p(p)?.powi(k as i32))).product()
    }
}

pub(crate) fn check_weight(weight: u32) -> Result<()> {
    if !(2..=20).contains(&weight) || weight % 2 == 1 {
        return Err(Error::Precondition(format!("weight {weight} must be even in 2..=20")));
    }
    Ok(())
}

/// A `±1`-valued multiplicative assignment on the divisors of a square-free
/// `L`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignCharacter {
    l: Factored,
    signs: BTreeMap<u64, i8>,
}

impl SignCharacter {
    pub fn new(l: Factored, signs: &[(u64, i8)]) -> Result<Self> {
        if !l.is_square_free() {
            return Err(Error::Precondition(format!("{} is not square-free", l.n())));
        }
        let signs: BTreeMap<u64, i8> = signs.iter().copied().collect();
        let complete = l.primes().all(|p| matches!(signs.get(&p), Some(1) | Some(-1)));
        if !complete || signs.len() != l.omega() {
            return Err(Error::Precondition(format!("sign character on {} needs one ±1 per prime", l.n())));
        }
        Ok(SignCharacter { l, signs })
    }

    /// All `2^{ω(L)}` sign characters, indexed by the bit mask of primes
    /// carrying `−1`.
    pub fn all(l: &Factored) -> Result<Vec<SignCharacter>> {
        let primes: Vec<u64> = l.primes().collect();
        (0..1u32 << primes.len())
            .map(|mask| {
                let signs: Vec<(u64, i8)> = primes.iter().enumerate().map(|(i, &p)| (p, if mask >> i & 1 == 1 { -1 } else { 1 })).collect();
                SignCharacter::new(l.clone(), &signs)
            })
            .collect()
    }

    pub fn l(&self) -> &Factored {
        &self.l
    }

    pub fn sign(&self, p: u64) -> i8 {
        self.signs[&p]
    }

    /// `φ(d) = ∏_{p|d} φ(p)` for `d | L`.
    pub fn value(&self, d: u64) -> i8 {
        assert!(self.l.n() % d == 0, "{d} does not divide {}", self.l.n());
        self.signs.iter().filter(|(&p, _)| d % p == 0).map(|(_, &s)| s).product()
    }
}

fn check_coprime_level(f: &HeckeSystem, l: &Factored) -> Result<()> {
    if !l.is_square_free() {
        return Err(Error::Precondition(format!("L = {} is not square-free", l.n())));
    }
    if arith::gcd(l.n(), f.level().n()) != 1 {
        return Err(Error::Precondition(format!("L = {} shares a prime with the level {}", l.n(), f.level().n())));
    }
    Ok(())
}

/// `λ_{f_φ}(m) = Σ_{u|(m,L)} φ(u)·u^{1/2}·λ_f(m/u)`.
pub fn lambda_f_phi(f: &HeckeSystem, phi: &SignCharacter, m: u64) -> Result<f64> {
    check_coprime_level(f, phi.l())?;
    let g = phi.l().gcd_with(m);
    let mut total = 0.0;
    for u in g.divisors() {
        total += f64::from(phi.value(u)) * (u as f64).sqrt() * f.lambda_n(m / u)?;
    }
    Ok(total)
}

/// `ρ_f(L) = ∏_{p|L} (1 − p·λ(p)²/(p+1)²)`.
pub fn rho_f(f: &HeckeSystem, l: &Factored) -> Result<f64> {
    check_coprime_level(f, l)?;
    let mut rho = 1.0;
    for p in l.primes() {
        let lp = f.lambda_p(p)?;
        let pf = p as f64;
        rho *= 1.0 - pf * lp * lp / ((pf + 1.0) * (pf + 1.0));
    }
    if rho.abs() < 1e-12 {
        return Err(Error::Degenerate(format!("ρ_f({}) vanishes", l.n())));
    }
    Ok(rho)
}

/// The series `Σ_{ℓ|L^∞, ℓ≤Y} ℓ/ν(ℓ)² · (Σ_{d|ℓ} c_ℓ(d)λ_f(d))²` for
/// `1/ρ_f(L)`.
pub fn rho_inv_truncated(f: &HeckeSystem, l: &Factored, y: u64) -> Result<f64> {
    check_coprime_level(f, l)?;
    let mut total = crate::numeric::KahanSum::new();
    for ell in arith::smooth_divisors_up_to(l, y)? {
        let mut inner = 0.0;
        for d in ell.factored_divisors() {
            let c = chebyshev::c_ell_d(&ell, &d)?;
            if c != 0 {
                inner += c as f64 * f.lambda_factored(&d)?;
            }
        }
        total.add(ell.n() as f64 / ell.nu_f64().powi(2) * inner * inner);
    }
    Ok(total.value())
}

/// Rankin-type bound on the part of [`rho_inv_truncated`]'s series with
/// `ℓ > Y`: for any `σ ≥ 0` with `x_p(σ) = p^{1+σ}λ(p)²/(p+1)² < 1`,
/// the tail is at most `Y^{−σ}·∏_p 1/(1 − x_p(σ))`. The best `σ` on a grid is
/// returned.
pub fn rho_inv_tail_bound(f: &HeckeSystem, l: &Factored, y: u64) -> Result<f64> {
    check_coprime_level(f, l)?;
    let xs: Vec<(f64, f64)> = l
        .primes()
        .map(|p| {
            let lp = f.lambda_p(p)?;
            let pf = p as f64;
            Ok((pf, lp * lp / ((pf + 1.0) * (pf + 1.0))))
        })
        .collect::<Result<_>>()?;
    let yf = y as f64;
    let mut best = f64::INFINITY;
    for i in 0..=400 {
        let sigma = f64::from(i) * 0.01;
        let mut prod = 1.0;
        let mut ok = true;
        for &(p, w) in &xs {
            let x = p.powf(1.0 + sigma) * w;
            if x >= 1.0 {
                ok = false;
                break;
            }
            prod /= 1.0 - x;
        }
        if ok {
            best = best.min(yf.powf(-sigma) * prod);
        }
    }
    Ok(best)
}

/// Both evaluations of `T(m,n) = Σ_φ λ_{f_φ}(m)λ_{f_φ}(n)/⟨f_φ,f_φ⟩`, taking
/// `⟨f,f⟩ = 1`.
#[derive(Clone, Debug, Serialize)]
pub struct TmnReport {
    pub l: u64,
    pub m: u64,
    pub n: u64,
    /// Sum over the `2^{ω(L)}` sign characters with the explicit norms.
    pub direct: f64,
    /// The closed form with `1/ρ_f(L)` and the `t = uv/(u,v)²` weights.
    pub closed: f64,
    pub difference: f64,
}

/// Computes `T(m,n)` both ways; a vanishing norm factor is reported as
/// [`Error::Degenerate`].
pub fn t_mn_identity_check(f: &HeckeSystem, l: &Factored, m: u64, n: u64) -> Result<TmnReport> {
    check_coprime_level(f, l)?;
    let mut direct = 0.0;
    let tau = l.tau() as f64;
    for phi in SignCharacter::all(l)? {
        let mut norm = tau;
        for p in l.primes() {
            let pf = p as f64;
            let factor = 1.0 + f64::from(phi.sign(p)) * f.lambda_p(p)? * pf.sqrt() / (pf + 1.0);
            if factor.abs() < 1e-12 {
                return Err(Error::Degenerate(format!("norm factor at {p} vanishes")));
            }
            norm *= factor;
        }
        direct += lambda_f_phi(f, &phi, m)? * lambda_f_phi(f, &phi, n)? / norm;
    }
    let rho = rho_f(f, l)?;
    let mut closed = 0.0;
    for u in l.gcd_with(m).divisors() {
        for v in l.gcd_with(n).divisors() {
            let g = arith::gcd(u, v);
            let t = arith::factor(u * v / (g * g))?;
            let uf = (u as f64).sqrt() * f.lambda_n(m / u)?;
            let vf = (v as f64).sqrt() * f.lambda_n(n / v)?;
            let tf = t.mobius() as f64 * f.lambda_factored(&t)? * (t.n() as f64).sqrt() / t.nu_f64();
            closed += uf * vf * tf;
        }
    }
    closed /= rho;
    Ok(TmnReport { l: l.n(), m, n, direct, closed, difference: (direct - closed).abs() })
}

/// `Σ_φ φ(u)φ(v)φ(t)` over all sign characters on `L`, next to the predicted
/// `τ(L)·[uvt is a square]`.
pub fn sign_orthogonality(l: &Factored, u: u64, v: u64, t: u64) -> Result<(i64, i64)> {
    let sum = SignCharacter::all(l)?.iter().map(|phi| i64::from(phi.value(u)) * i64::from(phi.value(v)) * i64::from(phi.value(t))).sum();
    let square = arith::is_square(u * v * t);
    Ok((sum, if square { l.tau() as i64 } else { 0 }))
}

/// Dirichlet coefficients of `f_φ` up to `terms`, computed twice: from
/// [`lambda_f_phi`], and as the convolution of `λ_f` with the expanded Euler
/// factor `∏_{p|L}(1 + φ(p)p^{1/2−s})`.
pub fn f_phi_coefficients(f: &HeckeSystem, phi: &SignCharacter, terms: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let direct = (1..=terms).map(|m| lambda_f_phi(f, phi, m)).collect::<Result<Vec<_>>>()?;
    let base = (1..=terms).map(|m| f.lambda_n(m)).collect::<Result<Vec<_>>>()?;
    // the Euler factor is supported on the divisors of L
    let mut euler = vec![0.0; terms as usize + 1];
    for u in phi.l().divisors() {
        if u <= terms {
            euler[u as usize] = f64::from(phi.value(u)) * (u as f64).sqrt();
        }
    }
    let mut product = vec![0.0; terms as usize];
    for (u, &e) in euler.iter().enumerate().skip(1) {
        if e == 0.0 {
            continue;
        }
        let mut k = u;
        while k <= terms as usize {
            product[k - 1] += e * base[k / u - 1];
            k += u;
        }
    }
    Ok((direct, product))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(level: u64, seed: u64) -> HeckeSystem {
        HeckeSystem::synthetic(arith::factor(level).unwrap(), 2, 200, seed).unwrap()
    }

    #[test]
    fn lambda_examples() {
        let f = sample(5, 3);
        assert_eq!(f.lambda_n(1).unwrap(), 1.0);
        let l2 = f.lambda_p(2).unwrap();
        assert!((f.lambda_n(4).unwrap() - (l2 * l2 - 1.0)).abs() < 1e-14);
        assert!((f.lambda_n(25).unwrap() - 0.2).abs() < 1e-14);
        let l3 = f.lambda_p(3).unwrap();
        assert!((f.lambda_n(6).unwrap() - l2 * l3).abs() < 1e-14);
        assert!(matches!(f.lambda_n(211), Err(Error::Budget(_))));
    }

    #[test]
    fn lambda_f_phi_examples() {
        let f = sample(1, 9);
        let l = arith::factor(3).unwrap();
        let minus = SignCharacter::new(l.clone(), &[(3, -1)]).unwrap();
        let got = lambda_f_phi(&f, &minus, 3).unwrap();
        assert!((got - (f.lambda_p(3).unwrap() - 3f64.sqrt())).abs() < 1e-14);
        assert!((lambda_f_phi(&f, &minus, 10).unwrap() - f.lambda_n(10).unwrap()).abs() < 1e-14);
        let clash = SignCharacter::new(arith::factor(5).unwrap(), &[(5, 1)]).unwrap();
        assert!(lambda_f_phi(&sample(5, 1), &clash, 5).is_err());
    }

    #[test]
    fn rho_examples() {
        let f = sample(1, 4);
        assert_eq!(rho_f(&f, &Factored::one()).unwrap(), 1.0);
        let mut unramified = BTreeMap::new();
        for p in [2u64, 3, 5, 7] {
            unramified.insert(p, 0.0);
        }
        let flat = HeckeSystem::from_parts(Factored::one(), 2, 7, unramified, BTreeMap::new(), Provenance::Synthetic { seed: 0 }).unwrap();
        assert_eq!(rho_f(&flat, &arith::factor(6).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn rho_series_converges_within_bound() {
        let l = arith::factor(6).unwrap();
        for seed in 0..5 {
            let f = sample(35, seed);
            let exact = 1.0 / rho_f(&f, &l).unwrap();
            let y = 1_000_000;
            let partial = rho_inv_truncated(&f, &l, y).unwrap();
            let bound = rho_inv_tail_bound(&f, &l, y).unwrap();
            assert!(partial <= exact + 1e-12 && exact - partial <= bound, "seed {seed}: {partial} {exact} {bound}");
        }
    }

    #[test]
    fn t_mn_small_cases() {
        let f = sample(7, 12);
        let r = t_mn_identity_check(&f, &Factored::one(), 4, 6).unwrap();
        assert!((r.direct - f.lambda_n(4).unwrap() * f.lambda_n(6).unwrap()).abs() < 1e-14);
        assert!(r.difference < 1e-14);
        let p = arith::factor(3).unwrap();
        let r = t_mn_identity_check(&f, &p, 1, 1).unwrap();
        assert!((r.closed - 1.0 / rho_f(&f, &p).unwrap()).abs() < 1e-12);
        assert!(r.difference < 1e-12);
    }

    #[test]
    fn orthogonality_on_30() {
        let l = arith::factor(30).unwrap();
        for u in l.divisors() {
            for v in l.divisors() {
                for t in l.divisors() {
                    let (sum, expected) = sign_orthogonality(&l, u, v, t).unwrap();
                    assert_eq!(sum, expected);
                }
            }
        }
    }
}
