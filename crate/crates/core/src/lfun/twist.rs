//! Root numbers and central values of quadratic twists `f⊗χ_q`, where `f`
//! has level `rq′` with `q′ | rad(q)` and `(r,q) = 1`, so that the twist has
//! conductor `rq²`.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::function::gamma::{gamma, gamma_ur};

use super::cutoff::{VFunction, VKind};
use crate::arith::{self, Factored};
use crate::characters::QuadraticCharacter;
use crate::numeric::KahanSum;
use crate::spectral::HeckeSystem;
use crate::{Error, Result};

/// Safety constant in every truncation range.
pub const RANGE_SAFETY: f64 = 20.0;

/// `q′ = level/r`, after checking `(r,q) = 1`, `r | level` and `q′ | rad(q)`.
pub fn twist_split(f: &HeckeSystem, r: &Factored, chi: &QuadraticCharacter) -> Result<Factored> {
    let q = chi.q();
    if arith::gcd(r.n(), q) != 1 {
        return Err(Error::Precondition(format!("r = {} and q = {q} must be coprime", r.n())));
    }
    let q_prime = f.level().div(r)?;
    if chi.conductor().radical().n() % q_prime.n() != 0 {
        return Err(Error::Precondition(format!("q′ = {} does not divide rad({q})", q_prime.n())));
    }
    Ok(q_prime)
}

/// `ε_{f⊗χ_q} = χ_q(−r)·μ(q′)·q′^{1/2}λ_f(q′)·ε_f` with
/// `ε_f = i^κ·∏_{p|rq′}(−p^{1/2}λ_f(p))`; each `p^{1/2}λ_f(p)` is the stored
/// sign `ε_p`.
pub fn root_number(f: &HeckeSystem, r: &Factored, chi: &QuadraticCharacter) -> Result<i8> {
    let q_prime = twist_split(f, r, chi)?;
    let ramified = |p: u64| f.ramified_sign(p).ok_or_else(|| Error::Precondition(format!("{p} is not ramified for f")));
    let mut eps_f: i8 = if (f.weight() / 2) % 2 == 0 { 1 } else { -1 };
    for p in f.level().primes() {
        eps_f *= -ramified(p)?;
    }
    let mut eps = chi.value(-(r.n() as i64)) * eps_f * q_prime.mobius() as i8;
    for p in q_prime.primes() {
        eps *= ramified(p)?;
    }
    Ok(eps)
}

fn require_primes(f: &HeckeSystem, n: u64) -> Result<()> {
    if f.prime_bound() < n {
        return Err(Error::Budget(format!("need λ(p) for p ≤ {n}, system stores p ≤ {}", f.prime_bound())));
    }
    Ok(())
}

/// A central value from the smoothed approximate functional equation.
#[derive(Clone, Debug, Serialize)]
pub struct LValue {
    pub level: u64,
    pub q: u64,
    pub epsilon: i8,
    pub n_max: u64,
    /// `(1+ε)·Σ_{n≤n_max} λ(n)χ(n)n^{−1/2}V₁(n/(q√r))`.
    pub value: f64,
    /// `|value(2·n_max) − value(n_max)|` when the system covers `2·n_max`.
    pub truncation_change: Option<f64>,
}

fn twisted_series(f: &HeckeSystem, chi: &QuadraticCharacter, scale: f64, n_max: u64, v1: &VFunction) -> Result<f64> {
    let mut s = KahanSum::new();
    for n in 1..=n_max {
        let c = chi.value(n as i64);
        if c == 0 {
            continue;
        }
        let v = v1.eval(n as f64 / scale)?;
        s.add(f64::from(c) * f.lambda_n(n)? * v / (n as f64).sqrt());
    }
    Ok(s.value())
}

/// `L(1/2, f⊗χ_q) = (1+ε)·Σ_n λ_f(n)χ_q(n)n^{−1/2}V₁(n/(q√r))` with
/// `n ≤ ⌈20·q√r⌉`.
pub fn l_half_twisted(f: &HeckeSystem, r: &Factored, chi: &QuadraticCharacter, v1: &VFunction) -> Result<LValue> {
    if v1.kind() != VKind::V1 || v1.kappa() != f.weight() {
        return Err(Error::Precondition("l_half_twisted needs V₁ of the form's weight".into()));
    }
    let epsilon = root_number(f, r, chi)?;
    let scale = chi.q() as f64 * (r.n() as f64).sqrt();
    let n_max = (RANGE_SAFETY * scale).ceil() as u64;
    require_primes(f, n_max)?;
    let base = LValue { level: f.level().n(), q: chi.q(), epsilon, n_max, value: 0.0, truncation_change: Some(0.0) };
    if epsilon == -1 {
        return Ok(base);
    }
    let value = 2.0 * twisted_series(f, chi, scale, n_max, v1)?;
    let truncation_change =
        if f.prime_bound() >= 2 * n_max { Some((2.0 * twisted_series(f, chi, scale, 2 * n_max, v1)? - value).abs()) } else { None };
    Ok(LValue { value, truncation_change, ..base })
}

/// `L(1/2, f⊗χ_q)² = 2·Σ_{(d,qr)=1} Σ_m λ(m)τ(m)χ(m)/(d√m)·V₂(d²m/(rq²))`
/// over `d²m ≤ 20·(rq²)^{1.05}`, valid when `ε = +1` (the sum vanishes
/// otherwise).
pub fn l_half_squared(f: &HeckeSystem, r: &Factored, chi: &QuadraticCharacter, v2: &VFunction) -> Result<f64> {
    if v2.kind() != VKind::V2 || v2.kappa() != f.weight() {
        return Err(Error::Precondition("l_half_squared needs V₂ of the form's weight".into()));
    }
    twist_split(f, r, chi)?;
    let conductor = (r.n() * chi.q() * chi.q()) as f64;
    let limit = (RANGE_SAFETY * conductor.powf(1.05)).ceil() as u64;
    require_primes(f, limit)?;
    let qr = r.n() * chi.q();
    let mut s = KahanSum::new();
    for d in 1..=arith::isqrt(limit) {
        if arith::gcd(d, qr) != 1 {
            continue;
        }
        for m in 1..=limit / (d * d) {
            let c = chi.value(m as i64);
            if c == 0 {
                continue;
            }
            let mf = arith::factor(m)?;
            let v = v2.eval((d * d * m) as f64 / conductor)?;
            s.add(f64::from(c) * f.lambda_factored(&mf)? * mf.tau() as f64 * v / (d as f64 * (m as f64).sqrt()));
        }
    }
    Ok(2.0 * s.value())
}

/// Outcome of the numerical functional-equation test.
#[derive(Clone, Debug, Serialize)]
pub struct SignTest {
    pub level: u64,
    pub q: u64,
    pub root_number: i8,
    /// The sign for which the completed value is independent of the split
    /// point.
    pub numeric_sign: i8,
    /// Relative change of `Λ(s)` between split points under each sign, at
    /// `s = 0.6`.
    pub mismatch_plus: f64,
    pub mismatch_minus: f64,
    /// `Λ(0.6)` and `Λ(0.4)` under the numeric sign.
    pub lambda_above: f64,
    pub lambda_below: f64,
}

impl SignTest {
    /// The numeric sign agrees with the root number, wins by a factor of at
    /// least 100, and `Λ(1/2+0.1) = ε·Λ(1/2−0.1)` to `10⁻³` (derived
    /// eigenvalues carry errors near `10⁻⁵`).
    pub fn consistent(&self) -> bool {
        let ratio = self.lambda_above / self.lambda_below;
        let (won, lost) =
            if self.numeric_sign == 1 { (self.mismatch_plus, self.mismatch_minus) } else { (self.mismatch_minus, self.mismatch_plus) };
        self.numeric_sign == self.root_number && 100.0 * won < lost && (ratio - f64::from(self.root_number)).abs() < 1e-3
    }
}

/// `A^ν·Λ(s)` with `Λ(s) = A^sΓ(s+ν)L(s)`, `A = √(rq²)/2π`, `ν = (κ−1)/2`,
/// split at `x₀`, in terms of the unnormalised coefficients `a_n = λ(n)χ(n)n^ν`:
/// `Σ_n a_n[(A/n)^{s+ν}Γ(s+ν, n·x₀/A) + ε(A/n)^{1−s+ν}Γ(1−s+ν, n/(x₀A))]`.
fn completed(coeffs: &[f64], a: f64, nu: f64, s: f64, x0: f64, eps: f64) -> f64 {
    let upper = |p: f64, x: f64| gamma_ur(p, x) * gamma(p);
    let mut total = KahanSum::new();
    for (i, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let n = (i + 1) as f64;
        let first = (a / n).powf(s + nu) * upper(s + nu, n * x0 / a);
        let second = (a / n).powf(1.0 - s + nu) * upper(1.0 - s + nu, n / (x0 * a));
        total.add(c * (first + eps * second));
    }
    total.value()
}

/// Finds the sign making the completed twisted L-function independent of
/// the split point, and compares it with [`root_number`].
pub fn functional_equation_sign_test(f: &HeckeSystem, r: &Factored, chi: &QuadraticCharacter) -> Result<SignTest> {
    let root = root_number(f, r, chi)?;
    let conductor = (r.n() * chi.q() * chi.q()) as f64;
    let a = conductor.sqrt() / (2.0 * PI);
    let nu = (f64::from(f.weight()) - 1.0) / 2.0;
    let (x_near, x_far) = (1.0, 1.3);
    let terms = (50.0 * a * x_far).ceil() as u64;
    require_primes(f, terms)?;
    let coeffs =
        (1..=terms).map(|n| Ok(f64::from(chi.value(n as i64)) * f.lambda_n(n)? * (n as f64).powf(nu))).collect::<Result<Vec<f64>>>()?;
    let mismatch = |eps: f64| {
        let near = completed(&coeffs, a, nu, 0.6, x_near, eps);
        let far = completed(&coeffs, a, nu, 0.6, x_far, eps);
        (near - far).abs() / near.abs().max(far.abs()).max(1e-300)
    };
    let (plus, minus) = (mismatch(1.0), mismatch(-1.0));
    let numeric_sign: i8 = if plus <= minus { 1 } else { -1 };
    let eps = f64::from(numeric_sign);
    Ok(SignTest {
        level: f.level().n(),
        q: chi.q(),
        root_number: root,
        numeric_sign,
        mismatch_plus: plus,
        mismatch_minus: minus,
        lambda_above: completed(&coeffs, a, nu, 0.6, x_far, eps),
        lambda_below: completed(&coeffs, a, nu, 0.4, x_far, eps),
    })
}
