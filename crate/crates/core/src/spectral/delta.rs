//! The Petersson sums `Δ_N(m,n)`: the Kloosterman–Bessel side with a
//! certified tail, the spectral side over a supplied basis, and eigenvalue
//! systems read off one-dimensional spaces.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::bessel::bessel_j;
use super::dimension::cusp_form_dimension;
use super::hecke::{check_weight, HeckeSystem, Provenance};
use crate::arith::{self, Factored};
use crate::expsums::KloostermanSweep;
use crate::numeric::{factorial_gamma, KahanSum};
use crate::{Error, Result};

/// Largest modulus the Kloosterman sweep is designed for.
pub const MAX_C: u64 = 4096 * 4096 - 1;

/// Which evaluation produced a [`DeltaEstimate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    Geometric,
    Spectral,
    Star,
    Tilde,
}

/// A truncated Petersson-type sum with its error budget.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    pub value: f64,
    pub kappa: u32,
    pub level: u64,
    /// Second level parameter of the hybrid sums, 1 elsewhere.
    pub q: u64,
    pub m: u64,
    pub n: u64,
    pub c_max: u64,
    /// Cap on `ℓ` for the sieved sums.
    pub y: Option<u64>,
    /// Certified bound on the dropped Kloosterman–Bessel tail (weighted and
    /// accumulated over every inner evaluation for sieved sums).
    pub tail_bound: f64,
    /// Size `N·Y^{−2γ₀}` of the dropped `ℓ > Y` part of a sieved sum. Its
    /// implied constant is not explicit, so this is a scale, not a bound.
    pub ell_tail: f64,
    pub mode: DeltaMode,
}

impl DeltaEstimate {
    pub fn budget(&self) -> f64 {
        self.tail_bound + self.ell_tail
    }
}

/// `c_κ = Γ(κ−1)/(4π)^{κ−1}`.
pub fn c_kappa(kappa: u32) -> f64 {
    factorial_gamma(kappa - 1) / (4.0 * PI).powi(kappa as i32 - 1)
}

/// `max(10⁴, 200·N·√(mn))`, capped at [`MAX_C`].
pub fn default_c_max(level: u64, m: u64, n: u64) -> u64 {
    let scaled = 200.0 * level as f64 * ((m as f64) * (n as f64)).sqrt();
    (scaled.ceil() as u64).clamp(10_000, MAX_C)
}

/// Bound on `2π·Σ_{c > c_max, N|c} |S(m,n;c)|/c·|J_{κ−1}(4π√(mn)/c)|`.
///
/// Uses `|S(m,n;c)| ≤ τ(c)(m,n)^{1/2}c^{1/2}`, `τ(Nk) ≤ τ(N)τ(k)`,
/// `|J_ν(x)| ≤ (x/2)^ν/ν!`, and partial summation against
/// `Σ_{k≤t} τ(k) ≤ t(log t + 1)`, which gives
/// `Σ_{k>K} τ(k)k^{−a} ≤ a·K^{1−a}·((log K + 1)/(a−1) + 1/(a−1)²)`.
pub fn petersson_tail_bound(level: &Factored, kappa: u32, m: u64, n: u64, c_max: u64) -> f64 {
    let nu = kappa - 1;
    let nf = level.n() as f64;
    let k = (c_max / level.n()).max(1) as f64;
    let a = f64::from(nu) + 0.5;
    let divisor_tail = a * k.powf(1.0 - a) * ((k.ln() + 1.0) / (a - 1.0) + 1.0 / ((a - 1.0) * (a - 1.0)));
    let g = arith::gcd(m, n) as f64;
    let x = 2.0 * PI * ((m as f64) * (n as f64)).sqrt();
    2.0 * PI * g.sqrt() * level.tau() as f64 * nf.powf(-a) * x.powi(nu as i32) / factorial_gamma(nu + 1) * divisor_tail
}

fn check_inputs(level: &Factored, kappa: u32, pairs: &[(u64, u64)], c_max: u64) -> Result<()> {
    check_weight(kappa)?;
    if c_max < level.n() || c_max > MAX_C {
        return Err(Error::Precondition(format!("c_max = {c_max} must lie in [{}, {MAX_C}]", level.n())));
    }
    if pairs.iter().any(|&(m, n)| m == 0 || n == 0) {
        return Err(Error::Precondition("m and n must be positive".into()));
    }
    Ok(())
}

/// `Δ_N(m,n) ≈ δ_{m=n} + 2π·i^{−κ}·Σ_{c≡0 (N), c≤c_max} S(m,n;c)/c·J_{κ−1}(4π√(mn)/c)`.
pub fn delta_geometric(level: &Factored, kappa: u32, m: u64, n: u64, c_max: u64) -> Result<DeltaEstimate> {
    Ok(delta_geometric_grid(level, kappa, &[(m, n)], c_max)?.remove(0))
}

/// [`delta_geometric`] for many pairs in one pass over the moduli.
pub fn delta_geometric_grid(level: &Factored, kappa: u32, pairs: &[(u64, u64)], c_max: u64) -> Result<Vec<DeltaEstimate>> {
    check_inputs(level, kappa, pairs, c_max)?;
    let nu = kappa - 1;
    let xs: Vec<f64> = pairs.iter().map(|&(m, n)| 4.0 * PI * ((m as f64) * (n as f64)).sqrt()).collect();
    let mut sums = vec![KahanSum::new(); pairs.len()];
    let mut terms: Vec<f64> = Vec::with_capacity(pairs.len());
    KloostermanSweep::new(level.n(), c_max).run(pairs, |step| {
        let inv_c = 1.0 / step.c as f64;
        terms.clear();
        terms.par_extend(
            step.values.par_iter().zip(xs.par_iter()).map(|(&s, &x)| if s == 0.0 { 0.0 } else { s * inv_c * bessel_j(nu, x * inv_c) }),
        );
        for (acc, &t) in sums.iter_mut().zip(&terms) {
            acc.add(t);
        }
    });
    let sign = if (kappa / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(pairs
        .iter()
        .zip(&sums)
        .map(|(&(m, n), s)| DeltaEstimate {
            value: if m == n { 1.0 } else { 0.0 } + 2.0 * PI * sign * s.value(),
            kappa,
            level: level.n(),
            q: 1,
            m,
            n,
            c_max,
            y: None,
            tail_bound: petersson_tail_bound(level, kappa, m, n, c_max),
            ell_tail: 0.0,
            mode: DeltaMode::Geometric,
        })
        .collect())
}

/// `Σ_f w_f·λ_f(m)λ_f(n)` over a basis with externally supplied weights.
pub fn delta_spectral(basis: &[(HeckeSystem, f64)], m: u64, n: u64) -> Result<f64> {
    let mut total = KahanSum::new();
    for (f, w) in basis {
        if *w <= 0.0 {
            return Err(Error::Precondition(format!("basis weight {w} is not positive")));
        }
        total.add(w * f.lambda_n(m)? * f.lambda_n(n)?);
    }
    Ok(total.value())
}

/// `|Δ_N(m,n)| / ((m,N)^{1/2}(n,N)^{1/2}τ₃(m)τ₃(n))`, the constant in the
/// crude bound realised by a value.
pub fn crude_bound_ratio(level: &Factored, m: u64, n: u64, value: f64) -> Result<f64> {
    let scale = (arith::gcd(m, level.n()) as f64).sqrt()
        * (arith::gcd(n, level.n()) as f64).sqrt()
        * arith::factor(m)?.tau3() as f64
        * arith::factor(n)?.tau3() as f64;
    Ok(value.abs() / scale)
}

/// A Hecke system read off a one-dimensional space through
/// `λ(p) = Δ_N(p,1)/Δ_N(1,1)`, together with its Petersson weight
/// `c_κ/⟨f,f⟩_N = Δ_N(1,1)`.
#[derive(Clone, Debug, Serialize)]
pub struct DerivedSpace {
    pub system: HeckeSystem,
    pub weight: f64,
    pub unit: DeltaEstimate,
}

/// Derives the eigenvalues of the unique normalised form of `S_κ(Γ₀(N))`
/// for every prime up to `prime_bound`. The derived `λ(p)` at ramified
/// primes must lie within `1e−3` of `±p^{−1/2}`; its sign becomes `ε_p`.
pub fn derive_one_dimensional(level: &Factored, kappa: u32, prime_bound: u64, c_max: u64) -> Result<DerivedSpace> {
    check_weight(kappa)?;
    if !level.is_square_free() {
        return Err(Error::Precondition(format!("level {} is not square-free", level.n())));
    }
    let dim = cusp_form_dimension(level, kappa);
    if dim != 1 {
        return Err(Error::Precondition(format!("S_{kappa}({}) has dimension {dim}, not 1", level.n())));
    }
    let primes: Vec<u64> = arith::PrimeSieve::new(prime_bound.max(2) as usize).primes().iter().map(|&p| u64::from(p)).collect();
    let mut pairs = vec![(1u64, 1u64)];
    pairs.extend(primes.iter().map(|&p| (p, 1)));
    let mut values = delta_geometric_grid(level, kappa, &pairs, c_max)?;
    let unit = values.remove(0);
    let mut unramified = BTreeMap::new();
    let mut ramified = BTreeMap::new();
    for (&p, est) in primes.iter().zip(&values) {
        let ratio = est.value / unit.value;
        if level.n() % p == 0 {
            let expected = (p as f64).sqrt().recip();
            if (ratio.abs() - expected).abs() > 1e-3 {
                return Err(Error::Budget(format!("derived λ({p}) = {ratio} is not within 1e-3 of ±{expected}; raise c_max")));
            }
            ramified.insert(p, if ratio > 0.0 { 1 } else { -1 });
        } else {
            unramified.insert(p, ratio);
        }
    }
    let system = HeckeSystem::from_parts(level.clone(), kappa, prime_bound, unramified, ramified, Provenance::DerivedGeometric { c_max })?;
    Ok(DerivedSpace { system, weight: unit.value, unit })
}
