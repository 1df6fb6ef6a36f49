//! The cubic moment `𝓜(r,q) = Σ_{q′|q̃} Σ_{f∈H*(rq′)} ω_f·L(1/2, f⊗χ_q)³`,
//! assembled from derived eigenforms (spectral) or from hybrid Petersson sums
//! `Δ̃_{r,q̃}` (geometric).

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::cutoff::{VFunction, VKind};
use super::twist::{l_half_twisted, root_number, LValue, RANGE_SAFETY};
use crate::arith::{self, Factored};
use crate::characters::QuadraticCharacter;
use crate::spectral::{
    cusp_form_dimension, delta_geometric_grid, derive_one_dimensional, ell_tail_scale, newform_dimension, rho_f, tilde_expansion,
    HeckeSystem, MAX_C,
};
use crate::{Error, Result};

/// Exponent standing in for `1 + ε` in the truncation ranges.
pub const RANGE_EXPONENT: f64 = 1.05;

/// Truncation settings of a moment computation.
#[derive(Clone, Debug, Serialize)]
pub struct MomentConfig {
    /// Largest modulus in every Kloosterman–Bessel sum.
    pub c_max: u64,
    /// Cap on `ℓ` in the hybrid sieve.
    pub y: u64,
    /// Primes up to this bound are derived for each eigenform.
    pub prime_bound: u64,
    /// Geometric terms whose weight times the crude bound falls below this are
    /// dropped; the dropped mass is reported.
    pub prune_tolerance: f64,
}

impl Default for MomentConfig {
    fn default() -> Self {
        MomentConfig { c_max: 100_000, y: 10_000, prime_bound: 600, prune_tolerance: 1e-12 }
    }
}

/// Which side(s) of the moment to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    Spectral,
    Geometric,
    Both,
}

/// One level `rq′` of the spectral side.
#[derive(Clone, Debug, Serialize)]
pub struct LevelInfo {
    pub level: u64,
    pub q_prime: u64,
    pub newform_dimension: u64,
}

/// One eigenform's share of the spectral side.
#[derive(Clone, Debug, Serialize)]
pub struct FormContribution {
    pub level: u64,
    pub q_prime: u64,
    pub epsilon: i8,
    pub l_value: LValue,
    pub omega: f64,
    pub contribution: f64,
}

/// Ranges and error terms of the geometric side.
#[derive(Clone, Debug, Serialize)]
pub struct GeometricBudget {
    pub m_range: u64,
    pub n_range: u64,
    pub kept_pairs: usize,
    pub pruned_pairs: usize,
    /// Dropped weight times the crude bound with constant 2.
    pub pruned_mass: f64,
    /// Distinct `Δ` evaluations per level.
    pub evaluations: BTreeMap<u64, usize>,
    /// Accumulated certified Kloosterman–Bessel tail bound.
    pub kloosterman_tail: f64,
    /// `r·Y^{−2γ₀}` scale of the dropped `ℓ > Y` terms.
    pub ell_tail: f64,
}

/// Both sides of the cubic moment with their ingredients.
#[derive(Clone, Debug, Serialize)]
pub struct MomentReport {
    pub r: u64,
    pub q: u64,
    pub kappa: u32,
    pub config: MomentConfig,
    pub levels: Vec<LevelInfo>,
    pub forms: Vec<FormContribution>,
    pub spectral_total: Option<f64>,
    pub geometric_total: Option<f64>,
    /// Diagonal `m = n` part of the geometric side.
    pub geometric_diagonal: Option<f64>,
    pub geometric_budget: Option<GeometricBudget>,
    /// `|spectral − geometric| / |spectral|` when both are present.
    pub relative_difference: Option<f64>,
    /// `𝓜(r,q)/(qr)^{1.05}`.
    pub normalised_size: Option<f64>,
}

/// `ω_f = c_κ/(ν(q̃/q′)·ρ_f(q̃/q′)·⟨f,f⟩_{rq′})`, given `c_κ/⟨f,f⟩_{rq′}`.
pub fn omega_f(f: &HeckeSystem, q_tilde: &Factored, q_prime: &Factored, unit_weight: f64) -> Result<f64> {
    let cofactor = q_tilde.div(q_prime)?;
    Ok(unit_weight / (cofactor.nu_f64() * rho_f(f, &cofactor)?))
}

fn check_setting(r: &Factored, chi: &QuadraticCharacter, kappa: u32) -> Result<()> {
    if !r.is_square_free() {
        return Err(Error::Precondition(format!("r = {} is not square-free", r.n())));
    }
    if arith::gcd(r.n(), chi.q()) != 1 {
        return Err(Error::Precondition(format!("r = {} and q = {} must be coprime", r.n(), chi.q())));
    }
    if !(2..=20).contains(&kappa) || kappa % 2 == 1 {
        return Err(Error::Precondition(format!("weight {kappa} must be even in 2..=20")));
    }
    Ok(())
}

/// Spectral side: every contributing newform space must be at most
/// one-dimensional and spanned by a form whose full space is
/// one-dimensional, so that its eigenvalues and weight can be derived.
fn spectral_side(
    r: &Factored,
    chi: &QuadraticCharacter,
    kappa: u32,
    config: &MomentConfig,
) -> Result<(Vec<LevelInfo>, Vec<FormContribution>)> {
    let q_tilde = chi.conductor().radical();
    let v1 = VFunction::new(VKind::V1, kappa)?;
    let mut levels = Vec::new();
    let mut forms = Vec::new();
    for q_prime in q_tilde.factored_divisors() {
        let level = r.mul(&q_prime)?;
        let dim = newform_dimension(&level, kappa);
        levels.push(LevelInfo { level: level.n(), q_prime: q_prime.n(), newform_dimension: dim });
        if dim == 0 {
            continue;
        }
        if dim > 1 || cusp_form_dimension(&level, kappa) != 1 {
            return Err(Error::Budget(format!(
                "S_{kappa}({}) is not one-dimensional; the spectral side needs an explicit basis",
                level.n()
            )));
        }
        let space = derive_one_dimensional(&level, kappa, config.prime_bound, config.c_max.max(level.n()))?;
        let l_value = l_half_twisted(&space.system, r, chi, &v1)?;
        let omega = omega_f(&space.system, &q_tilde, &q_prime, space.weight)?;
        forms.push(FormContribution {
            level: level.n(),
            q_prime: q_prime.n(),
            epsilon: root_number(&space.system, r, chi)?,
            contribution: omega * l_value.value.powi(3),
            l_value,
            omega,
        });
    }
    Ok((levels, forms))
}

struct GeometricSide {
    total: f64,
    diagonal: f64,
    budget: GeometricBudget,
}

/// Geometric side:
/// `4·Σ_{(d,qr)=1} d^{−1} Σ_{m,n} τ(m)χ(mn)(mn)^{−1/2}V₁(n/(q√r))V₂(d²m/(q²r))·Δ̃_{r,q̃}(m,n)`.
fn geometric_side(r: &Factored, chi: &QuadraticCharacter, kappa: u32, config: &MomentConfig) -> Result<GeometricSide> {
    let q_tilde = chi.conductor().radical();
    let q = chi.q();
    let conductor = (r.n() * q * q) as f64;
    let scale = q as f64 * (r.n() as f64).sqrt();
    let m_range = (RANGE_SAFETY * conductor.powf(RANGE_EXPONENT)).ceil() as u64;
    let n_range = (RANGE_SAFETY * scale.powf(RANGE_EXPONENT)).ceil() as u64;

    // V₂ at every integer d²m, then the d-sums A_m = Σ_d V₂(d²m/(q²r))/d
    let v2 = VFunction::new(VKind::V2, kappa)?;
    let v2_table: Vec<f64> = (1..=m_range).into_par_iter().map(|t| v2.eval(t as f64 / conductor)).collect::<Result<_>>()?;
    let qr = r.n() * q;
    let a: Vec<f64> = (1..=m_range)
        .map(|m| {
            let mut s = 0.0;
            let mut d = 1;
            while d * d * m <= m_range {
                if arith::gcd(d, qr) == 1 {
                    s += v2_table[(d * d * m - 1) as usize] / d as f64;
                }
                d += 1;
            }
            s
        })
        .collect();
    let v1 = VFunction::new(VKind::V1, kappa)?;
    let b: Vec<f64> = (1..=n_range).map(|n| v1.eval(n as f64 / scale)).collect::<Result<_>>()?;

    // pair weights, pruned against the crude bound 2·τ₃(m)τ₃(n)·((m,r)(n,r))^{1/2}
    let crude = |m: u64, n: u64| -> Result<f64> {
        Ok(2.0
            * arith::factor(m)?.tau3() as f64
            * arith::factor(n)?.tau3() as f64
            * ((arith::gcd(m, r.n()) * arith::gcd(n, r.n())) as f64).sqrt())
    };
    let mut kept = Vec::new();
    let mut pruned_pairs = 0usize;
    let mut pruned_mass = 0.0;
    for m in 1..=m_range {
        let cm = chi.value(m as i64);
        if cm == 0 {
            continue;
        }
        let tm = arith::factor(m)?.tau() as f64;
        for n in 1..=n_range {
            let cn = chi.value(n as i64);
            if cn == 0 {
                continue;
            }
            let w = 4.0 * a[(m - 1) as usize] * tm * f64::from(cm * cn) / ((m * n) as f64).sqrt() * b[(n - 1) as usize];
            let mass = w.abs() * crude(m, n)?;
            if mass < config.prune_tolerance {
                pruned_pairs += 1;
                pruned_mass += mass;
            } else {
                kept.push((m, n, w));
            }
        }
    }

    // expand each Δ̃_{r,q̃}(m,n) and merge the weights per inner evaluation
    let mut by_level: BTreeMap<u64, BTreeMap<(u64, u64), f64>> = BTreeMap::new();
    for &(m, n, w) in &kept {
        for t in tilde_expansion(r, &q_tilde, m, n, config.y)? {
            *by_level.entry(t.level).or_default().entry((t.args[0], t.args[1])).or_insert(0.0) += w * t.coefficient;
        }
    }
    let mut total = 0.0;
    let mut diagonal = 0.0;
    let mut tail = 0.0;
    let mut evaluations = BTreeMap::new();
    for (level, weighted) in by_level {
        let mut pairs = Vec::new();
        let mut weights = Vec::new();
        for (&(m, n), &w) in &weighted {
            let mass = w.abs() * crude(m, n)?;
            if mass < config.prune_tolerance {
                pruned_mass += mass;
                continue;
            }
            pairs.push((m, n));
            weights.push(w);
        }
        evaluations.insert(level, pairs.len());
        if pairs.is_empty() {
            continue;
        }
        let values = delta_geometric_grid(&arith::factor(level)?, kappa, &pairs, config.c_max.clamp(level, MAX_C))?;
        for ((est, &w), &(m, n)) in values.iter().zip(&weights).zip(&pairs) {
            total += w * est.value;
            tail += w.abs() * est.tail_bound;
            if m == n {
                diagonal += w;
            }
        }
    }
    Ok(GeometricSide {
        total,
        diagonal,
        budget: GeometricBudget {
            m_range,
            n_range,
            kept_pairs: kept.len(),
            pruned_pairs,
            pruned_mass,
            evaluations,
            kloosterman_tail: tail,
            ell_tail: if r.is_one() { 0.0 } else { ell_tail_scale(r.n(), config.y) },
        },
    })
}

/// The cubic moment on the requested side(s).
pub fn cubic_moment(r: &Factored, chi: &QuadraticCharacter, kappa: u32, mode: MomentMode, config: &MomentConfig) -> Result<MomentReport> {
    check_setting(r, chi, kappa)?;
    let mut report = MomentReport {
        r: r.n(),
        q: chi.q(),
        kappa,
        config: config.clone(),
        levels: Vec::new(),
        forms: Vec::new(),
        spectral_total: None,
        geometric_total: None,
        geometric_diagonal: None,
        geometric_budget: None,
        relative_difference: None,
        normalised_size: None,
    };
    if mode != MomentMode::Geometric {
        let (levels, forms) = spectral_side(r, chi, kappa, config)?;
        report.spectral_total = Some(forms.iter().map(|f| f.contribution).sum());
        report.levels = levels;
        report.forms = forms;
    }
    if mode != MomentMode::Spectral {
        let g = geometric_side(r, chi, kappa, config)?;
        report.geometric_total = Some(g.total);
        report.geometric_diagonal = Some(g.diagonal);
        report.geometric_budget = Some(g.budget);
    }
    if let (Some(s), Some(g)) = (report.spectral_total, report.geometric_total) {
        report.relative_difference = Some((s - g).abs() / s.abs().max(f64::MIN_POSITIVE));
    }
    let size = (chi.q() * r.n()) as f64;
    report.normalised_size = report.spectral_total.or(report.geometric_total).map(|v| v / size.powf(RANGE_EXPONENT));
    Ok(report)
}
