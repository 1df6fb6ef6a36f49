//! Multiplicative level relations `F(m,N) = Σ_{LM=N} Σ_{a|L^∞} A(a,m_L)·G(α(a,m_L)·m/m_L, M)`
//! and their Möbius-type inversion, with the oldform relation for Petersson
//! sums as the main instance. The sieved sums `Δ*_N` and `Δ̃_{N,q}` are
//! evaluated by inverting it against geometric `Δ`.

use std::collections::BTreeMap;

use serde::Serialize;

use super::delta::{delta_geometric_grid, DeltaEstimate, DeltaMode, MAX_C};
use crate::arith::{self, Factored};
use crate::chebyshev::{self, ChebTable};
use crate::{Error, Result};

/// One local term of a relation at a prime `p`: its weight, the new
/// `p`-adic valuations of the arguments, and its size (the `p`-part of `ℓ`
/// for the oldform relation), used by a global cap.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub weight: f64,
    pub exponents: Vec<u32>,
    pub size: u64,
}

/// A relation whose coefficient `A` and argument map `α` are multiplicative:
/// the terms at a square-free `L` are the products of local terms at the
/// primes of `L`, and each local term depends only on the `p`-adic
/// valuations of the arguments.
pub trait RelationSpec {
    /// Number of arguments.
    fn arity(&self) -> usize;
    /// Local terms at `p` for arguments with the given `p`-adic valuations.
    fn local_terms(&self, p: u64, valuations: &[u32]) -> Result<Vec<LocalTerm>>;
    /// Optional cap on the product of local sizes. A cap spanning several
    /// primes breaks exact invertibility; per-prime truncation does not.
    fn size_cap(&self) -> Option<u64> {
        None
    }
}

/// `coefficient · X(args, level)` in an expanded relation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub coefficient: f64,
    pub level: u64,
    pub args: Vec<u64>,
}

fn check_level(n: &Factored) -> Result<()> {
    if !n.is_square_free() {
        return Err(Error::Precondition(format!("level {} is not square-free", n.n())));
    }
    Ok(())
}

fn expand<R: RelationSpec + ?Sized>(spec: &R, args: &[u64], n: &Factored, mobius: bool) -> Result<Vec<ExpansionTerm>> {
    check_level(n)?;
    if args.len() != spec.arity() || args.contains(&0) {
        return Err(Error::Precondition(format!("expected {} positive arguments", spec.arity())));
    }
    let cap = spec.size_cap().unwrap_or(u64::MAX);
    let mut out = Vec::new();
    for l in n.factored_divisors() {
        let m_level = n.n() / l.n();
        let sign = if mobius { l.mobius() as f64 } else { 1.0 };
        // partial products over the primes of L: (weight, args, size)
        let mut partial = vec![(sign, args.to_vec(), 1u64)];
        for p in l.primes() {
            let vals: Vec<u32> = args.iter().map(|&a| valuation(a, p)).collect();
            let locals = spec.local_terms(p, &vals)?;
            let mut next = Vec::with_capacity(partial.len() * locals.len());
            for (w, cur, size) in &partial {
                for t in &locals {
                    let Some(new_size) = size.checked_mul(t.size).filter(|&s| s <= cap) else {
                        continue;
                    };
                    let mut new_args = Vec::with_capacity(cur.len());
                    for (&a, &e) in cur.iter().zip(&t.exponents) {
                        let stripped = a / p.pow(valuation(a, p));
                        let pe = p.checked_pow(e).ok_or(Error::Overflow("relation arguments"))?;
                        new_args.push(stripped.checked_mul(pe).ok_or(Error::Overflow("relation arguments"))?);
                    }
                    next.push((w * t.weight, new_args, new_size));
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().filter(|t| t.0 != 0.0).map(|(w, a, _)| ExpansionTerm { coefficient: w, level: m_level, args: a }));
    }
    Ok(out)
}

fn valuation(mut a: u64, p: u64) -> u32 {
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    v
}

/// The terms of `F(m,N) = Σ_{LM=N} Σ_a A(a,m_L)·G(α·m/m_L, M)`.
pub fn forward_expansion<R: RelationSpec + ?Sized>(spec: &R, args: &[u64], n: &Factored) -> Result<Vec<ExpansionTerm>> {
    expand(spec, args, n, false)
}

/// The terms of `G(m,N) = Σ_{LM=N} μ(L) Σ_a A(a,m_L)·F(α·m/m_L, M)`.
pub fn inverse_expansion<R: RelationSpec + ?Sized>(spec: &R, args: &[u64], n: &Factored) -> Result<Vec<ExpansionTerm>> {
    expand(spec, args, n, true)
}

/// Evaluates `F(m,N)` from an oracle for `G`.
pub fn apply_relation<R, G>(spec: &R, mut g: G, args: &[u64], n: &Factored) -> Result<f64>
where
    R: RelationSpec + ?Sized,
    G: FnMut(&[u64], u64) -> Result<f64>,
{
    let mut total = 0.0;
    for t in forward_expansion(spec, args, n)? {
        total += t.coefficient * g(&t.args, t.level)?;
    }
    Ok(total)
}

/// Recovers `G(m,N)` from an oracle for `F`.
pub fn invert_relation<R, F>(spec: &R, mut f: F, args: &[u64], n: &Factored) -> Result<f64>
where
    R: RelationSpec + ?Sized,
    F: FnMut(&[u64], u64) -> Result<f64>,
{
    let mut total = 0.0;
    for t in inverse_expansion(spec, args, n)? {
        total += t.coefficient * f(&t.args, t.level)?;
    }
    Ok(total)
}

/// The oldform relation between full and newform Petersson sums, truncated
/// either by `ℓ ≤ Y` across all primes or by `p^k ≤ cap` prime by prime.
#[derive(Clone, Debug)]
pub struct OldformRelation {
    global_cap: Option<u64>,
    local_cap: u64,
    cheb: ChebTable,
}

impl OldformRelation {
    /// Keeps `ℓ ≤ Y`.
    pub fn truncated(y: u64) -> Result<Self> {
        Self::build(Some(y), y)
    }

    /// Keeps every `ℓ` whose prime-power parts are at most `cap`; exactly
    /// invertible.
    pub fn locally_capped(cap: u64) -> Result<Self> {
        Self::build(None, cap)
    }

    fn build(global_cap: Option<u64>, local_cap: u64) -> Result<Self> {
        if local_cap == 0 {
            return Err(Error::Precondition("the ℓ cap must be at least 1".into()));
        }
        let max_k = (64 - local_cap.leading_zeros()).min(chebyshev::MAX_N);
        Ok(OldformRelation { global_cap, local_cap, cheb: ChebTable::new(max_k)? })
    }
}

impl RelationSpec for OldformRelation {
    fn arity(&self) -> usize {
        2
    }

    fn size_cap(&self) -> Option<u64> {
        self.global_cap
    }

    fn local_terms(&self, p: u64, valuations: &[u32]) -> Result<Vec<LocalTerm>> {
        let (i, j) = (valuations[0], valuations[1]);
        let pf = p as f64;
        let nu = pf + 1.0;
        // (u,v) choices with the a, b ranges they allow:
        // (weight, v_p(a), v_p(b), v_p((u,v)))
        let mut uv_terms: Vec<(f64, u32, u32, u32)> = vec![(1.0, 0, 0, 0)];
        if i >= 1 {
            uv_terms.push((-pf / nu, 0, 0, 0));
            if i >= 2 {
                uv_terms.push((-pf / nu, 1, 0, 0));
            }
        }
        if j >= 1 {
            uv_terms.push((-pf / nu, 0, 0, 0));
            if j >= 2 {
                uv_terms.push((-pf / nu, 0, 1, 0));
            }
        }
        if i >= 1 && j >= 1 {
            uv_terms.push((pf, 0, 0, 1));
        }
        let mut out = Vec::new();
        let mut pk = 1u64;
        let mut k = 0u32;
        while pk <= self.local_cap && k <= self.cheb.max_n() {
            let ell_weight = pk as f64 / nu.powi(2 * k as i32 + 1);
            for j1 in 0..=k {
                let c1 = self.cheb.get(j1, k);
                if c1 == 0 {
                    continue;
                }
                for j2 in 0..=k {
                    let c2 = self.cheb.get(j2, k);
                    if c2 == 0 {
                        continue;
                    }
                    for &(w, alpha, beta, g) in &uv_terms {
                        let rest_m = i - 2 * alpha - g;
                        let rest_n = j - 2 * beta - g;
                        for e1 in 0..=j1.min(rest_m) {
                            for e2 in 0..=j2.min(rest_n) {
                                out.push(LocalTerm {
                                    weight: ell_weight * c1 as f64 * c2 as f64 * w,
                                    exponents: vec![rest_m + j1 - 2 * e1, rest_n + j2 - 2 * e2],
                                    size: pk,
                                });
                            }
                        }
                    }
                }
            }
            pk = match pk.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
            k += 1;
        }
        Ok(out)
    }
}

/// `N·Y^{−2γ₀}`, the scale of the `ℓ > Y` remainder of a sieved sum.
pub fn ell_tail_scale(level: u64, y: u64) -> f64 {
    level as f64 * (y as f64).powf(-2.0 * chebyshev::gamma0())
}

/// Evaluates `Σ coefficient·Δ_{level}(args)` for expansion terms, grouping
/// the geometric evaluations by level. Returns the total and the accumulated
/// weighted tail bound.
pub fn evaluate_expansion(terms: &[ExpansionTerm], kappa: u32, c_max: u64) -> Result<(f64, f64)> {
    let mut by_level: BTreeMap<u64, BTreeMap<(u64, u64), f64>> = BTreeMap::new();
    for t in terms {
        *by_level.entry(t.level).or_default().entry((t.args[0], t.args[1])).or_insert(0.0) += t.coefficient;
    }
    let mut total = 0.0;
    let mut tail = 0.0;
    for (level, weighted) in by_level {
        let pairs: Vec<(u64, u64)> = weighted.keys().copied().collect();
        let values = delta_geometric_grid(&arith::factor(level)?, kappa, &pairs, c_max.clamp(level, MAX_C))?;
        for (est, w) in values.iter().zip(weighted.values()) {
            total += w * est.value;
            tail += w.abs() * est.tail_bound;
        }
    }
    Ok((total, tail))
}

/// `Δ*_N(m,n)` from the oldform relation with `ℓ ≤ Y`, each inner `Δ_M`
/// evaluated geometrically.
pub fn delta_star_truncated(n_level: &Factored, kappa: u32, m: u64, n: u64, y: u64, c_max: u64) -> Result<DeltaEstimate> {
    let spec = OldformRelation::truncated(y)?;
    let terms = inverse_expansion(&spec, &[m, n], n_level)?;
    let (value, tail_bound) = evaluate_expansion(&terms, kappa, c_max)?;
    Ok(DeltaEstimate {
        value,
        kappa,
        level: n_level.n(),
        q: 1,
        m,
        n,
        c_max,
        y: Some(y),
        tail_bound,
        ell_tail: if n_level.is_one() { 0.0 } else { ell_tail_scale(n_level.n(), y) },
        mode: DeltaMode::Star,
    })
}

/// The expansion of `Δ̃_{N,q}(m,n)` into full sums `Δ_{Mq}`.
pub fn tilde_expansion(n_level: &Factored, q: &Factored, m: u64, n: u64, y: u64) -> Result<Vec<ExpansionTerm>> {
    check_level(n_level)?;
    check_level(q)?;
    if arith::gcd(n_level.n(), q.n()) != 1 || arith::gcd(m, q.n()) != 1 || arith::gcd(n, q.n()) != 1 {
        return Err(Error::Precondition(format!("need (mnN, q) = 1 for m={m}, n={n}, N={}, q={}", n_level.n(), q.n())));
    }
    let spec = OldformRelation::truncated(y)?;
    let mut terms = inverse_expansion(&spec, &[m, n], n_level)?;
    for t in &mut terms {
        t.level *= q.n();
    }
    Ok(terms)
}

/// `Δ̃_{N,q}(m,n)`: the sieve over `N` with every inner sum at level
/// `M·q`.
pub fn delta_tilde(n_level: &Factored, q: &Factored, kappa: u32, m: u64, n: u64, y: u64, c_max: u64) -> Result<DeltaEstimate> {
    let terms = tilde_expansion(n_level, q, m, n, y)?;
    let (value, tail_bound) = evaluate_expansion(&terms, kappa, c_max)?;
    Ok(DeltaEstimate {
        value,
        kappa,
        level: n_level.n(),
        q: q.n(),
        m,
        n,
        c_max,
        y: Some(y),
        tail_bound,
        ell_tail: if n_level.is_one() { 0.0 } else { ell_tail_scale(n_level.n(), y) },
        mode: DeltaMode::Tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Trivial;

    impl RelationSpec for Trivial {
        fn arity(&self) -> usize {
            1
        }
        fn local_terms(&self, _p: u64, v: &[u32]) -> Result<Vec<LocalTerm>> {
            Ok(vec![LocalTerm { weight: 1.0, exponents: v.to_vec(), size: 1 }])
        }
    }

    #[test]
    fn level_one_is_identity() {
        let spec = OldformRelation::truncated(100).unwrap();
        let terms = inverse_expansion(&spec, &[6, 10], &Factored::one()).unwrap();
        assert_eq!(terms, vec![ExpansionTerm { coefficient: 1.0, level: 1, args: vec![6, 10] }]);
    }

    #[test]
    fn trivial_relation_is_mobius_inversion() {
        let n = arith::factor(30).unwrap();
        let g = |_: &[u64], level: u64| Ok(level as f64 * 1.5 + 2.0);
        let f = |args: &[u64], level: u64| apply_relation(&Trivial, g, args, &arith::factor(level)?);
        let back = invert_relation(&Trivial, f, &[7], &n).unwrap();
        assert!((back - g(&[7], 30).unwrap()).abs() < 1e-12);
        // F(N) = Σ_{M|N} G(M) for the trivial relation
        let direct: f64 = n.divisors().iter().map(|&d| d as f64 * 1.5 + 2.0).sum();
        assert!((f(&[7], 30).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn oldform_terms_at_unit_arguments() {
        // at m = n = 1 and ℓ ≤ p only (u,v) = (1,1) and ℓ ∈ {1, p} occur
        let spec = OldformRelation::truncated(2).unwrap();
        let terms = forward_expansion(&spec, &[1, 1], &arith::factor(2).unwrap()).unwrap();
        let mut at_one: Vec<&ExpansionTerm> = terms.iter().filter(|t| t.level == 1).collect();
        at_one.sort_by(|a, b| a.args.cmp(&b.args));
        assert_eq!(at_one.len(), 2);
        assert!((at_one[0].coefficient - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(at_one[1].args, vec![2, 2]);
        assert!((at_one[1].coefficient - 2.0 / 27.0).abs() < 1e-15);
    }
}
