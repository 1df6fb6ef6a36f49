//! The triple sums
//!
//! `G_{A,B}(m₁,m₂,m₃;c) = M⁻³ Σ_{x₁,x₂,x₃ mod M} χ_q(x₁x₂x₃) S(Ax₁x₂, Bx₃; c) e((x₁m₁+x₂m₂+x₃m₃)/M)`
//!
//! with `M = [c,q]`, evaluated from the definition, through their
//! Chinese-remainder factorization, and through closed forms on the
//! `(AB)^∞` part, the 2-part and the degenerate case where some `mᵢ = 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::kloosterman::kloosterman_row;
use super::ramanujan;
use crate::arith::{self, Factored};
use crate::characters::{Mod8Sign, QuadraticCharacter};
use crate::numeric::{e_rational, ComplexKahanSum, RootTable};
use crate::{Error, Result};

/// Default cap on `[c,q]` for the brute-force evaluator.
pub const DEFAULT_BRUTE_GUARD: u64 = 360;

/// How a [`GSumResult`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GRoute {
    Brute,
    Crt,
    ClosedC2,
    ClosedEven,
    ClosedDegenerate,
}

/// Inputs echoed with every result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GSumParams {
    pub m: [i64; 3],
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub q: u64,
    pub sign8: Mod8Sign,
}

#[derive(Clone, Debug, Serialize)]
pub struct GSumResult {
    pub value: Complex64,
    pub route: GRoute,
    pub params: GSumParams,
}

fn params(m: [i64; 3], a: u64, b: u64, c: u64, chi: &QuadraticCharacter) -> GSumParams {
    GSumParams { m, a, b, c, q: chi.q(), sign8: chi.sign8() }
}

fn checked_lcm(c: u64, q: u64) -> Result<u64> {
    arith::lcm(c, q)
}

/// Per-`x₃` weights `w(x₃)` with `G(m₃) = Σ_{x₃} w(x₃) e(x₃m₃/M)`.
///
/// The inner double sum over `x₁,x₂` only depends on `Bx₃ mod c`, so it is
/// evaluated once per distinct residue, in parallel, each with its own
/// sequential compensated sum. Results do not depend on the thread count.
fn brute_weights(m1: i64, m2: i64, a: u64, b: u64, c: u64, chi: &QuadraticCharacter, guard: u64) -> Result<(RootTable, Vec<Complex64>)> {
    if c == 0 || a == 0 || b == 0 {
        return Err(Error::Precondition("A, B and c must be positive".into()));
    }
    let big_m = checked_lcm(c, chi.q())?;
    if big_m > guard {
        return Err(Error::Budget(format!("[c,q] = {big_m} exceeds the brute-force guard {guard}")));
    }
    let roots = RootTable::new(big_m);
    let mm = big_m as usize;
    let chis: Vec<i8> = (0..big_m).map(|x| chi.value(x as i64)).collect();
    let beta: Vec<Complex64> =
        (0..big_m).map(|x| roots.get(arith::reduce_wide(x as i128 * m2 as i128, big_m)) * f64::from(chis[x as usize])).collect();
    let alpha: Vec<Complex64> =
        (0..big_m).map(|x| roots.get(arith::reduce_wide(x as i128 * m1 as i128, big_m)) * f64::from(chis[x as usize])).collect();

    let mut needed = vec![false; c as usize];
    for x3 in 0..mm {
        if chis[x3] != 0 {
            needed[(b as u128 * x3 as u128 % c as u128) as usize] = true;
        }
    }
    let residues: Vec<u64> = (0..c).filter(|&s| needed[s as usize]).collect();
    let a_mod = a % c;
    let inner_vals: Vec<Complex64> = residues
        .par_iter()
        .map(|&s| {
            let row = kloosterman_row(s as i64, c);
            let mut total = ComplexKahanSum::new();
            for x1 in 0..mm {
                if chis[x1] == 0 {
                    continue;
                }
                let step = (a_mod as u128 * x1 as u128 % c as u128) as u64;
                let mut idx = 0u64;
                let mut acc = Complex64::new(0.0, 0.0);
                for (x2, bx) in beta.iter().enumerate() {
                    if chis[x2] != 0 {
                        acc += bx * row[idx as usize];
                    }
                    idx += step;
                    if idx >= c {
                        idx -= c;
                    }
                }
                total.add(alpha[x1] * acc);
            }
            total.value()
        })
        .collect();
    let mut inner = vec![Complex64::new(0.0, 0.0); c as usize];
    for (s, v) in residues.iter().zip(inner_vals) {
        inner[*s as usize] = v;
    }
    let scale = (big_m as f64).powi(3).recip();
    let weights = (0..mm)
        .map(|x3| {
            if chis[x3] == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                inner[(b as u128 * x3 as u128 % c as u128) as usize] * (f64::from(chis[x3]) * scale)
            }
        })
        .collect();
    Ok((roots, weights))
}

/// `G_{A,B}(m₁,m₂,m₃;c)` straight from the definition, with the default guard.
pub fn gab_bruteforce(m: [i64; 3], a: u64, b: u64, c: u64, chi: &QuadraticCharacter) -> Result<GSumResult> {
    gab_bruteforce_with_guard(m, a, b, c, chi, DEFAULT_BRUTE_GUARD)
}

/// As [`gab_bruteforce`] with an explicit cap on `[c,q]`.
pub fn gab_bruteforce_with_guard(m: [i64; 3], a: u64, b: u64, c: u64, chi: &QuadraticCharacter, guard: u64) -> Result<GSumResult> {
    let (roots, w) = brute_weights(m[0], m[1], a, b, c, chi, guard)?;
    let big_m = roots.modulus();
    let mut s = ComplexKahanSum::new();
    for (x3, wx) in w.iter().enumerate() {
        s.add(wx * roots.get(arith::reduce_wide(x3 as i128 * m[2] as i128, big_m)));
    }
    Ok(GSumResult { value: s.value(), route: GRoute::Brute, params: params(m, a, b, c, chi) })
}

/// `G_{A,B}(m₁,m₂,w;c)` for every `w mod [c,q]`, sharing the inner sums.
pub fn gab_bruteforce_all_m3(m1: i64, m2: i64, a: u64, b: u64, c: u64, chi: &QuadraticCharacter, guard: u64) -> Result<Vec<Complex64>> {
    let (roots, w) = brute_weights(m1, m2, a, b, c, chi, guard)?;
    let big_m = roots.modulus();
    Ok((0..big_m)
        .map(|m3| {
            let mut s = ComplexKahanSum::new();
            for (x3, wx) in w.iter().enumerate() {
                s.add(wx * roots.get((x3 as u64 * m3) % big_m));
            }
            s.value()
        })
        .collect())
}

/// Which piece of the modulus a CRT factor lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorPart {
    /// Odd part of `c₁`, with the character `χ_{q_o}`.
    Odd,
    /// 2-part of `c₁`, with the character `χ_{q_e}`.
    Even,
    /// The part `c₂ | (AB)^∞`, without character.
    AbPart,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrtFactor {
    pub part: FactorPart,
    /// Modulus `[c_part, q_part]` of the factor.
    pub modulus: u64,
    pub result: GSumResult,
}

/// `G_{A,B} = χ_q(AB) · ∏ factors`.
#[derive(Clone, Debug, Serialize)]
pub struct CrtFactorization {
    pub prefactor: i8,
    pub factors: Vec<CrtFactor>,
}

impl CrtFactorization {
    pub fn product(&self) -> Complex64 {
        self.factors.iter().fold(Complex64::new(f64::from(self.prefactor), 0.0), |acc, f| acc * f.result.value)
    }
}

/// The moduli and twisted third arguments of the factorization
/// `G_{A,B}(m;c) = χ_q(AB)·G_{1,1}(…;c_o)·G_{1,1}(…;c_e)·G_{A,B}(…;c₂)`.
#[derive(Clone, Debug)]
struct Split {
    c_o: u64,
    c_e: u64,
    c2: u64,
    chi_o: QuadraticCharacter,
    chi_e: QuadraticCharacter,
    m3_odd: i64,
    m3_even: i64,
    m3_ab: i64,
}

fn inv_mod(x: u64, m: u64) -> u64 {
    arith::mod_inv((x % m.max(1)) as i64, m).expect("unit by construction")
}

fn mul_mod(xs: &[u64], m: u64) -> u64 {
    xs.iter().fold(1u128 % m as u128, |acc, &x| acc * (x as u128 % m as u128) % m as u128) as u64
}

fn split(m3: i64, a: u64, b: u64, c: u64, chi: &QuadraticCharacter) -> Result<Split> {
    let ab = a.checked_mul(b).ok_or(Error::Overflow("A·B"))?;
    if arith::gcd(chi.q(), ab) != 1 {
        return Err(Error::Precondition(format!("q = {} must be coprime to AB = {ab}", chi.q())));
    }
    let (c1, c2) = arith::coprime_split(c as i64, ab);
    let c1 = c1 as u64;
    let c_e = 1u64 << c1.trailing_zeros();
    let c_o = c1 / c_e;
    let chi_o = chi.odd_part();
    let chi_e = chi.even_part();
    let m1_mod = checked_lcm(c1, chi.q())?;
    let mo = checked_lcm(c_o, chi_o.q())?;
    let me = checked_lcm(c_e, chi_e.q())?;
    // third argument of the c₁ factor: \overline{AB c₂}·m₃ mod [c₁,q]
    let t1 = mul_mod(&[inv_mod(mul_mod(&[ab, c2], m1_mod), m1_mod), arith::reduce(m3, m1_mod)], m1_mod);
    let inv_me = inv_mod(me, mo);
    let m3_odd = mul_mod(&[inv_me, inv_me, inv_me, c_e, c_e, t1], mo);
    let inv_mo = inv_mod(mo, me);
    let m3_even = mul_mod(&[inv_mo, inv_mo, inv_mo, c_o, c_o, t1], me);
    let inv_m1 = inv_mod(m1_mod, c2);
    let m3_ab = mul_mod(&[inv_m1, inv_m1, inv_m1, c1, c1, arith::reduce(m3, c2)], c2);
    Ok(Split { c_o, c_e, c2, chi_o, chi_e, m3_odd: m3_odd as i64, m3_even: m3_even as i64, m3_ab: m3_ab as i64 })
}

/// Factors `G_{A,B}(m;c)` over `c = c_o·c_e·c₂`, where `c₂ | (AB)^∞` and
/// `c₁ = c_o c_e` is coprime to `AB`, each factor evaluated by brute force.
/// Factors with modulus 1 equal 1 and are omitted.
pub fn gab_crt_factor(m: [i64; 3], a: u64, b: u64, c: u64, chi: &QuadraticCharacter) -> Result<CrtFactorization> {
    let sp = split(m[2], a, b, c, chi)?;
    let ab = a * b;
    let prefactor = chi.value(ab as i64);
    let trivial = QuadraticCharacter::trivial();
    let pieces = [
        (FactorPart::Odd, [m[0], m[1], sp.m3_odd], 1, 1, sp.c_o, &sp.chi_o),
        (FactorPart::Even, [m[0], m[1], sp.m3_even], 1, 1, sp.c_e, &sp.chi_e),
        (FactorPart::AbPart, [m[0], m[1], sp.m3_ab], a, b, sp.c2, &trivial),
    ];
    let mut factors = Vec::new();
    for (part, args, fa, fb, fc, fchi) in pieces {
        let modulus = checked_lcm(fc, fchi.q())?;
        if modulus == 1 {
            continue;
        }
        let result = gab_bruteforce(args, fa, fb, fc, fchi)?;
        factors.push(CrtFactor { part, modulus, result });
    }
    Ok(CrtFactorization { prefactor, factors })
}

fn vp(x: i64, p: u64) -> u32 {
    if x == 0 {
        return u32::MAX;
    }
    let mut x = x.unsigned_abs();
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

fn gcd_i(x: i64, m: u64) -> u64 {
    arith::gcd_i(x, m)
}

/// Closed form of `G_{A,B}(a₁,a₂,a₃;c₂)` for `c₂ | (AB)^∞` (no character).
///
/// With `(A,c₂) | a₁,a₂` and `(B,c₂) = (a₃,c₂)` (otherwise the sum is 0),
/// put `A = (A,c₂)A′`, `B = (B,c₂)B′`, `c₂′ = c₂/(B,c₂)`,
/// `g₁ = (a₁/(A,c₂), c₂/(A,c₂))`, `g₂ = (a₂/(A,c₂), c₂/(g₁(A,c₂)))`,
/// `c₂″ = c₂/((A,c₂)g₁g₂)`, `ãᵢ` the cofactors. The primes of `c₂` are
/// sorted by comparing their valuations in `c₂′` and `c₂″` into `c_f`
/// (`v(c₂″) ≤ v(c₂′)`), `c_g` (`v(c₂′) = 0 < v(c₂″)`) and `c_z` (the rest);
/// the sum vanishes unless `c_z = 1` and then equals
/// `(A,c₂)/c₂ · R_{c_g}(c_g/c_g″) · φ(c_f)/φ(c_f′) · e(\overline{A′B′}ã₁ã₂ã₃\overline{c_g″}/c_f″)`.
pub fn gab_closed_c2(av: [i64; 3], a: u64, b: u64, c2: u64) -> Result<GSumResult> {
    let ab = a.checked_mul(b).ok_or(Error::Overflow("A·B"))?;
    let (rest, _) = arith::coprime_split(c2 as i64, ab);
    if c2 == 0 || rest != 1 {
        return Err(Error::Precondition(format!("c₂ = {c2} does not divide (AB)^∞ with AB = {ab}")));
    }
    let p = GSumParams { m: av, a, b, c: c2, q: 1, sign8: Mod8Sign::Even };
    let zero = GSumResult { value: Complex64::new(0.0, 0.0), route: GRoute::ClosedC2, params: p.clone() };
    let [a1, a2, a3] = av;
    let g_a = arith::gcd(a, c2);
    let g_b = arith::gcd(b, c2);
    if g_b != gcd_i(a3, c2) || a1 % g_a as i64 != 0 || a2 % g_a as i64 != 0 {
        return Ok(zero);
    }
    let a_p = a / g_a;
    let b_p = b / g_b;
    let c2p = c2 / g_b;
    let a3t = if a3 == 0 { 0 } else { a3 / gcd_i(a3, c2) as i64 };
    let g1 = gcd_i(a1 / g_a as i64, c2 / g_a);
    let a1t = a1 / (g1 * g_a) as i64;
    let g2 = gcd_i(a2 / g_a as i64, c2 / (g1 * g_a));
    let a2t = a2 / (g2 * g_a) as i64;
    let c2pp = c2 / (g_a * g1 * g2);
    let (mut cf, mut cg) = (1u64, 1u64);
    for &(pr, e) in arith::factor(c2)?.factors() {
        let v1 = vp(c2p as i64, pr);
        let v2 = vp(c2pp as i64, pr);
        let pe = pr.pow(e);
        if v2 <= v1 {
            cf *= pe;
        } else if v1 == 0 {
            cg *= pe;
        } else {
            return Ok(zero);
        }
    }
    let cfp = arith::gcd(cf, c2p);
    let cfpp = arith::gcd(cf, c2pp);
    let cgpp = arith::gcd(cg, c2pp);
    let phi = |n: u64| arith::factor(n).expect("n ≥ 1").euler_phi() as f64;
    let mut value = Complex64::new(g_a as f64 / c2 as f64 * ramanujan((cg / cgpp) as i64, cg) as f64 * phi(cf) / phi(cfp), 0.0);
    if cfpp > 1 {
        let num = mul_mod(
            &[
                inv_mod(mul_mod(&[a_p, b_p], cfpp), cfpp),
                arith::reduce(a1t, cfpp),
                arith::reduce(a2t, cfpp),
                arith::reduce(a3t, cfpp),
                inv_mod(cgpp, cfpp),
            ],
            cfpp,
        );
        value *= e_rational(num as i128, cfpp);
    }
    Ok(GSumResult { value, route: GRoute::ClosedC2, params: p })
}

/// Gauss sum of `χ_{q_e}`, optionally multiplied by the character mod 4.
fn even_gauss(chi_e: &QuadraticCharacter, twist4: bool) -> Complex64 {
    let qe = chi_e.q_e();
    let mut s = ComplexKahanSum::new();
    for x in 0..qe as i64 {
        let mut v = chi_e.value(x);
        if twist4 {
            v *= crate::characters::even_value(4, Mod8Sign::Even, x);
        }
        if v != 0 {
            s.add(e_rational(x as i128, qe) * f64::from(v));
        }
    }
    s.value()
}

/// Closed form of `G_{1,1}(a₁,a₂,a₃;c_e)` with the character `χ_{q_e}`, for
/// `c_e` a power of 2, by the case table on `s_e = c_e/q_e`.
pub fn gab_closed_even(av: [i64; 3], chi_e: &QuadraticCharacter, c_e: u64) -> Result<GSumResult> {
    if chi_e.q_o() != 1 {
        return Err(Error::Precondition(format!("{} is not a 2-power conductor", chi_e.q())));
    }
    if c_e == 0 || !c_e.is_power_of_two() {
        return Err(Error::Precondition(format!("c_e = {c_e} is not a power of 2")));
    }
    let qe = chi_e.q_e();
    let p = GSumParams { m: av, a: 1, b: 1, c: c_e, q: qe, sign8: chi_e.sign8() };
    let [a1, a2, a3] = av;
    let prod = i128::from(a1) * i128::from(a2) * i128::from(a3);
    let ch = |n: i128| f64::from(chi_e.value(n.rem_euclid(8) as i64));
    let ch4 = |n: i128| f64::from(crate::characters::even_value(4, Mod8Sign::Even, n.rem_euclid(4) as i64));
    let sign = ch(-1);
    let value = if qe > 1 && c_e % qe != 0 {
        if c_e <= 2 {
            even_gauss(chi_e, false) * (sign * ch(prod) / (qe * qe) as f64)
        } else {
            // q_e = 8, c_e = 4
            even_gauss(chi_e, true) * (sign * ch(prod) * ch4(prod) / 32.0)
        }
    } else {
        let se = c_e / qe;
        if gcd_i(a3, se) != 1 {
            Complex64::new(0.0, 0.0)
        } else {
            let pre = e_rational(prod.rem_euclid(c_e as i128), c_e) * (sign / ((qe * qe * se) as f64));
            let tau = even_gauss(chi_e, false);
            let h = if se % qe == 0 {
                tau * tau * (ch(prod) * ch(prod))
            } else if se == 1 {
                let r = |k: u64| (ramanujan(a1, k) * ramanujan(a2, k) * ramanujan(a3, k)) as f64;
                let all = |pred: &dyn Fn(i64) -> bool| av.iter().all(|&x| pred(x));
                if qe == 4 {
                    Complex64::new(0.5 * r(4), 0.0)
                } else if all(&|x| x % 4 == 0) {
                    Complex64::new(0.25 * r(8), 0.0)
                } else if all(&|x| x % 2 == 0 && x % 4 != 0) {
                    Complex64::new(0.0, 16.0 * ch4(prod / 8))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            } else if 2 * se == qe {
                -(tau * tau) * (ch(prod) * ch(prod))
            } else {
                // q_e = 8, s_e = 2
                Complex64::new(0.0, 1.0) * tau * tau * ch4(prod)
            };
            pre * h
        }
    };
    Ok(GSumResult { value, route: GRoute::ClosedEven, params: p })
}

/// Result of the degenerate evaluation `cqφ(q)·G = g·∏ R_{q_o}(aᵢ′)`.
#[derive(Clone, Debug, Serialize)]
pub struct DegenerateEvaluation {
    pub result: GSumResult,
    /// The factor `g`, depending only on the parts of `aᵢ` dividing `(2AB)^∞`.
    pub g: Complex64,
    /// `∏ R_{q_o}(aᵢ′)`.
    pub ramanujan_product: i64,
    /// The bound `64(A,c)(B,c)` on `|g|`.
    pub g_bound: f64,
}

/// `G_{A,B}(a;c)` when some `aᵢ = 0`, assembled from the three factor
/// evaluations: the odd factor via Ramanujan sums, the 2-part table, and
/// [`gab_closed_c2`]. Requires `q_o | c`.
pub fn gab_degenerate(av: [i64; 3], a: u64, b: u64, c: u64, chi: &QuadraticCharacter) -> Result<DegenerateEvaluation> {
    if av.iter().all(|&x| x != 0) {
        return Err(Error::Precondition("the degenerate evaluation needs some aᵢ = 0".into()));
    }
    let sp = split(av[2], a, b, c, chi)?;
    let q_o = chi.q_o();
    if sp.c_o % q_o != 0 {
        return Err(Error::Precondition(format!("q_o = {q_o} must divide the odd part of c")));
    }
    let phi = |n: u64| arith::factor(n).expect("n ≥ 1").euler_phi();

    // odd factor: δ·χ_{q_o}(−1)/(c_o q_o φ(q_o)) · ∏ R_{q_o}
    let s_o = sp.c_o / q_o;
    let h = arith::gcd(q_o, s_o);
    let odd_ok = gcd_i(sp.m3_odd, s_o) == 1 && gcd_i(av[0], h) == 1 && gcd_i(av[1], h) == 1;
    let odd_scale = if odd_ok { f64::from(sp.chi_o.parity()) / (sp.c_o * q_o * phi(q_o)) as f64 } else { 0.0 };
    let r_args = [av[0], av[1], sp.m3_odd];
    let ramanujan_product: i64 = r_args.iter().map(|&x| ramanujan(x, q_o)).product();

    // 2-part factor
    let qe = chi.q_e();
    let c_e = sp.c_e;
    let even = if qe > 1 && qe == c_e {
        let r: i64 = [av[0], av[1], sp.m3_even].iter().map(|&x| ramanujan(x, qe)).product();
        f64::from(sp.chi_e.parity()) * r as f64 / (qe * c_e * phi(qe)) as f64
    } else if qe == 1 {
        if gcd_i(sp.m3_even, c_e) == 1 {
            1.0 / c_e as f64
        } else {
            0.0
        }
    } else {
        0.0
    };

    // (AB)^∞ factor
    let ab_part = gab_closed_c2([av[0], av[1], sp.m3_ab], a, b, sp.c2)?.value;

    let prefactor = f64::from(chi.value((a * b) as i64));
    let big = (c as f64) * chi.q() as f64 * phi(chi.q()) as f64;
    let g = ab_part * (big * prefactor * odd_scale * even);
    let value = g * (ramanujan_product as f64 / big);
    let g_bound = 64.0 * arith::gcd(a, c) as f64 * arith::gcd(b, c) as f64;
    Ok(DegenerateEvaluation {
        result: GSumResult { value, route: GRoute::ClosedDegenerate, params: params(av, a, b, c, chi) },
        g,
        ramanujan_product,
        g_bound,
    })
}

/// `H(w;D)` read off from `G_{1,1}(1,1,w;D)` with `χ_D` for odd square-free
/// `D`: `H(w;D) = D²·G_{1,1}(1,1,w;D)·e(−w/D)·χ_D(−1)`.
pub fn h_extract_table(d: u64, guard: u64) -> Result<Vec<Complex64>> {
    let df = arith::factor(d)?;
    if d % 2 == 0 || !df.is_square_free() {
        return Err(Error::Precondition(format!("D = {d} must be odd and square-free")));
    }
    let chi = QuadraticCharacter::new(d, Mod8Sign::Even)?;
    let g = gab_bruteforce_all_m3(1, 1, 1, 1, d, &chi, guard)?;
    let scale = (d * d) as f64 * f64::from(chi.parity());
    Ok(g.iter().enumerate().map(|(w, v)| v * e_rational(-(w as i128), d) * scale).collect())
}

/// `H*(w;D)` for all `w mod D`, obtained by inverting
/// `H(w;D) = Σ_{D₁D₂=D} μ(D₁)χ_{D₁}(−1)H*(\overline{D₁}w;D₂)` from the
/// smallest divisors upward. Entries at non-units are left at zero.
pub fn h_star_table(d: u64, guard: u64) -> Result<Vec<Complex64>> {
    let df = arith::factor(d)?;
    let mut divs = df.factored_divisors();
    divs.sort_by_key(Factored::n);
    let mut tables: Vec<(u64, Vec<Complex64>)> = Vec::new();
    for d2 in divs {
        let n2 = d2.n();
        let star = if n2 == 1 {
            vec![Complex64::new(1.0, 0.0)]
        } else {
            let h = h_extract_table(n2, guard)?;
            let mut star = vec![Complex64::new(0.0, 0.0); n2 as usize];
            for w in 0..n2 {
                if arith::gcd(w, n2) != 1 {
                    continue;
                }
                let mut v = h[w as usize];
                for (m, tab) in &tables {
                    let d1 = n2 / m;
                    if n2 % m != 0 || d1 == 1 {
                        continue;
                    }
                    let d1f = arith::factor(d1)?;
                    let sign = d1f.mobius() as f64 * f64::from(QuadraticCharacter::new(d1, Mod8Sign::Even)?.parity());
                    let idx = if *m == 1 { 0 } else { mul_mod(&[inv_mod(d1 % m, *m), w], *m) };
                    v -= tab[idx as usize] * sign;
                }
                star[w as usize] = v;
            }
            star
        };
        tables.push((n2, star));
    }
    Ok(tables.pop().expect("D itself is a divisor").1)
}

/// `g(χ_D, ψ₀)` for the principal character, from `μ(D)g = Σ_{w unit} H*(w;D)`.
pub fn principal_g(d: u64, guard: u64) -> Result<Complex64> {
    let star = h_star_table(d, guard)?;
    let mut s = ComplexKahanSum::new();
    for (w, v) in star.iter().enumerate() {
        if arith::gcd(w as u64, d) == 1 {
            s.add(*v);
        }
    }
    Ok(s.value() * arith::factor(d)?.mobius() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chi(q: u64) -> QuadraticCharacter {
        QuadraticCharacter::new(q, Mod8Sign::Even).unwrap()
    }

    #[test]
    fn trivial_sum_is_one() {
        let r = gab_bruteforce([0, 0, 0], 1, 1, 1, &QuadraticCharacter::trivial()).unwrap();
        assert!((r.value - 1.0).norm() < 1e-14);
    }

    #[test]
    fn guard_is_enforced() {
        let err = gab_bruteforce_with_guard([1, 1, 1], 1, 1, 30, &chi(7), 100).unwrap_err();
        assert!(matches!(err, Error::Budget(_)));
    }

    #[test]
    fn all_m3_matches_single() {
        let c = chi(5);
        let all = gab_bruteforce_all_m3(2, -3, 2, 3, 10, &c, 360).unwrap();
        for m3 in [0i64, 1, 7, 9] {
            let one = gab_bruteforce([2, -3, m3], 2, 3, 10, &c).unwrap().value;
            assert!((one - all[m3 as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn crt_examples() {
        let f = gab_crt_factor([1, 2, 3], 2, 1, 2, &QuadraticCharacter::trivial()).unwrap();
        assert_eq!(f.factors.len(), 1);
        let brute = gab_bruteforce([1, 2, 3], 2, 1, 2, &QuadraticCharacter::trivial()).unwrap().value;
        assert!((f.product() - brute).norm() < 1e-9);

        let f = gab_crt_factor([1, -2, 4], 1, 1, 12, &chi(5)).unwrap();
        assert_eq!(f.factors.len(), 2, "A = B = 1 leaves no (AB)^∞ part");
        let brute = gab_bruteforce([1, -2, 4], 1, 1, 12, &chi(5)).unwrap().value;
        assert!((f.product() - brute).norm() < 1e-8);
    }

    #[test]
    fn closed_c2_examples() {
        let r = gab_closed_c2([2, 2, 1], 2, 1, 4).unwrap();
        let b = gab_bruteforce([2, 2, 1], 2, 1, 4, &QuadraticCharacter::trivial()).unwrap();
        assert!((r.value - b.value).norm() < 1e-9);
        // (B,c₂) ≠ (a₃,c₂)
        assert_eq!(gab_closed_c2([1, 1, 2], 1, 3, 3).unwrap().value, Complex64::new(0.0, 0.0));
        assert!((gab_closed_c2([5, -7, 11], 1, 1, 1).unwrap().value - 1.0).norm() < 1e-15);
    }

    #[test]
    fn closed_even_examples() {
        let trivial = QuadraticCharacter::trivial();
        for (av, q, c) in [([1i64, 3, 5], 4u64, 4u64), ([2, 6, -10], 8, 8), ([1, 1, 3], 1, 2), ([4, 8, 12], 8, 8)] {
            let ch = if q == 1 { trivial.clone() } else { chi(q) };
            let closed = gab_closed_even(av, &ch, c).unwrap().value;
            let brute = gab_bruteforce(av, 1, 1, c, &ch).unwrap().value;
            assert!((closed - brute).norm() < 1e-9, "{av:?} q={q} c={c}: {closed} vs {brute}");
        }
    }

    #[test]
    fn degenerate_examples() {
        let d = gab_degenerate([0, 0, 0], 1, 1, 1, &QuadraticCharacter::trivial()).unwrap();
        assert!((d.result.value - 1.0).norm() < 1e-14);
        let d = gab_degenerate([0, 1, 1], 1, 1, 3, &chi(3)).unwrap();
        let b = gab_bruteforce([0, 1, 1], 1, 1, 3, &chi(3)).unwrap();
        assert!((d.result.value - b.value).norm() < 1e-9);
        assert!(gab_degenerate([1, 1, 1], 1, 1, 3, &chi(3)).is_err());
    }

    #[test]
    fn principal_g_at_small_primes() {
        for p in [3u64, 5, 7, 13] {
            let g = principal_g(p, 360).unwrap();
            let expect = if p % 4 == 1 { 2.0 } else { 0.0 };
            assert!((g - expect).norm() < 1e-8, "p={p}: {g}");
        }
    }
}
