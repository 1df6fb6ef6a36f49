//! Chebyshev coefficients `c_{j,n}`: the coordinates of `x^n` in the basis
//! `U_j(x/2)`, their multiplicative extension `c_ℓ(d)`, the sums `S(L,Y)` and
//! the inequalities they satisfy.

use serde::Serialize;

use crate::arith::{self, Factored};
use crate::numeric::KahanSum;
use crate::{Error, Result};

/// Largest `n` for which coefficients are computed exactly.
pub const MAX_N: u32 = 60;

/// `log(3/2)/log 2`, the exponent in the bound `Σ_d c_ℓ(d)/ν(ℓ) ≤ ℓ^{-δ}`.
pub fn cnu_exponent() -> f64 {
    1.5f64.ln() / 2f64.ln()
}

/// `γ₀ = log(3/2)/log 2 − 1/2`, the decay exponent of the `ℓ`-tail.
pub fn gamma0() -> f64 {
    cnu_exponent() - 0.5
}

fn binom(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        // exact at every step: r·(n−i)/(i+1) = C(n, i+1)
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r
}

/// `c_{j,n} = C(n,(n+j)/2) − C(n,(n+j)/2+1)` for `j ≡ n (mod 2)`, else 0.
pub fn cheb_coeff(j: u32, n: u32) -> Result<u128> {
    if n > MAX_N || j > n {
        return Err(Error::Precondition(format!("need 0 ≤ j ≤ n ≤ {MAX_N}, got j={j}, n={n}")));
    }
    if (n - j) % 2 == 1 {
        return Ok(0);
    }
    let k = (n + j) / 2;
    Ok(binom(n, k) - binom(n, k + 1))
}

/// Coefficients of `x^n` in the basis `Ũ_j(x) = U_j(x/2)`, by polynomial
/// reduction with `Ũ_{j+1} = x·Ũ_j − Ũ_{j−1}`. Independent of [`cheb_coeff`].
pub fn expand_power_in_u(n: u32) -> Result<Vec<i128>> {
    if n > MAX_N {
        return Err(Error::Precondition(format!("n = {n} exceeds {MAX_N}")));
    }
    let deg = n as usize;
    // basis[j] = coefficients of Ũ_j in powers of x
    let mut basis: Vec<Vec<i128>> = vec![vec![1]];
    if deg >= 1 {
        basis.push(vec![0, 1]);
    }
    for j in 2..=deg {
        let mut next = vec![0i128; j + 1];
        for (k, &c) in basis[j - 1].iter().enumerate() {
            next[k + 1] += c;
        }
        for (k, &c) in basis[j - 2].iter().enumerate() {
            next[k] -= c;
        }
        basis.push(next);
    }
    let mut rem = vec![0i128; deg + 1];
    rem[deg] = 1;
    let mut coeffs = vec![0i128; deg + 1];
    for j in (0..=deg).rev() {
        let c = rem[j];
        coeffs[j] = c;
        if c != 0 {
            for (k, &b) in basis[j].iter().enumerate() {
                rem[k] -= c * b;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    Ok(coeffs)
}

/// `c_{j,n}` by composite Simpson quadrature of
/// `∫_0^π U_j(cos θ)(2cos θ)^n (2/π) sin²θ dθ`.
pub fn cheb_coeff_quadrature(j: u32, n: u32, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = std::f64::consts::PI / panels as f64;
    let f = |t: f64| ((j + 1) as f64 * t).sin() * t.sin() * (2.0 * t.cos()).powi(n as i32) * 2.0 / std::f64::consts::PI;
    let mut s = KahanSum::new();
    for i in 0..=panels {
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        s.add(w * f(i as f64 * h));
    }
    s.value() * h / 3.0
}

/// The triangle `c_{j,n}`, `0 ≤ j ≤ n ≤ max_n`.
#[derive(Clone, Debug)]
pub struct ChebTable {
    max_n: u32,
    rows: Vec<Vec<u128>>,
}

impl ChebTable {
    pub fn new(max_n: u32) -> Result<Self> {
        let rows = (0..=max_n).map(|n| (0..=n).map(|j| cheb_coeff(j, n)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
        Ok(ChebTable { max_n, rows })
    }

    pub fn max_n(&self) -> u32 {
        self.max_n
    }

    pub fn get(&self, j: u32, n: u32) -> u128 {
        self.rows[n as usize].get(j as usize).copied().unwrap_or(0)
    }

    pub fn row(&self, n: u32) -> &[u128] {
        &self.rows[n as usize]
    }

    /// The nonzero entries read along rows, `c_{0,0}, c_{1,1}, c_{0,2}, c_{2,2}, …`.
    pub fn parity_list(&self, count: usize) -> Vec<u128> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(n, row)| row.iter().enumerate().filter(move |(j, _)| (n - j) % 2 == 0).map(|(_, &c)| c))
            .take(count)
            .collect()
    }
}

/// `c_ℓ(d) = ∏_{p^j ‖ d, p^n ‖ ℓ} c_{j,n}` for `d | ℓ`.
pub fn c_ell_d(ell: &Factored, d: &Factored) -> Result<u128> {
    if ell.n() % d.n() != 0 {
        return Err(Error::Precondition(format!("{} does not divide {}", d.n(), ell.n())));
    }
    let mut prod: u128 = 1;
    for &(p, n) in ell.factors() {
        prod = prod.checked_mul(cheb_coeff(d.valuation(p), n)?).ok_or(Error::Overflow("c_ℓ(d)"))?;
    }
    Ok(prod)
}

/// `Σ_{d|ℓ} c_ℓ(d) d^γ = ∏_{p^n‖ℓ} Σ_j c_{j,n} p^{γj}`.
pub fn weighted_coeff_sum(ell: &Factored, gamma: f64) -> Result<f64> {
    let mut prod = 1.0;
    for &(p, n) in ell.factors() {
        let mut s = KahanSum::new();
        for j in 0..=n {
            s.add(cheb_coeff(j, n)? as f64 * (p as f64).powf(gamma * f64::from(j)));
        }
        prod *= s.value();
    }
    Ok(prod)
}

/// `S(L,Y) = Σ_{ℓ|L^∞, ℓ≤Y} ℓ/ν(ℓ)² · (Σ_{d|ℓ} c_ℓ(d) d^{1/2})²`.
pub fn s_l_y(l: &Factored, y: u64) -> Result<f64> {
    let mut s = KahanSum::new();
    for ell in arith::smooth_divisors_up_to(l, y)? {
        let w = weighted_coeff_sum(&ell, 0.5)?;
        let nu = ell.nu_f64();
        s.add(ell.n() as f64 / (nu * nu) * w * w);
    }
    Ok(s.value())
}

/// `S(L,Y)` by the literal double sum over `ℓ` and `d | ℓ`, for tests.
pub fn s_l_y_direct(l: &Factored, y: u64) -> Result<f64> {
    let mut s = KahanSum::new();
    for ell in arith::smooth_divisors_up_to(l, y)? {
        let mut inner = KahanSum::new();
        for d in ell.factored_divisors() {
            inner.add(c_ell_d(&ell, &d)? as f64 * (d.n() as f64).sqrt());
        }
        let nu = ell.nu()? as f64;
        s.add(ell.n() as f64 / (nu * nu) * inner.value().powi(2));
    }
    Ok(s.value())
}

/// Outcome of checking the coefficient inequalities for every `ℓ | L^∞`, `ℓ ≤ Y`.
#[derive(Clone, Debug, Serialize)]
pub struct BoundsReport {
    pub l: u64,
    pub y: u64,
    pub gamma: f64,
    pub checked: usize,
    /// Largest `Σ_d c_ℓ(d)d^γ / ∏(p^{−γ}+p^γ)^n` seen (must be ≤ 1).
    pub max_weighted_ratio: f64,
    /// Largest `(Σ_d c_ℓ(d)/ν(ℓ)) / ℓ^{−log(3/2)/log 2}` seen (must be ≤ 1).
    pub max_cnu_ratio: f64,
    /// `S(L,Y)` and its Rankin bound `Y^ε ∏_{p|L}(1−p^{−ε})^{−1}`.
    pub s_l_y: f64,
    pub s_l_y_bound: f64,
    pub violations: Vec<u64>,
}

impl BoundsReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.s_l_y <= self.s_l_y_bound
    }
}

fn rankin_product(l: &Factored, eps: f64) -> f64 {
    l.primes().map(|p| 1.0 / (1.0 - (p as f64).powf(-eps))).product()
}

/// Checks `Σ_d c_ℓ(d)d^γ ≤ ∏(p^{−γ}+p^γ)^n` and `Σ_d c_ℓ(d)/ν(ℓ) ≤ ℓ^{−0.5849…}`
/// for every `ℓ | L^∞` up to `Y`, and `S(L,Y)` against its Rankin bound.
pub fn verify_coefficient_bounds(l: &Factored, y: u64, gamma: f64, eps: f64) -> Result<BoundsReport> {
    if gamma < 0.0 {
        return Err(Error::Precondition("γ must be nonnegative".into()));
    }
    let delta = cnu_exponent();
    let mut report = BoundsReport {
        l: l.n(),
        y,
        gamma,
        checked: 0,
        max_weighted_ratio: 0.0,
        max_cnu_ratio: 0.0,
        s_l_y: s_l_y(l, y)?,
        s_l_y_bound: (y as f64).powf(eps) * rankin_product(l, eps),
        violations: Vec::new(),
    };
    for ell in arith::smooth_divisors_up_to(l, y)? {
        let lhs = weighted_coeff_sum(&ell, gamma)?;
        let rhs: f64 = ell.factors().iter().map(|&(p, n)| ((p as f64).powf(-gamma) + (p as f64).powf(gamma)).powi(n as i32)).product();
        let plain = weighted_coeff_sum(&ell, 0.0)? / ell.nu_f64();
        let cnu = plain / (ell.n() as f64).powf(-delta);
        let weighted = lhs / rhs;
        report.max_weighted_ratio = report.max_weighted_ratio.max(weighted);
        report.max_cnu_ratio = report.max_cnu_ratio.max(cnu);
        // 1e-12 relative slack absorbs rounding in the floating-point products
        if weighted > 1.0 + 1e-12 || cnu > 1.0 + 1e-12 {
            report.violations.push(ell.n());
        }
        report.checked += 1;
    }
    Ok(report)
}

/// For `ℓ = 2^n` with `n` even: `(Σ_d c_ℓ(d)/ν(ℓ)) / ℓ^{−0.5849…}` together
/// with that ratio times `√n`, which stays bounded when the bound is sharp up
/// to the factor `n^{−1/2}`.
pub fn cnu_sharpness(max_n: u32) -> Result<Vec<(u32, f64, f64)>> {
    let delta = cnu_exponent();
    (2..=max_n)
        .step_by(2)
        .map(|n| {
            let ell = Factored::from_factors(&[(2, n)])?;
            let ratio = weighted_coeff_sum(&ell, 0.0)? / ell.nu_f64() / (ell.n() as f64).powf(-delta);
            Ok((n, ratio, ratio * f64::from(n).sqrt()))
        })
        .collect()
}

/// Tail `Σ_{ℓ|L^∞, Y<ℓ≤Y²} ℓ^{1+ε}/ν(ℓ)² (Σ_d c_ℓ(d))²` against the shape
/// `Y^{−2γ₀+2ε} ∏_{p|L}(1−p^{−ε})^{−1}`, which bounds it.
#[derive(Clone, Debug, Serialize)]
pub struct TailReport {
    pub l: u64,
    pub y: u64,
    pub eps: f64,
    pub tail: f64,
    pub bound: f64,
    /// `tail / (Y^{−2γ₀+2ε} τ(L))`.
    pub fitted_constant: f64,
}

pub fn ell_tail(l: &Factored, y: u64, eps: f64) -> Result<TailReport> {
    let y2 = y.checked_mul(y).ok_or(Error::Overflow("Y²"))?;
    let mut s = KahanSum::new();
    for ell in arith::smooth_divisors_up_to(l, y2)? {
        if ell.n() <= y {
            continue;
        }
        let c = weighted_coeff_sum(&ell, 0.0)?;
        let nu = ell.nu_f64();
        s.add((ell.n() as f64).powf(1.0 + eps) / (nu * nu) * c * c);
    }
    let shape = (y as f64).powf(-2.0 * gamma0() + 2.0 * eps);
    Ok(TailReport {
        l: l.n(),
        y,
        eps,
        tail: s.value(),
        bound: shape * rankin_product(l, eps),
        fitted_constant: s.value() / (shape * l.tau() as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_examples() {
        assert_eq!(cheb_coeff(2, 4).unwrap(), 3);
        assert_eq!(cheb_coeff(0, 4).unwrap(), 2);
        assert_eq!(cheb_coeff(1, 3).unwrap(), 2);
        assert_eq!(cheb_coeff(1, 4).unwrap(), 0);
        assert!(cheb_coeff(0, 61).is_err());
    }

    #[test]
    fn expansion_examples() {
        assert_eq!(expand_power_in_u(0).unwrap(), vec![1]);
        assert_eq!(expand_power_in_u(2).unwrap(), vec![1, 0, 1]);
        assert_eq!(expand_power_in_u(5).unwrap().iter().sum::<i128>(), 10);
    }

    #[test]
    fn c_ell_d_examples() {
        let f = |n| arith::factor(n).unwrap();
        assert_eq!(c_ell_d(&f(16), &f(4)).unwrap(), 3);
        assert_eq!(c_ell_d(&f(36), &f(6)).unwrap(), 0);
        assert_eq!(c_ell_d(&f(27), &f(3)).unwrap(), 2);
        assert!(c_ell_d(&f(12), &f(8)).is_err());
    }

    #[test]
    fn s_l_y_examples() {
        let f = |n| arith::factor(n).unwrap();
        assert_eq!(s_l_y(&f(1), 1000).unwrap(), 1.0);
        assert_eq!(s_l_y(&f(2), 1).unwrap(), 1.0);
        // ℓ = 2: (c_{0,1} + c_{1,1}√2)² = 2; ℓ = 4: (c_{0,2} + 2c_{2,2})² = 9
        let expect = 1.0 + 2.0 / 9.0 * 2.0 + 4.0 / 81.0 * 9.0;
        assert!((s_l_y(&f(2), 4).unwrap() - expect).abs() < 1e-14);
        assert!((s_l_y(&f(30), 5000).unwrap() - s_l_y_direct(&f(30), 5000).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn bounds_at_one() {
        let r = verify_coefficient_bounds(&Factored::one(), 1, 0.5, 0.05).unwrap();
        assert_eq!(r.checked, 1);
        assert!((r.max_weighted_ratio - 1.0).abs() < 1e-15);
        assert!((r.max_cnu_ratio - 1.0).abs() < 1e-15);
    }
}
