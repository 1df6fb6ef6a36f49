//! Dimensions of `S_κ(Γ₀(N))` and of its new subspace.

use crate::arith::{self, Factored};
use crate::characters::jacobi;

/// `dim S_κ(Γ₀(N))` for even `κ ≥ 2`, by the classical formula in terms of
/// the index, elliptic points and cusps.
pub fn cusp_form_dimension(n: &Factored, kappa: u32) -> u64 {
    assert!(kappa >= 2 && kappa % 2 == 0, "weight must be even and ≥ 2");
    // twelve times every term keeps the arithmetic integral
    let index: i64 = n.factors().iter().map(|&(p, e)| ((p + 1) * p.pow(e - 1)) as i64).product();
    let nu2: i64 = if n.valuation(2) >= 2 {
        0
    } else {
        n.factors().iter().filter(|&&(p, _)| p != 2).map(|&(p, _)| 1 + i64::from(jacobi(-1, p))).product()
    };
    let nu3: i64 = if n.valuation(3) >= 2 {
        0
    } else {
        n.factors()
            .iter()
            .filter(|&&(p, _)| p != 3)
            // the Kronecker symbol (−3/2) is −1
            .map(|&(p, _)| if p == 2 { 0 } else { 1 + i64::from(jacobi(-3, p)) })
            .product()
    };
    let cusps: i64 = n.divisors().into_iter().map(|d| arith::factor(arith::gcd(d, n.n() / d)).expect("gcd ≥ 1").euler_phi() as i64).sum();
    let k = i64::from(kappa);
    let twelve = (k - 1) * index + (12 * (k / 4) - 3 * (k - 1)) * nu2 + (12 * (k / 3) - 4 * (k - 1)) * nu3 - 6 * cusps
        + if kappa == 2 { 12 } else { 0 };
    assert!(twelve >= 0 && twelve % 12 == 0, "dimension formula is not integral for N = {}", n.n());
    (twelve / 12) as u64
}

/// `dim S_κ^new(Γ₀(N)) = Σ_{M|N} β(N/M)·dim S_κ(Γ₀(M))` with `β`
/// multiplicative, `β(p) = −2`, `β(p²) = 1`, `β(p^k) = 0` for `k ≥ 3`.
pub fn newform_dimension(n: &Factored, kappa: u32) -> u64 {
    let mut total = 0i64;
    for m in n.factored_divisors() {
        let quotient = n.div(&m).expect("m | N");
        let beta: i64 = quotient
            .factors()
            .iter()
            .map(|&(_, e)| match e {
                1 => -2,
                2 => 1,
                _ => 0,
            })
            .product();
        total += beta * cusp_form_dimension(&m, kappa) as i64;
    }
    assert!(total >= 0, "negative newform dimension at N = {}", n.n());
    total as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: u64, k: u32) -> u64 {
        cusp_form_dimension(&arith::factor(n).unwrap(), k)
    }

    #[test]
    fn known_dimensions() {
        for n in 1..=10 {
            assert_eq!(dim(n, 2), 0, "N={n}");
        }
        for n in [11u64, 14, 15, 17, 19, 20, 21, 24, 27, 32, 36, 49] {
            assert_eq!(dim(n, 2), 1, "N={n}");
        }
        assert_eq!(dim(22, 2), 2);
        assert_eq!(dim(23, 2), 2);
        assert_eq!(dim(37, 2), 2);
        assert_eq!(dim(1, 12), 1);
        assert_eq!(dim(1, 10), 0);
        assert_eq!(dim(1, 24), 2);
        assert_eq!(dim(2, 8), 1);
        assert_eq!(dim(6, 4), 1);
    }

    #[test]
    fn newform_examples() {
        let new = |n: u64, k: u32| newform_dimension(&arith::factor(n).unwrap(), k);
        assert_eq!(new(11, 2), 1);
        assert_eq!(new(22, 2), 0);
        assert_eq!(new(33, 2), 1);
        assert_eq!(new(37, 2), 2);
        assert_eq!(new(1, 12), 1);
        assert_eq!(dim(2, 12), 2);
        assert_eq!(new(2, 12), 0);
    }
}
