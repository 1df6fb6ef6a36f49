//! Bessel functions `J_ν(x)` of integer order for `x ≥ 0`.
//!
//! Three regimes: the ascending series for `x ≤ 12`, Miller's backward
//! recurrence up to `max(40, ν²)`, and the Hankel asymptotic expansion beyond,
//! where its terms shrink fast enough for full double precision.

use std::f64::consts::PI;

use crate::numeric::factorial_gamma;

const SERIES_LIMIT: f64 = 12.0;

/// `J_ν(x)` for `x ≥ 0`.
pub fn bessel_j(nu: u32, x: f64) -> f64 {
    assert!(x >= 0.0 && x.is_finite(), "bessel_j needs finite x ≥ 0, got {x}");
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if x <= SERIES_LIMIT {
        series(nu, x)
    } else if x < hankel_threshold(nu) {
        miller(nu, x)
    } else {
        hankel(nu, x)
    }
}

/// `min(1, (x/2)^ν / ν!)`, an upper bound for `|J_ν(x)|` at `x ≥ 0`.
pub fn bessel_j_bound(nu: u32, x: f64) -> f64 {
    let power = (0.5 * x).powi(nu as i32) / factorial_gamma(nu + 1);
    power.min(1.0)
}

fn hankel_threshold(nu: u32) -> f64 {
    40f64.max(f64::from(nu * nu))
}

fn series(nu: u32, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powi(nu as i32) / factorial_gamma(nu + 1);
    let q = -h * h;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (f64::from(k) * f64::from(k + nu));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && f64::from(k) > h {
            return sum;
        }
        if k > 500 {
            return sum;
        }
    }
}

/// Backward recurrence `J_{k−1} = (2k/x)·J_k − J_{k+1}` from a start index
/// well above both `ν` and `x`, normalised by `J_0 + 2·Σ J_{2k} = 1`.
fn miller(nu: u32, x: f64) -> f64 {
    let top = (x.max(f64::from(nu)) + 30.0 + (40.0 * x.max(f64::from(nu))).sqrt()) as u32;
    let start = top + (top & 1);
    let (mut above, mut cur) = (0.0f64, 1e-300f64);
    let mut picked = 0.0;
    let mut norm = 0.0;
    let mut k = start;
    while k > 0 {
        // cur holds J_k (unnormalised)
        if k == nu {
            picked = cur;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let below = 2.0 * f64::from(k) / x * cur - above;
        above = cur;
        cur = below;
        k -= 1;
        if cur.abs() > 1e250 {
            above *= 1e-250;
            cur *= 1e-250;
            picked *= 1e-250;
            norm *= 1e-250;
        }
    }
    // cur now holds J_0
    if nu == 0 {
        picked = cur;
    }
    norm += cur;
    picked / norm
}

/// Hankel expansion `J_ν(x) = √(2/(πx))·(P·cos χ − Q·sin χ)`,
/// `χ = x − (ν/2 + 1/4)π`, summed until the terms fall below `1e−17` or
/// stop decreasing.
fn hankel(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * f64::from(nu) * f64::from(nu);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..60u32 {
        let odd = f64::from(2 * k - 1);
        a *= (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        if a.abs() >= last || a == 0.0 {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * f64::from(nu) + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_argument_values() {
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_j(0, 0.0) - 1.0).abs() == 0.0);
        assert_eq!(bessel_j(3, 0.0), 0.0);
    }

    #[test]
    fn regimes_agree_at_their_boundaries() {
        for nu in [1u32, 5, 11] {
            let x = SERIES_LIMIT;
            assert!((series(nu, x) - miller(nu, x)).abs() < 1e-12, "nu={nu}");
            let x = hankel_threshold(nu);
            assert!((miller(nu, x) - hankel(nu, x)).abs() < 1e-12, "nu={nu}");
        }
    }

    #[test]
    fn bound_holds() {
        for nu in [1u32, 3, 9] {
            for i in 1..400 {
                let x = 0.05 * f64::from(i) * f64::from(i);
                assert!(bessel_j(nu, x).abs() <= bessel_j_bound(nu, x) + 1e-15);
            }
        }
    }
}
