//! The smooth cutoffs `V_i(y) = (1/2πi)∫_{(σ)} W_i(u)·y^{−u} du` of the
//! approximate functional equations, with
//! `W₁(u) = (2π)^{−u}Γ(u+κ/2)/(Γ(κ/2)·u)` for `L(1/2)` and
//! `W₂(u) = (2π)^{−2u}Γ(u+κ/2)²/(Γ(κ/2)²·u)` for `L(1/2)²`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use num_complex::Complex64;
use serde::Serialize;

use crate::numeric::{integrate, ln_gamma, Quadrature};
use crate::{Error, Result};

/// Height at which the contour is cut. `|Γ(σ+κ/2+it)|` decays like
/// `e^{−π|t|/2}`, so the dropped part is below `e^{−90}` times a polynomial.
pub const CONTOUR_HEIGHT: f64 = 60.0;
/// Contour used for `y ≥ 1`.
pub const RIGHT_LINE: f64 = 2.0;
const TOLERANCE: f64 = 1e-11;

/// Which cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VKind {
    V1,
    V2,
}

/// A cutoff function for a fixed weight, memoising evaluated points.
#[derive(Debug)]
pub struct VFunction {
    kind: VKind,
    kappa: u32,
    cache: Mutex<HashMap<u64, f64>>,
}

impl VFunction {
    pub fn new(kind: VKind, kappa: u32) -> Result<Self> {
        if kappa < 2 || kappa % 2 == 1 {
            return Err(Error::Precondition(format!("weight {kappa} must be even and ≥ 2")));
        }
        Ok(VFunction { kind, kappa, cache: Mutex::new(HashMap::new()) })
    }

    pub fn kind(&self) -> VKind {
        self.kind
    }

    pub fn kappa(&self) -> u32 {
        self.kappa
    }

    fn log_w(&self, u: Complex64) -> Complex64 {
        let h = Complex64::new(f64::from(self.kappa) / 2.0, 0.0);
        let power = match self.kind {
            VKind::V1 => 1.0,
            VKind::V2 => 2.0,
        };
        -power * u * (2.0 * PI).ln() + power * (ln_gamma(u + h) - ln_gamma(h))
    }

    /// The integral over `Re(u) = σ`, `|Im u| ≤ 60`, plus the residue `1` at
    /// `u = 0` when `σ < 0`. Needs `−κ/2 < σ`, `σ ≠ 0`.
    pub fn on_line(&self, y: f64, sigma: f64) -> Result<Quadrature> {
        if y <= 0.0 || !y.is_finite() {
            return Err(Error::Precondition(format!("V needs y > 0, got {y}")));
        }
        if sigma == 0.0 || sigma <= -f64::from(self.kappa) / 2.0 {
            return Err(Error::Precondition(format!("line Re(u) = {sigma} crosses a pole")));
        }
        let ly = y.ln();
        let integrand = |t: f64| {
            let u = Complex64::new(sigma, t);
            ((self.log_w(u) - u * ly).exp() / u).re / PI
        };
        let mut q = integrate(integrand, 0.0, CONTOUR_HEIGHT, TOLERANCE, 4000);
        if sigma < 0.0 {
            q.value += 1.0;
        }
        if !q.converged {
            return Err(Error::Budget(format!("V quadrature did not converge at y = {y} (error {:.2e})", q.error)));
        }
        Ok(q)
    }

    /// `V(y)`: on `Re(u) = 2` for `y ≥ 1`; for `y < 1` on `Re(u) = −κ/4`
    /// with the residue at `u = 0` added, which avoids the `y^{−2}`
    /// cancellation on the right line.
    pub fn eval(&self, y: f64) -> Result<f64> {
        let key = y.to_bits();
        if let Some(&v) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(v);
        }
        let sigma = if y >= 1.0 { RIGHT_LINE } else { -f64::from(self.kappa) / 4.0 };
        let v = self.on_line(y, sigma)?.value;
        self.cache.lock().expect("cache lock").insert(key, v);
        Ok(v)
    }
}

/// One-off evaluation of `V₁` or `V₂`.
pub fn v_function(kind: VKind, kappa: u32, y: f64) -> Result<f64> {
    VFunction::new(kind, kappa)?.eval(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v1_limits() {
        let v = VFunction::new(VKind::V1, 2).unwrap();
        assert!((v.eval(1e-5).unwrap() - 1.0).abs() < 1e-4);
        assert!(v.eval(50.0).unwrap().abs() < 1e-6);
    }

    #[test]
    fn v1_weight_two_is_exponential() {
        // Γ(u+1)(2πy)^{−u}/u inverts to e^{−2πy}
        let v = VFunction::new(VKind::V1, 2).unwrap();
        for y in [0.01, 0.3, 1.0, 2.5] {
            assert!((v.eval(y).unwrap() - (-2.0 * PI * y).exp()).abs() < 1e-10, "y={y}");
        }
    }

    #[test]
    fn v2_contour_independence() {
        let v = VFunction::new(VKind::V2, 2).unwrap();
        for y in [0.1, 1.0, 10.0] {
            let a = v.on_line(y, 2.0).unwrap().value;
            let b = v.on_line(y, 3.0).unwrap().value;
            assert!((a - b).abs() < 1e-8, "y={y}: {a} vs {b}");
        }
    }
}
