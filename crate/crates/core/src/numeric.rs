//! Floating-point kernels shared by the evaluators: compensated sums, root of
//! unity tables, the complex Gamma function and adaptive quadrature.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated complex sum (componentwise).
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Compensated sum of a slice.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<KahanSum>().value()
}

/// Table of `e(k/m) = exp(2πik/m)` for `0 ≤ k < m`.
///
/// Entries are products of a coarse and a fine root, each computed directly,
/// so the error is a couple of ulps independent of `m`.
#[derive(Clone, Debug)]
pub struct RootTable {
    modulus: u64,
    table: Vec<Complex64>,
}

impl RootTable {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 1);
        let m = modulus as usize;
        let block = ((m as f64).sqrt().ceil() as usize).max(1);
        let angle = |k: usize| 2.0 * PI * (k as f64) / (m as f64);
        let fine: Vec<Complex64> = (0..block).map(|j| Complex64::from_polar(1.0, angle(j))).collect();
        let coarse: Vec<Complex64> = (0..m.div_ceil(block)).map(|i| Complex64::from_polar(1.0, angle(i * block))).collect();
        let mut table = Vec::with_capacity(m);
        'fill: for c in &coarse {
            for f in &fine {
                if table.len() == m {
                    break 'fill;
                }
                table.push(c * f);
            }
        }
        RootTable { modulus, table }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `e(k/m)` for a residue already reduced to `[0, m)`.
    #[inline]
    pub fn get(&self, k: u64) -> Complex64 {
        self.table[k as usize]
    }

    /// `e(k/m)` for any signed `k`.
    #[inline]
    pub fn at(&self, k: i64) -> Complex64 {
        self.table[k.rem_euclid(self.modulus as i64) as usize]
    }

    /// Real part `cos(2πk/m)` for a reduced residue.
    #[inline]
    pub fn cos(&self, k: u64) -> f64 {
        self.table[k as usize].re
    }
}

/// `e(x) = exp(2πix)` for a rational `num/den`, reduced exactly before the
/// transcendental call.
pub fn e_rational(num: i128, den: u64) -> Complex64 {
    let r = num.rem_euclid(den as i128) as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r / den as f64)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `log Γ(z)` on the principal branch away from the poles.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Γ(z)Γ(1−z) = π / sin(πz)
        let s = (Complex64::new(PI, 0.0) * z).sin();
        return Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + x.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    ln_gamma(z).exp()
}

/// Γ(n) for a positive integer, exactly representable up to n = 23.
pub fn factorial_gamma(n: u32) -> f64 {
    (1..n).map(f64::from).product()
}

// Gauss–Kronrod 7/15 nodes and weights on [−1, 1].
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let pair = f(c - x) + f(c + x);
        kronrod += GK_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += G_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Result of an adaptive quadrature.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Globally adaptive Gauss–Kronrod quadrature with absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_intervals: usize) -> Quadrature {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let total_err: f64 = parts.iter().map(|p| p.3).sum();
        if total_err <= tol || parts.len() >= max_intervals {
            let value = parts.iter().map(|p| p.2).collect::<KahanSum>().value();
            return Quadrature { value, error: total_err, converged: total_err <= tol };
        }
        let (idx, _) = parts.iter().enumerate().max_by(|x, y| x.1 .3.total_cmp(&y.1 .3)).expect("non-empty partition");
        let (lo, hi, _, _) = parts.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// Sums `f(i)` for `i` in `0..len` in fixed-size blocks; blocks are evaluated
/// in parallel and combined in index order, so the result does not depend on
/// the number of worker threads.
pub fn ordered_block_sum<F>(len: usize, block: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let block = block.max(1);
    let partials: Vec<f64> = (0..len.div_ceil(block))
        .into_par_iter()
        .map(|b| {
            let mut s = KahanSum::new();
            for i in b * block..((b + 1) * block).min(len) {
                s.add(f(i));
            }
            s.value()
        })
        .collect();
    partials.into_iter().collect::<KahanSum>().value()
}

/// Complex analogue of [`ordered_block_sum`].
pub fn ordered_block_sum_complex<F>(len: usize, block: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let block = block.max(1);
    let partials: Vec<Complex64> = (0..len.div_ceil(block))
        .into_par_iter()
        .map(|b| {
            let mut s = ComplexKahanSum::new();
            for i in b * block..((b + 1) * block).min(len) {
                s.add(f(i));
            }
            s.value()
        })
        .collect();
    let mut s = ComplexKahanSum::new();
    for p in partials {
        s.add(p);
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut s = KahanSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn root_table_matches_direct() {
        for m in [1u64, 2, 7, 360, 1009, 65_536] {
            let t = RootTable::new(m);
            for k in (0..m).step_by((m as usize / 50).max(1)) {
                let direct = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
                assert!((t.get(k) - direct).norm() < 1e-14, "m={m} k={k}");
            }
        }
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma(Complex64::new(5.0, 0.0)).re - 24.0).abs() < 1e-12);
        assert!((gamma(Complex64::new(0.5, 0.0)).re - PI.sqrt()).abs() < 1e-14);
        // |Γ(1/2 + it)|² = π / cosh(πt)
        for t in [0.3, 2.0, 10.0, 40.0] {
            let g = gamma(Complex64::new(0.5, t));
            let expect = PI / (PI * t).cosh();
            assert!((g.norm_sqr() / expect - 1.0).abs() < 1e-12, "t={t}");
        }
        // reflection branch
        let z = Complex64::new(-1.5, 0.0);
        assert!((gamma(z).re - 4.0 * PI.sqrt() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_smooth_and_oscillatory() {
        let q = integrate(|x| x.exp(), 0.0, 1.0, 1e-13, 100);
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-13);
        let q = integrate(|x| (30.0 * x).cos(), 0.0, 10.0, 1e-12, 1000);
        assert!((q.value - (300f64).sin() / 30.0).abs() < 1e-11);
    }

    #[test]
    fn ordered_sum_is_thread_independent() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| ordered_block_sum(100_000, 512, f));
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| ordered_block_sum(100_000, 512, f));
        assert_eq!(one.to_bits(), four.to_bits());
    }
}
