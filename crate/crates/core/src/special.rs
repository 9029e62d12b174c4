//! Gaussian helpers shared across modules.

use libm::erfc;

pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// Standard normal distribution function, accurate in both tails.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Mills ratio `(1 - Phi(x)) / phi(x)`.
///
/// Direct evaluation is fine on |x| <= 30, where both factors stay inside the
/// f64 range.
pub fn mills_ratio(x: f64) -> f64 {
    if x > 30.0 {
        // asymptotic series, relative error < 1e-12 here
        let x2 = x * x;
        return (1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)) / x;
    }
    std::f64::consts::FRAC_PI_2.sqrt() * erfc(x / std::f64::consts::SQRT_2) * (0.5 * x * x).exp()
}

/// Density of N(mean, var).
#[inline]
pub fn normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    (-0.5 * z * z / var).exp() / (SQRT_2PI * var.sqrt())
}

#[inline]
pub fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    -0.5 * z * z / var - LN_SQRT_2PI - 0.5 * var.ln()
}

/// Raw moments E Z^k of the standard normal.
pub fn std_normal_raw_moment(k: u32) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // (k-1)!!
    (1..k).step_by(2).map(|j| j as f64).product()
}

pub fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `ln(sum exp(a_i))` without overflow.
pub fn log_sum_exp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}
