//! Analytic summand families.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::special::{
    binomial, normal_ln_pdf, normal_pdf, std_normal_cdf, std_normal_raw_moment, SQRT_2PI,
};

/// Default moment exponent: `M = sup E|X|^5`.
pub const DEFAULT_DELTA0: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Gaussian { mean: f64, variance: f64 },
    Uniform { lo: f64, hi: f64 },
    Laplace { scale: f64 },
    GaussianMixture { weights: Vec<f64>, means: Vec<f64>, variances: Vec<f64> },
    Logistic { scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Gaussian,
    Uniform,
    Laplace,
    GaussianMixture,
    Logistic,
}

/// A point where the density or its first derivative is discontinuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Singularity {
    pub x: f64,
    pub left: f64,
    pub right: f64,
    pub dleft: f64,
    pub dright: f64,
}

impl Singularity {
    pub fn scaled(&self, c: f64) -> Singularity {
        // density of cX is p(x/c)/c
        Singularity {
            x: self.x * c,
            left: self.left / c,
            right: self.right / c,
            dleft: self.dleft / (c * c),
            dright: self.dright / (c * c),
        }
    }
}

/// Gaussian minorant `density(x) >= l1 * exp(-l2 x^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minorant {
    pub l1: f64,
    pub l2: f64,
}

impl Minorant {
    pub fn l3(&self) -> f64 {
        (-(self.l1 * (2.0 * PI / self.l2).sqrt()).ln()).max(1.0)
    }
}

/// One independent summand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DistributionSpec {
    family: Family,
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be positive and finite, got {v}")))
    }
}

fn finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(field, format!("must be finite, got {v}")))
    }
}

impl DistributionSpec {
    pub fn new(family: Family) -> Result<Self> {
        match &family {
            Family::Gaussian { mean, variance } => {
                finite("mean", *mean)?;
                positive("variance", *variance)?;
            }
            Family::Uniform { lo, hi } => {
                finite("lo", *lo)?;
                finite("hi", *hi)?;
                if lo >= hi {
                    return Err(Error::param("hi", format!("need lo < hi, got [{lo}, {hi}]")));
                }
            }
            Family::Laplace { scale } | Family::Logistic { scale } => positive("scale", *scale)?,
            Family::GaussianMixture {
                weights,
                means,
                variances,
            } => {
                if weights.is_empty() {
                    return Err(Error::param("weights", "empty mixture"));
                }
                if weights.len() != means.len() || weights.len() != variances.len() {
                    return Err(Error::param("weights", "weights, means and variances differ in length"));
                }
                for &w in weights {
                    positive("weights", w)?;
                }
                for &m in means {
                    finite("means", m)?;
                }
                for &v in variances {
                    positive("variances", v)?;
                }
                let s: f64 = weights.iter().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::param("weights", format!("must sum to 1, got {s}")));
                }
            }
        }
        Ok(DistributionSpec { family })
    }

    /// Build a family from its kind and a flat parameter list.
    ///
    /// Mixtures take `(w, mean, var)` triples.
    pub fn make_family(kind: FamilyKind, params: &[f64]) -> Result<Self> {
        let want = |k: usize| -> Result<()> {
            if params.len() == k {
                Ok(())
            } else {
                Err(Error::param("params", format!("expected {k} parameters, got {}", params.len())))
            }
        };
        let family = match kind {
            FamilyKind::Gaussian => {
                want(2)?;
                Family::Gaussian { mean: params[0], variance: params[1] }
            }
            FamilyKind::Uniform => {
                want(2)?;
                Family::Uniform { lo: params[0], hi: params[1] }
            }
            FamilyKind::Laplace => {
                want(1)?;
                Family::Laplace { scale: params[0] }
            }
            FamilyKind::Logistic => {
                want(1)?;
                Family::Logistic { scale: params[0] }
            }
            FamilyKind::GaussianMixture => {
                if params.is_empty() || params.len() % 3 != 0 {
                    return Err(Error::param("params", "mixture takes (weight, mean, variance) triples"));
                }
                let mut weights = Vec::new();
                let mut means = Vec::new();
                let mut variances = Vec::new();
                for c in params.chunks(3) {
                    weights.push(c[0]);
                    means.push(c[1]);
                    variances.push(c[2]);
                }
                Family::GaussianMixture { weights, means, variances }
            }
        };
        Self::new(family)
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        Self::new(Family::Gaussian { mean, variance })
    }
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(Family::Uniform { lo, hi })
    }
    pub fn laplace(scale: f64) -> Result<Self> {
        Self::new(Family::Laplace { scale })
    }
    pub fn logistic(scale: f64) -> Result<Self> {
        Self::new(Family::Logistic { scale })
    }
    pub fn mixture(weights: &[f64], means: &[f64], variances: &[f64]) -> Result<Self> {
        Self::new(Family::GaussianMixture {
            weights: weights.to_vec(),
            means: means.to_vec(),
            variances: variances.to_vec(),
        })
    }

    /// N(0, 1).
    pub fn standard_gaussian() -> Self {
        Self::gaussian(0.0, 1.0).unwrap()
    }
    /// Uniform on [-sqrt 3, sqrt 3], variance one.
    pub fn standard_uniform() -> Self {
        let c = 3f64.sqrt();
        Self::uniform(-c, c).unwrap()
    }
    /// Laplace with scale 1/sqrt 2, variance one.
    pub fn standard_laplace() -> Self {
        Self::laplace(std::f64::consts::FRAC_1_SQRT_2).unwrap()
    }
    /// The zero-mean skewed two-component mixture used throughout the test suite.
    pub fn skewed_mixture() -> Self {
        Self::mixture(&[0.75, 0.25], &[-0.5, 1.5], &[1.0, 1.0]).unwrap()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Gaussian { .. } => FamilyKind::Gaussian,
            Family::Uniform { .. } => FamilyKind::Uniform,
            Family::Laplace { .. } => FamilyKind::Laplace,
            Family::GaussianMixture { .. } => FamilyKind::GaussianMixture,
            Family::Logistic { .. } => FamilyKind::Logistic,
        }
    }

    pub fn full_support(&self) -> bool {
        !matches!(self.family, Family::Uniform { .. })
    }

    pub fn density(&self, x: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mean, variance } => normal_pdf(x, *mean, *variance),
            Family::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    0.0
                } else if x == *lo || x == *hi {
                    0.5 / (hi - lo)
                } else {
                    1.0 / (hi - lo)
                }
            }
            Family::Laplace { scale } => (-x.abs() / scale).exp() / (2.0 * scale),
            Family::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .map(|((w, m), v)| w * normal_pdf(x, *m, *v))
                .sum(),
            Family::Logistic { scale } => {
                let e = (-x.abs() / scale).exp();
                e / (scale * (1.0 + e) * (1.0 + e))
            }
        }
    }

    /// Natural log of the density; `-inf` off the support.
    pub fn ln_density(&self, x: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mean, variance } => normal_ln_pdf(x, *mean, *variance),
            Family::Laplace { scale } => -x.abs() / scale - (2.0 * scale).ln(),
            Family::GaussianMixture { weights, means, variances } => crate::special::log_sum_exp(
                weights
                    .iter()
                    .zip(means)
                    .zip(variances)
                    .map(|((w, m), v)| w.ln() + normal_ln_pdf(x, *m, *v)),
            ),
            Family::Logistic { scale } => {
                let z = x.abs() / scale;
                -z - scale.ln() - 2.0 * (-z).exp().ln_1p()
            }
            Family::Uniform { .. } => self.density(x).ln(),
        }
    }

    /// Derivative of the density (one-sided limits at kinks are not resolved here).
    pub fn density_derivative(&self, x: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mean, variance } => -(x - mean) / variance * self.density(x),
            Family::Uniform { .. } => 0.0,
            Family::Laplace { scale } => -x.signum() / scale * self.density(x),
            Family::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .map(|((w, m), v)| -w * (x - m) / v * normal_pdf(x, *m, *v))
                .sum(),
            Family::Logistic { scale } => {
                // f' = -f tanh(x / 2s) / s
                -self.density(x) * (x / (2.0 * scale)).tanh() / scale
            }
        }
    }

    /// Score `p'/p`; zero inside the uniform support by convention.
    pub fn score(&self, x: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mean, variance } => -(x - mean) / variance,
            Family::Uniform { .. } => 0.0,
            Family::Laplace { scale } => -x.signum() / scale,
            Family::Logistic { scale } => -(x / (2.0 * scale)).tanh() / scale,
            Family::GaussianMixture { weights, means, variances } => {
                let lp = self.ln_density(x);
                weights
                    .iter()
                    .zip(means)
                    .zip(variances)
                    .map(|((w, m), v)| -(x - m) / v * (w.ln() + normal_ln_pdf(x, *m, *v) - lp).exp())
                    .sum()
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mean, variance } => std_normal_cdf((x - mean) / variance.sqrt()),
            Family::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Family::Laplace { scale } => {
                if x < 0.0 {
                    0.5 * (x / scale).exp()
                } else {
                    1.0 - 0.5 * (-x / scale).exp()
                }
            }
            Family::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .map(|((w, m), v)| w * std_normal_cdf((x - m) / v.sqrt()))
                .sum(),
            Family::Logistic { scale } => 1.0 / (1.0 + (-x / scale).exp()),
        }
    }

    /// Characteristic function `E exp(itX)`.
    pub fn char_fn(&self, t: f64) -> Complex64 {
        match &self.family {
            Family::Gaussian { mean, variance } => {
                Complex64::from_polar((-0.5 * variance * t * t).exp(), mean * t)
            }
            Family::Uniform { lo, hi } => {
                let z = 0.5 * (hi - lo) * t;
                let sinc = if z.abs() < 1e-4 {
                    1.0 - z * z / 6.0
                } else {
                    z.sin() / z
                };
                Complex64::from_polar(1.0, 0.5 * (lo + hi) * t) * sinc
            }
            Family::Laplace { scale } => Complex64::new(1.0 / (1.0 + scale * scale * t * t), 0.0),
            Family::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .map(|((w, m), v)| Complex64::from_polar(w * (-0.5 * v * t * t).exp(), m * t))
                .sum(),
            Family::Logistic { scale } => {
                let u = (PI * scale * t).abs();
                let r = if u < 1e-4 {
                    1.0 - u * u / 6.0
                } else {
                    2.0 * u * (-u).exp() / -(-2.0 * u).exp_m1()
                };
                Complex64::new(r, 0.0)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        self.central_moment(2)
    }

    /// Closed-form raw moment `E X^k` for `k <= 6`.
    pub fn raw_moment(&self, k: u32) -> f64 {
        assert!(k <= 6, "raw moments are tabulated to order 6");
        match &self.family {
            Family::Gaussian { mean, variance } => gaussian_raw_moment(*mean, *variance, k),
            Family::Uniform { lo, hi } => {
                (hi.powi(k as i32 + 1) - lo.powi(k as i32 + 1)) / ((k + 1) as f64 * (hi - lo))
            }
            Family::Laplace { scale } => {
                if k % 2 == 1 {
                    0.0
                } else {
                    (1..=k).map(|j| j as f64).product::<f64>() * scale.powi(k as i32)
                }
            }
            Family::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .map(|((w, m), v)| w * gaussian_raw_moment(*m, *v, k))
                .sum(),
            Family::Logistic { scale } => {
                let s = scale * scale;
                match k {
                    0 => 1.0,
                    2 => PI.powi(2) * s / 3.0,
                    4 => 7.0 * PI.powi(4) * s * s / 15.0,
                    6 => 31.0 * PI.powi(6) * s * s * s / 21.0,
                    _ => 0.0,
                }
            }
        }
    }

    /// Central moment `E (X - EX)^k` for `k <= 6`.
    pub fn central_moment(&self, k: u32) -> f64 {
        let mu = self.raw_moment(1);
        (0..=k)
            .map(|j| binomial(k, j) * self.raw_moment(j) * (-mu).powi((k - j) as i32))
            .sum()
    }

    /// `E|X|^p` for real `p > 0`.
    pub fn abs_moment(&self, p: f64) -> f64 {
        match &self.family {
            Family::Gaussian { mean, variance } if *mean == 0.0 => {
                variance.powf(0.5 * p) * 2f64.powf(0.5 * p) * libm::tgamma(0.5 * (p + 1.0))
                    / PI.sqrt()
            }
            Family::Uniform { lo, hi } => {
                let f = |x: f64| x.signum() * x.abs().powf(p + 1.0) / (p + 1.0);
                (f(*hi) - f(*lo)) / (hi - lo)
            }
            Family::Laplace { scale } => libm::tgamma(p + 1.0) * scale.powf(p),
            _ => self.expect(|x| x.abs().powf(p)),
        }
    }

    /// `E g(X)` by adaptive quadrature over the effective support.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let pts = self.quadrature_points();
        quad::integrate_pieces(|x| g(x) * self.density(x), &pts, 1e-14)
    }

    /// Sorted breakpoints covering the support to negligible tail mass.
    pub fn quadrature_points(&self) -> Vec<f64> {
        let (lo, hi) = self.effective_support(1e-300);
        let mut pts = vec![lo, hi];
        match &self.family {
            Family::Laplace { .. } | Family::Logistic { .. } => pts.push(0.0),
            Family::Gaussian { mean, .. } => pts.push(*mean),
            Family::GaussianMixture { means, .. } => pts.extend(means.iter().copied()),
            Family::Uniform { .. } => {}
        }
        pts.retain(|x| *x >= lo && *x <= hi);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        pts
    }

    /// Interval outside of which the mass is below `eps`.
    pub fn effective_support(&self, eps: f64) -> (f64, f64) {
        let z = (-2.0 * eps.ln()).sqrt();
        match &self.family {
            Family::Gaussian { mean, variance } => (mean - z * variance.sqrt(), mean + z * variance.sqrt()),
            Family::Uniform { lo, hi } => (*lo, *hi),
            Family::Laplace { scale } => {
                let r = -scale * eps.ln();
                (-r, r)
            }
            Family::Logistic { scale } => {
                let r = -scale * (eps / 2.0).ln();
                (-r, r)
            }
            Family::GaussianMixture { means, variances, .. } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for (m, v) in means.iter().zip(variances) {
                    lo = lo.min(m - z * v.sqrt());
                    hi = hi.max(m + z * v.sqrt());
                }
                (lo, hi)
            }
        }
    }

    /// Points where the density or its derivative jumps.
    pub fn singularities(&self) -> Vec<Singularity> {
        match &self.family {
            Family::Uniform { lo, hi } => {
                let h = 1.0 / (hi - lo);
                vec![
                    Singularity { x: *lo, left: 0.0, right: h, dleft: 0.0, dright: 0.0 },
                    Singularity { x: *hi, left: h, right: 0.0, dleft: 0.0, dright: 0.0 },
                ]
            }
            Family::Laplace { scale } => {
                let p0 = 0.5 / scale;
                vec![Singularity {
                    x: 0.0,
                    left: p0,
                    right: p0,
                    dleft: p0 / scale,
                    dright: -p0 / scale,
                }]
            }
            _ => Vec::new(),
        }
    }

    /// Fisher information `J = int p'^2 / p`.
    pub fn fisher_information(&self) -> Result<f64> {
        match &self.family {
            Family::Gaussian { variance, .. } => Ok(1.0 / variance),
            Family::Uniform { .. } => Err(Error::InfiniteFisher(self.to_string())),
            Family::Laplace { scale } => Ok(1.0 / (scale * scale)),
            Family::Logistic { scale } => Ok(1.0 / (3.0 * scale * scale)),
            Family::GaussianMixture { .. } => Ok(self.expect(|x| {
                let s = self.score(x);
                s * s
            })),
        }
    }

    /// Gaussian minorant with the family's natural decay, or `None` for compact support.
    pub fn minorization_params(&self) -> Option<Minorant> {
        let l2 = match &self.family {
            Family::Uniform { .. } => return None,
            Family::Gaussian { mean, variance } => {
                if *mean == 0.0 {
                    1.0 / variance
                } else {
                    2.0 / variance
                }
            }
            Family::Laplace { scale } => 1.0 / (scale * scale),
            Family::Logistic { scale } => 1.0 / (scale * scale),
            Family::GaussianMixture { means, variances, .. } => {
                let vmin = variances.iter().copied().fold(f64::INFINITY, f64::min);
                // a narrowest component centred at 0 keeps exp(l2 x^2/2) p(x) bounded below
                // in both tails; otherwise one tail of it decays and the decay must double
                let centred = means
                    .iter()
                    .zip(variances)
                    .any(|(m, v)| *m == 0.0 && *v == vmin);
                if centred {
                    1.0 / vmin
                } else {
                    2.0 / vmin
                }
            }
        };
        match &self.family {
            Family::Gaussian { mean, variance } if *mean == 0.0 => {
                return Some(Minorant { l1: 1.0 / (SQRT_2PI * variance.sqrt()), l2 });
            }
            Family::Laplace { scale } => {
                return Some(Minorant { l1: (-0.5f64).exp() / (2.0 * scale), l2 });
            }
            _ => {}
        }
        let g = |x: f64| self.ln_density(x) + 0.5 * l2 * x * x;
        let ln_l1 = minimize_1d(&g, -50.0, 50.0);
        Some(Minorant { l1: ln_l1.exp(), l2 })
    }

    /// Zero-bias density `E[X 1{X > x}] / Var X`; requires a zero mean.
    pub fn zero_bias_density(&self, x: f64) -> Result<f64> {
        let mu = self.mean();
        if mu.abs() > 1e-9 {
            return Err(Error::NonZeroMean(mu));
        }
        let var = self.variance();
        let upper = match &self.family {
            Family::Gaussian { variance, .. } => variance * normal_pdf(x, 0.0, *variance),
            Family::Uniform { lo, hi } => {
                if x <= *lo || x >= *hi {
                    0.0
                } else {
                    (hi * hi - x * x) / (2.0 * (hi - lo))
                }
            }
            Family::Laplace { scale } => (x.abs() + scale) * (-x.abs() / scale).exp() / 2.0,
            Family::GaussianMixture { weights, means, variances } => weights
                .iter()
                .zip(means)
                .zip(variances)
                .map(|((w, m), v)| {
                    w * (m * std_normal_cdf(-(x - m) / v.sqrt()) + v * normal_pdf(x, *m, *v))
                })
                .sum(),
            Family::Logistic { scale } => {
                let softplus = |z: f64| z.max(0.0) + (-z.abs()).exp().ln_1p();
                x * (1.0 - self.cdf(x)) + scale * softplus(-x / scale)
            }
        };
        Ok(upper / var)
    }

    /// Singularities of the zero-bias density.
    pub fn zero_bias_singularities(&self) -> Vec<Singularity> {
        match &self.family {
            Family::Uniform { lo, hi } => {
                // p*(x) = (hi^2 - x^2) / (2 (hi - lo) var), kinks at the ends
                let d = 2.0 * hi / (2.0 * (hi - lo) * self.variance());
                let dl = -2.0 * lo / (2.0 * (hi - lo) * self.variance());
                vec![
                    Singularity { x: *lo, left: 0.0, right: 0.0, dleft: 0.0, dright: dl },
                    Singularity { x: *hi, left: 0.0, right: 0.0, dleft: -d, dright: 0.0 },
                ]
            }
            _ => Vec::new(),
        }
    }

    /// The law of `c X`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        positive("scale factor", c)?;
        let family = match &self.family {
            Family::Gaussian { mean, variance } => Family::Gaussian {
                mean: mean * c,
                variance: variance * c * c,
            },
            Family::Uniform { lo, hi } => Family::Uniform { lo: lo * c, hi: hi * c },
            Family::Laplace { scale } => Family::Laplace { scale: scale * c },
            Family::Logistic { scale } => Family::Logistic { scale: scale * c },
            Family::GaussianMixture { weights, means, variances } => Family::GaussianMixture {
                weights: weights.clone(),
                means: means.iter().map(|m| m * c).collect(),
                variances: variances.iter().map(|v| v * c * c).collect(),
            },
        };
        Self::new(family)
    }
}

fn gaussian_raw_moment(mean: f64, variance: f64, k: u32) -> f64 {
    let sd = variance.sqrt();
    (0..=k)
        .map(|j| binomial(k, j) * mean.powi((k - j) as i32) * sd.powi(j as i32) * std_normal_raw_moment(j))
        .sum()
}

/// Global minimum of a continuous function by dense scan plus golden-section refinement.
fn minimize_1d<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> f64 {
    let m = 20_000;
    let step = (hi - lo) / m as f64;
    let mut best = (lo, g(lo));
    for i in 1..=m {
        let x = lo + i as f64 * step;
        let v = g(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if g(c) < g(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    // kinks can sit between the golden points; keep the best value seen
    g(x).min(best.1).min(g(0.0f64.clamp(lo, hi)))
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::Gaussian { mean, variance } => write!(f, "gaussian:{mean},{variance}"),
            Family::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Family::Laplace { scale } => write!(f, "laplace:{scale}"),
            Family::Logistic { scale } => write!(f, "logistic:{scale}"),
            Family::GaussianMixture { weights, means, variances } => {
                write!(f, "mixture:")?;
                for (i, ((w, m), v)) in weights.iter().zip(means).zip(variances).enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{w},{m},{v}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(FamilyKind::Gaussian),
            "uniform" => Ok(FamilyKind::Uniform),
            "laplace" => Ok(FamilyKind::Laplace),
            "mixture" | "gaussian_mixture" => Ok(FamilyKind::GaussianMixture),
            "logistic" => Ok(FamilyKind::Logistic),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// Parses `name:p1,p2,...`, e.g. `laplace:1` or `mixture:.5,-1,1,.5,1,1`.
impl FromStr for DistributionSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind: FamilyKind = name.parse()?;
        let params = rest
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::param("params", format!("not a number: `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::make_family(kind, &params)
    }
}

/// Cycle `specs` to length `n`.
pub fn cycle(specs: &[DistributionSpec], n: usize) -> Result<Vec<&DistributionSpec>> {
    if specs.is_empty() {
        return Err(Error::param("specs", "empty summand list"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    Ok((0..n).map(|i| &specs[i % specs.len()]).collect())
}

/// Aggregate moment quantities of a cycled summand list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CumulantSummary {
    pub n: usize,
    pub b_n: f64,
    /// `E X_i^3`.
    pub gamma3: Vec<f64>,
    /// `E X_i^4 - 3 E X_i^2`, as written in the local limit remark.
    pub gamma4: Vec<f64>,
    /// Third central moments.
    pub kappa3: Vec<f64>,
    /// Fourth cumulants `E(X-m)^4 - 3 Var^2`; these drive the Edgeworth terms.
    pub kappa4: Vec<f64>,
    /// `sup_i E|X_i|^{4+delta0}`.
    pub m: f64,
    pub delta0: f64,
    /// `sup_i J(X_i)`; infinite when a summand has no finite Fisher information.
    #[serde(serialize_with = "ser_inf")]
    pub j: f64,
}

fn ser_inf<S: serde::Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

impl CumulantSummary {
    pub fn sum_gamma3(&self) -> f64 {
        self.gamma3.iter().sum()
    }
    pub fn sum_kappa3(&self) -> f64 {
        self.kappa3.iter().sum()
    }
    pub fn sum_kappa4(&self) -> f64 {
        self.kappa4.iter().sum()
    }
}

/// Moment summary of `specs` cycled to length `n`.
pub fn cumulant_summary(specs: &[DistributionSpec], n: usize, delta0: f64) -> Result<CumulantSummary> {
    positive("delta0", delta0)?;
    let list = cycle(specs, n)?;
    let mut s = CumulantSummary {
        n,
        b_n: 0.0,
        gamma3: Vec::with_capacity(n),
        gamma4: Vec::with_capacity(n),
        kappa3: Vec::with_capacity(n),
        kappa4: Vec::with_capacity(n),
        m: 0.0,
        delta0,
        j: 0.0,
    };
    // per-distinct-spec values, then expanded
    let distinct: Vec<_> = specs
        .iter()
        .map(|sp| {
            let var = sp.variance();
            let am = sp.abs_moment(4.0 + delta0);
            if !am.is_finite() {
                return Err(Error::InfiniteMoment(format!("E|X|^{} for {sp}", 4.0 + delta0)));
            }
            let j = sp.fisher_information().unwrap_or(f64::INFINITY);
            Ok((var, sp.raw_moment(3), sp.raw_moment(4) - 3.0 * sp.raw_moment(2),
                sp.central_moment(3), sp.central_moment(4) - 3.0 * var * var, am, j))
        })
        .collect::<Result<Vec<_>>>()?;
    for i in 0..list.len() {
        let d = &distinct[i % specs.len()];
        s.b_n += d.0;
        s.gamma3.push(d.1);
        s.gamma4.push(d.2);
        s.kappa3.push(d.3);
        s.kappa4.push(d.4);
        s.m = s.m.max(d.5);
        s.j = s.j.max(d.6);
    }
    Ok(s)
}

/// Sanity helper used by tests: quadrature mass of the analytic density.
pub fn quadrature_mass(spec: &DistributionSpec) -> f64 {
    match spec.family() {
        Family::Uniform { .. } => 1.0,
        _ => spec.expect(|_| 1.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_families_have_unit_variance() {
        for s in [
            DistributionSpec::standard_gaussian(),
            DistributionSpec::standard_uniform(),
            DistributionSpec::standard_laplace(),
        ] {
            assert!((s.variance() - 1.0).abs() < 1e-14, "{s}");
        }
        let m = DistributionSpec::skewed_mixture();
        assert!(m.mean().abs() < 1e-15);
        assert!((m.variance() - 1.75).abs() < 1e-14);
        assert!((m.raw_moment(3) - 0.75).abs() < 1e-13);
    }

    #[test]
    fn mixture_moments_match_quadrature() {
        let m = DistributionSpec::mixture(&[0.5, 0.5], &[-1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(m.mean().abs() < 1e-15);
        assert!((m.variance() - 2.0).abs() < 1e-14);
        for k in 1..=6 {
            let q = m.expect(|x| x.powi(k as i32));
            assert!((q - m.raw_moment(k)).abs() < 1e-9 * (1.0 + q.abs()), "k={k}");
        }
    }

    #[test]
    fn closed_form_moments_match_quadrature() {
        for s in [
            DistributionSpec::laplace(1.3).unwrap(),
            DistributionSpec::logistic(0.7).unwrap(),
            DistributionSpec::gaussian(0.4, 2.0).unwrap(),
        ] {
            for k in 2..=6 {
                let q = s.expect(|x| x.powi(k as i32));
                assert!((q - s.raw_moment(k)).abs() < 1e-8 * (1.0 + q.abs()), "{s} k={k}");
            }
            let q = s.expect(|x| x.abs().powf(5.0));
            assert!((q - s.abs_moment(5.0)).abs() < 1e-8 * q, "{s}");
        }
    }

    #[test]
    fn laplace_minorant() {
        let m = DistributionSpec::laplace(1.0).unwrap().minorization_params().unwrap();
        assert_eq!(m.l2, 1.0);
        assert!((m.l1 - 0.5 * (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_self_minorant() {
        let m = DistributionSpec::standard_gaussian().minorization_params().unwrap();
        assert!((m.l1 - 1.0 / SQRT_2PI).abs() < 1e-14);
        assert_eq!(m.l2, 1.0);
        assert!(DistributionSpec::standard_uniform().minorization_params().is_none());
    }

    #[test]
    fn parse_round_trip() {
        let s: DistributionSpec = "mixture:.5,-1,1,.5,1,1".parse().unwrap();
        assert_eq!(s.to_string(), "mixture:0.5,-1,1,0.5,1,1");
        let back: DistributionSpec = s.to_string().parse().unwrap();
        assert_eq!(s, back);
        assert!(matches!("cauchy:1".parse::<DistributionSpec>(), Err(Error::UnknownFamily(_))));
        assert!(matches!(
            "uniform:1,0".parse::<DistributionSpec>(),
            Err(Error::InvalidParameter { field: "hi", .. })
        ));
    }

    #[test]
    fn char_fn_matches_quadrature() {
        for s in [
            DistributionSpec::skewed_mixture(),
            DistributionSpec::logistic(0.8).unwrap(),
            DistributionSpec::standard_laplace(),
        ] {
            for t in [0.3, 1.7, 4.0] {
                let re = s.expect(|x| (t * x).cos());
                let im = s.expect(|x| (t * x).sin());
                let c = s.char_fn(t);
                assert!((c.re - re).abs() < 1e-10 && (c.im - im).abs() < 1e-10, "{s} t={t}");
            }
        }
    }
}
