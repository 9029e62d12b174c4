//! Checkers for Gaussian minorization, the double-exponential lower bound,
//! the truncation function `h1` and the four-term split of the symmetric KL.

use serde::Serialize;

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::grid::{convolve_pair, normalized_sum_density, scaled_sum_density, GridDensity, GridSpec};
use crate::info::{symmetric_kl, LOG_FLOOR};
use crate::quad;
use crate::special::{std_normal_cdf, std_normal_pdf};

/// `q_n >= l1 (l1 sqrt(2 pi / l2))^{n-1} exp(-l2 x^2 / 2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropA1Report {
    pub n: usize,
    pub l1: f64,
    pub l2: f64,
    pub holds: bool,
    /// `min (q_n - bound)` over the grid.
    pub min_margin: f64,
    pub resolution: f64,
    /// Largest relative gap between the numerically convolved `n`-level bound
    /// and the analytic `(n+1)`-level bound, for the unnormalized sums.
    pub induction_residual: f64,
}

fn check_minorant(spec: &DistributionSpec, l1: f64, l2: f64) -> Result<()> {
    let ln_l1 = l1.ln();
    let mut xs: Vec<f64> = (0..=8000).map(|k| -40.0 + k as f64 * 0.01).collect();
    xs.extend(spec.quadrature_points());
    for x in xs {
        let rhs = ln_l1 - 0.5 * l2 * x * x;
        let lhs = spec.ln_density(x);
        if !(lhs >= rhs - 1e-12 * (1.0 + rhs.abs())) {
            return Err(Error::NotMinorizable(format!(
                "{spec}: ln p({x}) = {lhs} below ln l1 - l2 x^2/2 = {rhs}"
            )));
        }
    }
    Ok(())
}

/// Analytic lower bound on the density of `X_1 + ... + X_n` (no scaling).
fn unscaled_bound(l1: f64, l2: f64, n: usize, x: f64) -> f64 {
    let nf = n as f64;
    let lead = nf * l1.ln() + 0.5 * (nf - 1.0) * (2.0 * std::f64::consts::PI / l2).ln() - 0.5 * nf.ln();
    (lead - 0.5 * l2 * x * x / nf).exp()
}

pub fn prop_a1_bound(l1: f64, l2: f64, n: usize, x: f64) -> f64 {
    let l3 = l1 * (2.0 * std::f64::consts::PI / l2).sqrt();
    l1 * l3.powi(n as i32 - 1) * (-0.5 * l2 * x * x).exp()
}

/// Grid check of the propagated minorant for `q_n`, the density of `(X_1 + ... + X_n) / sqrt(n)`.
pub fn prop_a1_check(l1: f64, l2: f64, specs: &[DistributionSpec], n: usize) -> Result<PropA1Report> {
    if !(l1 > 0.0 && l2 > 0.0) {
        return Err(Error::param("l1, l2", "must be positive"));
    }
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    for s in specs {
        check_minorant(s, l1, l2)?;
    }
    let list = crate::dist::cycle(specs, n)?;
    let var = list.iter().map(|s| s.variance()).sum::<f64>() / n as f64;
    let reach = specs
        .iter()
        .map(|s| {
            let (a, b) = s.effective_support(1e-14);
            a.abs().max(b.abs())
        })
        .fold(12.0_f64, f64::max);
    let grid = GridSpec::new((14.0 * var.sqrt()).max(reach), 1.0 / 256.0)?;
    let q = scaled_sum_density(specs, n, 1.0 / (n as f64).sqrt(), &grid)?;
    // points where both sides are below the sample noise cannot be compared
    let min_margin = q
        .xs()
        .zip(&q.values)
        .map(|(x, &v)| (v, prop_a1_bound(l1, l2, n, x)))
        .filter(|&(v, b)| v.max(b) > q.resolution)
        .map(|(v, b)| v - b)
        .fold(f64::INFINITY, f64::min);
    let tol = (10.0 * q.resolution).max(1e-12);
    Ok(PropA1Report {
        n,
        l1,
        l2,
        holds: min_margin >= -tol,
        min_margin,
        resolution: q.resolution,
        induction_residual: induction_residual(l1, l2, n)?,
    })
}

/// Convolves the `n`-level bound with the minorant and compares with the `(n+1)`-level bound.
pub fn induction_residual(l1: f64, l2: f64, n: usize) -> Result<f64> {
    let half = 14.0 * ((n + 1) as f64 / l2).sqrt();
    let grid = GridSpec::new(half, 1.0 / 128.0)?;
    let lo = grid.lo();
    let sample = |f: &dyn Fn(f64) -> f64| -> Result<GridDensity> {
        GridDensity::from_samples(lo, grid.step, (0..grid.len()).map(|k| f(lo + k as f64 * grid.step)).collect())
    };
    let bn = sample(&|x| unscaled_bound(l1, l2, n, x))?;
    let m = sample(&|x| l1 * (-0.5 * l2 * x * x).exp())?;
    let conv = convolve_pair(&bn, &m)?;
    let peak = unscaled_bound(l1, l2, n + 1, 0.0);
    let mut worst: f64 = 0.0;
    for k in 0..grid.len() {
        let x = lo + k as f64 * grid.step;
        worst = worst.max((conv.value_at(x) - unscaled_bound(l1, l2, n + 1, x)).abs() / peak);
    }
    Ok(worst)
}

/// Parameters of the double-exponential lower bound `p_n(x) >= k1 exp(-n^s k2 e^{x^2/(2a)})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Property24Params {
    pub a: f64,
    pub k1: f64,
    pub k2: f64,
    pub s: f64,
    pub v: f64,
}

impl Property24Params {
    /// `(a / (a - 1)) (1/2 + s)`; must be below 2.
    pub fn constraint_value(&self) -> f64 {
        if self.a > 1.0 {
            self.a / (self.a - 1.0) * (0.5 + self.s)
        } else {
            f64::INFINITY
        }
    }

    pub fn constraint_holds(&self) -> bool {
        self.a > 1.0 && self.constraint_value() < 2.0
    }
}

/// Moment inputs and their image under `X -> c X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropA2Inputs {
    pub j: f64,
    pub m: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub l1: f64,
    pub l2: f64,
}

impl PropA2Inputs {
    /// Exact transformation under `X -> c X`.
    pub fn rescaled(&self, c: f64) -> PropA2Inputs {
        PropA2Inputs {
            j: self.j / (c * c),
            m: self.m * c.powf(4.0 + self.delta0),
            l1: self.l1 / c,
            l2: self.l2 / (c * c),
            ..*self
        }
    }

    /// `l2` as the rescaling remark states it, `(M / M0)^{1/(4+delta0)} l2`.
    pub fn remark_l2(&self, m0: f64) -> f64 {
        (self.m / m0).powf(1.0 / (4.0 + self.delta0)) * self.l2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropA2Report {
    pub inputs: PropA2Inputs,
    pub params: Property24Params,
    pub l3: f64,
    pub a_above_one: bool,
    pub constraint_value: f64,
    pub constraint_holds: bool,
    /// Factor `c` for `X -> c X` that brings `a` to 8 when the constraint fails.
    pub suggested_rescale: Option<f64>,
}

/// Property 2.4 parameters implied by the moment and minorant inputs.
pub fn prop_a2_params(j: f64, m: f64, delta0: f64, delta1: f64, l1: f64, l2: f64) -> Result<PropA2Report> {
    for (name, v) in [("J", j), ("M", m), ("delta0", delta0), ("l1", l1), ("l2", l2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be positive and finite, got {v}")));
        }
    }
    if !(delta1 > 0.25 && delta1 <= 1.0) {
        return Err(Error::param("delta1", format!("must lie in (1/4, 1], got {delta1}")));
    }
    let inputs = PropA2Inputs { j, m, delta0, delta1, l1, l2 };
    let l3 = (-(l1 * (2.0 * std::f64::consts::PI / l2).sqrt()).ln()).max(1.0);
    let mpow = m.powf(2.0 / (4.0 + delta0));
    let params = Property24Params {
        a: delta1 / mpow,
        k1: (1.0 / (4.0 * j)).sqrt() * l1,
        k2: l2 + l3,
        s: 1.0,
        v: 1.0,
    };
    let holds = params.constraint_holds();
    Ok(PropA2Report {
        inputs,
        params,
        l3,
        a_above_one: params.a > 1.0,
        constraint_value: params.constraint_value(),
        constraint_holds: holds,
        suggested_rescale: if holds { None } else { Some((delta1 / (8.0 * mpow)).sqrt()) },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Property24Check {
    pub holds: bool,
    /// Worst `ln p_n - ln bound` over the checked region; `-inf` at a hard zero.
    pub min_margin: f64,
    pub checked: usize,
    /// Points where both sides sit below the grid resolution.
    pub unresolved: usize,
}

/// Pointwise check of `ln p_n(x) >= ln k1 - n^s k2 exp(x^2 / (2a))` for `|x| > v sqrt(ln n)`.
pub fn property24_check(p: &GridDensity, params: &Property24Params, n: usize) -> Property24Check {
    let nf = n as f64;
    let cut = params.v * nf.ln().max(0.0).sqrt();
    let ln_res = if p.resolution > 0.0 { p.resolution.ln() } else { f64::NEG_INFINITY };
    let (mut checked, mut unresolved) = (0, 0);
    let mut worst = f64::INFINITY;
    for (x, &v) in p.xs().zip(&p.values) {
        if x.abs() <= cut {
            continue;
        }
        let ln_bound = params.k1.ln() - nf.powf(params.s) * params.k2 * (x * x / (2.0 * params.a)).exp();
        if v <= p.resolution && ln_bound <= ln_res {
            unresolved += 1;
            continue;
        }
        checked += 1;
        worst = worst.min(v.ln() - ln_bound);
    }
    Property24Check {
        holds: worst >= 0.0,
        min_margin: worst,
        checked,
        unresolved,
    }
}

/// `r(x) = C/n + C (x^4 + 1) phi(x) / sqrt(n)`.
pub fn envelope(c: f64, n: usize, x: f64) -> f64 {
    let nf = n as f64;
    c / nf + c * (x.powi(4) + 1.0) * std_normal_pdf(x) / nf.sqrt()
}

/// Floor returned when `p_n` matches `phi` to rounding.
pub const ENVELOPE_FLOOR: f64 = 1e-12;

/// Smallest `C` with `|p_n - phi| <= r(x)` on the whole grid.
///
/// The envelope is linear in `C`, so the minimum is the largest pointwise ratio.
pub fn calibrate_envelope(specs: &[DistributionSpec], n: usize) -> Result<f64> {
    let p = normalized_sum_density(specs, n, &GridSpec::default_for(n))?;
    Ok(envelope_for(&p, n))
}

fn envelope_for(p: &GridDensity, n: usize) -> f64 {
    p.xs()
        .zip(&p.values)
        .map(|(x, v)| (v - std_normal_pdf(x)).abs() / envelope(1.0, n, x))
        .fold(ENVELOPE_FLOOR, f64::max)
}

/// The truncation function `h1`: `ln(phi - r)` on `|x| <= b = u sqrt(ln n)`,
/// a C2 ramp outside that lands on 0 and stays there.
///
/// Outside `B(u)` the second derivative is piecewise linear: it moves from
/// its value at `b` to `+kappa` over `delta`, holds, drops through 0 to
/// `-kappa` (pausing at 0 for `ell` when the slope hits `(ln n)^2`), holds,
/// and returns to 0. The hold lengths are the ones that bring slope and
/// value to 0 together, so the ramp is as short as the curvature budget allows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1 {
    pub u: f64,
    pub n: usize,
    pub c: f64,
    pub b: f64,
    pub lambda: f64,
    /// Curvature bound used outside `B(u)`; equals `n^{1/4}` when that budget is attainable.
    pub kappa: f64,
    pub budget_met: bool,
    /// Largest slope on the ramp, at most `lambda`.
    pub s_star: f64,
    /// Length over which the curvature switches between levels.
    pub delta: f64,
    /// From `b` to the point of largest slope.
    pub rise: f64,
    /// Linear stretch at slope `s_star`; nonzero only when `s_star = lambda`.
    pub ell: f64,
    /// From the end of the linear stretch to the landing on 0.
    pub fall: f64,
    /// `h1 = 0` for `|x| >= zero_from`.
    pub zero_from: f64,
    /// Width of the smoothing interval quoted with the `n^{1/4}` budget.
    pub nominal_width: f64,
    /// `min over B(u)` of `phi - r`.
    pub min_gap: f64,
    hb: [f64; 3],
    #[serde(skip)]
    ramp: Vec<Piece>,
}

/// Stretch of the ramp on which `h''` runs linearly from `k0` to `k1`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    len: f64,
    k0: f64,
    k1: f64,
}

impl Piece {
    /// `(h, h', h'')` after `y` into the piece, from `(h, h')` at its start.
    fn at(&self, h: f64, d: f64, y: f64) -> [f64; 3] {
        let g = if self.len > 0.0 { (self.k1 - self.k0) / self.len } else { 0.0 };
        [
            h + d * y + self.k0 * y * y / 2.0 + g * y * y * y / 6.0,
            d + self.k0 * y + g * y * y / 2.0,
            self.k0 + g * y,
        ]
    }
}

fn ramp_pieces(h2b: f64, kappa: f64, delta: f64, a: f64, ell: f64, c: f64) -> Vec<Piece> {
    let p = |len, k0, k1| Piece { len, k0, k1 };
    vec![
        p(delta, h2b, kappa),
        p(a, kappa, kappa),
        p(delta, kappa, 0.0),
        p(ell, 0.0, 0.0),
        p(delta, 0.0, -kappa),
        p(c, -kappa, -kappa),
        p(delta, -kappa, 0.0),
    ]
}

fn ramp_end(hb: [f64; 3], pieces: &[Piece]) -> [f64; 2] {
    let (mut h, mut d) = (hb[0], hb[1]);
    for p in pieces {
        let [h2, d2, _] = p.at(h, d, p.len);
        h = h2;
        d = d2;
    }
    [h, d]
}

fn core(c: f64, n: usize, x: f64) -> (f64, [f64; 3]) {
    let nf = n as f64;
    let phi = std_normal_pdf(x);
    let sq = nf.sqrt();
    let (x2, x4) = (x * x, x.powi(4));
    let r = c / nf + c * (x4 + 1.0) * phi / sq;
    let r1 = c * phi / sq * (4.0 * x2 * x - x4 * x - x);
    let r2 = c * phi / sq * (x4 * x2 - 9.0 * x4 + 13.0 * x2 - 1.0);
    let gap = phi - r;
    let d1 = (-x * phi - r1) / gap;
    let d2 = ((x2 - 1.0) * phi - r2) / gap - d1 * d1;
    (gap, [gap.ln(), d1, d2])
}

impl H1 {
    fn outer(&self, y: f64) -> [f64; 3] {
        let (mut h, mut d) = (self.hb[0], self.hb[1]);
        let mut y = y;
        for p in &self.ramp {
            if y <= p.len {
                return p.at(h, d, y);
            }
            let [h2, d2, _] = p.at(h, d, p.len);
            h = h2;
            d = d2;
            y -= p.len;
        }
        [0.0; 3]
    }

    /// `(h1, h1', h1'')` at `x`.
    pub fn eval(&self, x: f64) -> [f64; 3] {
        let ax = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let v = if ax <= self.b {
            core(self.c, self.n, ax).1
        } else {
            self.outer(ax - self.b)
        };
        [v[0], sign * v[1], v[2]]
    }

    pub fn sample(&self, grid: &GridSpec) -> H1Samples {
        let lo = grid.lo();
        let mut s = H1Samples {
            lo,
            step: grid.step,
            h: Vec::with_capacity(grid.len()),
            d1: Vec::with_capacity(grid.len()),
            d2: Vec::with_capacity(grid.len()),
        };
        for k in 0..grid.len() {
            let [a, b, c] = self.eval(lo + k as f64 * grid.step);
            s.h.push(a);
            s.d1.push(b);
            s.d2.push(c);
        }
        s
    }

    pub fn properties(&self, grid: &GridSpec) -> H1Properties {
        let s = self.sample(grid);
        let m = s.h.len();
        let mut p = H1Properties {
            evenness: 0.0,
            max_abs_d1: 0.0,
            max_abs_d2_outside: 0.0,
            max_value: f64::NEG_INFINITY,
            min_value: f64::INFINITY,
            max_abs_beyond_zero: 0.0,
            lambda: self.lambda,
            kappa: self.kappa,
            zero_from: self.zero_from,
            nominal_zero_bound: self.b + 2.0 / (self.n as f64).ln() + self.nominal_width,
        };
        for k in 0..m {
            let x = s.lo + k as f64 * s.step;
            p.evenness = p.evenness.max((s.h[k] - s.h[m - 1 - k]).abs());
            p.max_abs_d1 = p.max_abs_d1.max(s.d1[k].abs());
            if x.abs() > self.b {
                p.max_abs_d2_outside = p.max_abs_d2_outside.max(s.d2[k].abs());
            }
            p.max_value = p.max_value.max(s.h[k]);
            p.min_value = p.min_value.min(s.h[k]);
            if x.abs() >= self.zero_from {
                p.max_abs_beyond_zero = p.max_abs_beyond_zero.max(s.h[k].abs());
            }
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Samples {
    pub lo: f64,
    pub step: f64,
    pub h: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct H1Properties {
    pub evenness: f64,
    pub max_abs_d1: f64,
    pub max_abs_d2_outside: f64,
    pub max_value: f64,
    pub min_value: f64,
    pub max_abs_beyond_zero: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub zero_from: f64,
    /// `u sqrt(ln n) + 2 / ln n` plus the nominal smoothing width.
    pub nominal_zero_bound: f64,
}

/// Builds `h1`, requiring `phi - r >= 1/n` on `B(u)`.
pub fn build_h1(u: f64, n: usize, c: f64) -> Result<H1> {
    let h = h1_unchecked(u, n, c)?;
    if h.min_gap < 1.0 / n as f64 {
        return Err(Error::NTooSmall { n, min_gap: h.min_gap });
    }
    Ok(h)
}

/// As [`build_h1`] but only requires `phi - r > 0` on `B(u)`.
fn h1_unchecked(u: f64, n: usize, c: f64) -> Result<H1> {
    if !(1.0..2f64.sqrt()).contains(&u) {
        return Err(Error::param("u", format!("must lie in [1, sqrt 2), got {u}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be positive, got {c}")));
    }
    if n < 3 {
        return Err(Error::param("n", "must be at least 3"));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let b = u * ln_n.sqrt();
    let min_gap = (0..=2000)
        .map(|k| core(c, n, b * k as f64 / 2000.0).0)
        .fold(f64::INFINITY, f64::min);
    if min_gap <= 0.0 {
        return Err(Error::NTooSmall { n, min_gap });
    }
    let (_, hb) = core(c, n, b);
    let lambda = ln_n * ln_n;
    // when the core already bends harder than n^{1/4} at b the budget cannot
    // be met; the ramp then uses twice that curvature and reports it
    let budget = nf.powf(0.25);
    let kappa = budget.max(2.0 * hb[2].abs());
    let delta = 0.05 * (1.0 + hb[1].abs() / kappa).min(4.0);
    // hold lengths for peak slope s: the rise adds up to s, the fall removes it
    let holds = |s: f64| {
        let a = (s - hb[1] - delta * (hb[2] / 2.0 + kappa)) / kappa;
        let d = s / kappa - delta;
        (a, d)
    };
    let s_min = (hb[1] + delta * (hb[2] / 2.0 + kappa)).max(delta * kappa);
    let land = |s: f64, ell: f64| {
        let (a, d) = holds(s);
        ramp_end(hb, &ramp_pieces(hb[2], kappa, delta, a, ell, d))[0]
    };
    let (s_star, ell) = if land(lambda, 0.0) <= 0.0 {
        (lambda, -land(lambda, 0.0) / lambda)
    } else if land(s_min, 0.0) >= 0.0 {
        (s_min, 0.0)
    } else {
        let (mut lo, mut hi) = (s_min, lambda);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if land(mid, 0.0) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, 0.0)
    };
    let (a, d) = holds(s_star);
    let mut ramp = ramp_pieces(hb[2], kappa, delta, a, ell, d);
    // absorb the last rounding of the bisection into the linear stretch
    let miss = ramp_end(hb, &ramp)[0];
    if miss < 0.0 {
        ramp[3].len += -miss / s_star;
    }
    let (rise, fall) = (2.0 * delta + a, 2.0 * delta + d);
    Ok(H1 {
        u,
        n,
        c,
        b,
        lambda,
        kappa,
        budget_met: kappa == budget,
        s_star,
        delta,
        rise,
        ell: ramp[3].len,
        fall,
        zero_from: b + rise + ramp[3].len + fall,
        nominal_width: ((1.0 + c) * (b + 1.0) + lambda) / budget,
        min_gap,
        hb,
        ramp,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub n: usize,
    pub u: f64,
    #[serde(rename = "C_envelope")]
    pub c_envelope: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
    #[serde(rename = "I4")]
    pub i4: f64,
    pub d: f64,
    pub slack: f64,
    /// Smallest `C4` with `|Phi(-|x|)^{-1} int_{-inf}^{-|x|} h1 phi| <= C4 (x^2 + 1)` on `|x| <= 2b`.
    pub c4: f64,
    /// Largest value of the same quantity beyond `2b`.
    pub c4_outside: f64,
}

impl DecompositionReport {
    pub const CSV_HEADER: &'static str = "n,u,C,I1,I2,I3,I4,d,slack";
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.10e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.n, self.u, self.c_envelope, self.i1, self.i2, self.i3, self.i4, self.d, self.slack
        )
    }
}

/// Trapezoid sum of `f(x_k)` over grid points with `keep(x_k)`, clipped at the cut `|x| = b`
/// by linear interpolation so that the window edge is not rounded to the grid.
fn windowed(xs: &[f64], f: &[f64], b: f64, inside: bool) -> f64 {
    let mut total = 0.0;
    for k in 0..xs.len() - 1 {
        let (x0, x1) = (xs[k], xs[k + 1]);
        let (f0, f1) = (f[k], f[k + 1]);
        // split the cell at the cut points it contains
        let mut cuts = vec![x0];
        for c in [-b, b] {
            if c > x0 && c < x1 {
                cuts.push(c);
            }
        }
        cuts.push(x1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if (mid.abs() <= b) == inside {
                let lerp = |x: f64| f0 + (f1 - f0) * (x - x0) / (x1 - x0);
                total += 0.5 * (w[1] - w[0]) * (lerp(w[0]) + lerp(w[1]));
            }
        }
    }
    total
}

/// The four-term upper bound on the symmetric KL between `W_n` and `G`.
pub fn decompose_symmetric_kl(specs: &[DistributionSpec], n: usize, u: f64) -> Result<DecompositionReport> {
    for s in specs {
        if !s.full_support() {
            return Err(Error::SupportViolation(format!("{s} does not have full support")));
        }
    }
    let grid = GridSpec::default_for(n);
    let p = normalized_sum_density(specs, n, &grid)?;
    let c = envelope_for(&p, n);
    let h1 = h1_unchecked(u, n, c)?;
    let b = h1.b;
    let phi = GridDensity::std_normal(&grid);
    let xs: Vec<f64> = p.xs().collect();
    let m = xs.len();

    let mut f1 = vec![0.0; m];
    let mut f2 = vec![0.0; m];
    let mut f3 = vec![0.0; m];
    let mut f4 = vec![0.0; m];
    for k in 0..m {
        let x = xs[k];
        let (pv, fv) = (p.values[k], phi.values[k]);
        let diff = pv - fv;
        let hv = h1.eval(x)[0];
        if diff >= -1e-15 && x.abs() <= b {
            let r = envelope(c, n, x);
            f1[k] = diff * ((fv + r) / (fv - r)).ln();
        }
        f2[k] = diff * hv;
        f3[k] = (diff * hv).abs();
        if x.abs() > b {
            let floor = p.resolution.max(LOG_FLOOR);
            if pv <= floor && fv > 1e-10 {
                return Err(Error::SupportViolation(format!("p_n vanishes at {x} where phi = {fv:e}")));
            }
            f4[k] = diff * pv.max(floor).ln();
        }
    }
    let i1 = windowed(&xs, &f1, b, true);
    let i2 = windowed(&xs, &f2, f64::INFINITY, true);
    let i3 = windowed(&xs, &f3, b, false);
    let i4 = windowed(&xs, &f4, b, false);
    let d = symmetric_kl(&p, &phi)?.d;

    // left-tail averages of h1 against phi
    let (mut c4, mut c4_out) = (0.0_f64, 0.0_f64);
    let mut cum = quad::integrate(|t| h1.eval(t)[0] * std_normal_pdf(t), -60.0, grid.lo(), 1e-16);
    for k in 0..m {
        let x = xs[k];
        if k > 0 {
            cum += quad::integrate(|t| h1.eval(t)[0] * std_normal_pdf(t), xs[k - 1], x, 1e-15);
        }
        if x > 0.0 {
            break;
        }
        let tail = std_normal_cdf(x);
        if tail <= 0.0 {
            continue;
        }
        let q = (cum / tail).abs();
        if -x <= 2.0 * b {
            c4 = c4.max(q / (x * x + 1.0));
        } else {
            c4_out = c4_out.max(q);
        }
    }

    Ok(DecompositionReport {
        n,
        u,
        c_envelope: c,
        i1,
        i2,
        i3,
        i4,
        d,
        slack: i1 + i2 + i3 + i4 - d,
        c4,
        c4_outside: c4_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::SQRT_2PI;

    #[test]
    fn gaussian_prop_a2_mapping() {
        let l1 = 1.0 / SQRT_2PI;
        let r = prop_a2_params(1.0, 2.0, 1.0, 1.0, l1, 1.0).unwrap();
        assert!((r.params.k1 - l1 / 2.0).abs() < 1e-12);
        assert!((r.l3 - 1.0).abs() < 1e-12);
        assert!((r.params.k2 - 2.0).abs() < 1e-12);
        assert_eq!(r.params.s, 1.0);
    }

    #[test]
    fn a_equal_two_fails_constraint() {
        // M^{2/5} = 0.5
        let m = 0.5f64.powf(2.5);
        let r = prop_a2_params(1.0, m, 1.0, 1.0, 0.3, 1.0).unwrap();
        assert!((r.params.a - 2.0).abs() < 1e-12);
        assert!((r.constraint_value - 3.0).abs() < 1e-12);
        assert!(!r.constraint_holds);
        let c = r.suggested_rescale.unwrap();
        let again = r.inputs.rescaled(c);
        let r2 = prop_a2_params(again.j, again.m, 1.0, 1.0, again.l1, again.l2).unwrap();
        assert!((r2.params.a - 8.0).abs() < 1e-9);
        assert!(r2.constraint_holds);
    }

    #[test]
    fn h1_is_even_and_lands_on_zero() {
        let h = build_h1(1.5f64.sqrt(), 1024, 0.05).unwrap();
        let p = h.properties(&GridSpec::default_for(1024));
        assert!(p.evenness < 1e-12);
        assert!(p.max_value <= 0.0);
        assert!(p.max_abs_d1 <= h.lambda + 1e-9);
        assert!(p.max_abs_d2_outside <= h.kappa + 1e-9);
        assert_eq!(p.max_abs_beyond_zero, 0.0);
    }
}
