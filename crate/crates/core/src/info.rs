//! Entropy, KL divergence, symmetric KL, L1 distance and related identities.
//!
//! All quantities are in nats. The total-variation distance is the L1
//! distance `int |p - q|`, which equals 2 for disjoint supports; with this
//! convention Pinsker's inequality reads `KL >= l1^2 / 2`.

use serde::Serialize;

use crate::dist::DistributionSpec;
use crate::error::{Error, Result};
use crate::grid::{discretize_on, scaled_sum_density, GridDensity, GridSpec};

/// Densities below this are treated as zero inside `p`-weighted integrands.
pub const LOG_FLOOR: f64 = 1e-300;
/// `p` above this where `q` vanishes violates absolute continuity.
pub const AC_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceReport {
    pub h_p: f64,
    pub h_q: f64,
    pub kl_pq: f64,
    pub kl_qp: f64,
    pub d: f64,
    pub l1: f64,
    pub pinsker_slack: f64,
    pub tail_mass_dropped: f64,
}

impl DivergenceReport {
    pub const CSV_HEADER: &'static str = "h_p,h_q,kl_pq,kl_qp,d,l1,pinsker_slack,tail_mass_dropped";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            self.h_p,
            self.h_q,
            self.kl_pq,
            self.kl_qp,
            self.d,
            self.l1,
            self.pinsker_slack,
            self.tail_mass_dropped
        )
    }

    /// Checks the divergence chain `d >= kl_pq >= l1^2/2` and `d >= l1^2/2`.
    pub fn check_chain(&self, tol: f64) -> Result<()> {
        let half_sq = 0.5 * self.l1 * self.l1;
        if self.kl_pq < -1e-10 || self.kl_qp < -1e-10 {
            return Err(Error::Contract(format!(
                "negative divergence: kl_pq = {:e}, kl_qp = {:e}",
                self.kl_pq, self.kl_qp
            )));
        }
        if self.d < self.kl_pq - tol || self.kl_pq < half_sq - tol || self.d < half_sq - tol {
            return Err(Error::Contract(format!(
                "Pinsker chain violated: d = {:e}, kl_pq = {:e}, l1^2/2 = {:e}",
                self.d, self.kl_pq, half_sq
            )));
        }
        Ok(())
    }
}

/// Differential entropy `-int p ln p`, with `0 ln 0 = 0`.
pub fn entropy(p: &GridDensity) -> f64 {
    -p.integrate(|_, v| if v > LOG_FLOOR { v * v.ln() } else { 0.0 })
}

/// KL divergence with the amount of `p`-mass skipped where `q` is unresolved.
pub fn kl_detail(p: &GridDensity, q: &GridDensity) -> Result<(f64, f64)> {
    p.same_grid(q)?;
    let q_floor = LOG_FLOOR.max(q.resolution);
    // absolute-continuity scan
    let mut bad: Option<(f64, f64, f64)> = None;
    let mut dropped = 0.0;
    for k in 0..p.len() {
        let (pv, qv) = (p.values[k], q.values[k]);
        if qv <= q_floor && pv > LOG_FLOOR {
            if pv > AC_THRESHOLD.max(p.resolution) {
                let x = p.x(k);
                bad = Some(match bad {
                    None => (x, x, pv),
                    Some((a, _, m)) => (a, x, m.max(pv)),
                });
            }
            dropped += pv * p.step;
        }
    }
    if let Some((x_lo, x_hi, p_max)) = bad {
        return Err(Error::AbsoluteContinuity { x_lo, x_hi, p_max });
    }
    let v = p.integrate_pair(q, |_, pv, qv| {
        if pv <= LOG_FLOOR || qv <= q_floor {
            0.0
        } else {
            pv * (pv / qv).ln()
        }
    });
    Ok((v, dropped))
}

/// `int p ln(p/q)`.
pub fn kl(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    kl_detail(p, q).map(|(v, _)| v)
}

/// L1 distance `int |p - q|`.
pub fn total_variation_l1(p: &GridDensity, q: &GridDensity) -> Result<f64> {
    p.same_grid(q)?;
    let mut t = p.integrate_pair(q, |_, a, b| (a - b).abs());
    // |p - q| has a kink wherever p - q changes sign; add its
    // Euler-Maclaurin term with the crossing located by linear interpolation
    let h = p.step;
    let d: Vec<f64> = p.values.iter().zip(&q.values).map(|(a, b)| a - b).collect();
    // a jump in p or q is a sign change too, but not a kink
    let jumps: Vec<f64> = p
        .singularities
        .iter()
        .chain(&q.singularities)
        .filter(|s| s.left != s.right)
        .map(|s| s.x)
        .collect();
    for k in 0..d.len() - 1 {
        let xk = p.x(k);
        if jumps.iter().any(|&s| s > xk - 1.5 * h && s < xk + 2.5 * h) {
            continue;
        }
        let (a, b) = (d[k], d[k + 1]);
        let theta = if a != 0.0 && b != 0.0 && (a < 0.0) != (b < 0.0) {
            a / (a - b)
        } else if a == 0.0 && k > 0 && d[k - 1] * b < 0.0 {
            0.0
        } else {
            continue;
        };
        let slope = (b - a).abs() / h;
        t += h * h * (theta * theta - theta + 1.0 / 6.0) * slope;
    }
    Ok(t)
}

/// Full report for one pair.
pub fn symmetric_kl(p: &GridDensity, q: &GridDensity) -> Result<DivergenceReport> {
    let (kl_pq, drop_p) = kl_detail(p, q)?;
    let (kl_qp, drop_q) = kl_detail(q, p)?;
    let l1 = total_variation_l1(p, q)?;
    Ok(DivergenceReport {
        h_p: entropy(p),
        h_q: entropy(q),
        kl_pq,
        kl_qp,
        d: kl_pq + kl_qp,
        l1,
        pinsker_slack: kl_pq - 0.5 * l1 * l1,
        tail_mass_dropped: drop_p + drop_q,
    })
}

/// Grid wide enough for `spec` and for the matched Gaussian.
fn grid_for(spec: &DistributionSpec) -> GridSpec {
    let (lo, hi) = spec.effective_support(1e-16);
    let sd = spec.variance().sqrt();
    let m = spec.mean();
    GridSpec::covering(lo.min(m - 12.0 * sd), hi.max(m + 12.0 * sd))
}

/// `h((X+Y)/sqrt 2) - (h(X) + h(Y))/2` for equal-variance `X`, `Y`.
pub fn entropy_jump(x: &DistributionSpec, y: &DistributionSpec) -> Result<f64> {
    let (vx, vy) = (x.variance(), y.variance());
    if (vx - vy).abs() > 1e-9 * vx.max(vy) {
        return Err(Error::VarianceMismatch(vx, vy));
    }
    let gx = grid_for(x);
    let gy = grid_for(y);
    let grid = if gx.half_width >= gy.half_width { gx } else { gy };
    let px = discretize_on(x, &grid)?;
    let py = discretize_on(y, &grid)?;
    let sum = scaled_sum_density(&[x.clone(), y.clone()], 2, std::f64::consts::FRAC_1_SQRT_2, &grid)?;
    Ok(entropy(&sum) - 0.5 * (entropy(&px) + entropy(&py)))
}

/// Symmetric KL between the joint law of `(X, X + N)` and the product of its
/// marginals, with `X ~ N(0, var_in)` and independent noise `N ~ N(0, var_noise)`.
///
/// For two bivariate Gaussians the log-determinants cancel in the
/// symmetrization, leaving `(tr(D^-1 S) + tr(S^-1 D))/2 - 2`.
pub fn awgn_symmetric_divergence(var_in: f64, var_noise: f64) -> Result<f64> {
    if !(var_noise > 0.0 && var_noise.is_finite()) {
        return Err(Error::param("var_noise", format!("must be positive, got {var_noise}")));
    }
    if !(var_in >= 0.0 && var_in.is_finite()) {
        return Err(Error::param("var_in", format!("must be nonnegative, got {var_in}")));
    }
    if var_in == 0.0 {
        return Ok(0.0);
    }
    let s = var_in;
    let out = s + var_noise;
    // S = [[s, s], [s, out]], D = diag(s, out)
    let tr_dinv_s = s / s + out / out;
    let det = s * out - s * s;
    let tr_sinv_d = (out * s + s * out) / det;
    Ok(0.5 * (tr_dinv_s + tr_sinv_d) - 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedGaussianBound {
    /// `KL(X || G_X)`.
    pub d: f64,
    /// `ln(Var J) / 2`.
    pub bound: f64,
    pub slack: f64,
}

/// `KL(X || G_X) <= ln(Var X * J(X)) / 2`, with `G_X` matched in mean and variance.
pub fn lemma41_check(spec: &DistributionSpec) -> Result<MatchedGaussianBound> {
    let j = spec.fisher_information()?;
    let mean = spec.mean();
    if mean.abs() > 1e-9 {
        return Err(Error::NonZeroMean(mean));
    }
    let var = spec.variance();
    let grid = grid_for(spec);
    let p = discretize_on(spec, &grid)?;
    let g = discretize_on(&DistributionSpec::gaussian(mean, var)?, &grid)?;
    let d = kl(&p, &g)?;
    let bound = 0.5 * (var * j).ln();
    Ok(MatchedGaussianBound { d, bound, slack: bound - d })
}

/// `Var X * J(X) - 1`, nonnegative by the Cramer-Rao bound.
pub fn cramer_rao_slack(spec: &DistributionSpec) -> Result<f64> {
    Ok(spec.variance() * spec.fisher_information()? - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::discretize;

    fn normal(v: f64) -> GridDensity {
        discretize(&DistributionSpec::gaussian(0.0, v).unwrap(), -16.0, 16.0, 1.0 / 256.0).unwrap()
    }

    #[test]
    fn gaussian_kl_closed_form() {
        let (p, q) = (normal(2.0), normal(1.0));
        let k = kl(&p, &q).unwrap();
        let exact = 0.5 * (2.0 - 1.0 - 2f64.ln());
        assert!((k - exact).abs() < 1e-10, "{k} {exact}");
        let r = symmetric_kl(&p, &q).unwrap();
        assert!((r.d - 0.25).abs() < 1e-10);
        let r2 = symmetric_kl(&q, &p).unwrap();
        assert_eq!(r.d, r2.d);
    }

    #[test]
    fn entropy_values() {
        let h = entropy(&normal(1.0));
        assert!((h - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-10);
        let u = discretize(&DistributionSpec::uniform(0.0, 1.0).unwrap(), -1.0, 2.0, 1.0 / 256.0).unwrap();
        assert!(entropy(&u).abs() < 1e-12);
        let u = discretize(&DistributionSpec::standard_uniform(), -4.0, 4.0, 1.0 / 256.0).unwrap();
        assert!((entropy(&u) - (2.0 * 3f64.sqrt()).ln()).abs() < 1e-12);
    }

    #[test]
    fn absolute_continuity_is_enforced() {
        let u = discretize(&DistributionSpec::uniform(0.0, 1.0).unwrap(), -4.0, 4.0, 1.0 / 64.0).unwrap();
        let g = discretize(&DistributionSpec::standard_gaussian(), -4.0, 4.0, 1.0 / 64.0);
        // the Gaussian loses mass on [-4, 4]
        assert!(g.is_err());
        let g = GridDensity::std_normal(&GridSpec::new(4.0, 1.0 / 64.0).unwrap());
        assert!(kl(&u, &g).is_ok());
        assert!(matches!(kl(&g, &u), Err(Error::AbsoluteContinuity { .. })));
    }

    #[test]
    fn awgn_is_snr() {
        assert_eq!(awgn_symmetric_divergence(1.0, 1.0).unwrap(), 1.0);
        assert!((awgn_symmetric_divergence(3.0, 2.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(awgn_symmetric_divergence(0.0, 2.0).unwrap(), 0.0);
    }
}
