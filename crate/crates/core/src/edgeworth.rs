//! Edgeworth expansion of the standardized-sum density.

use serde::{Deserialize, Serialize};

use crate::dist::{cumulant_summary, CumulantSummary, DistributionSpec, DEFAULT_DELTA0};
use crate::error::{Error, Result};
use crate::grid::{normalized_sum_density, GridSpec};
use crate::special::std_normal_pdf;

/// Probabilists' Hermite polynomial `He_k(x)` for `k <= 6`.
pub fn hermite(k: u32, x: f64) -> Result<f64> {
    if k > 6 {
        return Err(Error::UnsupportedOrder(k));
    }
    Ok(hermite_unchecked(k, x))
}

fn hermite_unchecked(k: u32, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if k == 0 {
        return a;
    }
    for j in 1..k {
        let c = x * b - j as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Polynomial paired with the fourth-cumulant coefficient in the second-order term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum R2Variant {
    /// `He_4`, the classical expansion.
    #[default]
    Classical,
    /// `He_3`, as printed in the local limit remark.
    Printed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EdgeworthTerms {
    pub order: u32,
    pub n: usize,
    /// `sqrt(n) / (6 B_n^{3/2}) * sum gamma3`.
    pub coeff_r1: f64,
    /// `(sqrt(n) / B_n^{3/2} * sum gamma3)^2 / 72`.
    pub coeff_r2_a: f64,
    /// `n / (24 B_n^2) * sum gamma4`.
    pub coeff_r2_b: f64,
    pub variant: R2Variant,
}

impl EdgeworthTerms {
    /// Coefficients from a summary. Central third moments and fourth
    /// cumulants are used; for zero-mean, unit-variance summands they coincide
    /// with the raw `gamma3` and `gamma4`.
    pub fn new(summary: &CumulantSummary, order: u32, variant: R2Variant) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(Error::UnsupportedOrder(order));
        }
        let n = summary.n as f64;
        let b = summary.b_n;
        let s3 = summary.sum_kappa3();
        let s4 = summary.sum_kappa4();
        let lead = n.sqrt() / b.powf(1.5) * s3;
        Ok(EdgeworthTerms {
            order,
            n: summary.n,
            coeff_r1: lead / 6.0,
            coeff_r2_a: lead * lead / 72.0,
            coeff_r2_b: n / (24.0 * b * b) * s4,
            variant,
        })
    }

    /// `phi(x) + R_1(x)/sqrt(n) [+ R_2(x)/n]`; a signed approximation.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.n as f64;
        let phi = std_normal_pdf(x);
        let mut v = 1.0 + self.coeff_r1 * hermite_unchecked(3, x) / n.sqrt();
        if self.order >= 2 {
            let p = match self.variant {
                R2Variant::Classical => hermite_unchecked(4, x),
                R2Variant::Printed => hermite_unchecked(3, x),
            };
            v += (self.coeff_r2_a * hermite_unchecked(6, x) + self.coeff_r2_b * p) / n;
        }
        phi * v
    }

    pub fn sample(&self, grid: &GridSpec) -> Vec<f64> {
        let lo = grid.lo();
        (0..grid.len()).map(|k| self.eval(lo + k as f64 * grid.step)).collect()
    }
}

/// Expansion of order `k` for `specs` cycled to length `n`.
pub fn edgeworth_density(
    specs: &[DistributionSpec],
    k: u32,
    n: usize,
    variant: R2Variant,
) -> Result<EdgeworthTerms> {
    let summary = cumulant_summary(specs, n, DEFAULT_DELTA0)?;
    EdgeworthTerms::new(&summary, k, variant)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionError {
    pub n: usize,
    pub k: u32,
    pub sup_error: f64,
    pub l1_error: f64,
}

impl ExpansionError {
    pub const CSV_HEADER: &'static str = "n,k,sup_error,l1_error";
    pub fn csv_row(&self) -> String {
        format!("{},{},{:.12e},{:.12e}", self.n, self.k, self.sup_error, self.l1_error)
    }
}

/// Sup and L1 norms of `p_n - edgeworth_k` over the working grid. `k = 0` measures `p_n - phi`.
pub fn expansion_error(
    specs: &[DistributionSpec],
    n: usize,
    k: u32,
    variant: R2Variant,
    grid: &GridSpec,
) -> Result<ExpansionError> {
    let p = normalized_sum_density(specs, n, grid)?;
    let approx: Vec<f64> = if k == 0 {
        p.xs().map(std_normal_pdf).collect()
    } else {
        edgeworth_density(specs, k, n, variant)?.sample(grid)
    };
    let diff: Vec<f64> = p.values.iter().zip(&approx).map(|(a, b)| (a - b).abs()).collect();
    let sup = diff.iter().copied().fold(0.0, f64::max);
    let h = p.step;
    let l1 = h * (diff.iter().sum::<f64>() - 0.5 * (diff[0] + diff[diff.len() - 1]));
    Ok(ExpansionError {
        n,
        k,
        sup_error: sup,
        l1_error: l1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
        assert_eq!(hermite(4, 0.0).unwrap(), 3.0);
        assert_eq!(hermite(6, 1.0).unwrap(), 16.0);
        assert_eq!(hermite(7, 1.0), Err(Error::UnsupportedOrder(7)));
    }

    #[test]
    fn gaussian_terms_vanish() {
        let t = edgeworth_density(&[DistributionSpec::standard_gaussian()], 2, 10, R2Variant::Classical).unwrap();
        assert_eq!(t.coeff_r1, 0.0);
        assert_eq!(t.coeff_r2_a, 0.0);
        assert!(t.coeff_r2_b.abs() < 1e-14);
    }

    #[test]
    fn expansion_integrates_to_one() {
        let grid = GridSpec::default_for(16);
        for v in [R2Variant::Classical, R2Variant::Printed] {
            let t = edgeworth_density(&[DistributionSpec::skewed_mixture()], 2, 16, v).unwrap();
            let s = t.sample(&grid);
            let m: f64 = s.iter().sum::<f64>() * grid.step;
            assert!((m - 1.0).abs() < 1e-6);
        }
    }
}
