//! Sweeps over `n`, rate fits and report files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DistributionSpec, DEFAULT_DELTA0};
use crate::edgeworth::{edgeworth_density, R2Variant};
use crate::error::{Error, Result};
use crate::grid::{normalized_sum_density, GridDensity, GridSpec};
use crate::info::symmetric_kl;
use crate::stein::coupling_delta_second_moment;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub delta0: f64,
    /// Fixed grid for every row; `None` picks [`GridSpec::default_for`] per row.
    pub grid: Option<GridSpec>,
    pub variant: R2Variant,
    /// Record wall-clock time per row. Off by default so that output is reproducible.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            delta0: DEFAULT_DELTA0,
            grid: None,
            variant: R2Variant::Classical,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub d: f64,
    pub kl_wg: f64,
    pub kl_gw: f64,
    pub l1: f64,
    pub entropy_w: f64,
    pub sup_edgeworth_error: f64,
    /// `None` when the coupling bound is undefined (nonzero mean or infinite `J`).
    pub e_delta_sq: Option<f64>,
    pub runtime_ms: f64,
    /// `ok` or `failed: <reason>`.
    pub status: String,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str =
        "n,d,kl_wg,kl_gw,l1,entropy_w,sup_edgeworth_error,e_delta_sq,runtime_ms,status";

    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn csv_row(&self) -> String {
        let e = self.e_delta_sq.map(|v| format!("{v:.12e}")).unwrap_or_default();
        format!(
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{:.3},{}",
            self.n,
            self.d,
            self.kl_wg,
            self.kl_gw,
            self.l1,
            self.entropy_w,
            self.sup_edgeworth_error,
            e,
            self.runtime_ms,
            self.status.replace(',', ";")
        )
    }

    pub fn metric(&self, name: &str) -> Result<Option<f64>> {
        Ok(match name {
            "d" => Some(self.d),
            "kl_wg" => Some(self.kl_wg),
            "kl_gw" => Some(self.kl_gw),
            "l1" => Some(self.l1),
            "entropy_w" => Some(self.entropy_w),
            "sup_edgeworth_error" => Some(self.sup_edgeworth_error),
            "e_delta_sq" => self.e_delta_sq,
            other => return Err(Error::param("metric", format!("unknown metric `{other}`"))),
        })
    }

    fn failed(n: usize, e: &Error) -> SweepRow {
        SweepRow {
            n,
            d: f64::NAN,
            kl_wg: f64::NAN,
            kl_gw: f64::NAN,
            l1: f64::NAN,
            entropy_w: f64::NAN,
            sup_edgeworth_error: f64::NAN,
            e_delta_sq: None,
            runtime_ms: 0.0,
            status: format!("failed: {e}"),
        }
    }
}

fn sweep_row(specs: &[DistributionSpec], n: usize, config: &SweepConfig) -> Result<SweepRow> {
    let grid = config.grid.unwrap_or_else(|| GridSpec::default_for(n));
    let p = normalized_sum_density(specs, n, &grid)?;
    let phi = GridDensity::std_normal(&grid);
    let rep = symmetric_kl(&p, &phi)?;
    let terms = edgeworth_density(specs, 2, n, config.variant)?;
    let sup = p
        .xs()
        .zip(&p.values)
        .map(|(x, v)| (v - terms.eval(x)).abs())
        .fold(0.0, f64::max);
    let e_delta_sq = coupling_delta_second_moment(specs, n, config.delta0)
        .ok()
        .map(|r| r.e_delta_sq);
    Ok(SweepRow {
        n,
        d: rep.d,
        kl_wg: rep.kl_pq,
        kl_gw: rep.kl_qp,
        l1: rep.l1,
        entropy_w: rep.h_p,
        sup_edgeworth_error: sup,
        e_delta_sq,
        runtime_ms: 0.0,
        status: "ok".into(),
    })
}

/// One row per `n`. Rows are computed in parallel; a row that fails keeps its
/// reason in `status` instead of aborting the sweep.
pub fn run_sweep(specs: &[DistributionSpec], ns: &[usize], config: &SweepConfig) -> Result<Vec<SweepRow>> {
    if specs.is_empty() {
        return Err(Error::param("specs", "at least one family is required"));
    }
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::param("ns", "must be a nonempty, strictly increasing list of positive counts"));
    }
    Ok(ns
        .par_iter()
        .map(|&n| {
            let start = Instant::now();
            let mut row = sweep_row(specs, n, config).unwrap_or_else(|e| SweepRow::failed(n, &e));
            if config.timing {
                row.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            }
            row
        })
        .collect())
}

/// `8, 16, ..., hi` style dyadic list.
pub fn dyadic(lo: usize, hi: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut n = lo.max(1);
    while n <= hi {
        v.push(n);
        n *= 2;
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateModel {
    LogOverSqrt,
    InvSqrt,
    Inv,
    Power,
}

impl RateModel {
    pub const ALL: [RateModel; 4] = [RateModel::LogOverSqrt, RateModel::InvSqrt, RateModel::Inv, RateModel::Power];

    pub fn name(&self) -> &'static str {
        match self {
            RateModel::LogOverSqrt => "log_over_sqrt",
            RateModel::InvSqrt => "inv_sqrt",
            RateModel::Inv => "inv",
            RateModel::Power => "power",
        }
    }

    /// `ln` of the model shape at `n`, with exponent `alpha` for the power model.
    fn ln_shape(&self, n: f64, alpha: f64) -> f64 {
        match self {
            RateModel::LogOverSqrt => n.ln().ln() - 0.5 * n.ln(),
            RateModel::InvSqrt => -0.5 * n.ln(),
            RateModel::Inv => -n.ln(),
            RateModel::Power => -alpha * n.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub metric: String,
    pub model: RateModel,
    pub constant: f64,
    /// Fitted exponent for the power model; the fixed exponent otherwise (0.5 or 1).
    pub alpha: f64,
    pub rss: f64,
    pub chosen: bool,
}

impl RateFit {
    pub fn predict(&self, n: f64) -> f64 {
        self.constant * self.model.ln_shape(n, self.alpha).exp()
    }
}

/// Relative rss tolerance within which a fixed-shape model beats the power model.
pub const SELECTION_TOLERANCE: f64 = 0.02;

/// Log-domain least squares for every model, one flagged as chosen.
pub fn fit_rate(rows: &[SweepRow], metric: &str) -> Result<Vec<RateFit>> {
    let mut pts = Vec::new();
    for r in rows.iter().filter(|r| r.ok()) {
        if let Some(v) = r.metric(metric)? {
            if v > 0.0 && v.is_finite() && r.n >= 2 {
                pts.push((r.n as f64, v.ln()));
            }
        }
    }
    if pts.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "{} usable rows for `{metric}`, need 4",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mut fits: Vec<RateFit> = RateModel::ALL
        .iter()
        .map(|&model| {
            let alpha = match model {
                RateModel::Power => {
                    let mx = pts.iter().map(|p| p.0.ln()).sum::<f64>() / k;
                    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
                    let sxy: f64 = pts.iter().map(|p| (p.0.ln() - mx) * (p.1 - my)).sum();
                    let sxx: f64 = pts.iter().map(|p| (p.0.ln() - mx).powi(2)).sum();
                    -sxy / sxx
                }
                RateModel::InvSqrt | RateModel::LogOverSqrt => 0.5,
                RateModel::Inv => 1.0,
            };
            let ln_c = pts.iter().map(|&(n, y)| y - model.ln_shape(n, alpha)).sum::<f64>() / k;
            let rss = pts
                .iter()
                .map(|&(n, y)| (y - ln_c - model.ln_shape(n, alpha)).powi(2))
                .sum();
            RateFit {
                metric: metric.to_string(),
                model,
                constant: ln_c.exp(),
                alpha,
                rss,
                chosen: false,
            }
        })
        .collect();
    let best = fits.iter().map(|f| f.rss).fold(f64::INFINITY, f64::min);
    let pick = fits
        .iter()
        .enumerate()
        .filter(|(_, f)| f.model != RateModel::Power && f.rss <= best * (1.0 + SELECTION_TOLERANCE) + 1e-20)
        .min_by(|a, b| a.1.rss.total_cmp(&b.1.rss))
        .map(|(i, _)| i)
        .unwrap_or(3);
    fits[pick].chosen = true;
    Ok(fits)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "svg" => Ok(ReportFormat::Svg),
            other => Err(Error::param("format", format!("unknown format `{other}`"))),
        }
    }
}

pub fn rows_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(SweepRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

pub fn report_json(rows: &[SweepRow], fits: &[RateFit]) -> Result<String> {
    #[derive(Serialize)]
    struct Bundle<'a> {
        rows: &'a [SweepRow],
        fits: &'a [RateFit],
    }
    Ok(serde_json::to_string_pretty(&Bundle { rows, fits })?)
}

const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Log-log plot of `d` against `n` with one path per fitted model.
pub fn report_svg(rows: &[SweepRow], fits: &[RateFit]) -> String {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.ok() && r.d > 0.0)
        .map(|r| ((r.n as f64).log10(), r.d.log10()))
        .collect();
    let (w, h, pad) = (640.0, 420.0, 60.0);
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 0.0);
    }
    let xs: Vec<f64> = (0..=40).map(|k| x0 + (x1 - x0) * k as f64 / 40.0).collect();
    for f in fits {
        for &x in &xs {
            let y = f.predict(10f64.powf(x)).log10();
            if y.is_finite() {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    if x1 - x0 < 1e-9 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 < 1e-9 {
        y1 = y0 + 1.0;
    }
    let px = |x: f64| pad + (x - x0) / (x1 - x0) * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<g stroke="black" fill="none"><line x1="{pad}" y1="{}" x2="{}" y2="{}"/><line x1="{pad}" y1="{pad}" x2="{pad}" y2="{}"/></g>"#,
        h - pad,
        w - pad,
        h - pad,
        h - pad
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">log10 n</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {})">log10 d</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (i, f) in fits.iter().enumerate() {
        let mut d = String::new();
        for (j, &x) in xs.iter().enumerate() {
            let y = f.predict(10f64.powf(x)).log10();
            let _ = write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(x), py(y));
        }
        let dash = if f.chosen { "" } else { r#" stroke-dasharray="5,4""# };
        let _ = writeln!(
            s,
            r#"<path d="{}" stroke="{}" fill="none" stroke-width="1.5"{dash}><title>{} {}</title></path>"#,
            d.trim_end(),
            COLORS[i % COLORS.len()],
            f.metric,
            f.model.name()
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" fill="{}">{}{}</text>"#,
            w - pad - 120.0,
            pad + 16.0 * i as f64,
            COLORS[i % COLORS.len()],
            f.model.name(),
            if f.chosen { " *" } else { "" }
        );
    }
    for &(x, y) in &pts {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="black"/>"#, px(x), py(y));
    }
    s.push_str("</svg>\n");
    s
}

/// Writes `sweep.<ext>` files into `dir`, returning their paths.
pub fn emit_report(rows: &[SweepRow], fits: &[RateFit], formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::param("rows", "nothing to report"));
    }
    fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    for f in formats {
        let (name, body) = match f {
            ReportFormat::Csv => ("sweep.csv", rows_csv(rows)),
            ReportFormat::Json => ("sweep.json", report_json(rows, fits)?),
            ReportFormat::Svg => ("sweep.svg", report_svg(rows, fits)),
        };
        let path = dir.join(name);
        fs::File::create(&path)?.write_all(body.as_bytes())?;
        out.push(path);
    }
    Ok(out)
}
