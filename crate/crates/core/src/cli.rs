//! Command-line frontend.
//!
//! Settings come from an optional flat JSON config file (`--config`), then
//! command-line flags on top. The output directory can also be set through
//! `SKL_LAB_OUT`, which sits between the file and the `--out` flag.
//!
//! Exit codes: 0 success, 2 invalid input, 3 numerical contract violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::dist::{cumulant_summary, DistributionSpec, FamilyKind, DEFAULT_DELTA0};
use crate::edgeworth::{edgeworth_density, expansion_error, R2Variant};
use crate::error::{Error, Result};
use crate::grid::{normalized_sum_density, GridDensity, GridSpec};
use crate::info::symmetric_kl;
use crate::ratelab::{dyadic, emit_report, fit_rate, run_sweep, ReportFormat, SweepConfig};
use crate::stein::{stein_bound_report, stein_solution_fn, zero_bias_density, zero_bias_identity_residual, TestFn};
use crate::verify::{
    build_h1, calibrate_envelope, decompose_symmetric_kl, prop_a1_check, prop_a2_params, property24_check,
    DecompositionReport,
};

pub const OUT_ENV: &str = "SKL_LAB_OUT";
pub const CONFIG_SCHEMA: u32 = 1;
const DEFAULT_U: f64 = 1.224_744_871_391_589; // sqrt(1.5)

/// One summand family, `name` plus its flat parameter list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyEntry {
    pub name: String,
    pub params: Vec<f64>,
}

impl FamilyEntry {
    pub fn parse(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = rest
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::param("family", format!("not a number: `{p}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FamilyEntry {
            name: name.trim().to_string(),
            params,
        })
    }

    pub fn spec(&self) -> Result<DistributionSpec> {
        DistributionSpec::make_family(self.name.parse::<FamilyKind>()?, &self.params)
    }
}

/// Everything a run needs; the config file is this struct in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default)]
    pub families: Vec<FamilyEntry>,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub ns: Vec<usize>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default = "default_u")]
    pub u: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default = "default_formats")]
    pub formats: Vec<ReportFormat>,
    #[serde(default)]
    pub variant: R2Variant,
    #[serde(default)]
    pub timing: bool,
}

fn default_delta0() -> f64 {
    DEFAULT_DELTA0
}
fn default_u() -> f64 {
    DEFAULT_U
}
fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema: CONFIG_SCHEMA,
            families: Vec::new(),
            delta0: DEFAULT_DELTA0,
            grid: None,
            ns: Vec::new(),
            n: None,
            u: DEFAULT_U,
            out_dir: None,
            formats: default_formats(),
            variant: R2Variant::Classical,
            timing: false,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: RunConfig = serde_json::from_str(text)?;
        if c.schema != CONFIG_SCHEMA {
            return Err(Error::param("schema", format!("unsupported config schema {}", c.schema)));
        }
        if let Some(g) = c.grid {
            GridSpec::new(g.half_width, g.step)?;
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
    }

    pub fn specs(&self) -> Result<Vec<DistributionSpec>> {
        if self.families.is_empty() {
            return Err(Error::param("family", "at least one --family is required"));
        }
        self.families.iter().map(FamilyEntry::spec).collect()
    }

    pub fn n(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(Error::param("n", "must be at least 1")),
            None => Err(Error::param("n", "--n is required")),
        }
    }

    pub fn ns(&self) -> Vec<usize> {
        if self.ns.is_empty() {
            dyadic(8, 512)
        } else {
            self.ns.clone()
        }
    }

    pub fn grid_for(&self, n: usize) -> GridSpec {
        self.grid.unwrap_or_else(|| GridSpec::default_for(n))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

/// `8:512` for a dyadic range, otherwise a comma list.
pub fn parse_ns(s: &str) -> Result<Vec<usize>> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| Error::param("ns", format!("not a count: `{t}`")))
    };
    if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (num(a)?, num(b)?);
        if a == 0 || a > b {
            return Err(Error::param("ns", format!("bad range `{s}`")));
        }
        return Ok(dyadic(a, b));
    }
    s.split(',').map(num).collect()
}

#[derive(Debug, Parser)]
#[command(name = "skl-lab", version, about = "Symmetric KL divergence of standardized sums against the Gaussian")]
pub struct Cli {
    /// JSON config file (`schema: 1`); flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory for CSV/JSON/SVG files [default: out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the merged config as JSON and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Summand family `name:p1,p2,...` (gaussian:mean,var, uniform:lo,hi,
    /// laplace:scale, logistic:scale, mixture:w,mean,var,...). Repeat to cycle.
    #[arg(long = "family")]
    pub families: Vec<String>,
    /// Number of summands.
    #[arg(long)]
    pub n: Option<usize>,
    /// Summand counts, `8:512` (dyadic) or `8,16,32` [default: 8:512].
    #[arg(long)]
    pub ns: Option<String>,
    /// Moment exponent offset delta0 [default: 1].
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Grid half width L; needs --step as well [default: depends on n].
    #[arg(long)]
    pub half_width: Option<f64>,
    /// Grid step [default: 2^-8].
    #[arg(long)]
    pub step: Option<f64>,
    /// Truncation parameter u in [1, sqrt 2) [default: sqrt 1.5].
    #[arg(long)]
    pub u: Option<f64>,
    /// Report formats, any of csv, json, svg [default: all].
    #[arg(long = "format")]
    pub formats: Vec<String>,
    /// Second-order Edgeworth variant, classical or printed [default: classical].
    #[arg(long)]
    pub variant: Option<String>,
    /// Record per-row runtimes in sweeps (makes output non-reproducible).
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Divergence report between W_n and the standard Gaussian.
    Divergence(Common),
    /// Sweep over n with rate fits; writes sweep.{csv,json,svg}.
    Sweep(Common),
    /// Edgeworth expansion error of W_n.
    Edgeworth {
        #[command(flatten)]
        common: Common,
        /// Expansion order; 0 compares with phi itself.
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
    /// Stein equation solution and its norm bounds.
    Stein {
        #[command(flatten)]
        common: Common,
        /// Test function: sin, tanh, xexp, clip:c, x, x2, x3, const:c.
        #[arg(long, default_value = "sin")]
        g: String,
    },
    /// Zero-bias density of one summand and the defining identity.
    ZeroBias {
        #[command(flatten)]
        common: Common,
        /// Test function for the identity residual.
        #[arg(long, default_value = "x2")]
        f: String,
    },
    /// Checkers for minorization, lower bounds, h1 and the envelope.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Four-term upper bound on the symmetric KL.
    Decompose(Common),
    /// Sweep plus decompositions; writes all report files.
    Report(Common),
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Propagated Gaussian minorant of the sum density.
    #[command(name = "propA1")]
    PropA1 {
        #[command(flatten)]
        common: Common,
        /// Minorant scale; defaults to the families' own.
        #[arg(long)]
        l1: Option<f64>,
        /// Minorant rate; defaults to the families' own.
        #[arg(long)]
        l2: Option<f64>,
    },
    /// Double-exponential lower bound parameters.
    #[command(name = "propA2")]
    PropA2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        delta1: f64,
    },
    /// Pointwise check of the double-exponential lower bound for W_n.
    #[command(name = "property24")]
    Property24 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        delta1: f64,
    },
    /// Builds h1 and reports its properties; writes h1.csv.
    #[command(name = "h1")]
    H1 {
        #[command(flatten)]
        common: Common,
        /// Envelope constant; calibrated from the families when omitted.
        #[arg(long)]
        c: Option<f64>,
    },
    /// Smallest envelope constant C for |p_n - phi|.
    #[command(name = "envelope")]
    Envelope(Common),
}

fn merge(mut cfg: RunConfig, c: &Common, out: Option<&PathBuf>) -> Result<RunConfig> {
    if !c.families.is_empty() {
        cfg.families = c.families.iter().map(|s| FamilyEntry::parse(s)).collect::<Result<_>>()?;
    }
    if let Some(n) = c.n {
        cfg.n = Some(n);
    }
    if let Some(ns) = &c.ns {
        cfg.ns = parse_ns(ns)?;
    }
    if let Some(d) = c.delta0 {
        cfg.delta0 = d;
    }
    match (c.half_width, c.step) {
        (Some(l), Some(h)) => cfg.grid = Some(GridSpec::new(l, h)?),
        (Some(l), None) => cfg.grid = Some(GridSpec::new(l, crate::grid::DEFAULT_STEP)?),
        (None, Some(_)) => return Err(Error::param("step", "--step needs --half-width")),
        (None, None) => {}
    }
    if let Some(u) = c.u {
        cfg.u = u;
    }
    if !c.formats.is_empty() {
        cfg.formats = c.formats.iter().map(|f| f.parse()).collect::<Result<_>>()?;
    }
    if let Some(v) = &c.variant {
        cfg.variant = match v.as_str() {
            "classical" => R2Variant::Classical,
            "printed" => R2Variant::Printed,
            other => return Err(Error::param("variant", format!("unknown variant `{other}`"))),
        };
    }
    if c.timing {
        cfg.timing = true;
    }
    if let Ok(dir) = std::env::var(OUT_ENV) {
        if !dir.is_empty() {
            cfg.out_dir = Some(PathBuf::from(dir));
        }
    }
    if let Some(o) = out {
        cfg.out_dir = Some(o.clone());
    }
    Ok(cfg)
}

fn common_of(cmd: &Command) -> &Common {
    match cmd {
        Command::Divergence(c) | Command::Sweep(c) | Command::Decompose(c) | Command::Report(c) => c,
        Command::Edgeworth { common, .. } | Command::Stein { common, .. } | Command::ZeroBias { common, .. } => common,
        Command::Verify(v) => match v {
            VerifyCommand::PropA1 { common, .. }
            | VerifyCommand::PropA2 { common, .. }
            | VerifyCommand::Property24 { common, .. }
            | VerifyCommand::H1 { common, .. } => common,
            VerifyCommand::Envelope(c) => c,
        },
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, body)?;
    Ok(path)
}

/// Parses `argv` and runs the chosen pipeline, returning the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(argv, &mut lock)
}

/// As [`run`], writing normal output to `out`.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            if e.is_contract_violation() {
                eprintln!("contract violation: {e}");
                3
            } else {
                eprintln!("error: {e}");
                2
            }
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = merge(base, common_of(&cli.command), cli.out.as_ref())?;
    if cli.print_config {
        return print_json(out, &cfg);
    }
    match &cli.command {
        Command::Divergence(_) => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            let grid = cfg.grid_for(n);
            let p = normalized_sum_density(&specs, n, &grid)?;
            let rep = symmetric_kl(&p, &GridDensity::std_normal(&grid))?;
            print_json(out, &rep)?;
            rep.check_chain(1e-9)
        }
        Command::Sweep(_) => {
            let specs = cfg.specs()?;
            let (rows, fits) = sweep(&cfg, &specs)?;
            let paths = emit_report(&rows, &fits, &cfg.formats, &cfg.out_dir())?;
            for p in paths {
                writeln!(out, "{}", p.display())?;
            }
            check_rows(&rows)
        }
        Command::Edgeworth { order, .. } => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            let err = expansion_error(&specs, n, *order, cfg.variant, &cfg.grid_for(n))?;
            #[derive(Serialize)]
            struct Out {
                error: crate::edgeworth::ExpansionError,
                terms: Option<crate::edgeworth::EdgeworthTerms>,
            }
            let terms = if *order > 0 {
                Some(edgeworth_density(&specs, *order, n, cfg.variant)?)
            } else {
                None
            };
            print_json(out, &Out { error: err, terms })
        }
        Command::Stein { g, .. } => {
            let g = TestFn::parse(g)?;
            let grid = cfg.grid.unwrap_or(GridSpec::new(12.0, crate::grid::DEFAULT_STEP)?);
            let sol = stein_solution_fn(&g, &grid)?;
            let mut csv = Vec::new();
            sol.write_csv(&mut csv)?;
            let path = write_file(&cfg.out_dir(), &format!("stein_{}.csv", g.name().replace(':', "_")), &String::from_utf8_lossy(&csv))?;
            writeln!(out, "{}", path.display())?;
            if g.bounded_derivative() {
                print_json(out, &stein_bound_report(&g, &grid)?)?;
            }
            if sol.residual >= 1e-6 {
                return Err(Error::Contract(format!("Stein residual {:e} >= 1e-6", sol.residual)));
            }
            Ok(())
        }
        Command::ZeroBias { f, .. } => {
            let specs = cfg.specs()?;
            let spec = &specs[0];
            let f = TestFn::parse(f)?;
            let var = spec.variance();
            let (lo, hi) = spec.effective_support(1e-16);
            let half = (lo.abs().max(hi.abs()) + 2.0).max(12.0);
            let grid = cfg.grid.unwrap_or(GridSpec::new(half, crate::grid::DEFAULT_STEP)?);
            let z = zero_bias_density(spec, &grid)?;
            let mut csv = Vec::new();
            z.write_csv(&mut csv)?;
            let path = write_file(&cfg.out_dir(), "zero_bias.csv", &String::from_utf8_lossy(&csv))?;
            writeln!(out, "{}", path.display())?;
            #[derive(Serialize)]
            struct Out {
                family: String,
                mass: f64,
                second_moment: f64,
                expected_second_moment: f64,
                identity_residual: f64,
                f: String,
            }
            print_json(
                out,
                &Out {
                    family: spec.to_string(),
                    mass: z.mass,
                    second_moment: z.integrate(|x, p| x * x * p),
                    expected_second_moment: spec.raw_moment(4) / (3.0 * var),
                    identity_residual: zero_bias_identity_residual(spec, &f)?,
                    f: f.name(),
                },
            )
        }
        Command::Verify(v) => verify(v, &cfg, out),
        Command::Decompose(_) => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            let rep = decompose_symmetric_kl(&specs, n, cfg.u)?;
            print_json(out, &rep)?;
            check_decomposition(&rep)
        }
        Command::Report(_) => {
            let specs = cfg.specs()?;
            let (rows, fits) = sweep(&cfg, &specs)?;
            let dir = cfg.out_dir();
            for p in emit_report(&rows, &fits, &cfg.formats, &dir)? {
                writeln!(out, "{}", p.display())?;
            }
            let mut csv = format!("{}\n", DecompositionReport::CSV_HEADER);
            let mut reports = Vec::new();
            if specs.iter().all(|s| s.full_support()) {
                for &n in cfg.ns().iter().filter(|&&n| n >= 16) {
                    let rep = decompose_symmetric_kl(&specs, n, cfg.u)?;
                    csv.push_str(&rep.csv_row());
                    csv.push('\n');
                    reports.push(rep);
                }
                writeln!(out, "{}", write_file(&dir, "decompose.csv", &csv)?.display())?;
            }
            check_rows(&rows)?;
            reports.iter().try_for_each(check_decomposition)
        }
    }
}

fn sweep(cfg: &RunConfig, specs: &[DistributionSpec]) -> Result<(Vec<crate::ratelab::SweepRow>, Vec<crate::ratelab::RateFit>)> {
    let config = SweepConfig {
        delta0: cfg.delta0,
        grid: cfg.grid,
        variant: cfg.variant,
        timing: cfg.timing,
    };
    let rows = run_sweep(specs, &cfg.ns(), &config)?;
    let fits = match fit_rate(&rows, "d") {
        Ok(f) => f,
        Err(Error::InsufficientData(why)) => {
            eprintln!("no rate fit: {why}");
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    Ok((rows, fits))
}

fn check_rows(rows: &[crate::ratelab::SweepRow]) -> Result<()> {
    for r in rows.iter().filter(|r| r.ok()) {
        let half_sq = 0.5 * r.l1 * r.l1;
        if r.d < r.kl_wg - 1e-9 || r.kl_wg < half_sq - 1e-9 {
            return Err(Error::Contract(format!(
                "Pinsker chain violated at n = {}: d = {:e}, kl = {:e}, l1^2/2 = {:e}",
                r.n, r.d, r.kl_wg, half_sq
            )));
        }
    }
    Ok(())
}

fn check_decomposition(rep: &DecompositionReport) -> Result<()> {
    if rep.slack < -1e-8 {
        return Err(Error::Contract(format!(
            "d = {:e} exceeds I1 + I2 + I3 + I4 by {:e}",
            rep.d, -rep.slack
        )));
    }
    Ok(())
}

/// Common minorant of all families: smallest `l1`, largest `l2`.
fn common_minorant(specs: &[DistributionSpec]) -> Result<(f64, f64)> {
    let mut l1 = f64::INFINITY;
    let mut l2: f64 = 0.0;
    for s in specs {
        let m = s
            .minorization_params()
            .ok_or_else(|| Error::NotMinorizable(format!("{s} has no Gaussian minorant")))?;
        l1 = l1.min(m.l1);
        l2 = l2.max(m.l2);
    }
    Ok((l1, l2))
}

fn verify(v: &VerifyCommand, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    match v {
        VerifyCommand::PropA1 { l1, l2, .. } => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            let (l1, l2) = match (l1, l2) {
                (Some(a), Some(b)) => (*a, *b),
                _ => {
                    let (a, b) = common_minorant(&specs)?;
                    (l1.unwrap_or(a), l2.unwrap_or(b))
                }
            };
            print_json(out, &prop_a1_check(l1, l2, &specs, n)?)
        }
        VerifyCommand::PropA2 { delta1, .. } => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            let s = cumulant_summary(&specs, n, cfg.delta0)?;
            if !s.j.is_finite() {
                return Err(Error::InfiniteFisher(specs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")));
            }
            let (l1, l2) = common_minorant(&specs)?;
            print_json(out, &prop_a2_params(s.j, s.m, cfg.delta0, *delta1, l1, l2)?)
        }
        VerifyCommand::Property24 { delta1, .. } => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            let s = cumulant_summary(&specs, n, cfg.delta0)?;
            if !s.j.is_finite() {
                return Err(Error::InfiniteFisher(specs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" ")));
            }
            let (l1, l2) = common_minorant(&specs)?;
            let a2 = prop_a2_params(s.j, s.m, cfg.delta0, *delta1, l1, l2)?;
            let p = normalized_sum_density(&specs, n, &cfg.grid_for(n))?;
            #[derive(Serialize)]
            struct Out {
                params: crate::verify::Property24Params,
                check: crate::verify::Property24Check,
            }
            print_json(
                out,
                &Out {
                    params: a2.params,
                    check: property24_check(&p, &a2.params, n),
                },
            )
        }
        VerifyCommand::H1 { c, .. } => {
            let n = cfg.n()?;
            let c = match c {
                Some(c) => *c,
                None => calibrate_envelope(&cfg.specs()?, n)?,
            };
            let h = build_h1(cfg.u, n, c)?;
            let grid = cfg.grid_for(n);
            let s = h.sample(&grid);
            let mut csv = String::from("x,h1,h1_d1,h1_d2\n");
            for k in 0..s.h.len() {
                csv.push_str(&format!(
                    "{:.10e},{:.12e},{:.12e},{:.12e}\n",
                    s.lo + k as f64 * s.step,
                    s.h[k],
                    s.d1[k],
                    s.d2[k]
                ));
            }
            writeln!(out, "{}", write_file(&cfg.out_dir(), "h1.csv", &csv)?.display())?;
            #[derive(Serialize)]
            struct Out<'a> {
                h1: &'a crate::verify::H1,
                properties: crate::verify::H1Properties,
            }
            print_json(
                out,
                &Out {
                    h1: &h,
                    properties: h.properties(&grid),
                },
            )
        }
        VerifyCommand::Envelope(_) => {
            let (specs, n) = (cfg.specs()?, cfg.n()?);
            #[derive(Serialize)]
            struct Out {
                n: usize,
                c: f64,
            }
            print_json(out, &Out { n, c: calibrate_envelope(&specs, n)? })
        }
    }
}
