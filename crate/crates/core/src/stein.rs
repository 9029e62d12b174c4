//! Stein equation, zero-bias transform and the coupling bound on `E Delta^2`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dist::{cumulant_summary, cycle, DistributionSpec, Singularity};
use crate::error::{Error, Result};
use crate::grid::{GridDensity, GridSpec};
use crate::quad;
use crate::special::{mills_ratio, std_normal_cdf, std_normal_pdf};

/// Largest `|w|` handled before `exp(w^2/2)` becomes unmanageable.
pub const STABLE_RANGE: f64 = 30.0;
/// Boundary points excluded from derivative norms on each side.
pub const BOUNDARY: usize = 3;

/// A function sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFn {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<f64>,
}

impl GridFn {
    pub fn sample<F: Fn(f64) -> f64>(f: F, grid: &GridSpec) -> Self {
        let lo = grid.lo();
        GridFn {
            lo,
            step: grid.step,
            values: (0..grid.len()).map(|k| f(lo + k as f64 * grid.step)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    pub fn hi(&self) -> f64 {
        self.x(self.len() - 1)
    }

    /// Cubic Lagrange interpolation inside, quadratic extrapolation outside.
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.len();
        let h = self.step;
        let v = &self.values;
        if x <= self.lo {
            let s = (x - self.lo) / h;
            return lagrange3(s, v[0], v[1], v[2]);
        }
        if x >= self.hi() {
            let s = (self.hi() - x) / h;
            return lagrange3(s, v[m - 1], v[m - 2], v[m - 3]);
        }
        let pos = (x - self.lo) / h;
        let k = (pos.floor() as usize).clamp(1, m - 3);
        let s = pos - (k - 1) as f64;
        let (a, b, c, d) = (v[k - 1], v[k], v[k + 1], v[k + 2]);
        // nodes at 0, 1, 2, 3
        -a * (s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0 + b * s * (s - 2.0) * (s - 3.0) / 2.0
            - c * s * (s - 1.0) * (s - 3.0) / 2.0
            + d * s * (s - 1.0) * (s - 2.0) / 6.0
    }
}

/// Quadratic through `(0, a)`, `(1, b)`, `(2, c)` evaluated at `s`.
fn lagrange3(s: f64, a: f64, b: f64, c: f64) -> f64 {
    a * (s - 1.0) * (s - 2.0) / 2.0 - b * s * (s - 2.0) + c * s * (s - 1.0) / 2.0
}

/// Test functions with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFn {
    Constant(f64),
    Identity,
    Square,
    Cube,
    Sin,
    Tanh,
    /// `x exp(-x^2)`.
    XExpNegSq,
    /// `x` clipped to `[-c, c]`.
    ClippedLinear(f64),
}

impl TestFn {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFn::Constant(c) => c,
            TestFn::Identity => x,
            TestFn::Square => x * x,
            TestFn::Cube => x * x * x,
            TestFn::Sin => x.sin(),
            TestFn::Tanh => x.tanh(),
            TestFn::XExpNegSq => x * (-x * x).exp(),
            TestFn::ClippedLinear(c) => x.clamp(-c, c),
        }
    }

    pub fn d1(&self, x: f64) -> f64 {
        match *self {
            TestFn::Constant(_) => 0.0,
            TestFn::Identity => 1.0,
            TestFn::Square => 2.0 * x,
            TestFn::Cube => 3.0 * x * x,
            TestFn::Sin => x.cos(),
            TestFn::Tanh => 1.0 - x.tanh().powi(2),
            TestFn::XExpNegSq => (1.0 - 2.0 * x * x) * (-x * x).exp(),
            TestFn::ClippedLinear(c) => {
                if x.abs() < c {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Second derivative; `None` where it does not exist as a bounded function.
    pub fn d2(&self, x: f64) -> Option<f64> {
        Some(match *self {
            TestFn::Constant(_) | TestFn::Identity => 0.0,
            TestFn::Square => 2.0,
            TestFn::Cube => 6.0 * x,
            TestFn::Sin => -x.sin(),
            TestFn::Tanh => {
                let t = x.tanh();
                -2.0 * t * (1.0 - t * t)
            }
            TestFn::XExpNegSq => (4.0 * x * x * x - 6.0 * x) * (-x * x).exp(),
            TestFn::ClippedLinear(_) => return None,
        })
    }

    pub fn bounded_derivative(&self) -> bool {
        !matches!(self, TestFn::Square | TestFn::Cube)
    }

    pub fn name(&self) -> String {
        match self {
            TestFn::Constant(c) => format!("const:{c}"),
            TestFn::Identity => "x".into(),
            TestFn::Square => "x2".into(),
            TestFn::Cube => "x3".into(),
            TestFn::Sin => "sin".into(),
            TestFn::Tanh => "tanh".into(),
            TestFn::XExpNegSq => "xexp".into(),
            TestFn::ClippedLinear(c) => format!("clip:{c}"),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (name, arg) = s.split_once(':').unwrap_or((s, ""));
        let num = |d: f64| -> Result<f64> {
            if arg.is_empty() {
                Ok(d)
            } else {
                arg.parse().map_err(|_| Error::param("g", format!("bad argument `{arg}`")))
            }
        };
        Ok(match name {
            "const" => TestFn::Constant(num(1.0)?),
            "x" => TestFn::Identity,
            "x2" => TestFn::Square,
            "x3" => TestFn::Cube,
            "sin" => TestFn::Sin,
            "tanh" => TestFn::Tanh,
            "xexp" => TestFn::XExpNegSq,
            "clip" => TestFn::ClippedLinear(num(1.0)?),
            other => return Err(Error::param("g", format!("unknown test function `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinSolution {
    pub g: GridFn,
    pub g_mean_gaussian: f64,
    pub f: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub f3: Vec<f64>,
    pub residual: f64,
}

impl SteinSolution {
    pub fn x(&self, k: usize) -> f64 {
        self.g.x(k)
    }

    /// Sup norm over the interior (boundary points excluded).
    pub fn interior_sup(v: &[f64]) -> f64 {
        v[BOUNDARY..v.len() - BOUNDARY].iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,g,f,f1,f2,f3")?;
        for k in 0..self.f.len() {
            writeln!(
                w,
                "{:.10e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.x(k),
                self.g.values[k],
                self.f[k],
                self.f1[k],
                self.f2[k],
                self.f3[k]
            )?;
        }
        Ok(())
    }
}

/// Solves `f'(w) - w f(w) = g(w) - E g(G)` for `g` given by samples.
///
/// Beyond the grid, `g` is continued by quadratic extrapolation.
pub fn stein_solution(g: &GridFn) -> Result<SteinSolution> {
    solve(g, |x| g.eval(x))
}

/// As [`stein_solution`] with an analytic `g`, used for the tails and cell quadrature.
pub fn stein_solution_fn(g: &TestFn, grid: &GridSpec) -> Result<SteinSolution> {
    solve(&GridFn::sample(|x| g.eval(x), grid), |x| g.eval(x))
}

fn solve<G: Fn(f64) -> f64>(samples: &GridFn, g: G) -> Result<SteinSolution> {
    let m = samples.len();
    if m < 2 * BOUNDARY + 8 {
        return Err(Error::param("g", "grid too short"));
    }
    let (lo, hi, h) = (samples.lo, samples.hi(), samples.step);
    if lo.abs() > STABLE_RANGE || hi.abs() > STABLE_RANGE {
        return Err(Error::Overflow(lo.abs().max(hi.abs())));
    }
    if !(lo < 0.0 && hi > 0.0) {
        return Err(Error::param("g", "grid must contain 0 in its interior"));
    }

    // cell integrals of g and 1 against exp((a^2 - t^2)/2), a the cell end nearer 0
    let mut cell_g = vec![0.0; m - 1];
    let mut cell_1 = vec![0.0; m - 1];
    let mut mass_g = 0.0;
    let mut mass_1 = 0.0;
    for k in 0..m - 1 {
        let (a, b) = (samples.x(k), samples.x(k + 1));
        let anchor = if b <= 0.0 { b } else { a };
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let (mut sg, mut s1, mut pg, mut p1) = (0.0, 0.0, 0.0, 0.0);
        for (u, w) in quad::GL6 {
            let t = mid + half * u;
            let e = (0.5 * (anchor * anchor - t * t)).exp();
            let gv = g(t);
            sg += w * gv * e;
            s1 += w * e;
            let ph = std_normal_pdf(t);
            pg += w * gv * ph;
            p1 += w * ph;
        }
        cell_g[k] = sg * half;
        cell_1[k] = s1 * half;
        mass_g += pg * half;
        mass_1 += p1 * half;
    }
    // tails: int_0^inf g(edge -+ s) exp(-|edge| s - s^2/2) ds
    let tail = |edge: f64, sign: f64, gg: &dyn Fn(f64) -> f64| {
        let l = edge.abs();
        let upper = (40.0 / l).min(12.0).max(1.0);
        quad::integrate(|s| gg(edge + sign * s) * (-l * s - 0.5 * s * s).exp(), 0.0, upper, 1e-14)
    };
    let lt_g = tail(lo, -1.0, &g);
    let lt_1 = tail(lo, -1.0, &|_| 1.0);
    let rt_g = tail(hi, 1.0, &g);
    let rt_1 = tail(hi, 1.0, &|_| 1.0);
    let phi_lo = std_normal_pdf(lo);
    let phi_hi = std_normal_pdf(hi);
    let c = (mass_g + phi_lo * lt_g + phi_hi * rt_g) / (mass_1 + phi_lo * lt_1 + phi_hi * rt_1);

    let mut f = vec![0.0; m];
    f[0] = lt_g - c * lt_1;
    let k0 = ((0.0 - lo) / h).round() as usize;
    for k in 0..k0 {
        let (a, b) = (samples.x(k), samples.x(k + 1));
        let decay = (0.5 * (b * b - a * a)).exp();
        f[k + 1] = decay * f[k] + (cell_g[k] - c * cell_1[k]);
    }
    f[m - 1] = -(rt_g - c * rt_1);
    for k in (k0 + 1..m - 1).rev() {
        let (a, b) = (samples.x(k), samples.x(k + 1));
        let decay = (0.5 * (a * a - b * b)).exp();
        f[k] = decay * f[k + 1] - (cell_g[k] - c * cell_1[k]);
    }

    let f1 = derivative(&f, h, 1);
    let f2 = derivative(&f, h, 2);
    let f3 = derivative(&f, h, 3);
    let residual = (BOUNDARY..m - BOUNDARY)
        .map(|k| (f1[k] - samples.x(k) * f[k] - (samples.values[k] - c)).abs())
        .fold(0.0, f64::max);
    Ok(SteinSolution {
        g: samples.clone(),
        g_mean_gaussian: c,
        f,
        f1,
        f2,
        f3,
        residual,
    })
}

/// Finite differences: fourth order in the interior, one-sided second order near the ends.
fn derivative(f: &[f64], h: f64, order: u32) -> Vec<f64> {
    let m = f.len();
    let mut out = vec![0.0; m];
    let fwd = |k: usize, s: f64| -> f64 {
        // stencil at k going in direction s (+1 forward, -1 backward)
        let p = |j: usize| if s > 0.0 { f[k + j] } else { f[k - j] };
        match order {
            1 => s * (-3.0 * p(0) + 4.0 * p(1) - p(2)) / (2.0 * h),
            2 => (2.0 * p(0) - 5.0 * p(1) + 4.0 * p(2) - p(3)) / (h * h),
            _ => s * (-5.0 * p(0) + 18.0 * p(1) - 24.0 * p(2) + 14.0 * p(3) - 3.0 * p(4)) / (2.0 * h * h * h),
        }
    };
    for k in 0..m {
        out[k] = if k < BOUNDARY {
            fwd(k, 1.0)
        } else if k + BOUNDARY >= m {
            fwd(k, -1.0)
        } else {
            match order {
                1 => (-f[k + 2] + 8.0 * f[k + 1] - 8.0 * f[k - 1] + f[k - 2]) / (12.0 * h),
                2 => (-f[k + 2] + 16.0 * f[k + 1] - 30.0 * f[k] + 16.0 * f[k - 1] - f[k - 2]) / (12.0 * h * h),
                _ => {
                    (-f[k + 3] + 8.0 * f[k + 2] - 13.0 * f[k + 1] + 13.0 * f[k - 1] - 8.0 * f[k - 2]
                        + f[k - 3])
                        / (8.0 * h * h * h)
                }
            }
        };
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormCheck {
    pub measured: f64,
    pub bound: f64,
    pub slack: f64,
}

impl NormCheck {
    fn new(measured: f64, bound: f64) -> Self {
        NormCheck {
            measured,
            bound,
            slack: bound - measured,
        }
    }
}

/// Pointwise comparison of `|f''|` and `|f'''|` against the analytic curves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveCheck {
    /// Largest `|f''(x)| - curve(x)` over the checked window.
    pub f2_excess: f64,
    /// Largest `|f'''(x)| - curve(x)`.
    pub f3_excess: f64,
    pub window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteinBoundReport {
    pub g: String,
    pub g_prime_sup: f64,
    /// `||f|| <= 2 ||g'||`.
    pub f: NormCheck,
    /// `||f'|| <= sqrt(2/pi) ||g'||`.
    pub f1: NormCheck,
    /// `||f''|| <= 2 ||g'||`.
    pub f2: NormCheck,
    pub residual: f64,
    pub curves: Option<CurveCheck>,
}

impl SteinBoundReport {
    pub fn min_slack(&self) -> f64 {
        self.f.slack.min(self.f1.slack).min(self.f2.slack)
    }
}

/// Measures the three solution norms against `||g'||` and, when `g''` exists,
/// compares `|f''|` and `|f'''|` with the pointwise curves
/// `|h'| + |A int h' Phi + B int h' (1 - Phi)|` and
/// `2 (sqrt(2/pi) + |x|) ||h'|| + ||h''||` on `|x| <= 6`.
pub fn stein_bound_report(g: &TestFn, grid: &GridSpec) -> Result<SteinBoundReport> {
    if !g.bounded_derivative() {
        return Err(Error::UnboundedDerivative(g.name()));
    }
    let sol = stein_solution_fn(g, grid)?;
    let m = sol.f.len();
    let gp: Vec<f64> = (0..m).map(|k| g.d1(sol.x(k))).collect();
    let gp_sup = gp.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
    let f_sup = SteinSolution::interior_sup(&sol.f);
    let f1_sup = SteinSolution::interior_sup(&sol.f1);
    let f2_sup = SteinSolution::interior_sup(&sol.f2);

    let curves = if (0..m).all(|k| g.d2(sol.x(k)).is_some()) {
        let gpp_sup = (0..m).map(|k| g.d2(sol.x(k)).unwrap().abs()).fold(0.0, f64::max);
        // cumulative int_{-inf}^x h' Phi and int_x^inf h' (1 - Phi), cellwise Gauss-Legendre
        let cell = |a: f64, b: f64, upper: bool| -> f64 {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            let s: f64 = quad::GL6
                .iter()
                .map(|(u, w)| {
                    let t = mid + half * u;
                    let c = if upper { std_normal_cdf(-t) } else { std_normal_cdf(t) };
                    w * g.d1(t) * c
                })
                .sum();
            s * half
        };
        let mut left = vec![0.0; m];
        for k in 1..m {
            left[k] = left[k - 1] + cell(sol.x(k - 1), sol.x(k), false);
        }
        let mut right = vec![0.0; m];
        for k in (0..m - 1).rev() {
            right[k] = right[k + 1] + cell(sol.x(k), sol.x(k + 1), true);
        }
        let window = 6.0;
        let mut e2 = f64::NEG_INFINITY;
        let mut e3 = f64::NEG_INFINITY;
        for k in BOUNDARY..m - BOUNDARY {
            let x = sol.x(k);
            if x.abs() > window {
                continue;
            }
            let ca = (1.0 + x * x) * mills_ratio(x) - x;
            let cb = (1.0 + x * x) * mills_ratio(-x) + x;
            let c2 = gp[k].abs() + (ca * left[k] + cb * right[k]).abs();
            let c3 = 2.0 * ((2.0 / PI).sqrt() + x.abs()) * gp_sup + gpp_sup;
            e2 = e2.max(sol.f2[k].abs() - c2);
            e3 = e3.max(sol.f3[k].abs() - c3);
        }
        Some(CurveCheck {
            f2_excess: e2,
            f3_excess: e3,
            window,
        })
    } else {
        None
    };

    Ok(SteinBoundReport {
        g: g.name(),
        g_prime_sup: gp_sup,
        f: NormCheck::new(f_sup, 2.0 * gp_sup),
        f1: NormCheck::new(f1_sup, (2.0 / PI).sqrt() * gp_sup),
        f2: NormCheck::new(f2_sup, 2.0 * gp_sup),
        residual: sol.residual,
        curves,
    })
}

fn require_zero_mean(mean: f64) -> Result<()> {
    if mean.abs() > 1e-9 {
        Err(Error::NonZeroMean(mean))
    } else {
        Ok(())
    }
}

/// Zero-bias density of an analytic spec, sampled on `grid`.
pub fn zero_bias_density(spec: &DistributionSpec, grid: &GridSpec) -> Result<GridDensity> {
    require_zero_mean(spec.mean())?;
    let lo = grid.lo();
    let mut values = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        values.push(spec.zero_bias_density(lo + k as f64 * grid.step)?.max(0.0));
    }
    let mut g = GridDensity::from_samples(lo, grid.step, values)?;
    g.singularities = spec
        .zero_bias_singularities()
        .into_iter()
        .filter(|s| s.x > g.lo && s.x < g.hi)
        .collect();
    g.mass = g.integrate(|_, p| p);
    Ok(g)
}

/// Zero-bias density of a grid density, by cumulative quadrature of `t p(t)` from the right.
pub fn zero_bias_of_grid(p: &GridDensity) -> Result<GridDensity> {
    let mean = p.mean();
    require_zero_mean(mean)?;
    let var = p.variance();
    let m = p.len();
    let h = p.step;
    let t: Vec<f64> = (0..m).map(|k| p.x(k) * p.values[k]).collect();
    let jumps: Vec<_> = p.singularities.iter().filter(|s| s.left != s.right).collect();
    let jump_in = |a: f64, b: f64| jumps.iter().find(|s| s.x >= a && s.x <= b);
    let mut upper = vec![0.0; m];
    for k in (0..m - 1).rev() {
        let (a, b) = (p.x(k), p.x(k + 1));
        let cell = if let Some(s) = jump_in(a, b) {
            // t p(t) is integrated piecewise linearly on each side of the jump
            (s.x - a) * (t[k] + s.x * s.left) / 2.0 + (b - s.x) * (s.x * s.right + t[k + 1]) / 2.0
        } else if k >= 1 && k + 2 < m && jump_in(p.x(k - 1), p.x(k + 2)).is_none() {
            h / 24.0 * (-t[k - 1] + 13.0 * t[k] + 13.0 * t[k + 1] - t[k + 2])
        } else {
            0.5 * h * (t[k] + t[k + 1])
        };
        upper[k] = upper[k + 1] + cell;
    }
    let values = upper.iter().map(|u| (u / var).max(0.0)).collect();
    let mut out = GridDensity::from_samples(p.lo, h, values)?;
    // jumps of p become kinks of p*, since p*' = -x p(x) / var
    out.singularities = jumps
        .iter()
        .map(|s| {
            let v = out.value_at(s.x);
            Singularity {
                x: s.x,
                left: v,
                right: v,
                dleft: -s.x * s.left / var,
                dright: -s.x * s.right / var,
            }
        })
        .collect();
    out.mass = out.integrate(|_, q| q);
    Ok(out)
}

/// `|Var * E f'(V*) - E[V f(V)]|` by adaptive quadrature.
pub fn zero_bias_identity_residual(spec: &DistributionSpec, f: &TestFn) -> Result<f64> {
    require_zero_mean(spec.mean())?;
    let var = spec.variance();
    let pts = spec.quadrature_points();
    let lhs = var
        * quad::integrate_pieces(
            |x| f.d1(x) * spec.zero_bias_density(x).unwrap_or(0.0),
            &pts,
            1e-14,
        );
    let rhs = spec.expect(|x| x * f.eval(x));
    Ok((lhs - rhs).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingReport {
    pub n: usize,
    /// `P(I = i) = Var(xi_i)`.
    pub weights: Vec<f64>,
    pub e_delta_sq: f64,
    /// `2 sum (E xi^4 / 3 + (E xi^2)^2)`.
    pub chain_second_moments: f64,
    /// `(4/3) sum E xi^4`.
    pub intermediate: f64,
    /// `4 J^2 / (3 n^2) sum (E|X|^{4+delta0})^{4/(4+delta0)}`.
    pub chain_moment_bound: f64,
    /// `(4/3) J^2 M^{4/(4+delta0)}`.
    pub gamma: f64,
    pub bound: f64,
    pub delta0: f64,
}

impl CouplingReport {
    /// Smallest slack along the chain.
    pub fn min_slack(&self) -> f64 {
        let links = [
            self.chain_second_moments - self.e_delta_sq,
            self.intermediate - self.chain_second_moments,
            self.chain_moment_bound - self.intermediate,
            self.bound - self.chain_moment_bound,
        ];
        links.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `E Delta^2` for `Delta = xi_I* - xi_I` under the independent coupling,
/// with `xi_i = X_i / sqrt(B_n)`, plus the chain of upper bounds.
pub fn coupling_delta_second_moment(specs: &[DistributionSpec], n: usize, delta0: f64) -> Result<CouplingReport> {
    let list = cycle(specs, n)?;
    for s in specs {
        require_zero_mean(s.mean())?;
        s.fisher_information()?;
    }
    let summary = cumulant_summary(specs, n, delta0)?;
    let b = summary.b_n;
    let p = 4.0 + delta0;
    let mut weights = Vec::with_capacity(n);
    let (mut e_delta_sq, mut chain_a, mut sum4, mut sum_abs) = (0.0, 0.0, 0.0, 0.0);
    let per_spec: Vec<(f64, f64, f64)> = specs
        .iter()
        .map(|s| (s.variance(), s.raw_moment(4), s.abs_moment(p).powf(4.0 / p)))
        .collect();
    for i in 0..list.len() {
        let (v, m4, am) = per_spec[i % specs.len()];
        let e2 = v / b;
        let e4 = m4 / (b * b);
        let e_star_sq = e4 / (3.0 * e2);
        weights.push(e2);
        e_delta_sq += e2 * (e_star_sq + e2);
        chain_a += 2.0 * (e4 / 3.0 + e2 * e2);
        sum4 += e4;
        sum_abs += am;
    }
    let j = summary.j;
    let nf = n as f64;
    let gamma = 4.0 / 3.0 * j * j * summary.m.powf(4.0 / p);
    Ok(CouplingReport {
        n,
        weights,
        e_delta_sq,
        chain_second_moments: chain_a,
        intermediate: 4.0 / 3.0 * sum4,
        chain_moment_bound: 4.0 * j * j / (3.0 * nf * nf) * sum_abs,
        gamma,
        bound: gamma / nf,
        delta0,
    })
}
