//! Uniform-grid densities and the convolution engine.

use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::dist::{cycle, DistributionSpec, Family, Singularity};
use crate::error::{Error, Result};
use crate::special::std_normal_pdf;

/// Default spacing, 2^-8.
pub const DEFAULT_STEP: f64 = 1.0 / 256.0;
/// Mass tolerance after construction.
pub const TOL_MASS: f64 = 1e-6;

/// Symmetric working domain `[-half_width, half_width]` with `0` on the grid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridSpec {
    pub half_width: f64,
    pub step: f64,
}

impl GridSpec {
    /// `half_width` is rounded up to a whole number of steps.
    pub fn new(half_width: f64, step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::param("half_width", format!("must be positive, got {half_width}")));
        }
        let k = (half_width / step - 1e-9).ceil();
        if 2.0 * k < 64.0 {
            return Err(Error::param("step", "grid needs at least 64 cells"));
        }
        Ok(GridSpec { half_width: k * step, step })
    }

    /// `L = max(12, 4 sqrt(ln n) + 8)`, step 2^-8.
    pub fn default_for(n: usize) -> Self {
        let ln = (n.max(1) as f64).ln();
        GridSpec::new((4.0 * ln.sqrt() + 8.0).max(12.0), DEFAULT_STEP).unwrap()
    }

    /// Default grid widened to cover `[lo, hi]`.
    pub fn covering(lo: f64, hi: f64) -> Self {
        GridSpec::new(lo.abs().max(hi.abs()).max(12.0), DEFAULT_STEP).unwrap()
    }

    pub fn lo(&self) -> f64 {
        -self.half_width
    }

    pub fn len(&self) -> usize {
        (2.0 * self.half_width / self.step).round() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A nonnegative density sampled at `lo + k * step`.
///
/// `singularities` records jumps and kinks of the underlying density so that
/// grid quadrature can add the matching Euler-Maclaurin corrections.
/// `resolution` is the absolute noise level of the samples (0 for exact
/// samples); values below it carry no information.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub mass: f64,
    pub clipped_mass: f64,
    pub resolution: f64,
    pub singularities: Vec<Singularity>,
}

fn bernoulli2(t: f64) -> f64 {
    t * t - t + 1.0 / 6.0
}

struct Sides {
    left: f64,
    right: f64,
    dleft: f64,
    dright: f64,
}

fn partial<F: Fn(f64) -> f64>(f: F, v: f64) -> f64 {
    let d = 1e-6 * v.abs().max(1e-10);
    let r = if v - d >= 0.0 {
        (f(v + d) - f(v - d)) / (2.0 * d)
    } else {
        (f(v + d) - f(v)) / d
    };
    if r.is_finite() {
        r
    } else {
        0.0
    }
}

impl GridDensity {
    /// Wrap raw samples; mass is recomputed.
    pub fn from_samples(lo: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 65 {
            return Err(Error::param("values", "grid needs at least 64 cells"));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::param("values", "samples must be finite and nonnegative"));
        }
        let mut g = GridDensity {
            lo,
            hi: lo + step * (values.len() - 1) as f64,
            step,
            values,
            mass: 0.0,
            clipped_mass: 0.0,
            resolution: 0.0,
            singularities: Vec::new(),
        };
        g.mass = g.integrate(|_, p| p);
        Ok(g)
    }

    /// Standard normal density on `grid`.
    pub fn std_normal(grid: &GridSpec) -> Self {
        let lo = grid.lo();
        let values = (0..grid.len())
            .map(|k| std_normal_pdf(lo + k as f64 * grid.step))
            .collect();
        GridDensity::from_samples(lo, grid.step, values).unwrap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.lo + k as f64 * self.step
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.x(k))
    }

    /// Linear interpolation, 0 outside the domain.
    pub fn value_at(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.step;
        if pos < 0.0 || pos > (self.len() - 1) as f64 {
            return 0.0;
        }
        let k = (pos.floor() as usize).min(self.len() - 2);
        let t = pos - k as f64;
        self.values[k] * (1.0 - t) + self.values[k + 1] * t
    }

    pub fn same_grid(&self, other: &GridDensity) -> Result<()> {
        if (self.step - other.step).abs() > 1e-12 * self.step {
            return Err(Error::StepMismatch(self.step, other.step));
        }
        if self.len() != other.len() || (self.lo - other.lo).abs() > 1e-9 * self.step {
            return Err(Error::GridMismatch(format!(
                "[{}, {}] x {} vs [{}, {}] x {}",
                self.lo,
                self.hi,
                self.len(),
                other.lo,
                other.hi,
                other.len()
            )));
        }
        Ok(())
    }

    fn sides(&self, s: f64, k: usize, theta: f64) -> Sides {
        if let Some(sg) = self.singularities.iter().find(|sg| (sg.x - s).abs() < 1e-12) {
            return Sides {
                left: sg.left,
                right: sg.right,
                dleft: sg.dleft,
                dright: sg.dright,
            };
        }
        let v = if theta == 0.0 { self.values[k] } else { self.value_at(s) };
        Sides {
            left: v,
            right: v,
            dleft: 0.0,
            dright: 0.0,
        }
    }

    /// `int F(x, p(x)) dx` by the trapezoid rule with singularity corrections.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        self.integrate_pair(self, |x, p, _| f(x, p))
    }

    /// `int F(x, p(x), q(x)) dx` over a shared grid.
    ///
    /// Panics if the grids differ; callers check with [`GridDensity::same_grid`].
    pub fn integrate_pair<F: Fn(f64, f64, f64) -> f64>(&self, q: &GridDensity, f: F) -> f64 {
        assert_eq!(self.len(), q.len(), "integrate_pair needs a shared grid");
        let h = self.step;
        let m = self.len();
        let mut t = 0.0;
        for k in 0..m {
            let w = if k == 0 || k == m - 1 { 0.5 } else { 1.0 };
            t += w * f(self.x(k), self.values[k], q.values[k]);
        }
        t *= h;

        let mut locs: Vec<f64> = self
            .singularities
            .iter()
            .chain(q.singularities.iter())
            .map(|s| s.x)
            .filter(|x| *x > self.lo && *x < self.hi)
            .collect();
        locs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        locs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

        for s in locs {
            let pos = (s - self.lo) / h;
            let mut k = pos.floor() as usize;
            let mut theta = pos - k as f64;
            if theta < 1e-9 {
                theta = 0.0;
            } else if theta > 1.0 - 1e-9 {
                k += 1;
                theta = 0.0;
            }
            let a = self.sides(s, k, theta);
            let b = q.sides(s, k, theta);
            let fl = f(s, a.left, b.left);
            let fr = f(s, a.right, b.right);
            if theta == 0.0 {
                t += h * (0.5 * (fl + fr) - f(self.x(k), self.values[k], q.values[k]));
            } else {
                t -= h * (theta - 0.5) * (fr - fl);
            }
            // x-derivative of F at fixed sample values differs across a jump
            let dx = 1e-6 * s.abs().max(1.0);
            let fx = |pv: f64, qv: f64| (f(s + dx, pv, qv) - f(s - dx, pv, qv)) / (2.0 * dx);
            if a.left != a.right || b.left != b.right {
                let jump = fx(a.right, b.right) - fx(a.left, b.left);
                if jump.is_finite() {
                    t += 0.5 * h * h * bernoulli2(theta) * jump;
                }
            }
            if a.dleft != a.dright || b.dleft != b.dright {
                let fp_r = partial(|v| f(s, v, b.right), a.right);
                let fp_l = partial(|v| f(s, v, b.left), a.left);
                let fq_r = partial(|v| f(s, a.right, v), b.right);
                let fq_l = partial(|v| f(s, a.left, v), b.left);
                let jump = fp_r * a.dright - fp_l * a.dleft + fq_r * b.dright - fq_l * b.dleft;
                t += 0.5 * h * h * bernoulli2(theta) * jump;
            }
        }
        t
    }

    pub fn mean(&self) -> f64 {
        self.integrate(|x, p| x * p) / self.mass
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.integrate(|x, p| (x - m) * (x - m) * p) / self.mass
    }

    /// Samples adjusted so that their plain trapezoid sum reproduces the corrected integral.
    fn corrected_values(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        let h = self.step;
        for s in &self.singularities {
            if s.x <= self.lo || s.x >= self.hi {
                continue;
            }
            let pos = (s.x - self.lo) / h;
            let k = pos.floor() as usize;
            let theta = pos - k as f64;
            if theta < 1e-9 || theta > 1.0 - 1e-9 {
                let kk = pos.round() as usize;
                // samples at an on-grid jump are already the midpoint
                v[kk] += 0.5 * h * bernoulli2(0.0) * (s.dright - s.dleft);
            } else {
                let kk = if theta < 0.5 { k } else { k + 1 };
                v[kk] += (0.5 - theta) * (s.right - s.left);
                v[kk] += 0.5 * h * bernoulli2(theta) * (s.dright - s.dleft);
            }
        }
        v
    }

    /// Largest `|p(x) - p(-x)|` on a grid symmetric about 0.
    pub fn asymmetry(&self) -> f64 {
        let m = self.len();
        (0..m / 2)
            .map(|k| (self.values[k] - self.values[m - 1 - k]).abs())
            .fold(0.0, f64::max)
    }

    /// Restrict to `[lo, hi]` (snapped outward to grid points).
    pub fn trimmed(&self, lo: f64, hi: f64) -> Result<Self> {
        let a = (((lo - self.lo) / self.step).floor().max(0.0)) as usize;
        let b = ((((hi - self.lo) / self.step).ceil()) as usize).min(self.len() - 1);
        let mut g = GridDensity::from_samples(self.x(a), self.step, self.values[a..=b].to_vec())?;
        g.resolution = self.resolution;
        g.clipped_mass = self.clipped_mass;
        g.singularities = self
            .singularities
            .iter()
            .copied()
            .filter(|s| s.x > g.lo && s.x < g.hi)
            .collect();
        g.mass = g.integrate(|_, p| p);
        Ok(g)
    }

    /// Two-column CSV `x,density`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,density")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{:.17e},{:.17e}", self.x(k), v)?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Reads what [`GridDensity::write_csv`] produced. Singularity metadata is not stored.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("line {}: expected two columns", i + 1)))?;
            let x: f64 = a.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad x", i + 1)))?;
            let v: f64 = b.trim().parse().map_err(|_| Error::Parse(format!("line {}: bad density", i + 1)))?;
            xs.push(x);
            vs.push(v);
        }
        if xs.len() < 65 {
            return Err(Error::Parse("need at least 65 rows".into()));
        }
        let step = (xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64;
        for (k, x) in xs.iter().enumerate() {
            if (x - (xs[0] + k as f64 * step)).abs() > 1e-9 * step.max(1.0) {
                return Err(Error::Parse(format!("non-uniform spacing at row {}", k + 2)));
            }
        }
        GridDensity::from_samples(xs[0], step, vs)
    }
}

/// Pointwise samples of `spec` on `[lo, hi]`.
pub fn discretize(spec: &DistributionSpec, lo: f64, hi: f64, step: f64) -> Result<GridDensity> {
    if !(step > 0.0) || !(hi > lo) {
        return Err(Error::param("step", "need step > 0 and lo < hi"));
    }
    let cells = (hi - lo) / step;
    if (cells - cells.round()).abs() > 1e-6 || cells.round() < 64.0 {
        return Err(Error::param("step", format!("(hi - lo)/step = {cells} must be an integer >= 64")));
    }
    let captured = spec.cdf(hi) - spec.cdf(lo);
    if captured < 1.0 - 1e-9 {
        return Err(Error::DomainTooSmall { lo, hi, captured });
    }
    let m = cells.round() as usize + 1;
    let mut values: Vec<f64> = (0..m).map(|k| spec.density(lo + k as f64 * step)).collect();
    let singularities: Vec<Singularity> = spec
        .singularities()
        .into_iter()
        .filter(|s| s.x > lo && s.x < hi)
        .collect();
    for s in &singularities {
        let pos = (s.x - lo) / step;
        if (pos - pos.round()).abs() < 1e-9 {
            values[pos.round() as usize] = 0.5 * (s.left + s.right);
        }
    }
    let mut g = GridDensity {
        lo,
        hi: lo + step * (m - 1) as f64,
        step,
        values,
        mass: 0.0,
        clipped_mass: 0.0,
        resolution: 0.0,
        singularities,
    };
    g.mass = g.integrate(|_, p| p);
    if (g.mass - 1.0).abs() > TOL_MASS {
        return Err(Error::Contract(format!("discretized mass {} outside tolerance", g.mass)));
    }
    Ok(g)
}

/// [`discretize`] onto a symmetric [`GridSpec`].
pub fn discretize_on(spec: &DistributionSpec, grid: &GridSpec) -> Result<GridDensity> {
    discretize(spec, grid.lo(), grid.half_width, grid.step)
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Density of the sum of independent variables with laws `p` and `q`.
///
/// Linear convolution by zero-padded FFT; the output domain is
/// `[p.lo + q.lo, p.hi + q.hi]`.
pub fn convolve_pair(p: &GridDensity, q: &GridDensity) -> Result<GridDensity> {
    if (p.step - q.step).abs() > 1e-12 * p.step {
        return Err(Error::StepMismatch(p.step, q.step));
    }
    let h = p.step;
    let len = p.len() + q.len() - 1;
    if len > 1 << 24 {
        return Err(Error::DomainOverflow(format!("{len} output points")));
    }
    let nfft = next_pow2(2 * len);
    let a = p.corrected_values();
    let b = q.corrected_values();
    let mut fa: Vec<Complex64> = a.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fa.resize(nfft, Complex64::new(0.0, 0.0));
    fb.resize(nfft, Complex64::new(0.0, 0.0));
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(nfft);
    let inv = planner.plan_fft_inverse(nfft);
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = h / nfft as f64;
    let raw: Vec<f64> = fa[..len].iter().map(|c| c.re * scale).collect();

    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let fft_noise = 16.0 * f64::EPSILON * (nfft as f64).log2() * h * norm2(&a) * norm2(&b);
    let resolution = fft_noise + p.resolution * q.mass + q.resolution * p.mass;
    let lo = p.lo + q.lo;
    let mut raw = raw;
    // Two jumps meeting at one output point: the discrete sum multiplies the
    // midpoint samples, where the rule wants the mean of the one-sided products.
    // Every such pair also leaves a kink of slope jump (dp dq) in the output.
    let mut kinks: Vec<(f64, f64)> = Vec::new();
    for a in p.singularities.iter().filter(|s| s.right != s.left) {
        for b in q.singularities.iter().filter(|s| s.right != s.left) {
            let (jp, jq) = (a.right - a.left, b.right - b.left);
            let x = a.x + b.x;
            let on_grid = |g: &GridDensity, s: f64| {
                let pos = (s - g.lo) / h;
                (pos - pos.round()).abs() < 1e-9
            };
            if on_grid(p, a.x) && on_grid(q, b.x) {
                let k = ((x - lo) / h).round() as usize;
                if k < raw.len() {
                    raw[k] -= 0.25 * h * jp * jq;
                }
            }
            match kinks.iter_mut().find(|k| (k.0 - x).abs() < 1e-12 * (1.0 + x.abs())) {
                Some(k) => k.1 += jp * jq,
                None => kinks.push((x, jp * jq)),
            }
        }
    }
    let mut out = finish(lo, h, raw, None, resolution)?;
    kinks.retain(|k| k.1 != 0.0 && k.0 > out.lo && k.0 < out.hi);
    if !kinks.is_empty() {
        kinks.sort_by(|a, b| a.0.total_cmp(&b.0));
        // slopes to either side, estimated away from the kink
        for (x, jump) in kinks {
            let v = out.value_at(x);
            let d = 2.0 * h;
            let dleft = (v - out.value_at(x - d)) / d;
            out.singularities.push(Singularity {
                x,
                left: v,
                right: v,
                dleft,
                dright: dleft + jump,
            });
        }
        out.mass = out.integrate(|_, p| p);
    }
    Ok(out)
}

/// Clip negative ripple, rescale to `target` mass (or the pre-clip mass).
fn finish(lo: f64, h: f64, raw: Vec<f64>, target: Option<f64>, resolution: f64) -> Result<GridDensity> {
    let m = raw.len();
    let trap = |v: &[f64]| {
        h * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[v.len() - 1]))
    };
    let before = trap(&raw);
    let mut clipped = 0.0;
    let mut values = raw;
    for v in values.iter_mut() {
        if *v < 0.0 {
            clipped += -*v * h;
            *v = 0.0;
        }
    }
    let after = trap(&values);
    let want = target.unwrap_or(before);
    if after > 0.0 {
        let s = want / after;
        for v in values.iter_mut() {
            *v *= s;
        }
    }
    let mut g = GridDensity {
        lo,
        hi: lo + h * (m - 1) as f64,
        step: h,
        values,
        mass: 0.0,
        clipped_mass: clipped,
        resolution,
        singularities: Vec::new(),
    };
    g.mass = g.integrate(|_, p| p);
    Ok(g)
}

/// Density of `scale * (X_1 + ... + X_n)` on `grid`, specs cycled to length `n`.
///
/// For `n >= 2` the product of the exact characteristic functions is inverted
/// by one FFT on the grid; repeated summands enter through integer powers.
pub fn scaled_sum_density(
    specs: &[DistributionSpec],
    n: usize,
    scale: f64,
    grid: &GridSpec,
) -> Result<GridDensity> {
    cycle(specs, n)?;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::param("scale", format!("must be positive, got {scale}")));
    }
    if n == 1 {
        return discretize_on(&specs[0].scaled(scale)?, grid);
    }
    let list = cycle(specs, n)?;
    if n <= UNIFORM_EXACT_MAX_N && list.iter().all(|s| matches!(s.family(), Family::Uniform { .. })) {
        return uniform_sum_density(&list, scale, grid);
    }
    let counts: Vec<u32> = (0..specs.len())
        .map(|i| if i >= n { 0 } else { ((n - i + specs.len() - 1) / specs.len()) as u32 })
        .collect();
    let m = grid.len();
    let h = grid.step;
    let x0 = grid.lo();
    let nfft = next_pow2(2 * m);
    let dt = 2.0 * PI / (nfft as f64 * h);
    let mut abs_sum = 0.0;
    let mut buf: Vec<Complex64> = (0..nfft)
        .map(|j| {
            let jj = if j < nfft / 2 { j as f64 } else { j as f64 - nfft as f64 };
            let t = jj * dt;
            let mut psi = Complex64::new(1.0, 0.0);
            for (spec, &c) in specs.iter().zip(&counts) {
                if c > 0 {
                    psi *= spec.char_fn(scale * t).powu(c);
                }
            }
            abs_sum += psi.norm();
            psi * Complex64::from_polar(1.0, -t * x0)
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    let c = dt / (2.0 * PI);
    let raw: Vec<f64> = buf[..m].iter().map(|z| z.re * c).collect();
    let resolution = 64.0 * f64::EPSILON * c * abs_sum;

    // truncating a slowly decaying transform at the Nyquist frequency leaves a
    // ripple of roughly |psi(T)| T / pi; only edge values above it signal real
    // mass outside the domain
    let t_nyq = PI / h;
    let mut psi_nyq = 1.0;
    for (spec, &c) in specs.iter().zip(&counts) {
        if c > 0 {
            psi_nyq *= spec.char_fn(scale * t_nyq).norm().powi(c as i32);
        }
    }
    let ripple = 4.0 * psi_nyq * t_nyq / PI;
    let edge = raw[0].abs().max(raw[m - 1].abs());
    if edge > 1e-10_f64.max(10.0 * ripple) {
        let captured = 1.0 - 2.0 * edge * grid.half_width;
        return Err(Error::DomainTooSmall {
            lo: x0,
            hi: grid.half_width,
            captured,
        });
    }
    finish(x0, h, raw, Some(1.0), resolution)
}

/// Largest `n` for which sums of uniforms use the piecewise-polynomial form.
/// Their transforms decay like `t^-n`, too slowly for the inversion at small `n`;
/// beyond 4 the inclusion-exclusion sum starts to lose digits.
pub const UNIFORM_EXACT_MAX_N: usize = 4;

/// `scale * (U_1 + ... + U_n)` for uniforms, by inclusion-exclusion over the
/// `2^n` corner sums. Kinks of the `n = 2` trapezoid are recorded as singularities.
fn uniform_sum_density(list: &[&DistributionSpec], scale: f64, grid: &GridSpec) -> Result<GridDensity> {
    let n = list.len();
    let mut base = 0.0;
    let mut widths = Vec::with_capacity(n);
    for s in list {
        if let Family::Uniform { lo, hi } = s.family() {
            base += lo;
            widths.push(hi - lo);
        }
    }
    let norm = widths.iter().product::<f64>() * (1..n).product::<usize>() as f64;
    let corners: Vec<(f64, f64)> = (0..1usize << n)
        .map(|mask| {
            let shift: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| widths[i]).sum();
            let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            (shift, sign)
        })
        .collect();
    let total: f64 = widths.iter().sum();
    // density of the unscaled, unshifted sum at u
    let f = |u: f64| {
        if u <= 0.0 || u >= total {
            return 0.0;
        }
        let mut acc = 0.0;
        for &(c, sign) in &corners {
            let d = u - c;
            if d > 0.0 {
                acc += sign * d.powi(n as i32 - 1);
            }
        }
        (acc / norm).max(0.0)
    };
    let lo = grid.lo();
    let h = grid.step;
    let values: Vec<f64> = (0..grid.len())
        .map(|k| f((lo + k as f64 * h) / scale - base) / scale)
        .collect();
    if values[0] > 0.0 || values[values.len() - 1] > 0.0 {
        return Err(Error::DomainTooSmall {
            lo,
            hi: grid.half_width,
            captured: 1.0 - (scale * total - 2.0 * grid.half_width).max(0.0) / (scale * total),
        });
    }
    let mut g = GridDensity::from_samples(lo, h, values)?;
    if n == 2 {
        let mut kinks: Vec<(f64, f64)> = Vec::new();
        for &(c, sign) in &corners {
            match kinks.iter_mut().find(|k| (k.0 - c).abs() < 1e-14 * (1.0 + c.abs())) {
                Some(k) => k.1 += sign,
                None => kinks.push((c, sign)),
            }
        }
        kinks.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut slope = 0.0;
        for (c, jump) in kinks {
            if jump == 0.0 {
                continue;
            }
            let x = scale * (c + base);
            let v = f(c) / scale;
            let next = slope + jump / norm / (scale * scale);
            g.singularities.push(Singularity {
                x,
                left: v,
                right: v,
                dleft: slope,
                dright: next,
            });
            slope = next;
        }
        g.mass = g.integrate(|_, p| p);
    }
    Ok(g)
}

/// Density of `W_n = (X_1 + ... + X_n) / sqrt(B_n)`.
pub fn normalized_sum_density(specs: &[DistributionSpec], n: usize, grid: &GridSpec) -> Result<GridDensity> {
    let list = cycle(specs, n)?;
    let b: f64 = list.iter().map(|s| s.variance()).sum();
    scaled_sum_density(specs, n, 1.0 / b.sqrt(), grid)
}
