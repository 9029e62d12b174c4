//! Cross-module checks: closed forms, worked examples and property tests.

use std::f64::consts::PI;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use skl_lab::dist::DistributionSpec;
use skl_lab::edgeworth::{edgeworth_density, expansion_error, hermite, R2Variant};
use skl_lab::grid::{convolve_pair, discretize, discretize_on, normalized_sum_density, GridDensity, GridSpec, DEFAULT_STEP};
use skl_lab::info::{entropy, entropy_jump, kl, symmetric_kl, total_variation_l1};
use skl_lab::ratelab::{dyadic, emit_report, fit_rate, run_sweep, ReportFormat, SweepConfig};
use skl_lab::stein::{stein_solution_fn, zero_bias_density, TestFn};
use skl_lab::verify::{
    build_h1, calibrate_envelope, decompose_symmetric_kl, prop_a1_check, prop_a2_params, property24_check,
    Property24Params, ENVELOPE_FLOOR,
};
use skl_lab::Error;

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

fn sup_error(p: &GridDensity, f: impl Fn(f64) -> f64) -> f64 {
    p.xs().zip(&p.values).map(|(x, v)| (v - f(x)).abs()).fold(0.0, f64::max)
}

fn grid12() -> GridSpec {
    GridSpec::new(12.0, DEFAULT_STEP).unwrap()
}

#[test]
fn sum_of_two_standard_uniforms_is_the_triangle() {
    let u = DistributionSpec::standard_uniform();
    let p = normalized_sum_density(&[u], 2, &GridSpec::default_for(2)).unwrap();
    let a = 6f64.sqrt();
    let err = sup_error(&p, |x| ((a - x.abs()) / (a * a)).max(0.0));
    assert!(err < 1e-8, "{err:e}");
    assert!((p.mass - 1.0).abs() < 1e-12);
}

#[test]
fn gaussian_sums_stay_gaussian() {
    let g = DistributionSpec::standard_gaussian();
    for n in [1, 2, 3, 8] {
        let p = normalized_sum_density(&[g.clone()], n, &GridSpec::default_for(n)).unwrap();
        assert!(sup_error(&p, phi) < 1e-10, "n = {n}");
    }
}

#[test]
fn pair_convolution_closed_forms() {
    let g = discretize_on(&DistributionSpec::standard_gaussian(), &grid12()).unwrap();
    let c = convolve_pair(&g, &g).unwrap();
    let err = sup_error(&c, |x| (-x * x / 4.0).exp() / (4.0 * PI).sqrt());
    assert!(err < 1e-8, "{err:e}");

    let u = discretize(&DistributionSpec::uniform(0.0, 1.0).unwrap(), -1.0, 2.0, DEFAULT_STEP).unwrap();
    let t = convolve_pair(&u, &u).unwrap();
    let err = sup_error(&t, |x| (1.0 - (x - 1.0).abs()).max(0.0));
    assert!(err < 1e-8, "{err:e}");
    assert!((t.value_at(1.0) - 1.0).abs() < 1e-8);
}

#[test]
fn convolution_is_commutative_and_keeps_evenness() {
    let g = GridSpec::new(24.0, DEFAULT_STEP).unwrap();
    let l = discretize_on(&DistributionSpec::standard_laplace(), &g).unwrap();
    let m = discretize_on(&DistributionSpec::skewed_mixture(), &g).unwrap();
    assert_eq!(convolve_pair(&l, &m).unwrap(), convolve_pair(&m, &l).unwrap());
    let ll = convolve_pair(&l, &l).unwrap();
    let k = ll.len();
    let odd = (0..k).map(|i| (ll.values[i] - ll.values[k - 1 - i]).abs()).fold(0.0, f64::max);
    assert!(odd < 1e-10);
    assert!((ll.mass - l.mass * l.mass).abs() < 1e-8);
    assert!((ll.variance() - 2.0 * l.variance()).abs() < 1e-6);
}

#[test]
fn step_mismatch_is_rejected() {
    let g = DistributionSpec::standard_gaussian();
    let a = discretize(&g, -12.0, 12.0, DEFAULT_STEP).unwrap();
    let b = discretize(&g, -12.0, 12.0, DEFAULT_STEP / 2.0).unwrap();
    assert!(matches!(convolve_pair(&a, &b), Err(Error::StepMismatch(..))));
}

#[test]
fn entropy_and_kl_closed_forms() {
    let g = GridSpec::new(16.0, DEFAULT_STEP).unwrap();
    let n01 = discretize_on(&DistributionSpec::standard_gaussian(), &g).unwrap();
    assert!((entropy(&n01) - 0.5 * (2.0 * PI * 1f64.exp()).ln()).abs() < 1e-9);
    let u = discretize_on(&DistributionSpec::standard_uniform(), &g).unwrap();
    assert!((entropy(&u) - (2.0 * 3f64.sqrt()).ln()).abs() < 1e-9);

    let n2 = discretize_on(&DistributionSpec::gaussian(0.0, 2.0).unwrap(), &g).unwrap();
    assert!((kl(&n2, &n01).unwrap() - 0.5 * (1.0 - 2f64.ln())).abs() < 1e-9);
    let r = symmetric_kl(&n2, &n01).unwrap();
    assert!((r.d - 0.25).abs() < 1e-9);
    let swapped = symmetric_kl(&n01, &n2).unwrap();
    assert!((r.d - swapped.d).abs() < 1e-12);

    let shifted = discretize_on(&DistributionSpec::gaussian(1.0, 1.0).unwrap(), &g).unwrap();
    let expect = 2.0 * (2.0 * skl_lab::special::std_normal_cdf(0.5) - 1.0);
    assert!((total_variation_l1(&n01, &shifted).unwrap() - expect).abs() < 1e-8);

    let lap = DistributionSpec::standard_laplace();
    let p = discretize_on(&lap, &GridSpec::new(30.0, DEFAULT_STEP).unwrap()).unwrap();
    let q = GridDensity::std_normal(&GridSpec::new(30.0, DEFAULT_STEP).unwrap());
    let gap = 0.5 * (2.0 * PI * 1f64.exp()).ln() - entropy(&p);
    assert!((kl(&p, &q).unwrap() - gap).abs() < 1e-8);
}

#[test]
fn compact_support_breaks_absolute_continuity() {
    let g = grid12();
    let u = discretize_on(&DistributionSpec::standard_uniform(), &g).unwrap();
    let n01 = GridDensity::std_normal(&g);
    assert!(matches!(kl(&n01, &u), Err(Error::AbsoluteContinuity { .. })));
}

#[test]
fn entropy_jump_examples() {
    let u = DistributionSpec::standard_uniform();
    let jump = entropy_jump(&u, &u).unwrap();
    // triangle on [-sqrt 6, sqrt 6] against the uniform; p ln p has infinite
    // slope where the triangle reaches 0, which limits the trapezoid entropy
    assert!((jump - (0.5 - 0.5 * 2f64.ln())).abs() < 2e-5, "{jump}");
    assert!(jump > 1e-3);
    let l = DistributionSpec::standard_laplace();
    assert!(entropy_jump(&l, &l).unwrap() > 1e-4);
    assert!(matches!(
        entropy_jump(&u, &DistributionSpec::gaussian(0.0, 2.0).unwrap()),
        Err(Error::VarianceMismatch(..))
    ));
}

#[test]
fn hermite_values() {
    assert_eq!(hermite(3, 2.0).unwrap(), 2.0);
    assert_eq!(hermite(4, 0.0).unwrap(), 3.0);
    assert_eq!(hermite(6, 1.0).unwrap(), 16.0);
    assert!(matches!(hermite(7, 0.0), Err(Error::UnsupportedOrder(7))));
}

#[test]
fn edgeworth_examples() {
    let g = DistributionSpec::standard_gaussian();
    let t = edgeworth_density(&[g], 2, 16, R2Variant::Classical).unwrap();
    assert_eq!((t.coeff_r1, t.coeff_r2_a, t.coeff_r2_b), (0.0, 0.0, 0.0));

    let l = DistributionSpec::standard_laplace();
    let t1 = edgeworth_density(&[l.clone()], 1, 16, R2Variant::Classical).unwrap();
    assert_eq!(t1.coeff_r1, 0.0);
    let grid = GridSpec::default_for(16);
    let plain = expansion_error(&[l.clone()], 16, 0, R2Variant::Classical, &grid).unwrap();
    let second = expansion_error(&[l.clone()], 16, 2, R2Variant::Classical, &grid).unwrap();
    assert!(plain.sup_error >= 4.0 * second.sup_error);

    let t2 = edgeworth_density(&[l], 2, 16, R2Variant::Classical).unwrap();
    let xs: Vec<f64> = (0..grid.len()).map(|k| grid.lo() + k as f64 * grid.step).collect();
    let mass: f64 = xs.iter().map(|&x| t2.eval(x)).sum::<f64>() * grid.step;
    assert!((mass - 1.0).abs() < 1e-6);
    assert!(xs.iter().all(|&x| (t2.eval(x) - t2.eval(-x)).abs() < 1e-10));
}

#[test]
fn skewed_first_order_remainder_is_order_one_over_n() {
    let m = DistributionSpec::skewed_mixture();
    let scaled: Vec<f64> = dyadic(16, 256)
        .into_iter()
        .map(|n| n as f64 * expansion_error(&[m.clone()], n, 1, R2Variant::Classical, &GridSpec::default_for(n)).unwrap().sup_error)
        .collect();
    let first = scaled[0];
    assert!(scaled.iter().all(|&v| v <= 1.5 * first), "{scaled:?}");
    for n in [16, 64] {
        let grid = GridSpec::default_for(n);
        let e0 = expansion_error(&[m.clone()], n, 0, R2Variant::Classical, &grid).unwrap().sup_error;
        let e1 = expansion_error(&[m.clone()], n, 1, R2Variant::Classical, &grid).unwrap().sup_error;
        assert!(e1 <= e0);
    }
}

#[test]
fn stein_constant_test_function_gives_zero() {
    let s = stein_solution_fn(&TestFn::Constant(2.5), &grid12()).unwrap();
    assert!(s.f.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn stein_rejects_points_beyond_the_stable_range() {
    let g = GridSpec::new(31.0, 1.0 / 8.0).unwrap();
    assert!(matches!(stein_solution_fn(&TestFn::Sin, &g), Err(Error::Overflow(_))));
}

#[test]
fn zero_bias_rejects_nonzero_mean() {
    let g = DistributionSpec::gaussian(0.5, 1.0).unwrap();
    assert!(matches!(zero_bias_density(&g, &grid12()), Err(Error::NonZeroMean(_))));
}

#[test]
fn prop_a1_base_case_and_rejection() {
    let l = DistributionSpec::laplace(1.0).unwrap();
    let m = l.minorization_params().unwrap();
    assert!((m.l1 - 0.5 * (-0.5f64).exp()).abs() < 1e-12 && m.l2 == 1.0);
    let r = prop_a1_check(m.l1, m.l2, &[l.clone()], 1).unwrap();
    assert!(r.holds);
    let r4 = prop_a1_check(m.l1, m.l2, &[l], 4).unwrap();
    assert!(r4.holds && r4.min_margin > 0.0);
    assert!(r4.induction_residual < 1e-8);
    let u = DistributionSpec::standard_uniform();
    assert!(matches!(prop_a1_check(0.1, 1.0, &[u], 4), Err(Error::NotMinorizable(_))));
}

#[test]
fn prop_a2_threshold_cases() {
    let l1 = 1.0 / (2.0 * PI).sqrt();
    // a = 1 / M^{2/5} <= 1 when M >= 1
    let r = prop_a2_params(1.0, 6.0, 1.0, 1.0, l1, 1.0).unwrap();
    assert!(!r.a_above_one && !r.constraint_holds);
    let c = r.suggested_rescale.unwrap();
    let fixed = r.inputs.rescaled(c);
    let again = prop_a2_params(fixed.j, fixed.m, 1.0, 1.0, fixed.l1, fixed.l2).unwrap();
    assert!((again.params.a - 8.0).abs() < 1e-9);
    assert!(again.constraint_holds);

    // M^{2/5} = 0.5 gives a = 2 and constraint value 3
    let m = 0.5f64.powf(2.5);
    let r = prop_a2_params(1.0, m, 1.0, 1.0, l1, 1.0).unwrap();
    assert!((r.params.a - 2.0).abs() < 1e-12);
    assert!((r.constraint_value - 3.0).abs() < 1e-9);
    assert!(!r.constraint_holds);
}

#[test]
fn prop_a2_inputs_follow_a_rescaling_of_the_summands() {
    let c = 0.4;
    for spec in [DistributionSpec::standard_gaussian(), DistributionSpec::laplace(1.0).unwrap()] {
        let scaled = spec.scaled(c).unwrap();
        let inputs = |s: &DistributionSpec| {
            let m = s.minorization_params().unwrap();
            prop_a2_params(s.fisher_information().unwrap(), s.abs_moment(5.0), 1.0, 1.0, m.l1, m.l2)
                .unwrap()
                .inputs
        };
        let predicted = inputs(&spec).rescaled(c);
        let direct = inputs(&scaled);
        for (a, b) in [
            (predicted.j, direct.j),
            (predicted.m, direct.m),
            (predicted.l2, direct.l2),
        ] {
            assert!((a - b).abs() <= 1e-9 * b.abs(), "{spec}: {a} vs {b}");
        }
        // l1 of the scaled family may be larger than the rescaled bound, never smaller
        assert!(direct.l1 >= predicted.l1 * (1.0 - 1e-9));
    }
}

#[test]
fn property24_examples() {
    let grid = GridSpec::default_for(16);
    let p = GridDensity::std_normal(&grid);
    let params = Property24Params { a: 2.0, k1: 0.01, k2: 1.0, s: 1.0, v: 1.0 };
    assert!(property24_check(&p, &params, 16).holds);

    let mut holed = p.clone();
    let k = holed.len() - 40;
    holed.values[k] = 0.0;
    let r = property24_check(&holed, &params, 16);
    assert!(!r.holds && r.min_margin == f64::NEG_INFINITY);

    let m = DistributionSpec::skewed_mixture();
    let mn = m.minorization_params().unwrap();
    for n in [16, 64] {
        let s = skl_lab::cumulant_summary(&[m.clone()], n, 1.0).unwrap();
        let a2 = prop_a2_params(s.j, s.m, 1.0, 1.0, mn.l1, mn.l2).unwrap();
        let pn = normalized_sum_density(&[m.clone()], n, &GridSpec::default_for(n)).unwrap();
        assert!(property24_check(&pn, &a2.params, n).holds, "n = {n}");
    }
}

#[test]
fn envelope_examples() {
    let g = DistributionSpec::standard_gaussian();
    assert_eq!(calibrate_envelope(&[g], 16).unwrap(), ENVELOPE_FLOOR);
    let u = DistributionSpec::standard_uniform();
    let (c16, c32) = (calibrate_envelope(&[u.clone()], 16).unwrap(), calibrate_envelope(&[u], 32).unwrap());
    assert!(c16.is_finite() && c32 <= 1.5 * c16);
    let m = DistributionSpec::skewed_mixture();
    let (a, b) = (calibrate_envelope(&[m.clone()], 16).unwrap(), calibrate_envelope(&[m], 64).unwrap());
    assert!(b <= 1.5 * a, "{a} {b}");
}

#[test]
fn h1_examples() {
    let u = 1.5f64.sqrt();
    let n = 64;
    let c = calibrate_envelope(&[DistributionSpec::standard_uniform()], n).unwrap();
    let h = build_h1(u, n, c).unwrap();
    let r0 = skl_lab::verify::envelope(c, n, 0.0);
    assert!((h.eval(0.0)[0] - (phi(0.0) - r0).ln()).abs() < 1e-12);
    assert!(h.eval(0.0)[0] < 0.0);
    let p = h.properties(&GridSpec::default_for(n));
    assert!(p.evenness <= 1e-12);
    assert!(p.max_abs_d1 <= p.lambda + 1e-9);
    assert!(p.max_value <= 0.0);
    assert!(h.zero_from <= p.nominal_zero_bound);
    assert_eq!(p.max_abs_beyond_zero, 0.0);

    // the skewed mixture's envelope is too wide for n = 64
    let cm = calibrate_envelope(&[DistributionSpec::skewed_mixture()], n).unwrap();
    assert!(matches!(build_h1(u, n, cm), Err(Error::NTooSmall { .. })));
    assert!(matches!(build_h1(u, 16, 0.05), Err(Error::NTooSmall { .. })));
    assert!(build_h1(1.5, 64, 0.05).is_err());
}

#[test]
fn decomposition_examples() {
    let u = 1.5f64.sqrt();
    let g = decompose_symmetric_kl(&[DistributionSpec::standard_gaussian()], 16, u).unwrap();
    assert!(g.d.abs() < 1e-12 && g.i2.abs() < 1e-12 && g.slack >= -1e-8);
    let m = DistributionSpec::skewed_mixture();
    let r16 = decompose_symmetric_kl(&[m.clone()], 16, u).unwrap();
    let r64 = decompose_symmetric_kl(&[m], 64, u).unwrap();
    for r in [&r16, &r64] {
        assert!(r.slack >= -1e-8);
        assert!(r.i1 >= -1e-12 && r.i3 >= -1e-12);
    }
    assert!(r64.i4.abs() < r16.i4.abs());
    let un = DistributionSpec::standard_uniform();
    assert!(matches!(decompose_symmetric_kl(&[un], 16, u), Err(Error::SupportViolation(_))));
}

#[test]
fn sweep_examples() {
    let rows = run_sweep(&[DistributionSpec::standard_gaussian()], &[2, 4, 8], &SweepConfig::default()).unwrap();
    assert!(rows.iter().all(|r| r.ok() && r.d.abs() < 1e-9));

    let m = DistributionSpec::skewed_mixture();
    let rows = run_sweep(&[m], &dyadic(8, 512), &SweepConfig::default()).unwrap();
    assert!(rows.windows(2).all(|w| w[1].d < w[0].d));
    let fits = fit_rate(&rows, "d").unwrap();
    assert_eq!(fits.iter().filter(|f| f.chosen).count(), 1);
    assert_eq!(fits, fit_rate(&rows, "d").unwrap());

    let mixed = [DistributionSpec::standard_uniform(), DistributionSpec::standard_laplace()];
    let rows = run_sweep(&mixed, &dyadic(8, 128), &SweepConfig::default()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.ok() && r.e_delta_sq.is_none()));

    let dir = tempfile::tempdir().unwrap();
    let six = &run_sweep(&[DistributionSpec::standard_laplace()], &dyadic(8, 256), &SweepConfig::default()).unwrap();
    let fits = fit_rate(six, "d").unwrap();
    emit_report(six, &fits, &[ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg], dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
    assert!(csv.starts_with("n,d,kl_wg,kl_gw,l1,entropy_w,sup_edgeworth_error,e_delta_sq,runtime_ms"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sweep.json")).unwrap()).unwrap();
    assert!(json["rows"].is_array() && json["fits"].is_array());
    let svg = std::fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<path").count(), fits.len());
}

#[test]
fn laplace_divergence_decreases() {
    let l = DistributionSpec::standard_laplace();
    let d = |n: usize| {
        let grid = GridSpec::default_for(n);
        let p = normalized_sum_density(&[l.clone()], n, &grid).unwrap();
        symmetric_kl(&p, &GridDensity::std_normal(&grid)).unwrap().d
    };
    assert!(d(16) > d(64));
}

fn family() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|v| DistributionSpec::gaussian(0.0, v).unwrap()),
        (0.4f64..2.0).prop_map(|b| DistributionSpec::laplace(b).unwrap()),
        (0.3f64..1.5).prop_map(|s| DistributionSpec::logistic(s).unwrap()),
        (0.2f64..0.8, 0.2f64..1.0, 0.8f64..1.5).prop_map(|(w, t, v)| {
            // zero-mean two-component mixture with spread variance at most v/2;
            // wider spreads push the tails of W_n below the grid resolution at small n
            let m = t * (v * (1.0 - w) / (2.0 * w)).sqrt();
            let m2 = -w * m / (1.0 - w);
            DistributionSpec::mixture(&[w, 1.0 - w], &[m, m2], &[v, v]).unwrap()
        }),
        (0.5f64..2.0).prop_map(|a| DistributionSpec::uniform(-a, a).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, rng_seed: RngSeed::Fixed(0x5eed), ..ProptestConfig::default() })]

    #[test]
    fn pinsker_chain_holds(spec in family(), k in 2u32..6) {
        prop_assume!(spec.full_support());
        let n = 1usize << k;
        let grid = GridSpec::default_for(n);
        let p = normalized_sum_density(&[spec], n, &grid).unwrap();
        let r = symmetric_kl(&p, &GridDensity::std_normal(&grid)).unwrap();
        prop_assert!(r.kl_pq >= -1e-10 && r.kl_qp >= -1e-10);
        prop_assert!(r.d >= r.kl_pq - 1e-12);
        prop_assert!(r.pinsker_slack >= -1e-9);
        prop_assert!(r.d >= 0.5 * r.l1 * r.l1 - 1e-9);
    }

    #[test]
    fn divergence_does_not_grow_when_n_doubles(spec in family(), k in 2u32..6) {
        prop_assume!(spec.full_support());
        let d = |n: usize| {
            let grid = GridSpec::default_for(n);
            let p = normalized_sum_density(&[spec.clone()], n, &grid).unwrap();
            symmetric_kl(&p, &GridDensity::std_normal(&grid)).unwrap().d
        };
        let n = 1usize << k;
        prop_assert!(d(2 * n) <= d(n) + 1e-9);
    }

    #[test]
    fn sum_densities_are_normalized_and_standardized(spec in family(), n in 1usize..40) {
        // a single standardized Laplace still has 4e-8 of its mass beyond 12
        let (lo, hi) = spec.effective_support(1e-16);
        let reach = lo.abs().max(hi.abs()) / spec.variance().sqrt();
        let grid = GridSpec::new(GridSpec::default_for(n).half_width.max(reach), DEFAULT_STEP).unwrap();
        let p = normalized_sum_density(&[spec], n, &grid).unwrap();
        prop_assert!((p.mass - 1.0).abs() < 1e-6);
        prop_assert!(p.mean().abs() < 1e-6);
        prop_assert!((p.variance() - 1.0).abs() < 1e-6);
        prop_assert!(p.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn cramer_rao_and_entropy_maximality(spec in family()) {
        prop_assume!(spec.full_support());
        let j = spec.fisher_information().unwrap();
        prop_assert!(spec.variance() * j >= 1.0 - 1e-9);
        let (lo, hi) = spec.effective_support(1e-16);
        let grid = GridSpec::covering(lo - 1.0, hi + 1.0);
        let p = discretize_on(&spec, &grid).unwrap();
        let g = discretize_on(&DistributionSpec::gaussian(0.0, spec.variance()).unwrap(), &grid).unwrap();
        prop_assert!(entropy(&g) >= entropy(&p) - 1e-9);
    }

    #[test]
    fn minorant_lies_below_the_density(spec in family()) {
        if let Some(m) = spec.minorization_params() {
            for k in 0..1000 {
                let x = -20.0 + 40.0 * k as f64 / 999.0;
                prop_assert!(spec.density(x) >= m.l1 * (-m.l2 * x * x / 2.0).exp() - 1e-12);
            }
        }
    }

    #[test]
    fn moment_power_mean(spec in family(), delta0 in 0.2f64..2.0) {
        let m = spec.abs_moment(4.0 + delta0);
        prop_assert!(m.powf(2.0 / (4.0 + delta0)) >= spec.variance() * (1.0 - 1e-12));
    }

    #[test]
    fn coupling_stays_below_its_bound(spec in family(), k in 2u32..9) {
        prop_assume!(spec.full_support());
        let n = 1usize << k;
        let r = skl_lab::stein::coupling_delta_second_moment(&[spec], n, 1.0).unwrap();
        prop_assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(r.e_delta_sq <= r.bound + 1e-12);
    }
}
