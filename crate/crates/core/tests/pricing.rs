mod common;

use common::{binomial_se, drifted_hit_probability, spectral_gamma};
use epsilon_strong::estimators::{
    estimate_exponential, estimate_uniform_improved, ConstantBounder, FunctionalBounder,
};
use epsilon_strong::options::{
    draw_terminal_and_gate, euler_price, euler_steps, hitting_indicator, hitting_indicator_free, map_gbm,
    price_sample, BounderFa, BounderFb, BounderFc, Case, ConstantBoundary, EstimatorKind, Gate, HitOutcome,
    LinearBoundary, MarketParams,
};
use epsilon_strong::rng::{stream, StreamKey};
use epsilon_strong::stats::{chi_square_test, mean_stderr};
use epsilon_strong::Result;

#[test]
fn gate_acceptance_matches_quadrature() {
    let ctx = map_gbm(&MarketParams::default(), Case::A).unwrap();
    let n = 20_000;
    let mut rng = stream(1, &[]);
    let accepted = (0..n)
        .filter(|_| matches!(draw_terminal_and_gate(&ctx, &mut rng, 1000).unwrap(), Gate::Layer(_)))
        .count();
    // ∫ φ(z) γ(L, U; T, x0, x0 + μT + √T z) dz on a fine grid
    let m = 4000;
    let h = 16.0 / m as f64;
    let oracle: f64 = (0..m)
        .map(|i| {
            let z = -8.0 + (i as f64 + 0.5) * h;
            let y = ctx.x0 + ctx.drift * ctx.horizon + ctx.horizon.sqrt() * z;
            (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
                * spectral_gamma(ctx.horizon, ctx.x0, y, ctx.lower, ctx.upper)
                * h
        })
        .sum();
    let f = accepted as f64 / n as f64;
    assert!((f - oracle).abs() <= 3.0 * binomial_se(oracle, n), "{f} vs {oracle}");
}

fn check_nesting(b: &mut dyn FunctionalBounder, steps: usize) -> Result<()> {
    let (mut lo, mut hi) = b.bounds();
    assert!(lo <= hi);
    for _ in 0..steps {
        b.step()?;
        let (l, h) = b.bounds();
        assert!(l <= h + 1e-12, "{l} > {h}");
        assert!(l >= lo - 1e-12 && h <= hi + 1e-12, "[{l}, {h}] not inside [{lo}, {hi}]");
        (lo, hi) = (l, h);
    }
    Ok(())
}

#[test]
fn bounders_nest_and_shrink() {
    let params = MarketParams::default();
    let mut seen = 0;
    for i in 0..60u64 {
        let key = StreamKey::new(2).child(i);
        for case in [Case::A, Case::B, Case::C] {
            let ctx = map_gbm(&params, case).unwrap();
            let Gate::Layer(layer) = draw_terminal_and_gate(&ctx, &mut key.child(0).rng(), 1000).unwrap() else {
                continue;
            };
            seen += 1;
            let mut b: Box<dyn FunctionalBounder> = match case {
                Case::A => Box::new(BounderFa::new(layer, params, &key.child(1), 1000)),
                Case::B => Box::new(BounderFb::new(layer, params, &key.child(1), 1000)),
                Case::C => Box::new(BounderFc::new(layer, params, &key.child(1), 1000)),
            };
            let (l0, h0) = b.bounds();
            check_nesting(b.as_mut(), 8).unwrap();
            let (l8, h8) = b.bounds();
            assert!(h8 - l8 <= h0 - l0);
        }
    }
    assert!(seen > 50);
}

/// Bounds `[lo, hi]` at generation 0 that collapse onto `value` at step 1.
struct Revealing {
    lo: f64,
    hi: f64,
    value: f64,
    n: usize,
}

impl FunctionalBounder for Revealing {
    fn bounds(&self) -> (f64, f64) {
        if self.n == 0 {
            (self.lo, self.hi)
        } else {
            (self.value, self.value)
        }
    }
    fn step(&mut self) -> Result<()> {
        self.n += 1;
        Ok(())
    }
    fn generation(&self) -> usize {
        self.n
    }
}

#[test]
fn uniform_estimator_has_two_point_law() {
    let (lo, hi, c) = (0.1, 0.5, 0.23);
    let n = 20_000;
    let mut rng = stream(3, &[]);
    let mut up = 0u64;
    for _ in 0..n {
        let mut b = Revealing { lo, hi, value: c, n: 0 };
        let r = estimate_uniform_improved(&mut b, &mut rng, 0, 10).unwrap();
        assert!(r.value == lo || r.value == hi);
        up += u64::from(r.value == hi);
    }
    let p = (c - lo) / (hi - lo);
    let (_, pval) = chi_square_test(&[n - up, up], &[(1.0 - p) * n as f64, p * n as f64], 0).unwrap();
    assert!(pval > 0.01);
}

#[test]
fn exponential_estimator_has_closed_form_law() {
    // value = e^E·I{E < c}; bin by E through log(value)
    let c = 0.8;
    let n = 20_000u64;
    let bins = 8;
    let mut counts = vec![0u64; bins + 1];
    let mut rng = stream(4, &[]);
    for _ in 0..n {
        let r = estimate_exponential(&mut ConstantBounder::exact(c), &mut rng, 10).unwrap();
        if r.value == 0.0 {
            counts[bins] += 1;
        } else {
            let e = r.value.ln();
            counts[((e / c * bins as f64) as usize).min(bins - 1)] += 1;
        }
    }
    let mut expected: Vec<f64> = (0..bins)
        .map(|k| {
            let (a, b) = (c * k as f64 / bins as f64, c * (k + 1) as f64 / bins as f64);
            ((-a).exp() - (-b).exp()) * n as f64
        })
        .collect();
    expected.push((-c).exp() * n as f64);
    let (_, p) = chi_square_test(&counts, &expected, 0).unwrap();
    assert!(p > 0.01, "p = {p}");
}

#[test]
fn estimators_agree_on_capped_call() {
    let params = MarketParams::default();
    let n = 20_000u64;
    let draw = |kind: EstimatorKind, seed: u64| {
        let values: Vec<f64> = (0..n)
            .map(|i| price_sample(&params, Case::A, kind, 10, &StreamKey::new(seed).child(i), 1000).unwrap().value)
            .collect();
        mean_stderr(&values).unwrap()
    };
    let (m1, s1) = draw(EstimatorKind::UniformImproved { n0: 2 }, 5);
    let (m2, s2) = draw(EstimatorKind::Exponential, 6);
    assert!((m1 - m2).abs() <= 3.0 * (s1 * s1 + s2 * s2).sqrt(), "{m1} ± {s1} vs {m2} ± {s2}");
}

#[test]
fn euler_grid_validation() {
    assert_eq!(euler_steps(1.0, 1.0 / 160.0).unwrap(), 160);
    assert!(euler_steps(1.0, 0.3).is_err());
    assert!(euler_steps(1.0, 1.0).is_err());
    assert!(euler_steps(1.0, -0.1).is_err());
    let p = euler_price(&MarketParams::default(), Case::A, 0.1, 10_000, &StreamKey::new(7)).unwrap();
    // coarse grids overestimate survival, so the price sits above the exact value
    assert!(p.mean > 0.0625 && p.mean < 0.0675, "{p:?}");
}

#[test]
fn linear_boundary_hitting_matches_closed_form() {
    let (a, b) = (0.8, -0.3);
    let boundary = LinearBoundary { intercept: a, slope: b };
    let n = 10_000;
    let (mut hits, mut capped) = (0usize, 0usize);
    for i in 0..n as u64 {
        match hitting_indicator_free(0.0, 0.0, 1.0, &boundary, &StreamKey::new(8).child(i), 30, 1000).unwrap() {
            HitOutcome::Hit => hits += 1,
            HitOutcome::Capped => capped += 1,
            HitOutcome::NoHit => {}
            HitOutcome::GateRejected => unreachable!(),
        }
    }
    let p = drifted_hit_probability(a, -b, 1.0);
    let f = hits as f64 / n as f64;
    let slack = capped as f64 / n as f64;
    assert!(slack < 0.01);
    assert!((f - p).abs() <= 3.0 * binomial_se(p, n) + slack, "{f} vs {p}");
}

#[test]
fn hitting_edge_cases() {
    let ctx = map_gbm(&MarketParams::default(), Case::A).unwrap();
    let key = StreamKey::new(9);
    let above = ConstantBoundary(ctx.upper + 0.1);
    for i in 0..50 {
        let out = hitting_indicator(&ctx, &above, &key.child(i), 10, 1000).unwrap();
        assert!(matches!(out, HitOutcome::NoHit | HitOutcome::GateRejected));
    }
    assert!(hitting_indicator(&ctx, &ConstantBoundary(ctx.x0 - 0.1), &key, 10, 1000).is_err());
}

#[test]
fn price_samples_are_reproducible_and_bounded() {
    let params = MarketParams::default();
    for i in 0..20 {
        let key = StreamKey::new(10).child(i);
        for case in [Case::A, Case::B, Case::C] {
            let kind = EstimatorKind::UniformImproved { n0: 2 };
            let a = price_sample(&params, case, kind, 10, &key, 1000).unwrap();
            let b = price_sample(&params, case, kind, 10, &key, 1000).unwrap();
            assert_eq!(a, b);
            assert!(a.value >= 0.0 && a.bias_bound >= 0.0);
            assert_eq!(a.hit_nmax, a.bias_bound > 0.0);
        }
    }
}
