mod common;

use common::{beta, binomial_se, midpoint_cdf, tan_density, GridCdf};
use epsilon_strong::alt_series::Interval;
use epsilon_strong::bridge_sampling::MidpointSampler;
use epsilon_strong::layer_events::{
    child_ranges, refine_bernoulli, sample_e, sample_initial_layers, tighten_around, ExtremaRanges, LayerGrid,
    PinnedBridge, UPDATE_PATTERNS,
};
use epsilon_strong::layers::{Extremum, IntersectionLayer};
use epsilon_strong::rng::stream;
use epsilon_strong::stats::{chi_square_test, ks_statistic, ks_two_sample};
use epsilon_strong::tan_diffusion::sample_transition;
use std::f64::consts::FRAC_PI_2;

const N: usize = 20_000;

fn ranges(r: [f64; 4]) -> ExtremaRanges {
    ExtremaRanges::new(r[0], r[1], r[2], r[3]).unwrap()
}

#[test]
fn midpoint_draws_match_quadrature() {
    let contexts: [(f64, f64, f64, f64, [f64; 4]); 3] = [
        (0.5, 0.5, 0.0, 0.3, [-1.0, -0.5, 0.8, 1.3]),
        (0.3, 0.7, 0.2, -0.1, [-1.5, -0.4, 0.5, 2.0]),
        (0.0625, 0.0625, 0.1, 0.05, [-0.3, 0.0, 0.2, 0.4]),
    ];
    for (i, &(q, r, x, y, rg)) in contexts.iter().enumerate() {
        let sampler = MidpointSampler::new(ranges(rg), q, r, x, y).unwrap();
        let mut rng = stream(100 + i as u64, &[]);
        let draws: Vec<f64> = (0..N).map(|_| sampler.sample(&mut rng, 1000).unwrap()).collect();
        let oracle = midpoint_cdf(q, r, x, y, rg, 10_000);
        let d = ks_statistic(&draws, |w| oracle.eval(w));
        // 1% critical value 1.63/√N ≈ 0.0115
        assert!(d < 0.0115, "context {i}: KS {d}");
    }
}

#[test]
fn envelope_acceptance_is_high() {
    let sampler = MidpointSampler::new(ranges([-1.0, -0.5, 0.8, 1.3]), 0.5, 0.5, 0.0, 0.3).unwrap();
    let mut rng = stream(7, &[]);
    let (mut draws, mut proposals) = (0usize, 0usize);
    for _ in 0..5_000 {
        proposals += sampler.sample_counted(&mut rng, 1000).unwrap().1;
        draws += 1;
    }
    assert!(draws as f64 / proposals as f64 > 0.5);
}

#[test]
fn update_patterns_follow_beta_products() {
    let parent = ranges([-1.2, -0.4, 0.5, 1.1]);
    let (x, w, y, q) = (0.0, -0.1, 0.2, 0.5);
    let pinned = PinnedBridge::new(q, q, x, w, y).unwrap();
    let tight = tighten_around(&parent, w);
    let oracle: Vec<f64> = UPDATE_PATTERNS
        .iter()
        .map(|&p| {
            let (l, r) = child_ranges(&tight, &pinned, p);
            let arr = |e: ExtremaRanges| [e.min_lo, e.min_hi, e.max_lo, e.max_hi];
            beta(q, x, w, arr(l)) * beta(q, w, y, arr(r))
        })
        .collect();
    let total: f64 = oracle.iter().sum();
    let mut counts = [0usize; 9];
    let mut rng = stream(11, &[]);
    for _ in 0..N {
        counts[sample_e(&tight, &pinned, &mut rng, 1000).unwrap().index as usize - 1] += 1;
    }
    for k in 0..9 {
        let p = oracle[k] / total;
        let f = counts[k] as f64 / N as f64;
        assert!((f - p).abs() <= 3.0 * binomial_se(p, N) + 1e-12, "pattern {}: {f} vs {p}", k + 1);
    }
}

#[test]
fn refinement_follows_beta_ratio() {
    let layer = IntersectionLayer::new(0.0, 1.0, 0.0, 0.3, Interval::new(-1.5, -0.5), Interval::new(0.5, 1.5)).unwrap();
    for (which, seed) in [(Extremum::Max, 21u64), (Extremum::Min, 22)] {
        let r = layer.ranges();
        let outer = match which {
            Extremum::Max => [r.min_lo, r.min_hi, 1.0, r.max_hi],
            Extremum::Min => [r.min_lo, -1.0, r.max_lo, r.max_hi],
        };
        let p = beta(1.0, 0.0, 0.3, outer) / beta(1.0, 0.0, 0.3, [r.min_lo, r.min_hi, r.max_lo, r.max_hi]);
        let mut rng = stream(seed, &[]);
        let hits = (0..N).filter(|_| refine_bernoulli(&layer, which, &mut rng, 1000).unwrap()).count();
        let f = hits as f64 / N as f64;
        assert!((f - p).abs() <= 3.0 * binomial_se(p, N), "{which:?}: {f} vs {p}");
    }
}

#[test]
fn initial_cells_follow_beta() {
    let spec = epsilon_strong::alt_series::BridgeSpec::new(1.0, 0.0, 0.4).unwrap();
    let grid = LayerGrid::default_for(1.0);
    let mut rng = stream(31, &[]);
    let n = 200_000;
    let mut counts = std::collections::HashMap::new();
    for _ in 0..n {
        let c = sample_initial_layers(spec, &grid, &mut rng, 1000).unwrap();
        *counts.entry((c.i, c.j)).or_insert(0usize) += 1;
    }
    let cell = |i: usize, j: usize| {
        let r = [-(i as f64), -(i as f64 - 1.0), 0.4 + (j - 1) as f64, 0.4 + j as f64];
        beta(1.0, 0.0, 0.4, r)
    };
    let mut head = 0.0;
    let mut head_count = 0usize;
    for (i, j) in [(1, 1), (1, 2), (2, 1)] {
        let p = cell(i, j);
        let k = *counts.get(&(i, j)).unwrap_or(&0);
        let f = k as f64 / n as f64;
        assert!((f - p).abs() <= 3.0 * binomial_se(p, n), "cell ({i},{j}): {f} vs {p}");
        head += p;
        head_count += k;
    }
    // everything else pooled
    let p = 1.0 - head;
    let f = (n - head_count) as f64 / n as f64;
    assert!((f - p).abs() <= 3.0 * binomial_se(p, n), "tail: {f} vs {p}");
}

fn tan_chi_square(x0: f64, t: f64, n: usize, bins: usize, seed: u64) -> f64 {
    let oracle = GridCdf::from_density(-FRAC_PI_2, FRAC_PI_2, 20_001, |y| tan_density(x0, y, t));
    let edges: Vec<f64> = (1..bins).map(|k| oracle.quantile(k as f64 / bins as f64)).collect();
    let mut counts = vec![0u64; bins];
    let mut rng = stream(seed, &[]);
    for _ in 0..n {
        let y = sample_transition(x0, t, &mut rng, 1000).unwrap();
        counts[edges.partition_point(|&e| e < y)] += 1;
    }
    let expected: Vec<f64> = (0..bins)
        .map(|k| {
            let lo = if k == 0 { 0.0 } else { oracle.eval(edges[k - 1]) };
            let hi = if k == bins - 1 { 1.0 } else { oracle.eval(edges[k]) };
            (hi - lo) * n as f64
        })
        .collect();
    chi_square_test(&counts, &expected, 0).unwrap().1
}

#[test]
fn tan_transitions_pass_chi_square() {
    assert!(tan_chi_square(0.0, 0.5, N, 25, 41) > 0.01);
    assert!(tan_chi_square(1.2, 0.25, N, 25, 42) > 0.01);
    assert!(tan_chi_square(1.5, 0.1, N, 25, 43) > 0.01);
}

#[test]
fn tan_spectral_density_is_normalized_and_matches_library() {
    let t = 0.4;
    let m = 4000;
    let h = std::f64::consts::PI / m as f64;
    let mass: f64 = (0..m).map(|i| tan_density(0.3, -FRAC_PI_2 + (i as f64 + 0.5) * h, t) * h).sum();
    assert!((mass - 1.0).abs() < 1e-6);
    let y = 0.5;
    let mut b = epsilon_strong::tan_diffusion::transition_density_bounds(0.3, y, t).unwrap();
    let lib = b.limit(1e-16, 60).midpoint();
    assert!((lib * (0.5 * t).exp() - tan_density(0.3, y, t)).abs() < 1e-12);
}

#[test]
fn tan_law_from_origin_is_symmetric() {
    let mut rng = stream(51, &[]);
    let ys: Vec<f64> = (0..N).map(|_| sample_transition(0.0, 0.5, &mut rng, 1000).unwrap()).collect();
    let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
    assert!(ks_two_sample(&ys, &neg) < 0.02);
}

#[test]
fn boundary_regime_acceptance_floor() {
    let mut rng = stream(61, &[]);
    let mut proposals = 0usize;
    let n = 2_000;
    for _ in 0..n {
        proposals += epsilon_strong::tan_diffusion::sample_transition_counted(1.5, 0.1, &mut rng, 1000)
            .unwrap()
            .1;
    }
    assert!(n as f64 / proposals as f64 > 0.05);
}
