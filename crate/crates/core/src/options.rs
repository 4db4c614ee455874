//! Option-pricing functionals over a geometric Brownian motion.
//!
//! The asset `S_t = S_0 exp{(r − σ²/2)t + σW_t}` is written as `S_t =
//! exp(σX_t)` for a drifted Brownian motion `X`. Given `X_T`, the path is a
//! plain Brownian bridge whatever the drift, so the layer machinery applies
//! directly once `X_T` has been drawn. Every functional carries the corridor
//! indicator `L < inf X < sup X < U`, which is drawn exactly up front; paths
//! that leave the corridor contribute zero.

use crate::alt_series::{decide_below, gamma_bounds, BridgeSpec, Corridor, Interval};
use crate::eps_strong::{advance_generation, advance_layer, dyadic_index, width_target};
use crate::error::{Error, Result};
use crate::estimators::{estimate_exponential, estimate_uniform_improved, EstimateRecord, FunctionalBounder};
use crate::layers::{refine, refine_to_width, split, Extremum, IntersectionLayer};
use crate::layer_events::{sample_initial_layers, LayerGrid};
use crate::rng::{StreamKey, StreamRng};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Black–Scholes market with a double barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    pub r: f64,
    pub sigma: f64,
    pub s0: f64,
    pub strike: f64,
    pub maturity: f64,
    pub barrier_lo: f64,
    pub barrier_hi: f64,
}

impl Default for MarketParams {
    fn default() -> Self {
        Self {
            r: 0.05,
            sigma: 0.2,
            s0: 1.0,
            strike: 1.0,
            maturity: 1.0,
            barrier_lo: 0.75,
            barrier_hi: 1.25,
        }
    }
}

impl MarketParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.r,
            self.sigma,
            self.s0,
            self.strike,
            self.maturity,
            self.barrier_lo,
            self.barrier_hi,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("market parameters must be finite"));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::domain("sigma must be positive"));
        }
        if !(self.maturity > 0.0) {
            return Err(Error::domain("maturity must be positive"));
        }
        if !(0.0 < self.barrier_lo && self.barrier_lo < self.s0 && self.s0 < self.barrier_hi) {
            return Err(Error::domain(
                "barriers must satisfy 0 < barrier_lo < s0 < barrier_hi",
            ));
        }
        Ok(())
    }

    pub fn discount(&self) -> f64 {
        (-self.r * self.maturity).exp()
    }

    /// `e^{−rT}(e^{σx} − K)⁺`, nondecreasing in `x`.
    pub fn phi(&self, x: f64) -> f64 {
        self.discount() * ((self.sigma * x).exp() - self.strike).max(0.0)
    }
}

/// Which functional: capped call on the maximum (`A`), Asian call (`B`), or
/// capped call on the maximum with a discounted corridor (`C`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    A,
    B,
    C,
}

/// The Brownian-motion picture of a market: `X_t = X_0 + drift·t + W_t`
/// with corridor `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BmContext {
    pub x0: f64,
    pub lower: f64,
    pub upper: f64,
    pub drift: f64,
    pub horizon: f64,
    pub case: Case,
}

impl BmContext {
    pub fn corridor(&self) -> Corridor {
        Corridor {
            lower: self.lower,
            upper: self.upper,
        }
    }

    /// Draw `X_T` from its Gaussian law.
    pub fn draw_terminal<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.x0 + self.drift * self.horizon + self.horizon.sqrt() * z
    }
}

pub fn map_gbm(params: &MarketParams, case: Case) -> Result<BmContext> {
    params.validate()?;
    let s = params.sigma;
    let drift = match case {
        Case::A | Case::B => params.r / s - s / 2.0,
        Case::C => -s / 2.0,
    };
    Ok(BmContext {
        x0: params.s0.ln() / s,
        lower: params.barrier_lo.ln() / s,
        upper: params.barrier_hi.ln() / s,
        drift,
        horizon: params.maturity,
        case,
    })
}

/// Result of drawing the terminal value and the corridor indicator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// The path leaves the corridor.
    Rejected { x_t: f64 },
    /// The path stays inside; its first layer.
    Layer(IntersectionLayer),
}

/// Draw `X_T`, then the indicator that the bridge stays in the corridor.
pub fn draw_terminal_and_gate<R: Rng + ?Sized>(
    ctx: &BmContext,
    rng: &mut R,
    max_terms: usize,
) -> Result<Gate> {
    let x_t = ctx.draw_terminal(rng);
    let u: f64 = rng.random();
    if !(ctx.lower < x_t && x_t < ctx.upper) {
        return Ok(Gate::Rejected { x_t });
    }
    let spec = BridgeSpec::new(ctx.horizon, ctx.x0, x_t)?;
    let mut g = gamma_bounds(spec, ctx.corridor());
    if !decide_below(u, &mut g, max_terms).into_result(max_terms)? {
        return Ok(Gate::Rejected { x_t });
    }
    let layer = IntersectionLayer::new(
        0.0,
        ctx.horizon,
        ctx.x0,
        x_t,
        Interval::new(ctx.lower, ctx.x0.min(x_t)),
        Interval::new(ctx.x0.max(x_t), ctx.upper),
    )?;
    Ok(Gate::Layer(layer))
}

/// Bounds `φ(U↓_n) ≤ F ≤ φ(U↑_n)` from repeated halving of the maximum's range.
#[derive(Debug, Clone)]
pub struct BounderFa {
    layer: IntersectionLayer,
    params: MarketParams,
    rng: StreamRng,
    max_terms: usize,
    generation: usize,
}

impl BounderFa {
    pub fn new(layer: IntersectionLayer, params: MarketParams, key: &StreamKey, max_terms: usize) -> Self {
        Self {
            layer,
            params,
            rng: key.rng(),
            max_terms,
            generation: 0,
        }
    }

    pub fn layer(&self) -> &IntersectionLayer {
        &self.layer
    }
}

impl FunctionalBounder for BounderFa {
    fn bounds(&self) -> (f64, f64) {
        (self.params.phi(self.layer.max.lo), self.params.phi(self.layer.max.hi))
    }

    fn step(&mut self) -> Result<()> {
        self.layer = refine(&self.layer, Extremum::Max, &mut self.rng, self.max_terms)?;
        self.generation += 1;
        Ok(())
    }

    fn generation(&self) -> usize {
        self.generation
    }
}

/// `e^{−rT}((1/T)∫ e^{σ·path} − K)⁺` for a piecewise-constant path.
fn asian_payoff(params: &MarketParams, pieces: impl Iterator<Item = (f64, f64)>) -> f64 {
    let integral: f64 = pieces.map(|(dt, level)| (params.sigma * level).exp() * dt).sum();
    params.discount() * (integral / params.maturity - params.strike).max(0.0)
}

/// Asian payoff evaluated on the lower and upper dominating paths.
#[derive(Debug, Clone)]
pub struct BounderFb {
    layers: Vec<IntersectionLayer>,
    params: MarketParams,
    key: StreamKey,
    max_terms: usize,
    generation: usize,
}

impl BounderFb {
    pub fn new(layer: IntersectionLayer, params: MarketParams, key: &StreamKey, max_terms: usize) -> Self {
        Self {
            layers: vec![layer],
            params,
            key: key.clone(),
            max_terms,
            generation: 0,
        }
    }

    pub fn layers(&self) -> &[IntersectionLayer] {
        &self.layers
    }
}

impl FunctionalBounder for BounderFb {
    fn bounds(&self) -> (f64, f64) {
        let lo = asian_payoff(&self.params, self.layers.iter().map(|l| (l.duration(), l.min.lo)));
        let hi = asian_payoff(&self.params, self.layers.iter().map(|l| (l.duration(), l.max.hi)));
        (lo, hi)
    }

    fn step(&mut self) -> Result<()> {
        let g = self.generation + 1;
        self.layers = advance_generation(&self.layers, 0.0, g, &self.key, self.max_terms)?;
        self.generation = g;
        Ok(())
    }

    fn generation(&self) -> usize {
        self.generation
    }
}

/// Bounds on `φ(sup(c·t + X_t))`, `c = r/σ`, bisecting only layers that can
/// still hold the supremum.
#[derive(Debug, Clone)]
pub struct BounderFc {
    layers: Vec<IntersectionLayer>,
    params: MarketParams,
    key: StreamKey,
    max_terms: usize,
    generation: usize,
    sup_lo: f64,
    sup_hi: f64,
}

impl BounderFc {
    pub fn new(layer: IntersectionLayer, params: MarketParams, key: &StreamKey, max_terms: usize) -> Self {
        let mut b = Self {
            layers: vec![layer],
            params,
            key: key.clone(),
            max_terms,
            generation: 0,
            sup_lo: f64::NEG_INFINITY,
            sup_hi: f64::INFINITY,
        };
        b.update_running_bounds();
        b
    }

    fn slope(&self) -> f64 {
        self.params.r / self.params.sigma
    }

    fn update_running_bounds(&mut self) {
        let c = self.slope();
        let lo = self
            .layers
            .iter()
            .map(|l| l.max.lo + c * l.s)
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = self
            .layers
            .iter()
            .map(|l| l.max.hi + c * l.t)
            .fold(f64::NEG_INFINITY, f64::max);
        self.sup_lo = self.sup_lo.max(lo);
        self.sup_hi = self.sup_hi.min(hi);
        let cut = self.sup_lo;
        self.layers.retain(|l| l.max.hi + c * l.t >= cut);
    }

    pub fn layers(&self) -> &[IntersectionLayer] {
        &self.layers
    }

    /// Current range for `sup(c·t + X_t)`.
    pub fn sup_range(&self) -> Interval {
        Interval::new(self.sup_lo, self.sup_hi)
    }
}

impl FunctionalBounder for BounderFc {
    fn bounds(&self) -> (f64, f64) {
        (self.params.phi(self.sup_lo), self.params.phi(self.sup_hi))
    }

    fn step(&mut self) -> Result<()> {
        let g = self.generation + 1;
        self.layers = advance_generation(&self.layers, 0.0, g, &self.key, self.max_terms)?;
        self.generation = g;
        self.update_running_bounds();
        Ok(())
    }

    fn generation(&self) -> usize {
        self.generation
    }
}

/// Which estimator turns bounds into a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    UniformImproved { n0: usize },
    Exponential,
}

/// One replicate of the exact pipeline: terminal draw, corridor gate, then
/// the estimator on the case's bounder.
///
/// Streams under `key`: child 0 for the gate, child 1 for the layers, child 2
/// for the estimator's auxiliary draw.
pub fn price_sample(
    params: &MarketParams,
    case: Case,
    estimator: EstimatorKind,
    n_max: usize,
    key: &StreamKey,
    max_terms: usize,
) -> Result<EstimateRecord> {
    let ctx = map_gbm(params, case)?;
    let layer = match draw_terminal_and_gate(&ctx, &mut key.child(0).rng(), max_terms)? {
        Gate::Rejected { .. } => return Ok(EstimateRecord::exact(0.0, 0)),
        Gate::Layer(layer) => layer,
    };
    let layer_key = key.child(1);
    let mut rng = key.child(2).rng();
    let mut bounder: Box<dyn FunctionalBounder> = match case {
        Case::A => Box::new(BounderFa::new(layer, *params, &layer_key, max_terms)),
        Case::B => Box::new(BounderFb::new(layer, *params, &layer_key, max_terms)),
        Case::C => Box::new(BounderFc::new(layer, *params, &layer_key, max_terms)),
    };
    match estimator {
        EstimatorKind::UniformImproved { n0 } => {
            estimate_uniform_improved(&mut bounder, &mut rng, n0, n_max)
        }
        EstimatorKind::Exponential => estimate_exponential(&mut bounder, &mut rng, n_max),
    }
}

/// Number of grid steps for step size `delta`; `delta` must divide the
/// maturity into at least two steps.
pub fn euler_steps(maturity: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain("step size must be positive"));
    }
    let l = (maturity / delta).round();
    if l < 2.0 || ((l * delta) - maturity).abs() > 1e-9 * maturity {
        return Err(Error::domain(format!(
            "step size {delta} does not divide maturity {maturity} into at least two steps"
        )));
    }
    Ok(l as usize)
}

/// One discretized payoff: exact lognormal steps on the grid, grid extrema
/// for suprema and infima, trapezoid rule for the average.
pub fn euler_sample<R: Rng + ?Sized>(params: &MarketParams, case: Case, steps: usize, rng: &mut R) -> f64 {
    let dt = params.maturity / steps as f64;
    let mu = (params.r - 0.5 * params.sigma * params.sigma) * dt;
    let sd = params.sigma * dt.sqrt();
    let mut log_s = params.s0.ln();
    let mut s = params.s0;
    let (mut s_max, mut s_min) = (s, s);
    // discounted path for the third case's corridor
    let (mut d_max, mut d_min) = (s, s);
    let mut trapezoid = 0.5 * s;
    for i in 1..=steps {
        let z: f64 = StandardNormal.sample(rng);
        log_s += mu + sd * z;
        s = log_s.exp();
        s_max = s_max.max(s);
        s_min = s_min.min(s);
        let d = (log_s - params.r * dt * i as f64).exp();
        d_max = d_max.max(d);
        d_min = d_min.min(d);
        trapezoid += if i == steps { 0.5 * s } else { s };
    }
    let inside = |lo: f64, hi: f64| params.barrier_lo < lo && hi < params.barrier_hi;
    let disc = params.discount();
    match case {
        Case::A if inside(s_min, s_max) => disc * (s_max - params.strike).max(0.0),
        Case::B if inside(s_min, s_max) => {
            disc * (trapezoid / steps as f64 - params.strike).max(0.0)
        }
        Case::C if inside(d_min, d_max) => disc * (s_max - params.strike).max(0.0),
        _ => 0.0,
    }
}

/// Sample mean and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceEstimate {
    pub mean: f64,
    pub stderr: f64,
}

/// Discretized price with `n_samples` replicates, replicate `i` on stream
/// `key.child(i)`.
pub fn euler_price(
    params: &MarketParams,
    case: Case,
    delta: f64,
    n_samples: usize,
    key: &StreamKey,
) -> Result<PriceEstimate> {
    params.validate()?;
    let steps = euler_steps(params.maturity, delta)?;
    let values: Vec<f64> = (0..n_samples as u64)
        .map(|i| euler_sample(params, case, steps, &mut key.child(i).rng()))
        .collect();
    let (mean, stderr) = crate::stats::mean_stderr(&values)?;
    Ok(PriceEstimate { mean, stderr })
}

/// A time-dependent level with exact extrema over any interval.
pub trait Boundary {
    fn value(&self, t: f64) -> f64;
    /// `(inf, sup)` of the level over `[s, t]`.
    fn range(&self, s: f64, t: f64) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantBoundary(pub f64);

impl Boundary for ConstantBoundary {
    fn value(&self, _t: f64) -> f64 {
        self.0
    }
    fn range(&self, _s: f64, _t: f64) -> (f64, f64) {
        (self.0, self.0)
    }
}

/// `intercept + slope·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearBoundary {
    pub intercept: f64,
    pub slope: f64,
}

impl Boundary for LinearBoundary {
    fn value(&self, t: f64) -> f64 {
        self.intercept + self.slope * t
    }
    fn range(&self, s: f64, t: f64) -> (f64, f64) {
        let (a, b) = (self.value(s), self.value(t));
        (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitOutcome {
    Hit,
    NoHit,
    /// Still ambiguous after `n_max` generations.
    Capped,
    /// The corridor gate failed, so the functional vanishes regardless.
    GateRejected,
}

/// Decide whether the path described by `first` reaches `boundary`.
///
/// Layers are handled left to right. A layer whose maximum range lies below
/// the boundary's infimum is dropped; one whose maximum range lies above the
/// boundary's supremum decides a hit. Otherwise the range is cut at the
/// boundary's extremes, and a layer that remains ambiguous is bisected.
pub fn resolve_hitting<B: Boundary + ?Sized>(
    first: IntersectionLayer,
    boundary: &B,
    key: &StreamKey,
    n_max: usize,
    max_terms: usize,
) -> Result<HitOutcome> {
    if first.xs >= boundary.value(first.s) {
        return Err(Error::domain("path must start below the boundary"));
    }
    let origin = first.s;
    let mut work = vec![first];
    for g in 0..=n_max {
        let gen_key = key.child(g as u64);
        let mut next = Vec::new();
        for layer in work {
            let index = dyadic_index(&layer, origin);
            let mut rng = gen_key.child(2 * index).rng();
            let (h_lo, h_hi) = boundary.range(layer.s, layer.t);
            if layer.xt >= boundary.value(layer.t) {
                return Ok(HitOutcome::Hit);
            }
            let mut layer = layer;
            if layer.max.lo < h_lo && h_lo < layer.max.hi {
                layer = split(&layer, Extremum::Max, h_lo, &mut rng, max_terms)?;
            }
            if layer.max.hi <= h_lo {
                continue;
            }
            if layer.max.lo < h_hi && h_hi < layer.max.hi {
                layer = split(&layer, Extremum::Max, h_hi, &mut rng, max_terms)?;
            }
            if layer.max.lo >= h_hi {
                // the maximum exceeds the boundary's supremum on this span
                return Ok(HitOutcome::Hit);
            }
            if g == n_max {
                return Ok(HitOutcome::Capped);
            }
            let (left, right, _) = advance_layer(&layer, &gen_key.child(2 * index + 1), max_terms)?;
            next.push(left);
            next.push(right);
        }
        if next.is_empty() {
            return Ok(HitOutcome::NoHit);
        }
        work = next;
    }
    Ok(HitOutcome::Capped)
}

/// Hitting indicator for a path gated on the context's corridor.
pub fn hitting_indicator<B: Boundary + ?Sized>(
    ctx: &BmContext,
    boundary: &B,
    key: &StreamKey,
    n_max: usize,
    max_terms: usize,
) -> Result<HitOutcome> {
    if ctx.x0 >= boundary.value(0.0) {
        return Err(Error::domain("path must start below the boundary"));
    }
    match draw_terminal_and_gate(ctx, &mut key.child(0).rng(), max_terms)? {
        Gate::Rejected { .. } => Ok(HitOutcome::GateRejected),
        Gate::Layer(layer) => resolve_hitting(layer, boundary, &key.child(1), n_max, max_terms),
    }
}

/// Hitting indicator for a drifted Brownian motion without a corridor: the
/// first layer comes from the cell grid and is refined to the usual width.
pub fn hitting_indicator_free<B: Boundary + ?Sized>(
    x0: f64,
    drift: f64,
    horizon: f64,
    boundary: &B,
    key: &StreamKey,
    n_max: usize,
    max_terms: usize,
) -> Result<HitOutcome> {
    if x0 >= boundary.value(0.0) {
        return Err(Error::domain("path must start below the boundary"));
    }
    let mut rng = key.child(0).rng();
    let z: f64 = StandardNormal.sample(&mut rng);
    let x_t = x0 + drift * horizon + horizon.sqrt() * z;
    let spec = BridgeSpec::new(horizon, x0, x_t)?;
    let cell = sample_initial_layers(spec, &LayerGrid::default_for(horizon), &mut rng, max_terms)?;
    let layer = IntersectionLayer::new(
        0.0,
        horizon,
        x0,
        x_t,
        cell.ranges.min_range(),
        cell.ranges.max_range(),
    )?;
    let layer = refine_to_width(layer, width_target(2.0 * horizon), &mut rng, max_terms)?;
    resolve_hitting(layer, boundary, &key.child(1), n_max, max_terms)
}
