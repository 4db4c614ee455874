//! Unbiased estimators of `E[F(X)]` from nested bounds `F↓_n ≤ F(X) ≤ F↑_n`.
//!
//! Both estimators replace `F(X)` by an indicator `I{F(X) > R}` for an
//! auxiliary draw `R`, and the indicator is settled as soon as the bounds
//! leave `R` on one side. Runs that reach `n_max` undecided return a midpoint
//! with a hard bound on the bias this introduces.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// Slack allowed when checking that successive bounds nest.
const NESTING_TOL: f64 = 1e-12;

/// Something that produces ever tighter bounds on a path functional.
pub trait FunctionalBounder {
    /// Current `(F↓_n, F↑_n)`.
    fn bounds(&self) -> (f64, f64);
    /// Advance one generation.
    fn step(&mut self) -> Result<()>;
    /// Generations taken so far.
    fn generation(&self) -> usize;
}

impl<B: FunctionalBounder + ?Sized> FunctionalBounder for Box<B> {
    fn bounds(&self) -> (f64, f64) {
        (**self).bounds()
    }
    fn step(&mut self) -> Result<()> {
        (**self).step()
    }
    fn generation(&self) -> usize {
        (**self).generation()
    }
}

/// A bounder whose bounds are fixed from the start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantBounder {
    pub lower: f64,
    pub upper: f64,
    generation: usize,
}

impl ConstantBounder {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            generation: 0,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, value)
    }
}

impl FunctionalBounder for ConstantBounder {
    fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }
    fn step(&mut self) -> Result<()> {
        self.generation += 1;
        Ok(())
    }
    fn generation(&self) -> usize {
        self.generation
    }
}

/// One draw of an estimator plus diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateRecord {
    pub value: f64,
    pub generations_used: usize,
    pub hit_nmax: bool,
    /// Bound on `|E[value] − E[F]|` contributed by this draw; zero unless
    /// `hit_nmax`.
    pub bias_bound: f64,
}

impl EstimateRecord {
    pub fn exact(value: f64, generations_used: usize) -> Self {
        Self {
            value,
            generations_used,
            hit_nmax: false,
            bias_bound: 0.0,
        }
    }
}

/// Wraps a bounder and enforces that each step's bounds nest in the last.
struct Nested<'a, B: FunctionalBounder + ?Sized> {
    inner: &'a mut B,
    lo: f64,
    hi: f64,
}

impl<'a, B: FunctionalBounder + ?Sized> Nested<'a, B> {
    fn new(inner: &'a mut B) -> Result<Self> {
        let (lo, hi) = inner.bounds();
        check_pair(inner.generation(), lo, hi)?;
        Ok(Self { inner, lo, hi })
    }

    fn step(&mut self) -> Result<()> {
        self.inner.step()?;
        let (lo, hi) = self.inner.bounds();
        let step = self.inner.generation();
        check_pair(step, lo, hi)?;
        let slack = |v: f64| NESTING_TOL * v.abs().max(1.0);
        if lo < self.lo - slack(self.lo) || hi > self.hi + slack(self.hi) {
            return Err(Error::NonMonotoneBounds {
                step,
                lower: lo,
                upper: hi,
            });
        }
        // absorb rounding so the enforced bounds nest exactly
        self.lo = lo.max(self.lo);
        self.hi = hi.min(self.hi).max(self.lo);
        Ok(())
    }

    fn generation(&self) -> usize {
        self.inner.generation()
    }
}

fn check_pair(step: usize, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi + NESTING_TOL * hi.abs().max(1.0) {
        return Err(Error::NonMonotoneBounds {
            step,
            lower: lo,
            upper: hi,
        });
    }
    Ok(())
}

/// Step until `r` lies strictly outside the bounds or `n_max` is reached.
/// Returns the indicator `I{F > r}` if decided.
fn settle<B: FunctionalBounder + ?Sized>(b: &mut Nested<'_, B>, r: f64, n_max: usize) -> Result<Option<bool>> {
    loop {
        if b.lo > r {
            return Ok(Some(true));
        }
        if b.hi < r {
            return Ok(Some(false));
        }
        if b.generation() >= n_max {
            return Ok(None);
        }
        b.step()?;
    }
}

/// `I{F > E}·e^E` with `E ~ Exp(1)`; requires `F ≥ 0`.
///
/// At the cap the draw is replaced by `e^E/2`, which is within `e^E/2` of
/// either possible outcome.
pub fn estimate_exponential<B, R>(bounder: &mut B, rng: &mut R, n_max: usize) -> Result<EstimateRecord>
where
    B: FunctionalBounder + ?Sized,
    R: Rng + ?Sized,
{
    let mut b = Nested::new(bounder)?;
    let e: f64 = Exp1.sample(rng);
    let scale = e.exp();
    Ok(match settle(&mut b, e, n_max)? {
        Some(hit) => EstimateRecord::exact(if hit { scale } else { 0.0 }, b.generation()),
        None => EstimateRecord {
            value: 0.5 * scale,
            generations_used: b.generation(),
            hit_nmax: true,
            bias_bound: 0.5 * scale,
        },
    })
}

/// `I·F↑_{n0} + (1 − I)·F↓_{n0}` with `I = I{F > R}`, `R ~ U[F↓_{n0}, F↑_{n0}]`.
pub fn estimate_uniform_improved<B, R>(
    bounder: &mut B,
    rng: &mut R,
    n0: usize,
    n_max: usize,
) -> Result<EstimateRecord>
where
    B: FunctionalBounder + ?Sized,
    R: Rng + ?Sized,
{
    if n0 > n_max {
        return Err(Error::domain(format!("n0 = {n0} exceeds n_max = {n_max}")));
    }
    let mut b = Nested::new(bounder)?;
    while b.generation() < n0 {
        b.step()?;
    }
    let (lo, hi) = (b.lo, b.hi);
    if lo == hi {
        return Ok(EstimateRecord::exact(lo, b.generation()));
    }
    let u: f64 = rng.random();
    let r = lo + u * (hi - lo);
    Ok(match settle(&mut b, r, n_max)? {
        Some(hit) => EstimateRecord::exact(if hit { hi } else { lo }, b.generation()),
        None => EstimateRecord {
            value: 0.5 * (lo + hi),
            generations_used: b.generation(),
            hit_nmax: true,
            bias_bound: 0.5 * (hi - lo),
        },
    })
}
