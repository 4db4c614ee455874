//! Exact draws of a bridge's midpoint given an intersection layer.
//!
//! The target density is `ρ(w)·π(w)`, where `π` is the free bridge's Gaussian
//! law at the split time and `ρ` the probability that the two halves, pinned
//! at `w`, respect the layer. Replacing every containment probability in `ρ`
//! by its first series bracket gives an envelope that is a signed sum of
//! `c·exp(a + b·w)·π(w)` pieces on corridor windows. Each piece integrates in
//! closed form against `π`, so the envelope can be sampled by inverting its
//! CDF, and proposals are accepted by an exact comparison against `ρ`.

use crate::alt_series::{decide_below, Comparison, Interval};
use crate::error::{Error, Result};
use crate::layer_events::{rho_unchecked, ExtremaRanges, PinnedBridge};
use crate::normal;
use rand::Rng;
use std::f64::consts::PI;

/// Proposals allowed before the sampler gives up.
pub const STALL_CAP: usize = 1_000_000;

/// Relative accuracy of the CDF inversion.
const INVERT_TOL: f64 = 1e-13;

/// One term `coef·exp(a + b·w)` restricted to the open window `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussExpPiece {
    pub coef: f64,
    pub a: f64,
    pub b: f64,
    pub lo: f64,
    pub hi: f64,
}

impl GaussExpPiece {
    fn value(&self, w: f64) -> f64 {
        if self.lo < w && w < self.hi {
            self.coef * (self.a + self.b * w).exp()
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Prepared {
    sign: f64,
    log_k: f64,
    m: f64,
    lo: f64,
    hi: f64,
}

/// A density `Σ piece(w) · N(w; mean, var)` with a piecewise-analytic CDF.
#[derive(Debug, Clone)]
pub struct GaussExpMixture {
    mean: f64,
    sd: f64,
    pieces: Vec<GaussExpPiece>,
    prepared: Vec<Prepared>,
    support: Interval,
    mass: f64,
}

impl GaussExpMixture {
    /// Pieces with empty windows or zero coefficients are dropped; windows are
    /// clipped to `support`.
    pub fn new(mean: f64, var: f64, support: Interval, pieces: Vec<GaussExpPiece>) -> Result<Self> {
        if !(var > 0.0) || !mean.is_finite() {
            return Err(Error::domain(format!("bad Gaussian base N({mean}, {var})")));
        }
        let sd = var.sqrt();
        let pieces: Vec<GaussExpPiece> = pieces
            .into_iter()
            .filter_map(|p| {
                let lo = p.lo.max(support.lo);
                let hi = p.hi.min(support.hi);
                (lo < hi && p.coef != 0.0).then_some(GaussExpPiece { lo, hi, ..p })
            })
            .collect();
        let prepared = pieces
            .iter()
            .map(|p| Prepared {
                sign: p.coef.signum(),
                log_k: p.coef.abs().ln() + p.a + p.b * mean + 0.5 * p.b * p.b * var,
                m: mean + p.b * var,
                lo: p.lo,
                hi: p.hi,
            })
            .collect();
        let mut mix = Self {
            mean,
            sd,
            pieces,
            prepared,
            support,
            mass: 0.0,
        };
        mix.mass = mix.cdf(support.hi);
        if !(mix.mass > 0.0 && mix.mass.is_finite()) {
            return Err(Error::domain(format!(
                "envelope mass must be positive and finite, got {}",
                mix.mass
            )));
        }
        Ok(mix)
    }

    pub fn pieces(&self) -> &[GaussExpPiece] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    /// The factor multiplying the Gaussian at `w`.
    pub fn weight(&self, w: f64) -> f64 {
        self.pieces.iter().map(|p| p.value(w)).sum()
    }

    /// Normalized Gaussian density of the base law.
    pub fn base_pdf(&self, w: f64) -> f64 {
        normal::pdf((w - self.mean) / self.sd) / self.sd
    }

    /// Unnormalized density.
    pub fn density(&self, w: f64) -> f64 {
        self.weight(w) * self.base_pdf(w)
    }

    /// Mass of the density on `(-∞, w]`.
    pub fn cdf(&self, w: f64) -> f64 {
        let mut total = 0.0;
        for p in &self.prepared {
            if w <= p.lo {
                continue;
            }
            let z_hi = (w.min(p.hi) - p.m) / self.sd;
            let z_lo = (p.lo - p.m) / self.sd;
            let log_phi = normal::log_cdf_diff(z_lo, z_hi);
            total += p.sign * (p.log_k + log_phi).exp();
        }
        total
    }

    /// The `w` with `cdf(w) = u·mass`, by safeguarded Newton on a bracket.
    pub fn invert(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (self.support.lo, self.support.hi);
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        let target = u * self.mass;
        let tol = INVERT_TOL * self.mass;
        let mut w = lo + u * (hi - lo);
        for _ in 0..200 {
            let f = self.cdf(w) - target;
            if f.abs() <= tol {
                return w;
            }
            if f < 0.0 {
                lo = w;
            } else {
                hi = w;
            }
            if hi - lo <= 4.0 * f64::EPSILON * w.abs().max(1e-300) {
                return w;
            }
            let d = self.density(w);
            let newton = if d > 0.0 { w - f / d } else { f64::NAN };
            w = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        w
    }
}

/// Coefficients of `S_1` and `S_2` for one half-bridge of duration `dur`
/// from the fixed value `end` to the free midpoint value, as exponential
/// terms in the midpoint value.
pub(crate) fn first_sums(dur: f64, end: f64, lc: f64, uc: f64) -> (Vec<GaussExpPiece>, Vec<GaussExpPiece>) {
    let delta = uc - lc;
    let term = |coef: f64, a: f64, b: f64| GaussExpPiece {
        coef,
        a,
        b,
        lo: lc,
        hi: uc,
    };
    let big_a = uc - end;
    let big_b = end - lc;
    let s1 = vec![
        term(1.0, -2.0 * big_a * uc / dur, 2.0 * big_a / dur),
        term(1.0, 2.0 * big_b * lc / dur, -2.0 * big_b / dur),
    ];
    let mut s2 = s1.clone();
    s2.push(term(
        -1.0,
        -2.0 / dur * (delta * delta + delta * end),
        2.0 * delta / dur,
    ));
    s2.push(term(
        -1.0,
        -2.0 / dur * (delta * delta - delta * end),
        -2.0 * delta / dur,
    ));
    (s1, s2)
}

fn product_terms(a: &[GaussExpPiece], b: &[GaussExpPiece]) -> Vec<GaussExpPiece> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for p in a {
        for q in b {
            out.push(GaussExpPiece {
                coef: p.coef * q.coef,
                a: p.a + q.a,
                b: p.b + q.b,
                lo: p.lo,
                hi: p.hi,
            });
        }
    }
    out
}

fn negated(terms: &[GaussExpPiece]) -> impl Iterator<Item = GaussExpPiece> + '_ {
    terms.iter().map(|p| GaussExpPiece {
        coef: -p.coef,
        ..*p
    })
}

/// The envelope density `S_1^Z(w)·π(w)` of the midpoint law.
#[derive(Debug, Clone)]
pub struct EnvelopeF1 {
    mixture: GaussExpMixture,
}

impl EnvelopeF1 {
    pub fn mixture(&self) -> &GaussExpMixture {
        &self.mixture
    }

    pub fn piece_count(&self) -> usize {
        self.mixture.piece_count()
    }

    pub fn mass(&self) -> f64 {
        self.mixture.mass()
    }

    /// Upper bound on `ρ(w)`.
    pub fn s1(&self, w: f64) -> f64 {
        self.mixture.weight(w)
    }

    pub fn density(&self, w: f64) -> f64 {
        self.mixture.density(w)
    }

    pub fn cdf(&self, w: f64) -> f64 {
        self.mixture.cdf(w)
    }

    pub fn support(&self) -> Interval {
        self.mixture.support()
    }
}

/// Build the envelope for a bridge from `x` (time 0) to `y` (time `q + r`)
/// split at time `q`.
pub fn build_envelope(ranges: ExtremaRanges, q: f64, r: f64, x: f64, y: f64) -> Result<EnvelopeF1> {
    let ranges = ExtremaRanges::new(ranges.min_lo, ranges.min_hi, ranges.max_lo, ranges.max_hi)?;
    PinnedBridge::new(q, r, x, x, y)?;
    if !(ranges.min_lo < ranges.min_hi && ranges.max_lo < ranges.max_hi) {
        return Err(Error::domain("midpoint law of a null layer"));
    }
    let l = q + r;
    let mean = (r * x + q * y) / l;
    let var = q * r / l;
    // four containment products with signs + − − +
    let corridors = [
        (ranges.min_lo, ranges.max_hi, 1.0),
        (ranges.min_hi, ranges.max_hi, -1.0),
        (ranges.min_lo, ranges.max_lo, -1.0),
        (ranges.min_hi, ranges.max_lo, 1.0),
    ];
    let mut pieces = Vec::new();
    for &(lc, uc, sign) in &corridors {
        let inside = |v: f64| lc < v && v < uc;
        if !(lc < uc && inside(x) && inside(y)) {
            continue;
        }
        let (l1, l2) = first_sums(q, x, lc, uc);
        let (r1, r2) = first_sums(r, y, lc, uc);
        // upper bound of γγ for a positive term, lower bound for a negative one
        let (lone, rone, prod) = if sign > 0.0 {
            (l2, r2, product_terms(&l1, &r1))
        } else {
            (l1, r1, product_terms(&l2, &r2))
        };
        let block = std::iter::once(GaussExpPiece {
            coef: 1.0,
            a: 0.0,
            b: 0.0,
            lo: lc,
            hi: uc,
        })
        .chain(negated(&lone))
        .chain(negated(&rone))
        .chain(prod);
        pieces.extend(block.map(|p| GaussExpPiece {
            coef: sign * p.coef,
            ..p
        }));
    }
    let support = Interval::new(ranges.min_lo, ranges.max_hi);
    Ok(EnvelopeF1 {
        mixture: GaussExpMixture::new(mean, var, support, pieces)?,
    })
}

/// `w` with `F_1(w) = R·mass`.
pub fn invert_cdf(env: &EnvelopeF1, r: f64) -> f64 {
    env.mixture.invert(r)
}

/// Midpoint sampler for one layer context; the envelope is built once.
#[derive(Debug, Clone)]
pub struct MidpointSampler {
    ranges: ExtremaRanges,
    q: f64,
    r: f64,
    x: f64,
    y: f64,
    envelope: EnvelopeF1,
}

impl MidpointSampler {
    pub fn new(ranges: ExtremaRanges, q: f64, r: f64, x: f64, y: f64) -> Result<Self> {
        let envelope = build_envelope(ranges, q, r, x, y)?;
        Ok(Self {
            ranges,
            q,
            r,
            x,
            y,
            envelope,
        })
    }

    pub fn envelope(&self) -> &EnvelopeF1 {
        &self.envelope
    }

    /// One exact draw together with the number of proposals it took.
    pub fn sample_counted<R: Rng + ?Sized>(&self, rng: &mut R, max_terms: usize) -> Result<(f64, usize)> {
        for k in 1..=STALL_CAP {
            let w = invert_cdf(&self.envelope, rng.random());
            let u: f64 = rng.random();
            if !(self.ranges.min_lo < w && w < self.ranges.max_hi) {
                continue;
            }
            let pinned = PinnedBridge {
                q: self.q,
                r: self.r,
                x: self.x,
                w,
                y: self.y,
            };
            let mut rho = rho_unchecked(&self.ranges, &pinned);
            match decide_below(u * self.envelope.s1(w), &mut rho, max_terms) {
                Comparison::Below => return Ok((w, k)),
                Comparison::NotBelow => {}
                Comparison::Undecided => return Err(Error::Undecided { max_terms }),
            }
        }
        Err(Error::SamplerStall {
            iterations: STALL_CAP,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_terms: usize) -> Result<f64> {
        self.sample_counted(rng, max_terms).map(|(w, _)| w)
    }
}

/// Exact draw of the value at time `q` of a bridge from `x` (time 0) to `y`
/// (time `q + r`) whose extrema lie in `ranges`.
pub fn sample_midpoint<R: Rng + ?Sized>(
    ranges: &ExtremaRanges,
    q: f64,
    r: f64,
    x: f64,
    y: f64,
    rng: &mut R,
    max_terms: usize,
) -> Result<f64> {
    MidpointSampler::new(*ranges, q, r, x, y)?.sample(rng, max_terms)
}

/// Normalized Gaussian density with mean `mean` and variance `var`.
pub fn gaussian_pdf(w: f64, mean: f64, var: f64) -> f64 {
    (-(w - mean) * (w - mean) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn ranges() -> ExtremaRanges {
        ExtremaRanges::new(-1.5, -0.4, 0.4, 1.5).unwrap()
    }

    #[test]
    fn mixture_of_one_constant_is_a_truncated_gaussian() {
        let piece = GaussExpPiece {
            coef: 1.0,
            a: 0.0,
            b: 0.0,
            lo: -1.0,
            hi: 1.0,
        };
        let mix = GaussExpMixture::new(0.0, 1.0, Interval::new(-1.0, 1.0), vec![piece]).unwrap();
        let expected = normal::cdf(1.0) - normal::cdf(-1.0);
        assert!((mix.mass() - expected).abs() < 1e-15);
        assert!(mix.invert(0.5).abs() < 1e-12);
    }

    #[test]
    fn exponential_tilt_integrates_in_closed_form() {
        // ∫_0^1 e^{2w} φ(w) dw = e^2 (Φ(-1) − Φ(-2))
        let piece = GaussExpPiece {
            coef: 1.0,
            a: 0.0,
            b: 2.0,
            lo: 0.0,
            hi: 1.0,
        };
        let mix = GaussExpMixture::new(0.0, 1.0, Interval::new(-3.0, 3.0), vec![piece]).unwrap();
        let expected = 2f64.exp() * (normal::cdf(-1.0) - normal::cdf(-2.0));
        assert!((mix.mass() - expected).abs() < 1e-14);
    }

    #[test]
    fn envelope_dominates_rho_bound() {
        let env = build_envelope(ranges(), 0.5, 0.5, 0.0, 0.2).unwrap();
        for k in 1..200 {
            let w = -1.5 + 3.0 * k as f64 / 200.0;
            let p = PinnedBridge::new(0.5, 0.5, 0.0, w, 0.2).unwrap();
            let lower = rho_unchecked(&ranges(), &p).lower(1);
            assert!(env.s1(w) >= lower - 1e-14, "w={w}");
        }
    }

    #[test]
    fn inversion_round_trips() {
        let env = build_envelope(ranges(), 0.5, 0.5, 0.0, 0.2).unwrap();
        assert_eq!(invert_cdf(&env, 0.0), -1.5);
        assert_eq!(invert_cdf(&env, 1.0), 1.5);
        for k in 1..50 {
            let u = k as f64 / 50.0;
            let w = invert_cdf(&env, u);
            assert!((env.cdf(w) / env.mass() - u).abs() < 1e-12);
        }
    }

    #[test]
    fn draws_stay_inside_layer() {
        let sampler = MidpointSampler::new(ranges(), 0.5, 0.5, 0.0, 0.2).unwrap();
        let mut rng = stream(1, &[]);
        for _ in 0..500 {
            let w = sampler.sample(&mut rng, 1000).unwrap();
            assert!(-1.5 < w && w < 1.5);
        }
    }

    #[test]
    fn null_layer_is_rejected() {
        let r = ExtremaRanges::new(-1.0, -1.0, 0.5, 1.0).unwrap();
        assert!(build_envelope(r, 0.5, 0.5, 0.0, 0.0).is_err());
    }
}
