//! Exact transitions of `dX = −tan(X) dt + dW` on `(−π/2, π/2)`.
//!
//! The transition density is proportional to `cos(y)/cos(x) · γ(−π/2, π/2; t, x, y) ·
//! p₀(y; x, t)` with `p₀` the free Gaussian kernel. Away from the boundary,
//! proposals come from `p₀` itself. Close to the boundary most of those
//! proposals are killed, so the proposal is tilted by the first lower
//! series bracket: `(1 − S₂(y))·p₀(y)`, which still dominates `γ·p₀`.

use crate::alt_series::{decide_below, gamma_bounds, AlternatingBounds, BridgeSpec, Comparison, Corridor, Interval};
use crate::bridge_sampling::{first_sums, GaussExpMixture, GaussExpPiece, STALL_CAP};
use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{FRAC_PI_2, PI};

/// Starting points within this distance of `±π/2` use the tilted proposal.
pub const BOUNDARY_BAND: f64 = 0.3;

fn corridor() -> Corridor {
    Corridor {
        lower: -FRAC_PI_2,
        upper: FRAC_PI_2,
    }
}

fn check_state(x: f64, t: f64) -> Result<()> {
    if !(x.abs() < FRAC_PI_2) {
        return Err(Error::domain(format!("state {x} outside (−π/2, π/2)")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain("transition time must be positive"));
    }
    Ok(())
}

/// Bounds on `cos(y)/cos(x) · γ · p₀(y; x, t)`.
///
/// This integrates to `e^{−t/2}`, not 1: the Girsanov weight of the drift
/// carries a constant `e^{t/2}` that rejection sampling never needs.
pub fn transition_density_bounds(x: f64, y: f64, t: f64) -> Result<AlternatingBounds> {
    check_state(x, t)?;
    if !(y.abs() < FRAC_PI_2) {
        return Err(Error::domain(format!("target {y} outside (−π/2, π/2)")));
    }
    let p0 = (-(y - x) * (y - x) / (2.0 * t)).exp() / (2.0 * PI * t).sqrt();
    let scale = y.cos() / x.cos() * p0;
    let g = gamma_bounds(BridgeSpec::new(t, x, y)?, corridor());
    Ok(AlternatingBounds::linear(vec![(scale, g)]))
}

/// The tilted proposal `(1 − S₂(y))·p₀(y; x, t)` on `(−π/2, π/2)`.
pub fn boundary_proposal(x: f64, t: f64) -> Result<GaussExpMixture> {
    check_state(x, t)?;
    let (_, s2) = first_sums(t, x, -FRAC_PI_2, FRAC_PI_2);
    let mut pieces = vec![GaussExpPiece {
        coef: 1.0,
        a: 0.0,
        b: 0.0,
        lo: -FRAC_PI_2,
        hi: FRAC_PI_2,
    }];
    pieces.extend(s2.into_iter().map(|p| GaussExpPiece { coef: -p.coef, ..p }));
    GaussExpMixture::new(x, t, Interval::new(-FRAC_PI_2, FRAC_PI_2), pieces)
}

/// Decide `u·scale < cos(y)·γ(y)`.
fn accept(x: f64, y: f64, t: f64, u: f64, scale: f64, max_terms: usize) -> Result<bool> {
    if !(y.abs() < FRAC_PI_2) {
        return Ok(false);
    }
    let mut g = gamma_bounds(BridgeSpec::new(t, x, y)?, corridor());
    match decide_below(u * scale / y.cos(), &mut g, max_terms) {
        Comparison::Below => Ok(true),
        Comparison::NotBelow => Ok(false),
        Comparison::Undecided => Err(Error::Undecided { max_terms }),
    }
}

/// One exact draw of `X_t` given `X_0 = x`, with the number of proposals.
pub fn sample_transition_counted<R: Rng + ?Sized>(
    x: f64,
    t: f64,
    rng: &mut R,
    max_terms: usize,
) -> Result<(f64, usize)> {
    check_state(x, t)?;
    if x.abs() <= FRAC_PI_2 - BOUNDARY_BAND {
        for k in 1..=STALL_CAP {
            let z: f64 = StandardNormal.sample(rng);
            let y = x + t.sqrt() * z;
            let u: f64 = rng.random();
            if accept(x, y, t, u, 1.0, max_terms)? {
                return Ok((y, k));
            }
        }
    } else {
        let proposal = boundary_proposal(x, t)?;
        for k in 1..=STALL_CAP {
            let y = proposal.invert(rng.random());
            let u: f64 = rng.random();
            if !(y.abs() < FRAC_PI_2) {
                continue;
            }
            let tilt = proposal.weight(y);
            if accept(x, y, t, u, tilt, max_terms)? {
                return Ok((y, k));
            }
        }
    }
    Err(Error::SamplerStall {
        iterations: STALL_CAP,
    })
}

pub fn sample_transition<R: Rng + ?Sized>(x: f64, t: f64, rng: &mut R, max_terms: usize) -> Result<f64> {
    sample_transition_counted(x, t, rng, max_terms).map(|(y, _)| y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn density_at_origin() {
        // cos(0)·γ(−π/2, π/2; 1, 0, 0)·(2π)^{−1/2} = 0.3932039898432947
        let mut b = transition_density_bounds(0.0, 0.0, 1.0).unwrap();
        let v = b.limit(1e-16, 60).midpoint();
        assert!((v - 0.393_203_989_843_294_7).abs() < 1e-13);
    }

    #[test]
    fn density_vanishes_at_boundary() {
        let mut b = transition_density_bounds(0.2, FRAC_PI_2 - 1e-9, 0.5).unwrap();
        assert!(b.upper(1) < 1e-8);
        assert!(transition_density_bounds(0.0, FRAC_PI_2, 1.0).is_err());
        assert!(transition_density_bounds(2.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn tilted_proposal_dominates_containment() {
        let p = boundary_proposal(1.4, 0.1).unwrap();
        for k in 1..100 {
            let y = -FRAC_PI_2 + PI * k as f64 / 100.0;
            let mut g = gamma_bounds(BridgeSpec::new(0.1, 1.4, y).unwrap(), corridor());
            assert!(p.weight(y) >= g.upper(30) - 1e-14);
        }
    }

    #[test]
    fn draws_stay_inside() {
        let mut rng = stream(8, &[]);
        for &x in &[0.0, 1.0, 1.5, -1.55] {
            for _ in 0..200 {
                let y = sample_transition(x, 0.3, &mut rng, 1000).unwrap();
                assert!(y.abs() < FRAC_PI_2);
            }
        }
    }
}
