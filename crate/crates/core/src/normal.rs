//! Standard normal CDF helpers with usable accuracy deep in the tails.

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Φ(z).
pub fn cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Mills ratio Q(x)/φ(x) for large positive x, by continued fraction.
fn mills_ratio(x: f64) -> f64 {
    let mut t = x;
    for k in (1..=80).rev() {
        t = x + k as f64 / t;
    }
    1.0 / t
}

/// ln Φ(z).
pub fn log_cdf(z: f64) -> f64 {
    if z > -30.0 {
        cdf(z).ln()
    } else {
        -0.5 * z * z - LN_SQRT_2PI + mills_ratio(-z).ln()
    }
}

/// ln(1 - e^a) for a < 0.
fn log1m_exp(a: f64) -> f64 {
    if a > -std::f64::consts::LN_2 {
        (-a.exp_m1()).ln()
    } else {
        (-a.exp()).ln_1p()
    }
}

/// ln(Φ(hi) − Φ(lo)) for lo ≤ hi; `-inf` for an empty interval.
pub fn log_cdf_diff(lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return f64::NEG_INFINITY;
    }
    if lo >= 0.0 {
        // both in the upper tail: work with Φ(−z)
        let a = log_cdf(-lo);
        let b = log_cdf(-hi);
        a + log1m_exp(b - a)
    } else if hi <= 0.0 {
        let a = log_cdf(hi);
        let b = log_cdf(lo);
        a + log1m_exp(b - a)
    } else {
        (1.0 - cdf(lo) - cdf(-hi)).ln()
    }
}
