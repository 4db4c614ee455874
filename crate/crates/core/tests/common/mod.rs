//! Independent oracles for the integration tests.
//!
//! Containment probabilities come from the eigenfunction expansion of
//! Brownian motion killed outside `(L, U)`, which shares no code or formula
//! with the image series under test.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `γ(L, U; l, x, y)` from the sine expansion of the killed transition
/// density divided by the free one. Accurate when `l/(U−L)²` is not tiny.
pub fn spectral_gamma(l: f64, x: f64, y: f64, lo: f64, hi: f64) -> f64 {
    if !(lo < x && x < hi && lo < y && y < hi) {
        return 0.0;
    }
    let d = hi - lo;
    let (a, b) = (PI * (x - lo) / d, PI * (y - lo) / d);
    let rate = PI * PI * l / (2.0 * d * d);
    let mut sum = 0.0;
    let mut k = 1.0f64;
    loop {
        let e = -k * k * rate;
        if e < -60.0 {
            break;
        }
        sum += (k * a).sin() * (k * b).sin() * e.exp();
        k += 1.0;
    }
    let killed = 2.0 / d * sum;
    let free = (-(y - x) * (y - x) / (2.0 * l)).exp() / (2.0 * PI * l).sqrt();
    (killed / free).clamp(0.0, 1.0)
}

pub fn spectral_zeta(l: f64, x: f64, y: f64, lo: f64, hi: f64) -> f64 {
    1.0 - spectral_gamma(l, x, y, lo, hi)
}

/// `P[min ∈ (a, b), max ∈ (c, d)]` for a bridge from `x` to `y` over `l`.
pub fn beta(l: f64, x: f64, y: f64, r: [f64; 4]) -> f64 {
    let [a, b, c, d] = r;
    if !(a < b && c < d) {
        return 0.0;
    }
    let g = |lo: f64, hi: f64| if lo < hi { spectral_gamma(l, x, y, lo, hi) } else { 0.0 };
    g(a, d) - g(b, d) - g(a, c) + g(b, c)
}

/// Same as [`beta`] for the bridge pinned at `w` after time `q` (total
/// duration `q + r`).
pub fn rho(q: f64, rr: f64, x: f64, w: f64, y: f64, r: [f64; 4]) -> f64 {
    let [a, b, c, d] = r;
    if !(a < b && c < d) {
        return 0.0;
    }
    let pair = |lo: f64, hi: f64| {
        if lo < hi {
            spectral_gamma(q, x, w, lo, hi) * spectral_gamma(rr, w, y, lo, hi)
        } else {
            0.0
        }
    };
    (pair(a, d) - pair(b, d) - pair(a, c) + pair(b, c)).max(0.0)
}

/// Tabulated CDF on a uniform grid, linearly interpolated.
pub struct GridCdf {
    pub xs: Vec<f64>,
    pub cdf: Vec<f64>,
}

impl GridCdf {
    /// Trapezoid-rule CDF of an unnormalized density on `[lo, hi]`.
    pub fn from_density(lo: f64, hi: f64, points: usize, f: impl Fn(f64) -> f64) -> Self {
        let h = (hi - lo) / (points - 1) as f64;
        let xs: Vec<f64> = (0..points).map(|i| lo + i as f64 * h).collect();
        let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let mut cdf = vec![0.0; points];
        for i in 1..points {
            cdf[i] = cdf[i - 1] + 0.5 * h * (fs[i - 1] + fs[i]);
        }
        let total = cdf[points - 1];
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { xs, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let h = self.xs[1] - self.xs[0];
        let i = (((x - self.xs[0]) / h) as usize).min(n - 2);
        let t = (x - self.xs[i]) / h;
        self.cdf[i] + t * (self.cdf[i + 1] - self.cdf[i])
    }

    /// Smallest grid-interpolated `x` with `F(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c < p).clamp(1, self.xs.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (p - c0) / (c1 - c0) } else { 0.0 };
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }
}

/// Oracle CDF of the midpoint of a layered bridge: `ρ(w)·N(w; μ, v)` on
/// `[min_lo, max_hi]`.
pub fn midpoint_cdf(q: f64, r: f64, x: f64, y: f64, ranges: [f64; 4], points: usize) -> GridCdf {
    let l = q + r;
    let mean = (r * x + q * y) / l;
    let var = q * r / l;
    GridCdf::from_density(ranges[0], ranges[3], points, |w| {
        let tight = [ranges[0], ranges[1].min(w), ranges[2].max(w), ranges[3]];
        rho(q, r, x, w, y, tight) * (-(w - mean) * (w - mean) / (2.0 * var)).exp()
    })
}

/// Normalized transition density of `dX = −tan(X)dt + dW` via the Doob
/// transform of Brownian motion killed at `±π/2` with `h = cos`.
pub fn tan_density(x: f64, y: f64, t: f64) -> f64 {
    if y.abs() >= PI / 2.0 {
        return 0.0;
    }
    let (a, b) = (x + PI / 2.0, y + PI / 2.0);
    let mut sum = 0.0;
    let mut k = 1.0f64;
    while k * k * t / 2.0 < 60.0 {
        sum += (k * a).sin() * (k * b).sin() * (-k * k * t / 2.0).exp();
        k += 1.0;
    }
    (0.5 * t).exp() * y.cos() / x.cos() * 2.0 / PI * sum
}

/// `P[Z ≤ z]` for a standard normal, by the Abramowitz–Stegun 7.1.26
/// independent of the library's own implementation; absolute error < 1.5e-7.
pub fn phi_approx(z: f64) -> f64 {
    let x = z.abs() / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t * (0.254_829_592 + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erfc = poly * (-x * x).exp();
    if z >= 0.0 {
        1.0 - 0.5 * erfc
    } else {
        0.5 * erfc
    }
}

/// `P[sup_{t≤T} (W_t + ν t) ≥ a]` for `a > 0`.
pub fn drifted_hit_probability(a: f64, nu: f64, horizon: f64) -> f64 {
    let s = horizon.sqrt();
    phi_approx((-a + nu * horizon) / s) + (2.0 * nu * a).exp() * phi_approx((-a - nu * horizon) / s)
}

/// Binomial standard error.
pub fn binomial_se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
