//! Bridge escape/containment probabilities as alternating series.
//!
//! For a Brownian bridge of duration `l` from `x` to `y`, the probability of
//! leaving the corridor `(L, U)` is the sum of `σ_j − τ_j` over `j ≥ 1`. The
//! partial sums alternate around the limit and shrink monotonically, so any
//! finite number of terms brackets the probability. Composite quantities built
//! from several such probabilities (sums, differences, products) are bracketed
//! by interval arithmetic over the leaf brackets, and a uniform draw can be
//! compared with the limit exactly after finitely many terms.

use crate::error::{Error, Result};
use std::ops::{Add, Mul, Neg, Sub};

/// Exponents below this are flushed to zero rather than producing denormals.
const EXP_FLOOR: f64 = -745.0;

fn flushed_exp(exponent: f64) -> f64 {
    if exponent < EXP_FLOOR {
        0.0
    } else {
        exponent.exp()
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Self { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Self::new(c * self.lo, c * self.hi)
        } else {
            Self::new(c * self.hi, c * self.lo)
        }
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Self {
        Self::new(self.lo.clamp(lo, hi), self.hi.clamp(lo, hi))
    }

    /// Lower half `[lo, mid]`.
    pub fn lower_half(&self) -> Self {
        Self::new(self.lo, self.midpoint())
    }

    /// Upper half `[mid, hi]`.
    pub fn upper_half(&self) -> Self {
        Self::new(self.midpoint(), self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::new(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval::new(self.lo - o.hi, self.hi - o.lo)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let p = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = p.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::new(lo, hi)
    }
}

/// Duration and endpoints `(l, x, y)` of a Brownian bridge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeSpec {
    pub duration: f64,
    pub start: f64,
    pub end: f64,
}

impl BridgeSpec {
    pub fn new(duration: f64, start: f64, end: f64) -> Result<Self> {
        if !(duration > 0.0) || !duration.is_finite() {
            return Err(Error::domain(format!(
                "bridge duration must be positive, got {duration}"
            )));
        }
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::domain("bridge endpoints must be finite"));
        }
        Ok(Self {
            duration,
            start,
            end,
        })
    }
}

/// Barriers `L < U`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corridor {
    pub lower: f64,
    pub upper: f64,
}

impl Corridor {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::domain(format!(
                "corridor needs lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    /// Strict containment; a point on a barrier is outside.
    pub fn strictly_contains(&self, v: f64) -> bool {
        self.lower < v && v < self.upper
    }
}

// `gx`, `gy` are the distances from x and y to the barrier reached first; the
// form `δj + ξ − x` loses digits when the other barrier is far away
fn sigma_bar(gx: f64, gy: f64, delta: f64, l: f64, j: f64) -> f64 {
    let shift = delta * (j - 1.0);
    flushed_exp(-2.0 / l * (gx + shift) * (gy + shift))
}

fn tau_bar(x: f64, y: f64, delta: f64, l: f64, j: f64) -> f64 {
    flushed_exp(-2.0 * j / l * (delta * delta * j + delta * (x - y)))
}

fn sigma_tau_unchecked(spec: &BridgeSpec, corr: &Corridor, j: usize) -> (f64, f64) {
    let (l, x, y) = (spec.duration, spec.start, spec.end);
    let delta = corr.width();
    let jf = j as f64;
    let sigma = sigma_bar(corr.upper - x, corr.upper - y, delta, l, jf)
        + sigma_bar(x - corr.lower, y - corr.lower, delta, l, jf);
    let tau = tau_bar(x, y, delta, l, jf) + tau_bar(-x, -y, delta, l, jf);
    (sigma, tau)
}

/// The `j`-th pair `(σ_j, τ_j)` of the escape series.
///
/// Requires `L < x, y < U`; the degenerate branch is the caller's business.
pub fn sigma_tau_terms(spec: BridgeSpec, corr: Corridor, j: usize) -> Result<(f64, f64)> {
    if !(spec.duration > 0.0) {
        return Err(Error::domain("bridge duration must be positive"));
    }
    if !(corr.lower < corr.upper) {
        return Err(Error::domain("corridor needs lower < upper"));
    }
    if j == 0 {
        return Err(Error::domain("series index starts at 1"));
    }
    Ok(sigma_tau_unchecked(&spec, &corr, j))
}

/// Memoized partial sums `S_1, S_2, ...` of the escape series.
#[derive(Debug, Clone)]
pub struct ZetaSeries {
    spec: BridgeSpec,
    corr: Corridor,
    inside: bool,
    sums: Vec<f64>,
    // running intersection of the clamped levels; rounding in the partial sums
    // can otherwise loosen a bracket by an ulp
    levels: Vec<Interval>,
    // all further terms underflow to zero
    exhausted: bool,
}

impl ZetaSeries {
    pub fn new(spec: BridgeSpec, corr: Corridor) -> Self {
        let inside = corr.strictly_contains(spec.start) && corr.strictly_contains(spec.end);
        Self {
            spec,
            corr,
            inside,
            sums: Vec::new(),
            levels: Vec::new(),
            exhausted: !inside,
        }
    }

    /// False when an endpoint is on or beyond a barrier (escape is certain).
    pub fn is_interior(&self) -> bool {
        self.inside
    }

    fn extend_to(&mut self, m: usize) {
        while self.sums.len() < m && !self.exhausted {
            let j = self.sums.len() / 2 + 1;
            let (sigma, tau) = sigma_tau_unchecked(&self.spec, &self.corr, j);
            let prev = self.sums.last().copied().unwrap_or(0.0);
            let odd = prev + sigma;
            self.sums.push(odd);
            self.sums.push(odd - tau);
            // exponents strictly decrease in j, so zero terms stay zero
            if sigma == 0.0 && tau == 0.0 {
                self.exhausted = true;
            }
        }
    }

    /// Raw partial sum `S_m` for `m ≥ 1`.
    pub fn partial_sum(&mut self, m: usize) -> f64 {
        assert!(m >= 1, "partial sums are indexed from 1");
        if !self.inside {
            return 1.0;
        }
        self.extend_to(m);
        match self.sums.get(m - 1) {
            Some(&s) => s,
            None => *self.sums.last().expect("series has at least one term"),
        }
    }

    /// Raw bracket `[S_2n, S_2n−1]` at level `n ≥ 1`.
    pub fn raw_level(&mut self, n: usize) -> Interval {
        let upper = self.partial_sum(2 * n - 1);
        let lower = self.partial_sum(2 * n);
        Interval::new(lower, upper)
    }

    /// Bracket at level `n`, intersected with `[0, 1]` and every earlier level.
    pub fn level(&mut self, n: usize) -> Interval {
        assert!(n >= 1, "levels are indexed from 1");
        while self.levels.len() < n {
            let raw = self.raw_level(self.levels.len() + 1).clamp(0.0, 1.0);
            let iv = match self.levels.last() {
                Some(p) => {
                    let lo = raw.lo.max(p.lo);
                    Interval::new(lo, raw.hi.min(p.hi).max(lo))
                }
                None => raw,
            };
            self.levels.push(iv);
            // once the terms vanish every later level repeats this one
            if self.exhausted && 2 * self.levels.len() >= self.sums.len() {
                break;
            }
        }
        self.levels[n.min(self.levels.len()) - 1]
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    Zeta(ZetaSeries),
    Gamma(ZetaSeries),
    Linear(Vec<(f64, Node)>),
    Product(Box<Node>, Box<Node>),
    Clamp(Box<Node>, f64, f64),
}

impl Node {
    fn bracket(&mut self, n: usize) -> Interval {
        match self {
            Node::Const(c) => Interval::point(*c),
            Node::Zeta(s) => s.level(n),
            Node::Gamma(s) => {
                let z = s.level(n);
                Interval::new(1.0 - z.hi, 1.0 - z.lo)
            }
            Node::Linear(terms) => terms
                .iter_mut()
                .map(|(c, node)| node.bracket(n).scale(*c))
                .fold(Interval::point(0.0), |acc, iv| acc + iv),
            Node::Product(a, b) => a.bracket(n) * b.bracket(n),
            Node::Clamp(inner, lo, hi) => inner.bracket(n).clamp(*lo, *hi),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Node::Const(c) if *c == 0.0)
    }
}

/// Lazily refined lower/upper bounds converging to a limit.
///
/// Level `n ≥ 1` gives `[lower(n), upper(n)]`; lower bounds are non-decreasing
/// and upper bounds non-increasing in `n`. Leaf series memoize their terms, so
/// one value should be driven by one consumer at a time.
#[derive(Debug, Clone)]
pub struct AlternatingBounds {
    node: Node,
}

impl AlternatingBounds {
    pub fn constant(c: f64) -> Self {
        Self {
            node: Node::Const(c),
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// True for the literal constant zero (a null event).
    pub fn is_zero(&self) -> bool {
        self.node.is_zero()
    }

    /// `Σ c_i · b_i`.
    pub fn linear(terms: Vec<(f64, AlternatingBounds)>) -> Self {
        let terms: Vec<(f64, Node)> = terms
            .into_iter()
            .filter(|(c, b)| *c != 0.0 && !b.is_zero())
            .map(|(c, b)| (c, b.node))
            .collect();
        if terms.is_empty() {
            return Self::zero();
        }
        Self {
            node: Node::Linear(terms),
        }
    }

    pub fn product(a: AlternatingBounds, b: AlternatingBounds) -> Self {
        if a.is_zero() || b.is_zero() {
            return Self::zero();
        }
        Self {
            node: Node::Product(Box::new(a.node), Box::new(b.node)),
        }
    }

    /// Intersect every bracket with `[lo, hi]`, a range known to hold the limit.
    pub fn clamp(self, lo: f64, hi: f64) -> Self {
        if self.is_zero() && lo <= 0.0 && 0.0 <= hi {
            return self;
        }
        Self {
            node: Node::Clamp(Box::new(self.node), lo, hi),
        }
    }

    /// `1 − self`.
    pub fn complement(self) -> Self {
        Self::linear(vec![(1.0, Self::constant(1.0)), (-1.0, self)])
    }

    /// Bracket at level `n ≥ 1`.
    pub fn bracket(&mut self, n: usize) -> Interval {
        assert!(n >= 1, "levels are indexed from 1");
        self.node.bracket(n)
    }

    pub fn lower(&mut self, n: usize) -> f64 {
        self.bracket(n).lo
    }

    pub fn upper(&mut self, n: usize) -> f64 {
        self.bracket(n).hi
    }

    /// Refine until the bracket is no wider than `tol` or `max_levels` is hit.
    pub fn limit(&mut self, tol: f64, max_levels: usize) -> Interval {
        let mut iv = self.bracket(1);
        for n in 2..=max_levels {
            if iv.width() <= tol {
                break;
            }
            iv = self.bracket(n);
        }
        iv
    }
}

impl Add for AlternatingBounds {
    type Output = AlternatingBounds;
    fn add(self, o: AlternatingBounds) -> AlternatingBounds {
        AlternatingBounds::linear(vec![(1.0, self), (1.0, o)])
    }
}

impl Sub for AlternatingBounds {
    type Output = AlternatingBounds;
    fn sub(self, o: AlternatingBounds) -> AlternatingBounds {
        AlternatingBounds::linear(vec![(1.0, self), (-1.0, o)])
    }
}

impl Mul for AlternatingBounds {
    type Output = AlternatingBounds;
    fn mul(self, o: AlternatingBounds) -> AlternatingBounds {
        AlternatingBounds::product(self, o)
    }
}

impl Neg for AlternatingBounds {
    type Output = AlternatingBounds;
    fn neg(self) -> AlternatingBounds {
        AlternatingBounds::linear(vec![(-1.0, self)])
    }
}

/// Bounds on `ζ(L, U; l, x, y)`, the escape probability.
pub fn zeta_bounds(spec: BridgeSpec, corr: Corridor) -> AlternatingBounds {
    AlternatingBounds {
        node: Node::Zeta(ZetaSeries::new(spec, corr)),
    }
}

/// Bounds on `γ = 1 − ζ`, the containment probability.
pub fn gamma_bounds(spec: BridgeSpec, corr: Corridor) -> AlternatingBounds {
    let series = ZetaSeries::new(spec, corr);
    if !series.is_interior() {
        return AlternatingBounds::zero();
    }
    AlternatingBounds {
        node: Node::Gamma(series),
    }
}

/// Containment probability for barriers that may coincide or cross, in which
/// case the event is null.
pub fn gamma_or_zero(spec: BridgeSpec, lower: f64, upper: f64) -> AlternatingBounds {
    match Corridor::new(lower, upper) {
        Ok(corr) => gamma_bounds(spec, corr),
        Err(_) => AlternatingBounds::zero(),
    }
}

/// Signed sum/product tree over bounded leaves.
#[derive(Debug, Clone)]
pub enum Expr {
    Const(f64),
    Leaf(AlternatingBounds),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

/// Bounds for an expression tree, by interval arithmetic over leaf brackets.
pub fn composite_bounds(expr: Expr) -> Result<AlternatingBounds> {
    Ok(match expr {
        Expr::Const(c) => {
            if !c.is_finite() {
                return Err(Error::domain("non-finite constant in composite"));
            }
            AlternatingBounds::constant(c)
        }
        Expr::Leaf(b) => b,
        Expr::Add(a, b) => composite_bounds(*a)? + composite_bounds(*b)?,
        Expr::Sub(a, b) => composite_bounds(*a)? - composite_bounds(*b)?,
        Expr::Mul(a, b) => composite_bounds(*a)? * composite_bounds(*b)?,
    })
}

/// Outcome of comparing a draw with a bracketed limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// The draw is strictly below the limit.
    Below,
    /// The draw is above the limit.
    NotBelow,
    /// The level budget ran out with the draw still inside the bracket.
    Undecided,
}

impl Comparison {
    pub fn into_result(self, max_terms: usize) -> Result<bool> {
        match self {
            Comparison::Below => Ok(true),
            Comparison::NotBelow => Ok(false),
            Comparison::Undecided => Err(Error::Undecided { max_terms }),
        }
    }
}

/// Decide `r < limit` using as few levels as needed.
pub fn decide_below(r: f64, bounds: &mut AlternatingBounds, max_terms: usize) -> Comparison {
    for n in 1..=max_terms.max(1) {
        let iv = bounds.bracket(n);
        if r < iv.lo {
            return Comparison::Below;
        }
        if r > iv.hi {
            return Comparison::NotBelow;
        }
        if iv.width() == 0.0 {
            // r equals an exactly known limit
            return Comparison::Undecided;
        }
    }
    Comparison::Undecided
}

/// Inverse-CDF draw from unnormalized bracketed weights.
///
/// Returns the smallest `i` with `u · Σ_k w_k < Σ_{k≤i} w_k`, compared through
/// `(1 − u) Σ_{k≤i} w_k − u Σ_{k>i} w_k > 0`, so no division by the total.
pub fn sample_index(
    weights: &mut [AlternatingBounds],
    u: f64,
    max_terms: usize,
) -> Result<usize> {
    if weights.is_empty() || weights.iter().all(|w| w.is_zero()) {
        return Err(Error::domain("all weights are null"));
    }
    let k = weights.len();
    let mut brackets = vec![Interval::point(0.0); k];
    for n in 1..=max_terms.max(1) {
        for (b, w) in brackets.iter_mut().zip(weights.iter_mut()) {
            *b = w.bracket(n);
        }
        let mut head = Interval::point(0.0);
        for (i, &b) in brackets.iter().enumerate() {
            head = head + b;
            // tail = total − head, bounded from its own pieces
            let tail = brackets[i + 1..]
                .iter()
                .fold(Interval::point(0.0), |acc, &iv| acc + iv);
            let z_lo = (1.0 - u) * head.lo - u * tail.hi;
            let z_hi = (1.0 - u) * head.hi - u * tail.lo;
            if z_hi < 0.0 {
                continue;
            }
            if z_lo > 0.0 {
                return Ok(i);
            }
            break;
        }
        if brackets.iter().all(|b| b.width() == 0.0) {
            return Err(Error::Undecided { max_terms: n });
        }
    }
    Err(Error::Undecided { max_terms })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(l: f64, x: f64, y: f64) -> BridgeSpec {
        BridgeSpec::new(l, x, y).unwrap()
    }

    fn corr(lo: f64, hi: f64) -> Corridor {
        Corridor::new(lo, hi).unwrap()
    }

    #[test]
    fn first_terms_match_closed_form() {
        let (s, t) = sigma_tau_terms(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0), 1).unwrap();
        assert!((s - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((t - 2.0 * (-8.0f64).exp()).abs() < 1e-17);
        let (s5, _) = sigma_tau_terms(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0), 5).unwrap();
        assert!(s5 < 1e-30);
    }

    #[test]
    fn symmetric_sigma_halves_are_equal() {
        let x = 0.3;
        let u = 1.2;
        let sp = spec(0.7, x, x);
        let delta = 2.0 * u;
        for j in 1..4 {
            let jf = j as f64;
            let a = sigma_bar(u - x, u - x, delta, 0.7, jf);
            let b = sigma_bar(x + u, x + u, delta, 0.7, jf);
            let (s, _) = sigma_tau_terms(sp, corr(-u, u), j).unwrap();
            assert!((s - (a + b)).abs() < 1e-15);
            // reflection: second half is the first evaluated at −x
            let first = |x: f64| (-2.0 / 0.7 * (delta * jf - u - x).powi(2)).exp();
            assert!((a - first(x)).abs() < 1e-15 && (b - first(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(BridgeSpec::new(0.0, 0.0, 0.0).is_err());
        assert!(Corridor::new(1.0, 1.0).is_err());
        assert!(sigma_tau_terms(spec(1.0, 0.0, 0.0), Corridor { lower: 1.0, upper: -1.0 }, 1).is_err());
        assert!(sigma_tau_terms(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0), 0).is_err());
    }

    #[test]
    fn endpoint_on_barrier_is_certain_escape() {
        let mut z = zeta_bounds(spec(1.0, -1.0, 0.0), corr(-1.0, 1.0));
        for n in 1..10 {
            assert_eq!(z.bracket(n), Interval::point(1.0));
        }
        let mut g = gamma_bounds(spec(1.0, 0.0, 1.0), corr(-1.0, 1.0));
        assert_eq!(g.bracket(3), Interval::point(0.0));
    }

    // Oracle: mpmath, both the image series and the spectral sine series give
    // ζ(−1,1;1,0,0) = 0.26999967167735452.
    const ZETA_UNIT: f64 = 0.269_999_671_677_354_5;

    #[test]
    fn zeta_and_gamma_limits() {
        let mut z = zeta_bounds(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0));
        let iv = z.limit(1e-15, 50);
        assert!(iv.contains(ZETA_UNIT) || (iv.midpoint() - ZETA_UNIT).abs() < 1e-15);
        let mut g = gamma_bounds(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0));
        assert!((g.limit(1e-15, 50).midpoint() - (1.0 - ZETA_UNIT)).abs() < 1e-15);
        let mut wide = gamma_bounds(spec(1.0, 0.0, 0.0), corr(-10.0, 10.0));
        assert!(wide.lower(1) >= 1.0 - 1e-40);
    }

    #[test]
    fn one_sided_limit() {
        let (u, x, y, l) = (0.8, 0.1, -0.3, 0.9);
        let mut z = zeta_bounds(spec(l, x, y), corr(-60.0, u));
        let expect = (-2.0 * (u - x) * (u - y) / l).exp();
        let iv = z.limit(0.0, 20);
        assert!((iv.midpoint() / expect - 1.0).abs() < 1e-13);
    }

    #[test]
    fn product_of_gammas() {
        let g = || gamma_bounds(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0));
        let mut p = g() * g();
        let iv = p.limit(1e-15, 50);
        // (1 − ζ)² from the oracle value
        let expect = (1.0 - ZETA_UNIT) * (1.0 - ZETA_UNIT);
        assert!((iv.midpoint() - expect).abs() < 1e-14);
    }

    #[test]
    fn complement_swaps_roles() {
        let mut z = zeta_bounds(spec(0.5, 0.2, -0.1), corr(-0.7, 0.9));
        let mut c = z.clone().complement();
        for n in 1..6 {
            let a = z.bracket(n);
            let b = c.bracket(n);
            assert_eq!(b.lo, 1.0 - a.hi);
            assert_eq!(b.hi, 1.0 - a.lo);
        }
    }

    #[test]
    fn decide_below_examples() {
        let mk = || zeta_bounds(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0));
        assert_eq!(decide_below(0.0, &mut mk(), 10), Comparison::Below);
        assert_eq!(decide_below(0.5, &mut mk(), 3), Comparison::NotBelow);
        assert_eq!(decide_below(1.0, &mut mk(), 10), Comparison::NotBelow);
        let mut exact = AlternatingBounds::constant(0.25);
        assert_eq!(decide_below(0.25, &mut exact, 10), Comparison::Undecided);
    }

    #[test]
    fn composite_expression() {
        let z = zeta_bounds(spec(1.0, 0.0, 0.0), corr(-1.0, 1.0));
        let e = Expr::Sub(Box::new(Expr::Const(1.0)), Box::new(Expr::Leaf(z.clone())));
        let mut c = composite_bounds(e).unwrap();
        let mut z = z;
        let a = z.bracket(2);
        let b = c.bracket(2);
        assert_eq!((b.lo, b.hi), (1.0 - a.hi, 1.0 - a.lo));
        assert!(composite_bounds(Expr::Const(f64::NAN)).is_err());
    }

    #[test]
    fn sample_index_exact_weights() {
        let mut w: Vec<AlternatingBounds> = [0.2, 0.0, 0.5, 0.3]
            .iter()
            .map(|&c| AlternatingBounds::constant(c))
            .collect();
        assert_eq!(sample_index(&mut w, 0.1, 10).unwrap(), 0);
        assert_eq!(sample_index(&mut w, 0.3, 10).unwrap(), 2);
        assert_eq!(sample_index(&mut w, 0.95, 10).unwrap(), 3);
        let mut nulls = vec![AlternatingBounds::zero(); 3];
        assert!(sample_index(&mut nulls, 0.5, 10).is_err());
    }
}
