//! Layer-conditioned extrema events and their exact samplers.
//!
//! `β` is the probability that a bridge's minimum and maximum fall in given
//! ranges; `ρ` is the same probability when the bridge is additionally pinned
//! at an interior point. Both are inclusion–exclusion combinations of
//! containment probabilities and inherit their alternating bounds.

use crate::alt_series::{gamma_or_zero, sample_index, AlternatingBounds, BridgeSpec, Interval};
use crate::error::{Error, Result};
use crate::layers::{Extremum, IntersectionLayer};
use rand::Rng;

/// Ranges for the minimum `[min_lo, min_hi]` and maximum `[max_lo, max_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremaRanges {
    pub min_lo: f64,
    pub min_hi: f64,
    pub max_lo: f64,
    pub max_hi: f64,
}

impl ExtremaRanges {
    /// Requires `min_lo ≤ min_hi ≤ max_lo ≤ max_hi`; zero widths are allowed
    /// and describe null events.
    pub fn new(min_lo: f64, min_hi: f64, max_lo: f64, max_hi: f64) -> Result<Self> {
        let ordered = min_lo <= min_hi && min_hi <= max_lo && max_lo <= max_hi;
        if !ordered || [min_lo, min_hi, max_lo, max_hi].iter().any(|v| v.is_nan()) {
            return Err(Error::domain(format!(
                "extrema ranges out of order: [{min_lo}, {min_hi}] / [{max_lo}, {max_hi}]"
            )));
        }
        Ok(Self {
            min_lo,
            min_hi,
            max_lo,
            max_hi,
        })
    }

    pub fn from_intervals(min: Interval, max: Interval) -> Result<Self> {
        Self::new(min.lo, min.hi, max.lo, max.hi)
    }

    pub fn min_range(&self) -> Interval {
        Interval::new(self.min_lo, self.min_hi)
    }

    pub fn max_range(&self) -> Interval {
        Interval::new(self.max_lo, self.max_hi)
    }

    fn is_null(&self) -> bool {
        self.min_lo >= self.min_hi || self.max_lo >= self.max_hi
    }
}

fn beta_unchecked(r: &ExtremaRanges, spec: BridgeSpec) -> AlternatingBounds {
    if r.is_null() {
        return AlternatingBounds::zero();
    }
    let g = |lo: f64, hi: f64| gamma_or_zero(spec, lo, hi);
    AlternatingBounds::linear(vec![
        (1.0, g(r.min_lo, r.max_hi)),
        (-1.0, g(r.min_hi, r.max_hi)),
        (-1.0, g(r.min_lo, r.max_lo)),
        (1.0, g(r.min_hi, r.max_lo)),
    ])
    .clamp(0.0, 1.0)
}

/// Bounds on `P[min ∈ (min_lo, min_hi), max ∈ (max_lo, max_hi)]` for a bridge.
pub fn beta_bounds(ranges: ExtremaRanges, spec: BridgeSpec) -> Result<AlternatingBounds> {
    let checked = ExtremaRanges::new(ranges.min_lo, ranges.min_hi, ranges.max_lo, ranges.max_hi)?;
    Ok(beta_unchecked(&checked, spec))
}

/// A bridge on `[0, q + r]` from `x` to `y` that passes through `w` at `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinnedBridge {
    pub q: f64,
    pub r: f64,
    pub x: f64,
    pub w: f64,
    pub y: f64,
}

impl PinnedBridge {
    pub fn new(q: f64, r: f64, x: f64, w: f64, y: f64) -> Result<Self> {
        if !(q > 0.0 && r > 0.0) {
            return Err(Error::domain(format!(
                "sub-bridge durations must be positive, got q={q}, r={r}"
            )));
        }
        Ok(Self { q, r, x, w, y })
    }

    pub fn left(&self) -> BridgeSpec {
        BridgeSpec {
            duration: self.q,
            start: self.x,
            end: self.w,
        }
    }

    pub fn right(&self) -> BridgeSpec {
        BridgeSpec {
            duration: self.r,
            start: self.w,
            end: self.y,
        }
    }
}

/// Bounds on the joint-extrema probability of a bridge pinned at an interior
/// point; the two sub-bridges are independent, hence the products.
pub fn rho_bounds(ranges: ExtremaRanges, pinned: PinnedBridge) -> Result<AlternatingBounds> {
    let r = ExtremaRanges::new(ranges.min_lo, ranges.min_hi, ranges.max_lo, ranges.max_hi)?;
    PinnedBridge::new(pinned.q, pinned.r, pinned.x, pinned.w, pinned.y)?;
    Ok(rho_unchecked(&r, &pinned))
}

pub(crate) fn rho_unchecked(r: &ExtremaRanges, p: &PinnedBridge) -> AlternatingBounds {
    if r.is_null() {
        return AlternatingBounds::zero();
    }
    let (left, right) = (p.left(), p.right());
    let pair = |lo: f64, hi: f64| gamma_or_zero(left, lo, hi) * gamma_or_zero(right, lo, hi);
    AlternatingBounds::linear(vec![
        (1.0, pair(r.min_lo, r.max_hi)),
        (-1.0, pair(r.min_hi, r.max_hi)),
        (-1.0, pair(r.min_lo, r.max_lo)),
        (1.0, pair(r.min_hi, r.max_lo)),
    ])
    .clamp(0.0, 1.0)
}

/// The nine admissible update patterns, as (left-min, left-max, right-min,
/// right-max); `true` keeps the parent's range, `false` shifts it inwards.
pub const UPDATE_PATTERNS: [[bool; 4]; 9] = [
    [true, true, true, true],
    [true, true, false, true],
    [true, true, true, false],
    [true, true, false, false],
    [false, true, true, true],
    [false, true, true, false],
    [true, false, true, true],
    [true, false, false, true],
    [false, false, true, true],
];

/// Which of the nine patterns a bisection produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventE {
    /// 1-based row index.
    pub index: u8,
    pub left_min: bool,
    pub left_max: bool,
    pub right_min: bool,
    pub right_max: bool,
}

impl EventE {
    pub fn from_index(index: u8) -> Result<Self> {
        if !(1..=9).contains(&index) {
            return Err(Error::domain(format!("event index {index} not in 1..=9")));
        }
        let p = UPDATE_PATTERNS[index as usize - 1];
        Ok(Self {
            index,
            left_min: p[0],
            left_max: p[1],
            right_min: p[2],
            right_max: p[3],
        })
    }

    /// At least one side keeps each of the parent's extremum ranges.
    pub fn is_admissible(&self) -> bool {
        (self.left_min || self.right_min) && (self.left_max || self.right_max)
    }
}

/// Child ranges implied by one update pattern, given parent ranges already
/// tightened around the midpoint value.
pub fn child_ranges(
    parent: &ExtremaRanges,
    pinned: &PinnedBridge,
    pattern: [bool; 4],
) -> (ExtremaRanges, ExtremaRanges) {
    let side = |keep_min: bool, keep_max: bool, a: f64, b: f64| {
        let (min_lo, min_hi) = if keep_min {
            (parent.min_lo, parent.min_hi)
        } else {
            (parent.min_hi, a.min(b))
        };
        let (max_lo, max_hi) = if keep_max {
            (parent.max_lo, parent.max_hi)
        } else {
            (a.max(b), parent.max_lo)
        };
        ExtremaRanges {
            min_lo,
            min_hi,
            max_lo,
            max_hi,
        }
    };
    (
        side(pattern[0], pattern[1], pinned.x, pinned.w),
        side(pattern[2], pattern[3], pinned.w, pinned.y),
    )
}

/// Unnormalized weights of the nine patterns: each is a product of one β per
/// sub-bridge, and they sum to ρ.
pub fn event_weights(ranges: &ExtremaRanges, pinned: &PinnedBridge) -> Vec<AlternatingBounds> {
    UPDATE_PATTERNS
        .iter()
        .map(|&pattern| {
            let (l, r) = child_ranges(ranges, pinned, pattern);
            beta_unchecked(&l, pinned.left()) * beta_unchecked(&r, pinned.right())
        })
        .collect()
}

/// Parent ranges widened to admit the midpoint: the maximum range starts no
/// lower than `w`, the minimum range ends no higher than `w`.
pub fn tighten_around(ranges: &ExtremaRanges, w: f64) -> ExtremaRanges {
    ExtremaRanges {
        min_lo: ranges.min_lo,
        min_hi: ranges.min_hi.min(w),
        max_lo: ranges.max_lo.max(w),
        max_hi: ranges.max_hi,
    }
}

/// Draw the update pattern for a bisection.
///
/// `ranges` must already be tightened around `pinned.w`.
pub fn sample_e<R: Rng + ?Sized>(
    ranges: &ExtremaRanges,
    pinned: &PinnedBridge,
    rng: &mut R,
    max_terms: usize,
) -> Result<EventE> {
    let mut weights = event_weights(ranges, pinned);
    let u: f64 = rng.random();
    let i = sample_index(&mut weights, u, max_terms)?;
    EventE::from_index(i as u8 + 1)
}

/// Weights `[outer, inner]` for splitting an extremum range at `at`.
fn split_weights(layer: &IntersectionLayer, which: Extremum, at: f64) -> [AlternatingBounds; 2] {
    let r = layer.ranges();
    let spec = layer.spec();
    let (outer, inner) = match which {
        Extremum::Max => (
            ExtremaRanges { max_lo: at, ..r },
            ExtremaRanges { max_hi: at, ..r },
        ),
        Extremum::Min => (
            ExtremaRanges { min_hi: at, ..r },
            ExtremaRanges { min_lo: at, ..r },
        ),
    };
    [beta_unchecked(&outer, spec), beta_unchecked(&inner, spec)]
}

/// Decide whether the chosen extremum lies in the outer part of its range
/// when the range is cut at `at` (above `at` for the maximum, below for the
/// minimum).
pub fn split_bernoulli<R: Rng + ?Sized>(
    layer: &IntersectionLayer,
    which: Extremum,
    at: f64,
    rng: &mut R,
    max_terms: usize,
) -> Result<bool> {
    let range = layer.range(which);
    if !(range.lo < at && at < range.hi) {
        return Err(Error::domain(format!(
            "split point {at} not inside [{}, {}]",
            range.lo, range.hi
        )));
    }
    let mut weights = split_weights(layer, which, at);
    let u: f64 = rng.random();
    Ok(sample_index(&mut weights, u, max_terms)? == 0)
}

/// Decide whether the extremum lies in the outer half of its range.
///
/// A range already narrower than machine precision is resolved to its lower
/// half without drawing.
pub fn refine_bernoulli<R: Rng + ?Sized>(
    layer: &IntersectionLayer,
    which: Extremum,
    rng: &mut R,
    max_terms: usize,
) -> Result<bool> {
    let range = layer.range(which);
    let mid = range.midpoint();
    if !(range.lo < mid && mid < range.hi) || range.width() <= f64::EPSILON * range.hi.abs().max(1.0) {
        return Ok(which == Extremum::Min);
    }
    split_bernoulli(layer, which, mid, rng, max_terms)
}

/// Increasing offsets `0 = a_0 < a_1 < ...`, given by an explicit prefix and
/// continued by doubling.
#[derive(Debug, Clone, PartialEq)]
pub struct OffsetSequence {
    prefix: Vec<f64>,
}

impl OffsetSequence {
    pub fn new(prefix: Vec<f64>) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::domain("offset sequence needs at least one step"));
        }
        let mut prev = 0.0;
        for &a in &prefix {
            if !(a > prev) || !a.is_finite() {
                return Err(Error::domain("offsets must be strictly increasing and positive"));
            }
            prev = a;
        }
        Ok(Self { prefix })
    }

    /// `a_i · scale` for `i = 1..=4`, then doubling.
    pub fn linear(scale: f64) -> Self {
        Self {
            prefix: (1..=4).map(|i| i as f64 * scale).collect(),
        }
    }

    /// `a_i` for `i ≥ 0`.
    pub fn offset(&self, i: usize) -> f64 {
        if i == 0 {
            return 0.0;
        }
        let k = self.prefix.len();
        if i <= k {
            self.prefix[i - 1]
        } else {
            self.prefix[k - 1] * 2f64.powi((i - k) as i32)
        }
    }
}

/// Cell grid for the initial layer of a bridge.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrid {
    pub min_offsets: OffsetSequence,
    pub max_offsets: OffsetSequence,
}

impl LayerGrid {
    /// `a_i = b_i = i·√l` for `i ≤ 4`, doubling afterwards.
    pub fn default_for(duration: f64) -> Self {
        let s = OffsetSequence::linear(duration.sqrt());
        Self {
            min_offsets: s.clone(),
            max_offsets: s,
        }
    }
}

/// Cell `(i, j)` of the initial-layer grid and the ranges it stands for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCell {
    pub i: usize,
    pub j: usize,
    pub ranges: ExtremaRanges,
}

fn cell_ranges(spec: &BridgeSpec, grid: &LayerGrid, i: usize, j: usize) -> ExtremaRanges {
    let lo_end = spec.start.min(spec.end);
    let hi_end = spec.start.max(spec.end);
    ExtremaRanges {
        min_lo: lo_end - grid.min_offsets.offset(i),
        min_hi: lo_end - grid.min_offsets.offset(i - 1),
        max_lo: hi_end + grid.max_offsets.offset(j - 1),
        max_hi: hi_end + grid.max_offsets.offset(j),
    }
}

/// Cells in shell order: all `(i, j)` with `max(i, j) = s` for `s = 1, 2, ...`.
fn shell_cells(max_shell: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=max_shell).flat_map(|s| {
        let row = (1..=s).map(move |j| (s, j));
        let col = (1..s).map(move |i| (i, s));
        row.chain(col)
    })
}

const MAX_GRID_SHELLS: usize = 40;

/// Exact draw of the grid cell holding the bridge's (minimum, maximum).
pub fn sample_initial_layers<R: Rng + ?Sized>(
    spec: BridgeSpec,
    grid: &LayerGrid,
    rng: &mut R,
    max_terms: usize,
) -> Result<InitialCell> {
    let u: f64 = rng.random();
    let mut cells = Vec::new();
    let mut weights: Vec<AlternatingBounds> = Vec::new();
    'cells: for (i, j) in shell_cells(MAX_GRID_SHELLS) {
        let ranges = cell_ranges(&spec, grid, i, j);
        cells.push((i, j, ranges));
        weights.push(beta_unchecked(&ranges, spec));
        // decide u < P[I ≤ current cell]
        for n in 1..=max_terms {
            let cum = weights
                .iter_mut()
                .fold(Interval::point(0.0), |acc, w| acc + w.bracket(n));
            if u < cum.lo {
                let (i, j, ranges) = cells[cells.len() - 1];
                return Ok(InitialCell { i, j, ranges });
            }
            if u > cum.hi {
                continue 'cells;
            }
            if cum.width() == 0.0 {
                break;
            }
        }
        return Err(Error::Undecided { max_terms });
    }
    Err(Error::Undecided { max_terms })
}
