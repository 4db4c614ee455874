//! Intersection layers: a bridge's endpoints plus ranges known to contain its
//! minimum and maximum, and the two ways of sharpening them.

use crate::alt_series::{BridgeSpec, Interval};
use crate::bridge_sampling::sample_midpoint;
use crate::error::{Error, Result};
use crate::layer_events::{
    child_ranges, refine_bernoulli, sample_e, split_bernoulli, tighten_around, EventE,
    ExtremaRanges, PinnedBridge, UPDATE_PATTERNS,
};
use rand::Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Extremum {
    Min,
    Max,
}

/// Endpoints of a bridge on `[s, t]` with ranges for its extrema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntersectionLayer {
    pub s: f64,
    pub t: f64,
    pub xs: f64,
    pub xt: f64,
    pub min: Interval,
    pub max: Interval,
}

impl IntersectionLayer {
    pub fn new(s: f64, t: f64, xs: f64, xt: f64, min: Interval, max: Interval) -> Result<Self> {
        let layer = Self {
            s,
            t,
            xs,
            xt,
            min,
            max,
        };
        layer.validate()?;
        Ok(layer)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            self.s, self.t, self.xs, self.xt, self.min.lo, self.min.hi, self.max.lo, self.max.hi,
        ];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("layer fields must be finite"));
        }
        if !(self.s < self.t) {
            return Err(Error::domain(format!(
                "layer needs s < t, got [{}, {}]",
                self.s, self.t
            )));
        }
        if self.min.lo > self.min.hi || self.max.lo > self.max.hi {
            return Err(Error::domain("inverted extremum interval"));
        }
        if self.min.hi > self.xs.min(self.xt) || self.max.lo < self.xs.max(self.xt) {
            return Err(Error::domain(format!(
                "extremum ranges [{}, {}] / [{}, {}] do not enclose endpoints {} and {}",
                self.min.lo, self.min.hi, self.max.lo, self.max.hi, self.xs, self.xt
            )));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.t - self.s
    }

    pub fn spec(&self) -> BridgeSpec {
        BridgeSpec {
            duration: self.duration(),
            start: self.xs,
            end: self.xt,
        }
    }

    pub fn ranges(&self) -> ExtremaRanges {
        ExtremaRanges {
            min_lo: self.min.lo,
            min_hi: self.min.hi,
            max_lo: self.max.lo,
            max_hi: self.max.hi,
        }
    }

    pub fn range(&self, which: Extremum) -> Interval {
        match which {
            Extremum::Min => self.min,
            Extremum::Max => self.max,
        }
    }

    fn with_range(mut self, which: Extremum, iv: Interval) -> Self {
        match which {
            Extremum::Min => self.min = iv,
            Extremum::Max => self.max = iv,
        }
        self
    }

    /// Largest extremum-range width.
    pub fn max_width(&self) -> f64 {
        self.min.width().max(self.max.width())
    }
}

impl fmt::Display for IntersectionLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{},{},{},{},{}",
            self.s, self.t, self.xs, self.xt, self.min.lo, self.min.hi, self.max.lo, self.max.hi
        )
    }
}

impl FromStr for IntersectionLayer {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::domain(format!("bad layer field: {e}")))?;
        if v.len() != 8 {
            return Err(Error::domain(format!(
                "layer line needs 8 fields, got {}",
                v.len()
            )));
        }
        Self::new(
            v[0],
            v[1],
            v[2],
            v[3],
            Interval::new(v[4], v[5]),
            Interval::new(v[6], v[7]),
        )
    }
}

/// Halve the chosen extremum range, keeping the half that holds the extremum.
pub fn refine<R: Rng + ?Sized>(
    layer: &IntersectionLayer,
    which: Extremum,
    rng: &mut R,
    max_terms: usize,
) -> Result<IntersectionLayer> {
    let range = layer.range(which);
    let outer = refine_bernoulli(layer, which, rng, max_terms)?;
    let half = match (which, outer) {
        (Extremum::Max, true) | (Extremum::Min, false) => range.upper_half(),
        (Extremum::Max, false) | (Extremum::Min, true) => range.lower_half(),
    };
    Ok(layer.with_range(which, half))
}

/// Cut the chosen extremum range at `at`, keeping the side that holds the
/// extremum.
pub fn split<R: Rng + ?Sized>(
    layer: &IntersectionLayer,
    which: Extremum,
    at: f64,
    rng: &mut R,
    max_terms: usize,
) -> Result<IntersectionLayer> {
    let range = layer.range(which);
    let outer = split_bernoulli(layer, which, at, rng, max_terms)?;
    let part = match (which, outer) {
        (Extremum::Max, true) | (Extremum::Min, false) => Interval::new(at, range.hi),
        (Extremum::Max, false) | (Extremum::Min, true) => Interval::new(range.lo, at),
    };
    Ok(layer.with_range(which, part))
}

/// Refine, alternating maximum then minimum, until both widths are at most
/// `target`.
pub fn refine_to_width<R: Rng + ?Sized>(
    mut layer: IntersectionLayer,
    target: f64,
    rng: &mut R,
    max_terms: usize,
) -> Result<IntersectionLayer> {
    while layer.max.width() > target || layer.min.width() > target {
        if layer.max.width() > target {
            layer = refine(&layer, Extremum::Max, rng, max_terms)?;
        }
        if layer.min.width() > target {
            layer = refine(&layer, Extremum::Min, rng, max_terms)?;
        }
    }
    Ok(layer)
}

/// Result of a bisection, with the sampled midpoint and update pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub left: IntersectionLayer,
    pub right: IntersectionLayer,
    pub midpoint: f64,
    pub event: EventE,
}

/// Split a layer at `t* = (s + t)/2`: draw the path value there, then the
/// extremum ranges of both halves.
pub fn bisect<R: Rng + ?Sized>(
    layer: &IntersectionLayer,
    rng: &mut R,
    max_terms: usize,
) -> Result<Bisection> {
    let half = 0.5 * layer.duration();
    let t_mid = layer.s + half;
    let ranges = layer.ranges();
    let w = sample_midpoint(&ranges, half, half, layer.xs, layer.xt, rng, max_terms)?;
    let pinned = PinnedBridge {
        q: half,
        r: half,
        x: layer.xs,
        w,
        y: layer.xt,
    };
    let tightened = tighten_around(&ranges, w);
    let event = sample_e(&tightened, &pinned, rng, max_terms)?;
    let (lr, rr) = child_ranges(&tightened, &pinned, UPDATE_PATTERNS[event.index as usize - 1]);
    let left = IntersectionLayer {
        s: layer.s,
        t: t_mid,
        xs: layer.xs,
        xt: w,
        min: lr.min_range(),
        max: lr.max_range(),
    };
    let right = IntersectionLayer {
        s: t_mid,
        t: layer.t,
        xs: w,
        xt: layer.xt,
        min: rr.min_range(),
        max: rr.max_range(),
    };
    Ok(Bisection {
        left,
        right,
        midpoint: w,
        event,
    })
}

/// Ordered, contiguous layers covering `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPartition {
    pub layers: Vec<IntersectionLayer>,
    pub generation: usize,
}

impl LayerPartition {
    pub fn single(layer: IntersectionLayer) -> Self {
        Self {
            layers: vec![layer],
            generation: 0,
        }
    }

    /// Consecutive layers share endpoint time and value.
    pub fn is_contiguous(&self) -> bool {
        self.layers
            .windows(2)
            .all(|w| w[0].t == w[1].s && w[0].xt == w[1].xs)
    }

    /// One layer per line: `s,t,xs,xt,minLo,minHi,maxLo,maxHi`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for layer in &self.layers {
            out.push_str(&layer.to_string());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str, generation: usize) -> Result<Self> {
        let layers = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<IntersectionLayer>>>()?;
        Ok(Self { layers, generation })
    }
}
