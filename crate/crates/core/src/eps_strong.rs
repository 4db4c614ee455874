//! The generation loop: bisect every layer, refine the halves, repeat.
//!
//! After generation `n` the path on `[0, T]` is covered by `2ⁿ` layers of
//! equal duration, and the piecewise-constant processes taking each layer's
//! outer maximum and outer minimum sandwich the path.

use crate::alt_series::BridgeSpec;
use crate::error::{Error, Result};
use crate::layer_events::{sample_initial_layers, LayerGrid};
use crate::layers::{bisect, refine_to_width, IntersectionLayer, LayerPartition};
use crate::rng::StreamKey;

/// Width target for the halves of a layer of duration `parent_duration`.
pub fn width_target(parent_duration: f64) -> f64 {
    (parent_duration / 2.0).sqrt()
}

/// Bisect one layer and refine both halves to the width target. `key` names
/// the stream for this layer in this generation.
pub fn advance_layer(
    layer: &IntersectionLayer,
    key: &StreamKey,
    max_terms: usize,
) -> Result<(IntersectionLayer, IntersectionLayer, f64)> {
    let mut rng = key.rng();
    let b = bisect(layer, &mut rng, max_terms)?;
    let target = width_target(layer.duration());
    let left = refine_to_width(b.left, target, &mut rng, max_terms)?;
    let right = refine_to_width(b.right, target, &mut rng, max_terms)?;
    Ok((left, right, b.midpoint))
}

/// Dyadic position of a layer inside `[origin, origin + horizon]`.
pub fn dyadic_index(layer: &IntersectionLayer, origin: f64) -> u64 {
    ((layer.s - origin) / layer.duration()).round() as u64
}

/// One generation over an ordered list of layers. Layer streams are keyed by
/// `(generation, dyadic index)` under `key`, so the outcome for a layer does
/// not depend on which other layers are present.
pub fn advance_generation(
    layers: &[IntersectionLayer],
    origin: f64,
    generation: usize,
    key: &StreamKey,
    max_terms: usize,
) -> Result<Vec<IntersectionLayer>> {
    let gen_key = key.child(generation as u64);
    let mut out = Vec::with_capacity(2 * layers.len());
    for layer in layers {
        let index = dyadic_index(layer, origin);
        let (left, right, _) = advance_layer(layer, &gen_key.child(index), max_terms)
            .map_err(|e| tag(e, generation, index as usize))?;
        out.push(left);
        out.push(right);
    }
    Ok(out)
}

fn tag(e: Error, generation: usize, layer: usize) -> Error {
    if e.is_undecided() {
        Error::UndecidedAt { generation, layer }
    } else {
        e
    }
}

/// One constant piece of the dominating processes on `(u_lo, u_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominatingPiece {
    pub u_lo: f64,
    pub u_hi: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Upper and lower piecewise-constant processes of one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct DominatingPaths {
    pub generation: usize,
    pub pieces: Vec<DominatingPiece>,
}

impl DominatingPaths {
    pub fn from_partition(p: &LayerPartition) -> Self {
        Self {
            generation: p.generation,
            pieces: p
                .layers
                .iter()
                .map(|l| DominatingPiece {
                    u_lo: l.s,
                    u_hi: l.t,
                    lower: l.min.lo,
                    upper: l.max.hi,
                })
                .collect(),
        }
    }

    /// `(lower, upper)` at time `u`, taking the piece whose half-open span
    /// `(u_lo, u_hi]` holds `u`; the first piece also covers its left end.
    pub fn at(&self, u: f64) -> Option<(f64, f64)> {
        let first = self.pieces.first()?;
        if u == first.u_lo {
            return Some((first.lower, first.upper));
        }
        self.pieces
            .iter()
            .find(|p| p.u_lo < u && u <= p.u_hi)
            .map(|p| (p.lower, p.upper))
    }

    /// CSV rows `generation,u_lo,u_hi,lower,upper`.
    pub fn csv_rows(&self) -> String {
        self.pieces
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{}\n",
                    self.generation, p.u_lo, p.u_hi, p.lower, p.upper
                )
            })
            .collect()
    }
}

pub const DOMINATING_CSV_HEADER: &str = "generation,u_lo,u_hi,lower,upper";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMetrics {
    pub sup_gap: f64,
    pub l1_gap: f64,
}

pub fn gap_metrics(dom: &DominatingPaths) -> GapMetrics {
    let mut sup_gap: f64 = 0.0;
    let mut l1_gap = 0.0;
    for p in &dom.pieces {
        let g = p.upper - p.lower;
        sup_gap = sup_gap.max(g);
        l1_gap += g * (p.u_hi - p.u_lo);
    }
    GapMetrics { sup_gap, l1_gap }
}

/// Output of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct EpsRun {
    pub partition: LayerPartition,
    /// Dominating paths for generations `0..=n`; empty unless requested.
    pub trace: Vec<DominatingPaths>,
    /// Every simulated `(time, value)` point, endpoints included.
    pub skeleton: Vec<(f64, f64)>,
}

/// Initial layer for a bridge from `x0` to `x1` over `[0, horizon]`, drawn
/// from the default cell grid.
pub fn initial_layer(
    x0: f64,
    x1: f64,
    horizon: f64,
    key: &StreamKey,
    max_terms: usize,
) -> Result<IntersectionLayer> {
    let spec = BridgeSpec::new(horizon, x0, x1)?;
    let mut rng = key.rng();
    let cell = sample_initial_layers(spec, &LayerGrid::default_for(horizon), &mut rng, max_terms)?;
    IntersectionLayer::new(
        0.0,
        horizon,
        x0,
        x1,
        cell.ranges.min_range(),
        cell.ranges.max_range(),
    )
}

/// Run `n` generations for a bridge from `x0` to `x1` over `[0, horizon]`.
///
/// Stream layout under `key`: child 0 draws the initial layer, child
/// `g + 1` holds generation `g`'s per-layer streams.
pub fn run(
    x0: f64,
    x1: f64,
    n: usize,
    key: &StreamKey,
    horizon: f64,
    max_terms: usize,
    keep_trace: bool,
) -> Result<EpsRun> {
    let first = initial_layer(x0, x1, horizon, &key.child(0), max_terms)?;
    run_from(first, n, &key.child(1), max_terms, keep_trace)
}

/// Run `n` generations starting from a given layer.
pub fn run_from(
    first: IntersectionLayer,
    n: usize,
    key: &StreamKey,
    max_terms: usize,
    keep_trace: bool,
) -> Result<EpsRun> {
    let origin = first.s;
    let mut partition = LayerPartition::single(first);
    let mut trace = Vec::new();
    if keep_trace {
        trace.push(DominatingPaths::from_partition(&partition));
    }
    for g in 1..=n {
        partition.layers = advance_generation(&partition.layers, origin, g, key, max_terms)?;
        partition.generation = g;
        if keep_trace {
            trace.push(DominatingPaths::from_partition(&partition));
        }
    }
    let mut skeleton: Vec<(f64, f64)> = vec![(first.s, first.xs)];
    skeleton.extend(partition.layers.iter().map(|l| (l.t, l.xt)));
    Ok(EpsRun {
        partition,
        trace,
        skeleton,
    })
}
