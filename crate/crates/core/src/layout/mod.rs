//! Concept-flow geometry: a spring time axis, one compressed 1-D frame per
//! slice mapped onto a shared vertical scale, variable-width flow lines and
//! greedy label placement.

mod axis;
mod compress;
mod flow;
mod labels;
mod svg;

pub use axis::{slice_width, spring_axis, AxisSlice, SpringAxis};
pub use compress::{clusters, compress_streamlines, CompressionParams};
pub use flow::{build_flowlines, connector, stroke_width, FlowLine, FlowParams, Segment};
pub use labels::{place_labels, LabelParams, LabelPlacement, Rect};
pub use svg::to_svg;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::projection::ProjectionFrame;
use crate::slicing::TimeSlice;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("invalid layout parameter: {0}")]
    InvalidParameter(String),
    #[error("no frames to lay out")]
    NoFrames,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutParams {
    pub w_min: f64,
    pub w_scale: f64,
    pub flow: FlowParams,
    pub labels: LabelParams,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas { w: 1200.0, h: 600.0 }
    }
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            w_min: 40.0,
            w_scale: 20.0,
            flow: FlowParams::default(),
            labels: LabelParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub canvas: Canvas,
    pub axis: Vec<AxisSlice>,
    pub lines: Vec<FlowLine>,
    pub labels: Vec<LabelPlacement>,
}

impl Layout {
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.lines.iter().map(|l| l.token.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

/// Lay out `frames` (one per slice) with `freqs[t][i]` the document
/// frequency of `frames[t].tokens[i]` in slice `t`. Label importance is a
/// concept's largest slice frequency. `canvas` is a minimum size; the
/// width grows to fit the axis.
pub fn build_layout(
    slices: &[TimeSlice],
    frames: &[ProjectionFrame],
    freqs: &[Vec<u64>],
    canvas: Canvas,
    params: &LayoutParams,
) -> Result<Layout, LayoutError> {
    let Canvas { w, h } = canvas;
    let margin = params.flow.margin;
    if !(h > 2.0 * margin && w > 0.0 && margin >= 0.0) {
        return Err(LayoutError::InvalidParameter(format!("canvas {w}x{h} with margin {margin}")));
    }
    let axis = spring_axis(slices, params.w_min, params.w_scale)?.shifted(margin);
    let canvas = Canvas { w: w.max(axis.width() + margin), h };
    let lines = build_flowlines(frames, freqs, &axis, h, &params.flow)?;

    let mut importance: BTreeMap<String, f64> = BTreeMap::new();
    for (f, q) in frames.iter().zip(freqs) {
        for (tok, &n) in f.tokens.iter().zip(q) {
            let e = importance.entry(tok.clone()).or_insert(0.0);
            *e = e.max(n as f64);
        }
    }
    let labels = place_labels(&lines, &importance, (canvas.w, canvas.h), &params.labels);
    Ok(Layout { canvas, axis: axis.slices, lines, labels })
}
