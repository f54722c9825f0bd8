use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use super::axis::SpringAxis;
use super::compress::CompressionParams;
use super::LayoutError;
use crate::projection::ProjectionFrame;

/// A concept's drawn extent within one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub slice: usize,
    pub x0: f64,
    pub x1: f64,
    pub y: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowLine {
    pub token: String,
    /// Ordered by slice index.
    pub segments: Vec<Segment>,
    /// Slices without a segment.
    pub gaps: Vec<usize>,
}

impl FlowLine {
    /// The segment with the largest width; the earliest wins ties.
    pub fn widest_segment(&self) -> Option<&Segment> {
        self.segments.iter().fold(None, |best: Option<&Segment>, s| match best {
            Some(b) if b.width >= s.width => Some(b),
            _ => Some(s),
        })
    }

    /// Bezier control points joining each pair of segments in adjacent
    /// slices. Controls sit at the horizontal midpoint, so x is monotone.
    pub fn connectors(&self) -> Vec<[(f64, f64); 4]> {
        self.segments
            .windows(2)
            .filter(|w| w[1].slice == w[0].slice + 1)
            .map(|w| connector((w[0].x1, w[0].y), (w[1].x0, w[1].y)))
            .collect()
    }
}

pub fn connector(from: (f64, f64), to: (f64, f64)) -> [(f64, f64); 4] {
    let mid = 0.5 * (from.0 + to.0);
    [from, (mid, from.1), (mid, to.1), to]
}

/// Vertical mapping and stroke settings for flow lines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowParams {
    pub margin: f64,
    pub w_floor: f64,
    pub w_span: f64,
    /// Minimum slice document frequency for a segment.
    pub presence_min: u64,
    /// Fraction of the slice width left empty on each side of a segment.
    pub inset: f64,
    pub compression: CompressionParams,
}

impl Default for FlowParams {
    fn default() -> Self {
        FlowParams {
            margin: 20.0,
            w_floor: 1.0,
            w_span: 6.0,
            presence_min: 2,
            inset: 0.25,
            compression: CompressionParams::default(),
        }
    }
}

/// Stroke width for a slice frequency.
pub fn stroke_width(freq: u64, max_freq: u64, w_floor: f64, w_span: f64) -> f64 {
    if max_freq == 0 {
        return w_floor;
    }
    w_floor + w_span * (freq as f64 / max_freq as f64).sqrt()
}

/// `freqs[t][i]` is the document frequency of `frames[t].tokens[i]` in
/// slice `t`. Lines are returned in token order.
pub fn build_flowlines(
    frames: &[ProjectionFrame],
    freqs: &[Vec<u64>],
    axis: &SpringAxis,
    canvas_h: f64,
    params: &FlowParams,
) -> Result<Vec<FlowLine>, LayoutError> {
    if frames.is_empty() {
        return Err(LayoutError::NoFrames);
    }
    if frames.len() != freqs.len() || frames.len() != axis.slices.len() {
        return Err(LayoutError::ShapeMismatch(format!(
            "{} frames, {} frequency rows, {} axis slices",
            frames.len(),
            freqs.len(),
            axis.slices.len()
        )));
    }
    for (t, (f, q)) in frames.iter().zip(freqs).enumerate() {
        if f.tokens.len() != q.len() || f.positions.len() != q.len() {
            return Err(LayoutError::ShapeMismatch(format!("frame {t}: frequency row does not match its tokens")));
        }
    }

    let compressed: Vec<Vec<f64>> = frames.par_iter().map(|f| params.compression.apply(&f.positions)).collect();
    let lo = compressed.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let hi = compressed.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = canvas_h - 2.0 * params.margin;
    let to_canvas = |p: f64| -> f64 {
        if hi > lo {
            params.margin + (p - lo) / (hi - lo) * span
        } else {
            0.5 * canvas_h
        }
    };
    let max_freq = freqs.iter().flatten().copied().max().unwrap_or(0);

    let mut lines: BTreeMap<&str, Vec<Segment>> = BTreeMap::new();
    for (t, frame) in frames.iter().enumerate() {
        let a = &axis.slices[t];
        let pad = params.inset * a.width();
        for (i, token) in frame.tokens.iter().enumerate() {
            let segs = lines.entry(token.as_str()).or_default();
            if freqs[t][i] >= params.presence_min {
                segs.push(Segment {
                    slice: t,
                    x0: a.x0 + pad,
                    x1: a.x1 - pad,
                    y: to_canvas(compressed[t][i]),
                    width: stroke_width(freqs[t][i], max_freq, params.w_floor, params.w_span),
                });
            }
        }
    }
    Ok(lines
        .into_iter()
        .map(|(token, segments)| {
            let present: Vec<usize> = segments.iter().map(|s| s.slice).collect();
            let gaps = (0..frames.len()).filter(|t| !present.contains(t)).collect();
            FlowLine { token: token.to_string(), segments, gaps }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layout::axis::AxisSlice;
    use chrono::{TimeZone, Utc};

    fn axis(n: usize) -> SpringAxis {
        let t = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap();
        SpringAxis {
            slices: (0..n)
                .map(|k| AxisSlice { x0: 100.0 * k as f64, x1: 100.0 * (k + 1) as f64, coil_density: 0.0, start: t, end: t })
                .collect(),
        }
    }

    fn frame(tokens: &[&str], positions: &[f64]) -> ProjectionFrame {
        ProjectionFrame {
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            positions: positions.to_vec(),
            prev_positions: BTreeMap::new(),
            mutation_flags: vec![false; tokens.len()],
            alpha_proj: 1.0,
            seed: 0,
        }
    }

    #[test]
    fn width_formula() {
        assert_eq!(stroke_width(1, 4, 1.0, 6.0), 4.0);
        assert_eq!(stroke_width(4, 4, 1.0, 6.0), 7.0);
    }

    #[test]
    fn constant_position_is_horizontal() {
        let frames = vec![frame(&["a"], &[3.0]), frame(&["a"], &[3.0])];
        let lines = build_flowlines(&frames, &[vec![5], vec![5]], &axis(2), 200.0, &FlowParams::default()).unwrap();
        let ys: Vec<f64> = lines[0].segments.iter().map(|s| s.y).collect();
        assert_eq!(ys, vec![100.0, 100.0]);
        assert_eq!(lines[0].segments[0].x0, 25.0);
        assert_eq!(lines[0].segments[0].x1, 75.0);
        assert_eq!(lines[0].connectors().len(), 1);
    }

    #[test]
    fn absent_middle_slice_leaves_gap() {
        let frames = vec![frame(&["a", "b"], &[0.0, 1.0]), frame(&["b"], &[1.0]), frame(&["a", "b"], &[0.0, 1.0])];
        let freqs = vec![vec![3, 3], vec![3], vec![3, 3]];
        let lines = build_flowlines(&frames, &freqs, &axis(3), 200.0, &FlowParams::default()).unwrap();
        let a = &lines[0];
        assert_eq!(a.token, "a");
        assert_eq!(a.segments.iter().map(|s| s.slice).collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(a.gaps, vec![1]);
        assert!(a.connectors().is_empty());
    }

    #[test]
    fn single_occurrence_is_not_drawn() {
        let frames = vec![frame(&["a", "b"], &[0.0, 1.0])];
        let lines = build_flowlines(&frames, &[vec![1, 2]], &axis(1), 200.0, &FlowParams::default()).unwrap();
        assert!(lines[0].segments.is_empty());
        assert_eq!(lines[1].segments.len(), 1);
    }

    #[test]
    fn one_map_for_all_frames() {
        let params = FlowParams { compression: CompressionParams { kappa: 1.0, ..Default::default() }, ..Default::default() };
        let frames = vec![frame(&["a", "b"], &[0.0, 1.0]), frame(&["a", "b"], &[2.0, 4.0])];
        let lines = build_flowlines(&frames, &[vec![2, 2], vec![2, 2]], &axis(2), 220.0, &params).unwrap();
        let a: Vec<f64> = lines[0].segments.iter().map(|s| s.y).collect();
        let b: Vec<f64> = lines[1].segments.iter().map(|s| s.y).collect();
        assert_eq!(a, vec![20.0, 110.0]);
        assert_eq!(b, vec![65.0, 200.0]);
    }

    #[test]
    fn mismatched_inputs() {
        let frames = vec![frame(&["a"], &[0.0])];
        assert!(build_flowlines(&frames, &[vec![1, 2]], &axis(1), 100.0, &FlowParams::default()).is_err());
        assert!(build_flowlines(&[], &[], &axis(0), 100.0, &FlowParams::default()).is_err());
    }
}
