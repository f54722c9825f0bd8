use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

use super::flow::FlowLine;

/// Axis-aligned box; `(x, y)` is the minimum corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn overlap_area(&self, o: &Rect) -> f64 {
        let dx = (self.x + self.w).min(o.x + o.w) - self.x.max(o.x);
        let dy = (self.y + self.h).min(o.y + o.h) - self.y.max(o.y);
        if dx > 0.0 && dy > 0.0 {
            dx * dy
        } else {
            0.0
        }
    }

    pub fn within(&self, w: f64, h: f64) -> bool {
        self.x >= 0.0 && self.y >= 0.0 && self.x + self.w <= w && self.y + self.h <= h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelPlacement {
    pub token: String,
    /// Slice of the segment the label is attached to.
    pub slice: usize,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

impl LabelPlacement {
    pub fn rect(&self) -> Rect {
        Rect { x: self.x, y: self.y, w: self.w, h: self.h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelParams {
    pub grid_dx: f64,
    pub grid_dy: f64,
    /// Candidate offsets run from `-radius` to `radius` grid steps per axis.
    pub radius: usize,
    pub max_labels: usize,
    pub char_width: f64,
    pub height: f64,
    pub line_penalty: f64,
}

impl Default for LabelParams {
    fn default() -> Self {
        LabelParams {
            grid_dx: 4.0,
            grid_dy: 4.0,
            radius: 6,
            max_labels: 40,
            char_width: 7.0,
            height: 12.0,
            line_penalty: 10.0,
        }
    }
}

impl LabelParams {
    pub fn label_size(&self, token: &str) -> (f64, f64) {
        (self.char_width * token.chars().count() as f64 + 4.0, self.height)
    }
}

fn segment_rects(line: &FlowLine) -> impl Iterator<Item = Rect> + '_ {
    line.segments.iter().map(|s| Rect { x: s.x0, y: s.y - 0.5 * s.width, w: s.x1 - s.x0, h: s.width })
}

/// Greedy grid-search placement.
///
/// Concepts go in descending importance (token order breaks ties). Each
/// candidate offset around the centre of the line's widest segment scores
/// `line_penalty * (area over other lines) + |offset|`; candidates that
/// overlap an already placed label or leave the canvas are inadmissible.
/// The lowest score wins, then the smaller offset, then the lower
/// row-major grid index. A concept with no admissible candidate is skipped.
pub fn place_labels(
    lines: &[FlowLine],
    importance: &BTreeMap<String, f64>,
    canvas: (f64, f64),
    params: &LabelParams,
) -> Vec<LabelPlacement> {
    let mut order: Vec<usize> = (0..lines.len()).filter(|&i| !lines[i].segments.is_empty()).collect();
    let weight = |i: usize| importance.get(&lines[i].token).copied().unwrap_or(0.0);
    order.sort_by(|&a, &b| weight(b).total_cmp(&weight(a)).then_with(|| lines[a].token.cmp(&lines[b].token)));

    let r = params.radius as i64;
    let offsets: Vec<(f64, f64)> = (-r..=r)
        .flat_map(|j| (-r..=r).map(move |i| (i as f64 * params.grid_dx, j as f64 * params.grid_dy)))
        .collect();

    let mut placed: Vec<LabelPlacement> = Vec::new();
    for i in order {
        if placed.len() >= params.max_labels {
            break;
        }
        let line = &lines[i];
        let anchor = line.widest_segment().expect("lines without segments are filtered");
        let (w, h) = params.label_size(&line.token);
        let cx = 0.5 * (anchor.x0 + anchor.x1);
        let mut best: Option<(f64, f64, usize, Rect)> = None;
        for (k, &(ox, oy)) in offsets.iter().enumerate() {
            let rect = Rect { x: cx + ox - 0.5 * w, y: anchor.y + oy - 0.5 * h, w, h };
            if !rect.within(canvas.0, canvas.1) || placed.iter().any(|p| p.rect().overlap_area(&rect) > 0.0) {
                continue;
            }
            let covered: f64 = lines
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .flat_map(|(_, l)| segment_rects(l))
                .map(|s| s.overlap_area(&rect))
                .sum();
            let dist = ox.hypot(oy);
            let cand = (params.line_penalty * covered + dist, dist, k, rect);
            let better = match &best {
                None => true,
                Some(b) => cand.0.total_cmp(&b.0).then(cand.1.total_cmp(&b.1)).then(cand.2.cmp(&b.2)) == Ordering::Less,
            };
            if better {
                best = Some(cand);
            }
        }
        match best {
            Some((score, _, _, rect)) => placed.push(LabelPlacement {
                token: line.token.clone(),
                slice: anchor.slice,
                x: rect.x,
                y: rect.y,
                w: rect.w,
                h: rect.h,
                score,
            }),
            None => log::debug!("no free spot for label {:?}", line.token),
        }
    }
    placed
}
