use serde::{Deserialize, Serialize};

/// Streamline compression settings. Gaps are fractions of the frame's
/// position range so the rule is scale free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompressionParams {
    pub gap_frac: f64,
    pub kappa: f64,
    pub min_gap_frac: f64,
}

impl Default for CompressionParams {
    fn default() -> Self {
        CompressionParams { gap_frac: 0.15, kappa: 0.5, min_gap_frac: 0.1 }
    }
}

impl CompressionParams {
    /// Compress one frame using thresholds scaled by its range.
    pub fn apply(&self, positions: &[f64]) -> Vec<f64> {
        let range = frame_range(positions);
        if range == 0.0 {
            return positions.to_vec();
        }
        compress_streamlines(positions, self.gap_frac * range, self.kappa, self.min_gap_frac * range)
    }
}

fn frame_range(positions: &[f64]) -> f64 {
    let lo = positions.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = positions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if positions.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Split sorted-position indices into runs separated by gaps over `gap_thresh`.
pub fn clusters(positions: &[f64], gap_thresh: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..positions.len()).collect();
    order.sort_by(|&a, &b| positions[a].total_cmp(&positions[b]).then(a.cmp(&b)));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for i in order {
        match out.last_mut() {
            Some(run) if positions[i] - positions[*run.last().unwrap()] <= gap_thresh => run.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Pull each cluster toward its centroid by `kappa`, then widen any gap
/// between neighbouring cluster extents that is under `min_gap`. Gaps never
/// shrink, and the push is re-centred so the clusters' mean shift is zero.
pub fn compress_streamlines(positions: &[f64], gap_thresh: f64, kappa: f64, min_gap: f64) -> Vec<f64> {
    let groups = clusters(positions, gap_thresh);
    let mut out = positions.to_vec();
    let mut extents = Vec::with_capacity(groups.len());
    for g in &groups {
        let base = positions[g[0]];
        let centroid = base + g.iter().map(|&i| positions[i] - base).sum::<f64>() / g.len() as f64;
        for &i in g {
            out[i] = centroid + kappa * (positions[i] - centroid);
        }
        extents.push((out[g[0]], out[*g.last().unwrap()]));
    }

    let mut shifts = vec![0.0; groups.len()];
    for k in 1..groups.len() {
        let shortfall = min_gap - (extents[k].0 - extents[k - 1].1);
        shifts[k] = shifts[k - 1] + shortfall.max(0.0);
    }
    let mean_shift = shifts.iter().sum::<f64>() / shifts.len().max(1) as f64;
    for (g, s) in groups.iter().zip(&shifts) {
        let s = s - mean_shift;
        if s != 0.0 {
            for &i in g {
                out[i] += s;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_positions_are_unchanged() {
        assert_eq!(compress_streamlines(&[2.5; 4], 0.3, 0.5, 0.5), vec![2.5; 4]);
        assert_eq!(CompressionParams::default().apply(&[1.0, 1.0]), vec![1.0, 1.0]);
    }

    #[test]
    fn hand_applied_example() {
        let out = compress_streamlines(&[0.0, 0.1, 0.9], 0.3, 0.5, 0.5);
        let want = [0.025, 0.075, 0.9];
        for (a, b) in out.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{out:?}");
        }
    }

    #[test]
    fn close_clusters_move_apart_symmetrically() {
        // Clusters {0, 0.2} and {0.5, 0.7} shrink to [0.05, 0.15] and
        // [0.55, 0.65], 0.4 apart; each then moves 0.3 outward.
        let out = compress_streamlines(&[0.0, 0.2, 0.5, 0.7], 0.25, 0.5, 1.0);
        let want = [-0.25, -0.15, 0.85, 0.95];
        for (a, b) in out.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{out:?}");
        }
        assert!((out[2] - out[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unsorted_input_keeps_its_order() {
        let out = compress_streamlines(&[0.9, 0.0, 0.1], 0.3, 0.5, 0.5);
        assert!((out[0] - 0.9).abs() < 1e-15);
        assert!((out[1] - 0.025).abs() < 1e-15);
        assert!((out[2] - 0.075).abs() < 1e-15);
    }
}
