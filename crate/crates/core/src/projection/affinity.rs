use serde::{Deserialize, Serialize};

use super::ProjectionError;
use crate::features::ConceptFeatureMatrix;

/// Floor applied to Q wherever P is positive.
pub const Q_FLOOR: f64 = 1e-12;

const DUPLICATE_JITTER: f64 = 1e-9;
const ENTROPY_TOL: f64 = 1e-12;
const MAX_SEARCH_STEPS: usize = 200;

/// Symmetric joint probabilities over concept pairs, row-major `M × M`
/// with a zero diagonal and total mass 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffinityMatrix {
    m: usize,
    p: Vec<f64>,
    /// Perplexity after clamping to the frame size.
    pub perplexity: f64,
}

impl AffinityMatrix {
    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[i * self.m + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }

    /// Build from explicit values (used for hand-made cases).
    pub fn from_raw(m: usize, p: Vec<f64>, perplexity: f64) -> Self {
        assert_eq!(p.len(), m * m, "affinity matrix must be M x M");
        AffinityMatrix { m, p, perplexity }
    }
}

/// Perplexity actually used for `m` points: at most `(m - 1) / 3`, at least 1.
pub fn clamp_perplexity(perplexity: f64, m: usize) -> f64 {
    let upper = (m.saturating_sub(1)) as f64 / 3.0;
    perplexity.min(upper).max(1.0)
}

pub fn affinities(g: &ConceptFeatureMatrix, perplexity: f64) -> Result<AffinityMatrix, ProjectionError> {
    affinities_from_sq_distances(&g.sq_distances(), g.len(), perplexity)
}

/// Per-point Gaussian conditionals calibrated to `perplexity` by bisection
/// on the precision, symmetrized as `(p_{j|i} + p_{i|j}) / 2M`.
pub fn affinities_from_sq_distances(
    sq: &[f64],
    m: usize,
    perplexity: f64,
) -> Result<AffinityMatrix, ProjectionError> {
    if m < 2 {
        return Err(ProjectionError::DegenerateFrame(m));
    }
    if sq.len() != m * m {
        return Err(ProjectionError::ShapeMismatch { expected: m * m, got: sq.len() });
    }
    if !perplexity.is_finite() || perplexity <= 0.0 {
        return Err(ProjectionError::InvalidParameter(format!("perplexity {perplexity}")));
    }
    let perplexity = clamp_perplexity(perplexity, m);
    let sq = jitter_duplicates(sq, m);
    let target = perplexity.ln();

    let mut cond = vec![0.0; m * m];
    for i in 0..m {
        let row: Vec<f64> = (0..m).filter(|&j| j != i).map(|j| sq[i * m + j]).collect();
        let probs = calibrate_row(&row, target);
        for (j, pr) in (0..m).filter(|&j| j != i).zip(probs) {
            cond[i * m + j] = pr;
        }
    }

    let mut p = vec![0.0; m * m];
    let denom = 2.0 * m as f64;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                p[i * m + j] = (cond[i * m + j] + cond[j * m + i]) / denom;
            }
        }
    }
    let total: f64 = p.iter().sum();
    for v in &mut p {
        *v /= total;
    }
    Ok(AffinityMatrix { m, p, perplexity })
}

/// Separate exact duplicates so every point has a distinct neighbor set.
/// Row `k` of a duplicate group is moved by `k * 1e-9` along one axis.
fn jitter_duplicates(sq: &[f64], m: usize) -> Vec<f64> {
    let mut out = sq.to_vec();
    for i in 0..m {
        for j in (i + 1)..m {
            if out[i * m + j] == 0.0 {
                let shift = DUPLICATE_JITTER * (j - i) as f64;
                out[i * m + j] = shift * shift;
                out[j * m + i] = shift * shift;
            }
        }
    }
    out
}

/// Conditional distribution over `sq` with entropy (nats) `target`.
fn calibrate_row(sq: &[f64], target: f64) -> Vec<f64> {
    let d_min = sq.iter().copied().fold(f64::INFINITY, f64::min);
    let shifted: Vec<f64> = sq.iter().map(|d| d - d_min).collect();
    let eval = |beta: f64| -> (Vec<f64>, f64) {
        let w: Vec<f64> = shifted.iter().map(|d| (-beta * d).exp()).collect();
        let z: f64 = w.iter().sum();
        let mean_d: f64 = w.iter().zip(&shifted).map(|(w, d)| w * d).sum::<f64>() / z;
        let probs = w.iter().map(|w| w / z).collect();
        (probs, z.ln() + beta * mean_d)
    };

    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    let mut beta = 1.0;
    let (mut probs, mut entropy) = eval(beta);
    for _ in 0..MAX_SEARCH_STEPS {
        if (entropy - target).abs() < ENTROPY_TOL {
            break;
        }
        if entropy > target {
            lo = beta;
            beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (beta + hi) };
        } else {
            hi = beta;
            beta = 0.5 * (beta + lo);
        }
        (probs, entropy) = eval(beta);
    }
    probs
}

/// Student-t kernel similarities of 1-D positions, normalized over all
/// ordered pairs `i != j`. Row-major `M × M`, zero diagonal.
pub fn q_matrix(positions: &[f64]) -> Vec<f64> {
    let m = positions.len();
    let mut q = vec![0.0; m * m];
    let mut z = 0.0;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                let d = positions[i] - positions[j];
                let w = 1.0 / (1.0 + d * d);
                q[i * m + j] = w;
                z += w;
            }
        }
    }
    if z > 0.0 {
        for v in &mut q {
            *v /= z;
        }
    }
    q
}

/// `Σ p ln(p / q)` over entries with `p > 0`, with `q` floored at
/// [`Q_FLOOR`].
pub fn kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &q)| p * (p / q.max(Q_FLOOR)).ln())
        .sum()
}
