use serde::{Deserialize, Serialize};

use super::affinity::{kl, q_matrix, AffinityMatrix};

/// Per-concept virtual-point target similarity: 1 for a mutated concept,
/// 0.5 otherwise. `invert` swaps the two values.
pub fn constraint_target(mutated: bool, invert: bool) -> f64 {
    if mutated != invert {
        1.0
    } else {
        0.5
    }
}

/// One anchored concept's constraint entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintTerm {
    pub index: usize,
    pub p_c: f64,
    pub q_c: f64,
}

impl ConstraintTerm {
    pub fn kl(&self) -> f64 {
        self.p_c * (self.p_c / self.q_c).ln()
    }
}

/// Constraint entries for every concept with a previous position; concepts
/// without one are left out of the constraint sum.
pub fn constraint_terms(
    positions: &[f64],
    prev: &[Option<f64>],
    mutation_flags: &[bool],
    invert: bool,
) -> Vec<ConstraintTerm> {
    positions
        .iter()
        .zip(prev)
        .zip(mutation_flags)
        .enumerate()
        .filter_map(|(index, ((&y, &prev), &mutated))| {
            prev.map(|anchor| {
                let d = y - anchor;
                ConstraintTerm {
                    index,
                    p_c: constraint_target(mutated, invert),
                    q_c: 1.0 / (1.0 + d * d),
                }
            })
        })
        .collect()
}

pub fn constraint_kl(terms: &[ConstraintTerm]) -> f64 {
    terms.iter().map(ConstraintTerm::kl).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParts {
    pub kl_main: f64,
    pub kl_constraint: f64,
    pub total: f64,
}

/// Weighted cost `alpha * KL(P||Q) + (1 - alpha) * KL(P_c||Q_c)` over 1-D
/// positions.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    /// `None` when the frame has a single concept (no pairs).
    pub affinity: Option<&'a AffinityMatrix>,
    pub anchors: &'a [Option<f64>],
    /// `P_c` per concept; ignored where there is no anchor.
    pub targets: Vec<f64>,
    pub alpha: f64,
}

impl<'a> Objective<'a> {
    pub fn new(
        affinity: Option<&'a AffinityMatrix>,
        anchors: &'a [Option<f64>],
        mutation_flags: &[bool],
        invert_pc: bool,
        alpha: f64,
    ) -> Self {
        let targets = mutation_flags
            .iter()
            .map(|&m| constraint_target(m, invert_pc))
            .collect();
        Objective { affinity, anchors, targets, alpha }
    }

    /// True when the constraint term carries weight.
    pub fn is_anchored(&self) -> bool {
        self.alpha < 1.0 && self.anchors.iter().any(Option::is_some)
    }

    /// Per concept, the largest second derivative of the weighted
    /// constraint term (reached at zero distance); 0 when unanchored.
    pub fn constraint_curvature(&self) -> Vec<f64> {
        self.anchors
            .iter()
            .zip(&self.targets)
            .map(|(a, &pc)| if a.is_some() { (1.0 - self.alpha) * 2.0 * pc } else { 0.0 })
            .collect()
    }

    pub fn cost(&self, y: &[f64]) -> CostParts {
        let kl_main = match self.affinity {
            Some(p) => kl(p.as_slice(), &q_matrix(y)),
            None => 0.0,
        };
        let kl_constraint: f64 = y
            .iter()
            .zip(self.anchors)
            .zip(&self.targets)
            .filter_map(|((&yi, a), &pc)| {
                a.map(|a| {
                    let d = yi - a;
                    pc * (pc * (1.0 + d * d)).ln()
                })
            })
            .sum();
        CostParts {
            kl_main,
            kl_constraint,
            total: self.alpha * kl_main + (1.0 - self.alpha) * kl_constraint,
        }
    }

    /// Gradient of the total cost, with the main-term affinities scaled by
    /// `exaggeration`.
    pub fn gradient(&self, y: &[f64], exaggeration: f64) -> Vec<f64> {
        let m = y.len();
        let mut grad = vec![0.0; m];
        if let Some(p) = self.affinity.filter(|_| self.alpha > 0.0) {
            let mut w = vec![0.0; m * m];
            let mut z = 0.0;
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        let d = y[i] - y[j];
                        let k = 1.0 / (1.0 + d * d);
                        w[i * m + j] = k;
                        z += k;
                    }
                }
            }
            for i in 0..m {
                let mut g = 0.0;
                for j in 0..m {
                    if i != j {
                        let k = w[i * m + j];
                        g += (exaggeration * p.get(i, j) - k / z) * (y[i] - y[j]) * k;
                    }
                }
                grad[i] = self.alpha * 4.0 * g;
            }
        }
        let beta = 1.0 - self.alpha;
        if beta > 0.0 {
            for (i, (a, &pc)) in self.anchors.iter().zip(&self.targets).enumerate() {
                if let Some(a) = a {
                    let d = y[i] - a;
                    grad[i] += beta * 2.0 * pc * d / (1.0 + d * d);
                }
            }
        }
        grad
    }
}
