//! Constrained 1-D t-SNE.
//!
//! Each frame is embedded on a line by minimizing
//! `alpha * KL(P||Q) + (1 - alpha) * KL(P_c||Q_c)`, where the second term
//! ties every concept seen in the previous frame to a virtual point at its
//! previous position. Frames are chained: frame `t` is anchored to and
//! initialized from frame `t - 1`.

mod affinity;
mod objective;

pub use affinity::{
    affinities, affinities_from_sq_distances, clamp_perplexity, kl, q_matrix, AffinityMatrix, Q_FLOOR,
};
pub use objective::{
    constraint_kl, constraint_target, constraint_terms, ConstraintTerm, CostParts, Objective,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::features::ConceptFeatureMatrix;

pub const DEFAULT_ALPHA_PROJ: f64 = 0.7;
pub const DEFAULT_PERPLEXITY: f64 = 10.0;
pub const DEFAULT_SEED: u64 = 42;
/// Standard deviation of the random initialization.
pub const INIT_SCALE: f64 = 1e-2;
const MAX_STEP_HALVINGS: usize = 5;
/// Upper bound of the automatic learning rate.
pub const MAX_LEARNING_RATE: f64 = 50.0;

/// Step size for a frame of `m` concepts: `min(50, m / 8)`.
///
/// The main term's curvature near a collapsed start is about
/// `4 * exaggeration / m`, so a fixed large step makes small frames
/// oscillate instead of converge.
pub fn auto_learning_rate(m: usize) -> f64 {
    (m as f64 / 8.0).min(MAX_LEARNING_RATE)
}

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("degenerate frame: {0} concept(s), need at least 2")]
    DegenerateFrame(usize),
    #[error("expected {expected} entries, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("optimization diverged at iteration {iteration} after {halvings} step halvings")]
    Diverged { iteration: usize, halvings: usize },
}

/// Gradient-descent schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    pub iterations: usize,
    /// Step size; `None` picks [`auto_learning_rate`] for the frame size.
    pub learning_rate: Option<f64>,
    pub momentum_initial: f64,
    pub momentum_final: f64,
    pub momentum_switch: usize,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
    /// Record the total cost after every iteration.
    pub trace_cost: bool,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        OptimizerParams {
            iterations: 1000,
            learning_rate: None,
            momentum_initial: 0.5,
            momentum_final: 0.8,
            momentum_switch: 250,
            exaggeration: 4.0,
            exaggeration_iters: 100,
            trace_cost: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionParams {
    pub alpha_proj: f64,
    pub perplexity: f64,
    pub seed: u64,
    /// Give non-mutated concepts the stronger virtual-point target.
    pub invert_pc: bool,
    pub optimizer: OptimizerParams,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            alpha_proj: DEFAULT_ALPHA_PROJ,
            perplexity: DEFAULT_PERPLEXITY,
            seed: DEFAULT_SEED,
            invert_pc: false,
            optimizer: OptimizerParams::default(),
        }
    }
}

impl ProjectionParams {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        if !(0.0..=1.0).contains(&self.alpha_proj) {
            return Err(ProjectionError::InvalidParameter(format!(
                "alpha_proj must lie in [0, 1], got {}",
                self.alpha_proj
            )));
        }
        if !(self.perplexity.is_finite() && self.perplexity > 0.0) {
            return Err(ProjectionError::InvalidParameter(format!(
                "perplexity must be positive, got {}",
                self.perplexity
            )));
        }
        if self.optimizer.learning_rate.is_some_and(|lr| !(lr.is_finite() && lr > 0.0)) {
            return Err(ProjectionError::InvalidParameter("learning rate must be positive".into()));
        }
        Ok(())
    }
}

/// 1-D positions of one slice's concepts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionFrame {
    pub tokens: Vec<String>,
    pub positions: Vec<f64>,
    /// Previous-frame positions of the concepts shared with that frame.
    pub prev_positions: BTreeMap<String, f64>,
    pub mutation_flags: Vec<bool>,
    pub alpha_proj: f64,
    pub seed: u64,
}

impl ProjectionFrame {
    pub fn position_of(&self, token: &str) -> Option<f64> {
        self.tokens.iter().position(|t| t == token).map(|i| self.positions[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub kl_main: f64,
    pub kl_constraint: f64,
    pub total: f64,
    pub iterations: usize,
    pub grad_norm_final: f64,
    /// Total cost per iteration when tracing was requested.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<f64>,
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Starting positions: anchored concepts start at their anchor, the rest at
/// the anchors' median plus seeded Gaussian noise (median 0 when nothing is
/// anchored).
pub fn initial_positions(anchors: &[Option<f64>], seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, INIT_SCALE).expect("valid normal");
    let mut anchored: Vec<f64> = anchors.iter().flatten().copied().collect();
    let center = median(&mut anchored);
    anchors
        .iter()
        .map(|a| match a {
            Some(y) => *y,
            None => center + noise.sample(&mut rng),
        })
        .collect()
}

/// Momentum gradient descent on `objective` from `init`.
///
/// Anchored coordinates take a step of `lr / (1 + lr * h_i)`, where `h_i`
/// bounds the constraint term's curvature for concept `i`; unanchored
/// coordinates take the plain `lr`. A non-finite step is retried from the
/// last good state with half the learning rate; after
/// [`MAX_STEP_HALVINGS`] halvings the run fails. Unanchored solutions are
/// translated to mean zero.
pub fn optimize(
    objective: &Objective<'_>,
    init: Vec<f64>,
    opt: &OptimizerParams,
) -> Result<(Vec<f64>, CostReport), ProjectionError> {
    let m = init.len();
    let mut y = init;
    let mut velocity = vec![0.0; m];
    let mut lr = opt.learning_rate.unwrap_or_else(|| auto_learning_rate(m));
    let curvature = objective.constraint_curvature();
    let mut halvings = 0;
    let mut trace = Vec::new();

    let mut it = 0;
    while it < opt.iterations {
        let exaggeration = if it < opt.exaggeration_iters { opt.exaggeration } else { 1.0 };
        let momentum = if it < opt.momentum_switch { opt.momentum_initial } else { opt.momentum_final };
        let grad = objective.gradient(&y, exaggeration);
        let next_v: Vec<f64> = velocity
            .iter()
            .zip(&grad)
            .zip(&curvature)
            .map(|((v, g), h)| momentum * v - lr / (1.0 + lr * h) * g)
            .collect();
        let next_y: Vec<f64> = y.iter().zip(&next_v).map(|(y, v)| y + v).collect();
        let cost = opt.trace_cost.then(|| objective.cost(&next_y).total);

        let finite = next_y.iter().all(|v| v.is_finite()) && cost.is_none_or(f64::is_finite);
        if !finite {
            halvings += 1;
            if halvings > MAX_STEP_HALVINGS {
                return Err(ProjectionError::Diverged { iteration: it, halvings: halvings - 1 });
            }
            log::debug!("non-finite step at iteration {it}; halving learning rate");
            lr *= 0.5;
            velocity.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        y = next_y;
        velocity = next_v;
        if let Some(c) = cost {
            trace.push(c);
        }
        it += 1;
    }

    if !objective.is_anchored() && m > 0 {
        let mean = y.iter().sum::<f64>() / m as f64;
        y.iter_mut().for_each(|v| *v -= mean);
    }
    let parts = objective.cost(&y);
    let grad_norm_final = objective.gradient(&y, 1.0).iter().map(|g| g * g).sum::<f64>().sqrt();
    Ok((
        y,
        CostReport {
            kl_main: parts.kl_main,
            kl_constraint: parts.kl_constraint,
            total: parts.total,
            iterations: opt.iterations,
            grad_norm_final,
            trace,
        },
    ))
}

/// Project one frame. `prev_positions` holds the previous frame's positions
/// for shared concepts; `mutation_flags` is aligned with `g`'s rows.
pub fn project_frame(
    g: &ConceptFeatureMatrix,
    prev_positions: &BTreeMap<String, f64>,
    mutation_flags: &[bool],
    params: &ProjectionParams,
) -> Result<(ProjectionFrame, CostReport), ProjectionError> {
    params.validate()?;
    let m = g.len();
    if mutation_flags.len() != m {
        return Err(ProjectionError::ShapeMismatch { expected: m, got: mutation_flags.len() });
    }
    if m == 0 {
        let empty = ProjectionFrame {
            tokens: vec![],
            positions: vec![],
            prev_positions: BTreeMap::new(),
            mutation_flags: vec![],
            alpha_proj: params.alpha_proj,
            seed: params.seed,
        };
        let report = CostReport {
            kl_main: 0.0,
            kl_constraint: 0.0,
            total: 0.0,
            iterations: 0,
            grad_norm_final: 0.0,
            trace: vec![],
        };
        return Ok((empty, report));
    }
    let anchors: Vec<Option<f64>> = g.tokens().iter().map(|t| prev_positions.get(t).copied()).collect();
    let affinity = if m >= 2 { Some(affinities(g, params.perplexity)?) } else { None };
    let objective = Objective::new(
        affinity.as_ref(),
        &anchors,
        mutation_flags,
        params.invert_pc,
        params.alpha_proj,
    );
    let init = initial_positions(&anchors, params.seed);
    let (positions, report) = optimize(&objective, init, &params.optimizer)?;

    let shared = g
        .tokens()
        .iter()
        .filter_map(|t| prev_positions.get(t).map(|&y| (t.clone(), y)))
        .collect();
    Ok((
        ProjectionFrame {
            tokens: g.tokens().to_vec(),
            positions,
            prev_positions: shared,
            mutation_flags: mutation_flags.to_vec(),
            alpha_proj: params.alpha_proj,
            seed: params.seed,
        },
        report,
    ))
}

/// Seed used for frame `index` of a chain seeded with `seed`.
pub fn frame_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

/// Project a sequence of frames, anchoring each to its predecessor.
/// The first frame is unconstrained.
pub fn chain_project(
    frames: &[ConceptFeatureMatrix],
    mutation_flags: &[Vec<bool>],
    params: &ProjectionParams,
) -> Result<Vec<(ProjectionFrame, CostReport)>, ProjectionError> {
    if frames.len() != mutation_flags.len() {
        return Err(ProjectionError::ShapeMismatch {
            expected: frames.len(),
            got: mutation_flags.len(),
        });
    }
    let mut out: Vec<(ProjectionFrame, CostReport)> = Vec::with_capacity(frames.len());
    for (t, (g, flags)) in frames.iter().zip(mutation_flags).enumerate() {
        let mut frame_params = ProjectionParams { seed: frame_seed(params.seed, t), ..*params };
        let prev: BTreeMap<String, f64> = match out.last() {
            Some((prev, _)) => prev
                .tokens
                .iter()
                .cloned()
                .zip(prev.positions.iter().copied())
                .filter(|(tok, _)| g.tokens().contains(tok))
                .collect(),
            None => {
                frame_params.alpha_proj = 1.0;
                BTreeMap::new()
            }
        };
        out.push(project_frame(g, &prev, flags, &frame_params)?);
    }
    Ok(out)
}
