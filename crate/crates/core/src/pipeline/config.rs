use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use super::PipelineError;
use crate::features::DEFAULT_ALPHA_FEAT;
use crate::ingest::DEFAULT_TOP_K;
use crate::layout::{Canvas, LayoutParams};
use crate::projection::{OptimizerParams, ProjectionParams, DEFAULT_ALPHA_PROJ, DEFAULT_PERPLEXITY, DEFAULT_SEED};
use crate::slicing::{parse_granularity, SlicingParams};

/// Everything a pipeline run needs. Relative paths are resolved against
/// the directory of the config file when loaded with [`PipelineConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
    /// Replaces the built-in English stopword list.
    pub stopwords: Option<PathBuf>,
    /// Required when the corpus holds more than one topic.
    pub topic: Option<String>,
    pub top_k: usize,
    pub granularity: String,
    pub sig: f64,
    pub m_min: usize,
    /// Longest merged slice, e.g. "90d"; `null` disables the cap.
    pub max_span: Option<String>,
    pub alpha_feat: f64,
    pub alpha_proj: f64,
    pub perplexity: f64,
    pub seed: u64,
    pub invert_pc: bool,
    pub canvas: Canvas,
    pub layout: LayoutParams,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            corpus: PathBuf::from("corpus.jsonl"),
            embeddings: PathBuf::from("embeddings.txt"),
            stopwords: None,
            topic: None,
            top_k: DEFAULT_TOP_K,
            granularity: "1d".into(),
            sig: 0.05,
            m_min: 1,
            max_span: Some("90d".into()),
            alpha_feat: DEFAULT_ALPHA_FEAT,
            alpha_proj: DEFAULT_ALPHA_PROJ,
            perplexity: DEFAULT_PERPLEXITY,
            seed: DEFAULT_SEED,
            invert_pc: false,
            canvas: Canvas::default(),
            layout: LayoutParams::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

fn invalid(msg: String) -> PipelineError {
    PipelineError::Config(msg)
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Make relative paths relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.corpus);
        fix(&mut self.embeddings);
        fix(&mut self.output_dir);
        if let Some(s) = self.stopwords.as_mut() {
            fix(s);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.top_k == 0 {
            return Err(invalid("top_k must be at least 1".into()));
        }
        parse_granularity(&self.granularity).map_err(|e| invalid(format!("granularity {:?}: {e}", self.granularity)))?;
        if let Some(span) = &self.max_span {
            parse_granularity(span).map_err(|e| invalid(format!("max_span {span:?}: {e}")))?;
        }
        if !(self.sig > 0.0 && self.sig < 1.0) {
            return Err(invalid(format!("sig must be in (0, 1), got {}", self.sig)));
        }
        if self.m_min == 0 {
            return Err(invalid("m_min must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha_feat) {
            return Err(invalid(format!("alpha_feat must be in [0, 1], got {}", self.alpha_feat)));
        }
        self.projection_params().validate().map_err(|e| invalid(e.to_string()))?;
        let Canvas { w, h } = self.canvas;
        if !(w > 0.0 && h > 2.0 * self.layout.flow.margin) {
            return Err(invalid(format!("canvas {w}x{h} too small for margin {}", self.layout.flow.margin)));
        }
        Ok(())
    }

    pub fn slicing_params(&self) -> Result<SlicingParams, PipelineError> {
        let granularity_secs =
            parse_granularity(&self.granularity).map_err(|e| invalid(format!("granularity: {e}")))?;
        let max_span_secs = match &self.max_span {
            Some(s) => Some(parse_granularity(s).map_err(|e| invalid(format!("max_span: {e}")))?),
            None => None,
        };
        Ok(SlicingParams { granularity_secs, sig: self.sig, m_min: self.m_min, max_span_secs })
    }

    pub fn projection_params(&self) -> ProjectionParams {
        ProjectionParams {
            alpha_proj: self.alpha_proj,
            perplexity: self.perplexity,
            seed: self.seed,
            invert_pc: self.invert_pc,
            optimizer: OptimizerParams::default(),
        }
    }
}
