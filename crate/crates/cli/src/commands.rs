use anyhow::{Context, Result};
use clap::Args;
use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use conceptflow::pipeline::{
    ingest_topic, project_and_layout, slice_manifest, slice_topic, Analysis, FrameRecord, PipelineConfig,
    SliceManifestEntry,
};

/// Inputs shared by `slice` and `project`. Flags override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct InputArgs {
    /// Pipeline config to start from; its relative paths follow its directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON-lines corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub topic: Option<String>,
    /// Concepts kept per topic.
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Stopword file, one token per line; replaces the built-in list.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
}

impl InputArgs {
    pub fn base_config(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        if let Some(c) = &self.corpus {
            cfg.corpus = c.clone();
        }
        if let Some(t) = &self.topic {
            cfg.topic = Some(t.clone());
        }
        if let Some(k) = self.top_k {
            cfg.top_k = k;
        }
        if let Some(s) = &self.stopwords {
            cfg.stopwords = Some(s.clone());
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct SliceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Base slice length, e.g. 1d, 6h.
    #[arg(long)]
    pub granularity: Option<String>,
    /// Family-wise significance level for boundary tests.
    #[arg(long)]
    pub sig: Option<f64>,
    /// Mutated concepts needed to cut at a boundary.
    #[arg(long)]
    pub m_min: Option<usize>,
    /// Longest merged slice, e.g. 90d, or "none".
    #[arg(long)]
    pub max_span: Option<String>,
    /// Write the manifest here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SliceArgs {
    pub fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = self.input.base_config()?;
        if let Some(g) = &self.granularity {
            cfg.granularity = g.clone();
        }
        if let Some(s) = self.sig {
            cfg.sig = s;
        }
        if let Some(m) = self.m_min {
            cfg.m_min = m;
        }
        if let Some(s) = &self.max_span {
            cfg.max_span = (s != "none").then(|| s.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProjectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Slice manifest written by `slice` or `run`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Word vectors in text format.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Weight of the occurrence part of the features.
    #[arg(long)]
    pub alpha_feat: Option<f64>,
    /// Weight of the similarity term against the previous-frame pull.
    #[arg(long)]
    pub alpha_proj: Option<f64>,
    #[arg(long)]
    pub perplexity: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Anchor unchanged concepts hardest instead of mutated ones.
    #[arg(long)]
    pub invert_pc: bool,
    /// Concepts to leave out of every frame.
    #[arg(long, value_delimiter = ',')]
    pub remove: Vec<String>,
    /// Write the frames here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ProjectArgs {
    pub fn config(&self) -> Result<PipelineConfig> {
        let mut cfg = self.input.base_config()?;
        if let Some(e) = &self.embeddings {
            cfg.embeddings = e.clone();
        }
        if let Some(a) = self.alpha_feat {
            cfg.alpha_feat = a;
        }
        if let Some(a) = self.alpha_proj {
            cfg.alpha_proj = a;
        }
        if let Some(p) = self.perplexity {
            cfg.perplexity = p;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.invert_pc |= self.invert_pc;
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn slice(args: &SliceArgs) -> Result<Vec<SliceManifestEntry>> {
    let cfg = args.config()?;
    let data = ingest_topic(&cfg)?;
    let slices = slice_topic(&data, &cfg.slicing_params()?)?;
    Ok(slice_manifest(&slices, &data.concepts))
}

pub fn project(args: &ProjectArgs) -> Result<Vec<FrameRecord>> {
    let cfg = args.config()?;
    let text = fs::read_to_string(&args.manifest).with_context(|| format!("reading {}", args.manifest.display()))?;
    let manifest: Vec<SliceManifestEntry> =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.manifest.display()))?;
    let analysis = Analysis::from_manifest(&cfg, &manifest)?;
    let known: BTreeSet<&str> = analysis.data.concepts.iter().map(|c| c.token.as_str()).collect();
    let unknown: Vec<&str> = args.remove.iter().map(String::as_str).filter(|t| !known.contains(t)).collect();
    anyhow::ensure!(unknown.is_empty(), "unknown concepts: {}", unknown.join(", "));
    let removed: BTreeSet<String> = args.remove.iter().cloned().collect();
    let (frames, _) = project_and_layout(&analysis, &cfg, &removed)?;
    Ok(frames)
}

/// Pretty JSON to `out`, or stdout.
pub fn emit<T: serde::Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(value)?;
    text.push(b'\n');
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().lock().write_all(&text).context("writing stdout"),
    }
}
