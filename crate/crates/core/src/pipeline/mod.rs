//! End-to-end orchestration: ingest, slice, build features, project the
//! frame chain and lay it out, with every revision written to disk as an
//! immutable snapshot.

mod artifacts;
mod config;
mod session;

pub use artifacts::{
    slice_manifest, slices_from_manifest, ConceptEntry, FrameConcept, FrameCost, FrameRecord, ReprojectRequest,
    SessionSummary, SliceManifestEntry,
};
pub use config::PipelineConfig;
pub use session::Session;

use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

use crate::features::{build_features, concept_occurrences, load_embeddings, EmbeddingTable, OccurrenceMatrix};
use crate::ingest::{extract_concepts, load_corpus, Concept, Document, Tokenizer};
use crate::layout::{build_layout, to_svg, Layout};
use crate::projection::{chain_project, ProjectionFrame};
use crate::slicing::{detect_boundaries, uniform_slices, SlicingParams, TimeSlice};

type BoxError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("empty topic: no documents for {0:?}")]
    EmptyTopic(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: BoxError,
    },
    #[error("unknown concepts: {}", .0.join(", "))]
    UnknownConcepts(Vec<String>),
    #[error("not found: {0}")]
    NotFound(String),
    #[error("invalid slice manifest: {0}")]
    Manifest(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn stage<E: Into<BoxError>>(stage: &'static str) -> impl FnOnce(E) -> PipelineError {
    move |e| PipelineError::Stage { stage, source: e.into() }
}

/// The topic's documents and concepts, before slicing.
#[derive(Debug, Clone)]
pub struct TopicData {
    pub topic: String,
    /// Sorted by timestamp.
    pub documents: Vec<Document>,
    /// Ranked by document frequency.
    pub concepts: Vec<Concept>,
    /// Per document, the sorted indices of the concepts it contains.
    pub occurrences: Vec<Vec<usize>>,
}

/// Load the corpus, pick the topic and extract its concepts.
pub fn ingest_topic(config: &PipelineConfig) -> Result<TopicData, PipelineError> {
    let corpus = load_corpus(&config.corpus).map_err(stage("ingest"))?;
    let tokenizer = match &config.stopwords {
        Some(p) => {
            let file = fs::File::open(p).map_err(|source| PipelineError::Io { path: p.clone(), source })?;
            Tokenizer::from_stopword_reader(std::io::BufReader::new(file))
                .map_err(|source| PipelineError::Io { path: p.clone(), source })?
        }
        None => Tokenizer::default(),
    };
    let topic = match &config.topic {
        Some(t) => t.clone(),
        None => {
            let topics = corpus.topics();
            match topics.as_slice() {
                [only] => only.clone(),
                [] => return Err(PipelineError::EmptyTopic(String::new())),
                many => {
                    return Err(PipelineError::Config(format!(
                        "corpus has {} topics ({}); set \"topic\"",
                        many.len(),
                        many.join(", ")
                    )))
                }
            }
        }
    };
    let documents: Vec<Document> = corpus.documents.into_iter().filter(|d| d.topic == topic).collect();
    if documents.is_empty() {
        return Err(PipelineError::EmptyTopic(topic));
    }
    let concepts = extract_concepts(&documents, &topic, config.top_k, &tokenizer);
    let occurrences = concept_occurrences(&documents, &concepts, &tokenizer);
    log::info!("topic {topic:?}: {} documents, {} concepts", documents.len(), concepts.len());
    Ok(TopicData { topic, documents, concepts, occurrences })
}

pub fn slice_topic(data: &TopicData, params: &SlicingParams) -> Result<Vec<TimeSlice>, PipelineError> {
    let base = uniform_slices(&data.documents, &data.occurrences, data.concepts.len(), params.granularity_secs)
        .map_err(stage("slice"))?;
    let slices = detect_boundaries(base, params).map_err(stage("slice"))?;
    log::info!("{} slices", slices.len());
    Ok(slices)
}

/// Everything that stays fixed across reprojections of one session.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub data: TopicData,
    pub slices: Vec<TimeSlice>,
    /// `slice_df[t][c]`: documents of slice `t` containing concept `c`.
    pub slice_df: Vec<Vec<u64>>,
    pub embeddings: EmbeddingTable,
}

impl Analysis {
    pub fn new(data: TopicData, slices: Vec<TimeSlice>, embeddings: EmbeddingTable) -> Self {
        let slice_df = slices
            .iter()
            .map(|s| {
                let mut df = vec![0u64; data.concepts.len()];
                for &d in &s.docs {
                    for &c in &data.occurrences[d] {
                        df[c] += 1;
                    }
                }
                df
            })
            .collect();
        Analysis { data, slices, slice_df, embeddings }
    }

    /// Ingest, slice and load embeddings.
    pub fn build(config: &PipelineConfig) -> Result<Self, PipelineError> {
        let data = ingest_topic(config)?;
        let slices = slice_topic(&data, &config.slicing_params()?)?;
        let embeddings = load_embeddings(&config.embeddings).map_err(stage("features"))?;
        Ok(Analysis::new(data, slices, embeddings))
    }

    /// Like [`Analysis::build`] but with slices taken from a manifest.
    pub fn from_manifest(config: &PipelineConfig, manifest: &[SliceManifestEntry]) -> Result<Self, PipelineError> {
        let data = ingest_topic(config)?;
        let slices = slices_from_manifest(manifest, &data.documents, &data.concepts)?;
        let embeddings = load_embeddings(&config.embeddings).map_err(stage("features"))?;
        Ok(Analysis::new(data, slices, embeddings))
    }

    pub fn concept_index(&self, token: &str) -> Option<usize> {
        self.data.concepts.iter().position(|c| c.token == token)
    }

    /// Concept indices still in play, in rank order.
    pub fn vocabulary(&self, removed: &BTreeSet<String>) -> Vec<usize> {
        (0..self.data.concepts.len()).filter(|&c| !removed.contains(&self.data.concepts[c].token)).collect()
    }

    pub fn importance(&self, concept: usize) -> u64 {
        self.slice_df.iter().map(|df| df[concept]).max().unwrap_or(0)
    }

    pub fn manifest(&self) -> Vec<SliceManifestEntry> {
        slice_manifest(&self.slices, &self.data.concepts)
    }
}

/// One revision of a session.
#[derive(Debug, Clone)]
pub struct SessionState {
    pub config: PipelineConfig,
    pub analysis: Arc<Analysis>,
    pub manifest: Vec<SliceManifestEntry>,
    pub frames: Vec<FrameRecord>,
    pub layout: Layout,
    pub removed: BTreeSet<String>,
    pub revision: u64,
}

impl SessionState {
    pub fn summary(&self) -> SessionSummary {
        SessionSummary {
            revision: self.revision,
            topic: self.analysis.data.topic.clone(),
            removed: self.removed.clone(),
            concepts: self.concepts(),
        }
    }

    /// Current vocabulary with label importance, in rank order.
    pub fn concepts(&self) -> Vec<ConceptEntry> {
        let a = &self.analysis;
        a.vocabulary(&self.removed)
            .into_iter()
            .map(|c| ConceptEntry {
                token: a.data.concepts[c].token.clone(),
                importance: a.importance(c),
                corpus_doc_freq: a.data.concepts[c].corpus_doc_freq,
            })
            .collect()
    }

    pub fn revision_dir(&self) -> PathBuf {
        revision_dir(&self.config.output_dir, self.revision)
    }
}

pub fn revision_dir(output_dir: &Path, revision: u64) -> PathBuf {
    output_dir.join(format!("rev_{revision}"))
}

/// Project every slice's frame (concepts outside `removed` with slice
/// frequency at least 1) and lay the chain out.
pub fn project_and_layout(
    analysis: &Analysis,
    config: &PipelineConfig,
    removed: &BTreeSet<String>,
) -> Result<(Vec<FrameRecord>, Layout), PipelineError> {
    let vocab = analysis.vocabulary(removed);
    let n_concepts = analysis.data.concepts.len();
    let members: Vec<Vec<usize>> = analysis
        .slice_df
        .iter()
        .map(|df| vocab.iter().copied().filter(|&c| df[c] >= 1).collect())
        .collect();
    let features = analysis
        .slices
        .par_iter()
        .zip(&members)
        .map(|(slice, keep)| {
            let occ = OccurrenceMatrix::from_concept_lists(&slice.docs, &analysis.data.occurrences, n_concepts)?
                .select_rows(keep);
            let tokens: Vec<String> = keep.iter().map(|&c| analysis.data.concepts[c].token.clone()).collect();
            build_features(&analysis.embeddings, &tokens, &occ, config.alpha_feat)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(stage("features"))?;
    let flags: Vec<Vec<bool>> = analysis
        .slices
        .iter()
        .zip(&members)
        .map(|(s, keep)| keep.iter().map(|&c| s.mutation_flags[c]).collect())
        .collect();

    let projected = chain_project(&features, &flags, &config.projection_params()).map_err(stage("project"))?;
    let frames: Vec<FrameRecord> =
        projected.iter().enumerate().map(|(t, (f, r))| FrameRecord::new(t, f, r)).collect();
    let pframes: Vec<ProjectionFrame> = projected.into_iter().map(|(f, _)| f).collect();
    let freqs: Vec<Vec<u64>> = analysis
        .slice_df
        .iter()
        .zip(&members)
        .map(|(df, keep)| keep.iter().map(|&c| df[c]).collect())
        .collect();
    let layout = build_layout(&analysis.slices, &pframes, &freqs, config.canvas, &config.layout)
        .map_err(stage("layout"))?;
    Ok((frames, layout))
}

/// Run every stage and write revision 0 under the output directory.
/// Snapshots from an earlier session in the same directory are removed.
pub fn run_pipeline(config: &PipelineConfig) -> Result<SessionState, PipelineError> {
    config.validate()?;
    let mut config = config.clone();
    config.corpus = absolute(&config.corpus)?;
    config.embeddings = absolute(&config.embeddings)?;
    config.output_dir = absolute(&config.output_dir)?;
    if let Some(s) = config.stopwords.take() {
        config.stopwords = Some(absolute(&s)?);
    }
    let analysis = Arc::new(Analysis::build(&config)?);
    let removed = BTreeSet::new();
    let (frames, layout) = project_and_layout(&analysis, &config, &removed)?;
    let state = SessionState {
        manifest: analysis.manifest(),
        config,
        analysis,
        frames,
        layout,
        removed,
        revision: 0,
    };
    clear_revisions(&state.config.output_dir)?;
    persist(&state)?;
    Ok(state)
}

/// Remove `remove` from the vocabulary and recompute every frame from the
/// first. The input state is left untouched; nothing is written.
pub fn reproject(state: &SessionState, remove: &BTreeSet<String>) -> Result<SessionState, PipelineError> {
    let current: BTreeSet<&str> = state
        .analysis
        .vocabulary(&state.removed)
        .into_iter()
        .map(|c| state.analysis.data.concepts[c].token.as_str())
        .collect();
    let unknown: Vec<String> = remove.iter().filter(|t| !current.contains(t.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(PipelineError::UnknownConcepts(unknown));
    }
    let removed: BTreeSet<String> = state.removed.union(remove).cloned().collect();
    let (frames, layout) = project_and_layout(&state.analysis, &state.config, &removed)?;
    Ok(SessionState {
        config: state.config.clone(),
        analysis: Arc::clone(&state.analysis),
        manifest: state.manifest.clone(),
        frames,
        layout,
        removed,
        revision: state.revision + 1,
    })
}

/// Documents of slice `slice` containing `concept`, oldest first.
pub fn docs_for(state: &SessionState, concept: &str, slice: usize) -> Result<Vec<Document>, PipelineError> {
    let a = &state.analysis;
    let c = a
        .concept_index(concept)
        .filter(|_| !state.removed.contains(concept))
        .ok_or_else(|| PipelineError::NotFound(format!("concept {concept:?}")))?;
    let s = a
        .slices
        .get(slice)
        .ok_or_else(|| PipelineError::NotFound(format!("slice {slice} (have {})", a.slices.len())))?;
    let mut docs: Vec<Document> = s
        .docs
        .iter()
        .filter(|&&d| a.data.occurrences[d].binary_search(&c).is_ok())
        .map(|&d| a.data.documents[d].clone())
        .collect();
    docs.sort_by_key(|d| d.timestamp);
    Ok(docs)
}

fn absolute(p: &Path) -> Result<PathBuf, PipelineError> {
    std::path::absolute(p).map_err(|source| PipelineError::Io { path: p.to_path_buf(), source })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), PipelineError> {
    fs::write(path, contents).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("artifacts serialize");
    out.push(b'\n');
    out
}

/// Revision numbers present under `output_dir`, ascending.
pub fn list_revisions(output_dir: &Path) -> Result<Vec<u64>, PipelineError> {
    let entries = match fs::read_dir(output_dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(vec![]),
        Err(source) => return Err(PipelineError::Io { path: output_dir.to_path_buf(), source }),
    };
    let mut revs: Vec<u64> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_str()?.strip_prefix("rev_")?.parse().ok())
        .collect();
    revs.sort_unstable();
    Ok(revs)
}

fn clear_revisions(output_dir: &Path) -> Result<(), PipelineError> {
    for rev in list_revisions(output_dir)? {
        let dir = revision_dir(output_dir, rev);
        log::warn!("removing snapshot from an earlier run: {}", dir.display());
        fs::remove_dir_all(&dir).map_err(|source| PipelineError::Io { path: dir, source })?;
    }
    Ok(())
}

/// Write the revision's snapshot. Files go to a scratch directory that is
/// renamed into place, so a snapshot is either complete or absent.
pub fn persist(state: &SessionState) -> Result<PathBuf, PipelineError> {
    let dir = state.revision_dir();
    let tmp = state.config.output_dir.join(format!(".rev_{}.partial", state.revision));
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PipelineError::Io { path, source }
    };
    if tmp.exists() {
        fs::remove_dir_all(&tmp).map_err(io(&tmp))?;
    }
    fs::create_dir_all(&tmp).map_err(io(&tmp))?;
    write_file(&tmp.join("config.json"), &to_json(&state.config))?;
    write_file(&tmp.join("slices.json"), &to_json(&state.manifest))?;
    write_file(&tmp.join("frames.json"), &to_json(&state.frames))?;
    write_file(&tmp.join("layout.json"), &to_json(&state.layout))?;
    write_file(&tmp.join("layout.svg"), to_svg(&state.layout).as_bytes())?;
    write_file(&tmp.join("session.json"), &to_json(&state.summary()))?;
    fs::rename(&tmp, &dir).map_err(io(&dir))?;
    Ok(dir)
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text).map_err(|source| PipelineError::Json { path: path.to_path_buf(), source })
}

/// Reload the latest revision written under `output_dir`.
pub fn load_state(output_dir: &Path) -> Result<SessionState, PipelineError> {
    let rev = *list_revisions(output_dir)?
        .last()
        .ok_or_else(|| PipelineError::NotFound(format!("no revisions under {}", output_dir.display())))?;
    let dir = revision_dir(output_dir, rev);
    let mut config: PipelineConfig = read_json(&dir.join("config.json"))?;
    config.output_dir = absolute(output_dir)?;
    let manifest: Vec<SliceManifestEntry> = read_json(&dir.join("slices.json"))?;
    let summary: SessionSummary = read_json(&dir.join("session.json"))?;
    let analysis = Analysis::from_manifest(&config, &manifest)?;
    Ok(SessionState {
        frames: read_json(&dir.join("frames.json"))?,
        layout: read_json(&dir.join("layout.json"))?,
        config,
        analysis: Arc::new(analysis),
        manifest,
        removed: summary.removed,
        revision: rev,
    })
}
