//! Burst-aware time slicing.
//!
//! The topic's time extent is first cut into uniform base slices. Each
//! boundary between adjacent base slices is then tested concept by concept
//! with Welch's t-test on document-occurrence indicators (Bonferroni
//! corrected over the concepts). A boundary where at least `m_min`
//! concepts change significantly becomes a cut; maximal runs of uncut base
//! slices merge into one [`TimeSlice`].

mod welch;

pub use welch::{welch_t, OccurrenceStats, TTestResult};

use chrono::{DateTime, Duration, TimeZone, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Document;

/// Base slices with fewer documents than this are merged forward.
pub const MIN_DOCS_PER_SLICE: usize = 2;

#[derive(Debug, Error, PartialEq)]
pub enum SliceError {
    #[error("empty topic")]
    EmptyTopic,
    #[error("granularity must be a positive whole number of seconds")]
    InvalidGranularity,
    #[error("t-test needs at least 2 observations per sample, got {n}")]
    TooFewDocuments { n: u64 },
    #[error("invalid occurrence counts: {hits} hits of {n}")]
    InvalidCounts { hits: u64, n: u64 },
    #[error("occurrence list has {got} entries but {expected} documents were given")]
    OccurrenceMismatch { expected: usize, got: usize },
    #[error("concept index {index} out of range for {n_concepts} concepts")]
    ConceptOutOfRange { index: usize, n_concepts: usize },
}

/// Uniform-granularity slice with per-concept occurrence counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseSlice {
    pub start: DateTime<Utc>,
    /// Exclusive.
    pub end: DateTime<Utc>,
    /// Indices into the document collection the slice was built from.
    pub docs: Vec<usize>,
    /// Per concept: number of documents in the slice containing it.
    pub hits: Vec<u64>,
    /// Per concept: `hits / docs.len()`, 0 for an empty slice.
    pub occ_rate: Vec<f64>,
}

impl BaseSlice {
    fn empty(start: DateTime<Utc>, end: DateTime<Utc>, n_concepts: usize) -> Self {
        BaseSlice {
            start,
            end,
            docs: Vec::new(),
            hits: vec![0; n_concepts],
            occ_rate: vec![0.0; n_concepts],
        }
    }

    pub fn n_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn stats(&self, concept: usize) -> OccurrenceStats {
        OccurrenceStats::new(self.hits[concept], self.docs.len() as u64)
    }

    fn refresh_rates(&mut self) {
        let n = self.docs.len();
        self.occ_rate = self
            .hits
            .iter()
            .map(|&h| if n == 0 { 0.0 } else { h as f64 / n as f64 })
            .collect();
    }

    fn absorb(&mut self, other: BaseSlice) {
        self.start = self.start.min(other.start);
        self.end = self.end.max(other.end);
        self.docs.extend(other.docs);
        self.docs.sort_unstable();
        for (h, o) in self.hits.iter_mut().zip(other.hits) {
            *h += o;
        }
        self.refresh_rates();
    }
}

/// A slice of the final, non-uniform partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSlice {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub docs: Vec<usize>,
    /// True when the slice opens at an anomaly cut.
    pub anomalous_boundary: bool,
    /// Per concept: changed significantly at the opening boundary.
    pub mutation_flags: Vec<bool>,
}

impl TimeSlice {
    pub fn duration(&self) -> Duration {
        self.end - self.start
    }

    pub fn duration_days(&self) -> f64 {
        self.duration().num_seconds() as f64 / 86_400.0
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        self.start <= ts && ts < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlicingParams {
    pub granularity_secs: i64,
    /// Family-wise significance per boundary (split over the concepts).
    pub sig: f64,
    /// Concepts that must mutate for a boundary to become a cut.
    pub m_min: usize,
    /// Upper bound on a merged slice's duration; `None` disables the cap.
    pub max_span_secs: Option<i64>,
}

impl Default for SlicingParams {
    fn default() -> Self {
        SlicingParams {
            granularity_secs: 86_400,
            sig: 0.05,
            m_min: 1,
            max_span_secs: Some(90 * 86_400),
        }
    }
}

/// Cut the documents into contiguous half-open slices of `granularity_secs`,
/// aligned to multiples of the granularity since the Unix epoch.
///
/// `occurrences[i]` lists the concept indices present in `docs[i]`.
pub fn uniform_slices(
    docs: &[Document],
    occurrences: &[Vec<usize>],
    n_concepts: usize,
    granularity_secs: i64,
) -> Result<Vec<BaseSlice>, SliceError> {
    if granularity_secs <= 0 {
        return Err(SliceError::InvalidGranularity);
    }
    if docs.is_empty() {
        return Err(SliceError::EmptyTopic);
    }
    if occurrences.len() != docs.len() {
        return Err(SliceError::OccurrenceMismatch {
            expected: docs.len(),
            got: occurrences.len(),
        });
    }
    let secs = |d: &Document| d.timestamp.timestamp();
    let min_ts = docs.iter().map(secs).min().expect("non-empty");
    let max_ts = docs.iter().map(secs).max().expect("non-empty");
    let origin = min_ts.div_euclid(granularity_secs) * granularity_secs;
    let count = ((max_ts - origin) / granularity_secs + 1) as usize;

    let instant = |s: i64| Utc.timestamp_opt(s, 0).single().expect("in range");
    let mut slices: Vec<BaseSlice> = (0..count)
        .map(|k| {
            let start = origin + k as i64 * granularity_secs;
            BaseSlice::empty(instant(start), instant(start + granularity_secs), n_concepts)
        })
        .collect();

    for (i, (doc, occ)) in docs.iter().zip(occurrences).enumerate() {
        let k = ((secs(doc) - origin) / granularity_secs) as usize;
        let slice = &mut slices[k];
        slice.docs.push(i);
        for &c in occ {
            if c >= n_concepts {
                return Err(SliceError::ConceptOutOfRange { index: c, n_concepts });
            }
            slice.hits[c] += 1;
        }
    }
    for s in &mut slices {
        s.refresh_rates();
    }
    Ok(slices)
}

/// Merge slices holding fewer than [`MIN_DOCS_PER_SLICE`] documents into
/// their successor. A sparse tail is merged into its predecessor.
pub fn merge_sparse(base: Vec<BaseSlice>) -> Vec<BaseSlice> {
    let mut out: Vec<BaseSlice> = Vec::with_capacity(base.len());
    let mut pending: Option<BaseSlice> = None;
    for slice in base {
        let merged = match pending.take() {
            Some(mut p) => {
                p.absorb(slice);
                p
            }
            None => slice,
        };
        if merged.n_docs() >= MIN_DOCS_PER_SLICE {
            out.push(merged);
        } else {
            pending = Some(merged);
        }
    }
    if let Some(tail) = pending {
        match out.last_mut() {
            Some(last) => last.absorb(tail),
            None => out.push(tail),
        }
    }
    out
}

/// Outcome of testing every concept across one boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryVerdict {
    pub tests: Vec<TTestResult>,
    pub mutated: Vec<bool>,
    pub cut: bool,
}

impl BoundaryVerdict {
    pub fn mutated_count(&self) -> usize {
        self.mutated.iter().filter(|&&m| m).count()
    }
}

/// Test the boundary between `a` and `b`. Both slices must hold at least
/// two documents.
pub fn test_boundary(
    a: &BaseSlice,
    b: &BaseSlice,
    sig: f64,
    m_min: usize,
) -> Result<BoundaryVerdict, SliceError> {
    let n_concepts = a.hits.len();
    let corrected = if n_concepts == 0 { sig } else { sig / n_concepts as f64 };
    let tests = (0..n_concepts)
        .map(|c| welch_t(a.stats(c), b.stats(c), corrected))
        .collect::<Result<Vec<_>, _>>()?;
    let mutated: Vec<bool> = tests.iter().map(|t| t.mutated).collect();
    let count = mutated.iter().filter(|&&m| m).count();
    Ok(BoundaryVerdict {
        tests,
        mutated,
        cut: m_min > 0 && count >= m_min,
    })
}

/// Merge base slices into the anomaly-cut partition.
pub fn detect_boundaries(
    base: Vec<BaseSlice>,
    params: &SlicingParams,
) -> Result<Vec<TimeSlice>, SliceError> {
    if base.is_empty() {
        return Err(SliceError::EmptyTopic);
    }
    let n_concepts = base[0].hits.len();
    let base = merge_sparse(base);
    let no_flags = vec![false; n_concepts];

    if base.len() == 1 || base.iter().any(|s| s.n_docs() < MIN_DOCS_PER_SLICE) {
        // Not enough documents anywhere to test a boundary.
        let first = base.first().expect("non-empty");
        let last = base.last().expect("non-empty");
        return Ok(vec![TimeSlice {
            start: first.start,
            end: last.end,
            docs: base.iter().flat_map(|s| s.docs.iter().copied()).collect(),
            anomalous_boundary: false,
            mutation_flags: no_flags,
        }]);
    }

    let verdicts = base
        .par_windows(2)
        .map(|w| test_boundary(&w[0], &w[1], params.sig, params.m_min))
        .collect::<Result<Vec<_>, _>>()?;

    let mut slices = Vec::new();
    let mut iter = base.into_iter();
    let first = iter.next().expect("non-empty");
    let mut current = TimeSlice {
        start: first.start,
        end: first.end,
        docs: first.docs,
        anomalous_boundary: false,
        mutation_flags: no_flags,
    };
    for (next, verdict) in iter.zip(verdicts) {
        let over_cap = params
            .max_span_secs
            .is_some_and(|cap| (next.end - current.start).num_seconds() > cap);
        if verdict.cut || over_cap {
            let opened = TimeSlice {
                start: next.start,
                end: next.end,
                docs: next.docs,
                anomalous_boundary: verdict.cut,
                mutation_flags: verdict.mutated,
            };
            slices.push(std::mem::replace(&mut current, opened));
        } else {
            current.end = next.end;
            current.docs.extend(next.docs);
        }
    }
    slices.push(current);
    Ok(slices)
}

/// Parse a duration such as `1d`, `12h` or `90min` into whole seconds.
pub fn parse_granularity(text: &str) -> Result<i64, SliceError> {
    let d = humantime::parse_duration(text.trim()).map_err(|_| SliceError::InvalidGranularity)?;
    if d.subsec_nanos() != 0 || d.as_secs() == 0 || d.as_secs() > i64::MAX as u64 / 4 {
        return Err(SliceError::InvalidGranularity);
    }
    Ok(d.as_secs() as i64)
}
