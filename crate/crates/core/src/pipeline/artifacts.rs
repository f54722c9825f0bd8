use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

use super::PipelineError;
use crate::ingest::{Concept, Document};
use crate::projection::{CostReport, ProjectionFrame};
use crate::slicing::TimeSlice;

/// One slice as written to `slices.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceManifestEntry {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub n_docs: usize,
    pub anomalous_boundary: bool,
    pub mutated_concepts: Vec<String>,
}

pub fn slice_manifest(slices: &[TimeSlice], concepts: &[Concept]) -> Vec<SliceManifestEntry> {
    slices
        .iter()
        .map(|s| SliceManifestEntry {
            start: s.start,
            end: s.end,
            n_docs: s.docs.len(),
            anomalous_boundary: s.anomalous_boundary,
            mutated_concepts: s
                .mutation_flags
                .iter()
                .zip(concepts)
                .filter(|(&m, _)| m)
                .map(|(_, c)| c.token.clone())
                .collect(),
        })
        .collect()
}

/// Rebuild slices from a manifest: documents are assigned by time range and
/// mutation flags by token. Every document must fall in exactly one slice.
pub fn slices_from_manifest(
    manifest: &[SliceManifestEntry],
    documents: &[Document],
    concepts: &[Concept],
) -> Result<Vec<TimeSlice>, PipelineError> {
    let bad = |msg: String| PipelineError::Manifest(msg);
    if manifest.is_empty() {
        return Err(bad("no slices".into()));
    }
    for (k, w) in manifest.windows(2).enumerate() {
        if w[0].end != w[1].start {
            return Err(bad(format!("slices {k} and {} are not contiguous", k + 1)));
        }
    }
    let index: HashMap<&str, usize> = concepts.iter().enumerate().map(|(i, c)| (c.token.as_str(), i)).collect();
    let mut slices = Vec::with_capacity(manifest.len());
    for (k, e) in manifest.iter().enumerate() {
        if e.end <= e.start {
            return Err(bad(format!("slice {k} ends before it starts")));
        }
        let mut flags = vec![false; concepts.len()];
        for tok in &e.mutated_concepts {
            let &c = index.get(tok.as_str()).ok_or_else(|| bad(format!("slice {k}: unknown concept {tok:?}")))?;
            flags[c] = true;
        }
        let docs: Vec<usize> = (0..documents.len()).filter(|&d| e.start <= documents[d].timestamp && documents[d].timestamp < e.end).collect();
        if docs.len() != e.n_docs {
            return Err(bad(format!("slice {k} lists {} documents but the corpus has {} in range", e.n_docs, docs.len())));
        }
        slices.push(TimeSlice {
            start: e.start,
            end: e.end,
            docs,
            anomalous_boundary: e.anomalous_boundary,
            mutation_flags: flags,
        });
    }
    let covered: usize = slices.iter().map(|s| s.docs.len()).sum();
    if covered != documents.len() {
        return Err(bad(format!("{} documents fall outside the slices", documents.len() - covered)));
    }
    Ok(slices)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameConcept {
    pub token: String,
    pub y: f64,
    pub mutated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameCost {
    pub kl_main: f64,
    pub kl_constraint: f64,
    pub total: f64,
}

/// One projected frame as written to `frames.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub slice_index: usize,
    pub concepts: Vec<FrameConcept>,
    pub cost: FrameCost,
}

impl FrameRecord {
    pub fn new(slice_index: usize, frame: &ProjectionFrame, report: &CostReport) -> Self {
        FrameRecord {
            slice_index,
            concepts: frame
                .tokens
                .iter()
                .zip(&frame.positions)
                .zip(&frame.mutation_flags)
                .map(|((token, &y), &mutated)| FrameConcept { token: token.clone(), y, mutated })
                .collect(),
            cost: FrameCost { kl_main: report.kl_main, kl_constraint: report.kl_constraint, total: report.total },
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.concepts.iter().map(|c| c.token.as_str())
    }
}

/// A concept with its label importance (largest slice document frequency).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptEntry {
    pub token: String,
    pub importance: u64,
    pub corpus_doc_freq: usize,
}

/// Contents of `session.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub revision: u64,
    pub topic: String,
    pub removed: BTreeSet<String>,
    pub concepts: Vec<ConceptEntry>,
}

/// Body of a reprojection request: `{"remove": ["https", "watch"]}`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReprojectRequest {
    pub remove: BTreeSet<String>,
}

impl ReprojectRequest {
    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};

    fn doc(id: usize, hours: i64) -> Document {
        Document {
            id: id.to_string(),
            timestamp: Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap() + Duration::hours(hours),
            text: String::new(),
            group: "g".into(),
            topic: "t".into(),
        }
    }

    fn concept(token: &str) -> Concept {
        Concept { token: token.into(), topic: "t".into(), corpus_doc_freq: 1 }
    }

    #[test]
    fn manifest_round_trip() {
        let docs: Vec<Document> = [1, 5, 30, 40, 50].iter().enumerate().map(|(i, &h)| doc(i, h)).collect();
        let concepts = vec![concept("budget"), concept("senate")];
        let t0 = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap();
        let slices = vec![
            TimeSlice { start: t0, end: t0 + Duration::days(1), docs: vec![0, 1], anomalous_boundary: false, mutation_flags: vec![false, false] },
            TimeSlice { start: t0 + Duration::days(1), end: t0 + Duration::days(3), docs: vec![2, 3, 4], anomalous_boundary: true, mutation_flags: vec![false, true] },
        ];
        let m = slice_manifest(&slices, &concepts);
        assert_eq!(m[1].mutated_concepts, vec!["senate"]);
        assert_eq!(m[1].n_docs, 3);
        let text = serde_json::to_string(&m).unwrap();
        let back: Vec<SliceManifestEntry> = serde_json::from_str(&text).unwrap();
        assert_eq!(slices_from_manifest(&back, &docs, &concepts).unwrap(), slices);
    }

    #[test]
    fn manifest_errors() {
        let docs = vec![doc(0, 1), doc(1, 2)];
        let concepts = vec![concept("budget")];
        let t0 = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap();
        let entry = |start: i64, end: i64, n: usize, mutated: &[&str]| SliceManifestEntry {
            start: t0 + Duration::hours(start),
            end: t0 + Duration::hours(end),
            n_docs: n,
            anomalous_boundary: false,
            mutated_concepts: mutated.iter().map(|s| s.to_string()).collect(),
        };
        assert!(slices_from_manifest(&[], &docs, &concepts).is_err());
        assert!(slices_from_manifest(&[entry(0, 2, 1, &[]), entry(3, 5, 1, &[])], &docs, &concepts).is_err());
        assert!(slices_from_manifest(&[entry(0, 5, 2, &["nope"])], &docs, &concepts).is_err());
        assert!(slices_from_manifest(&[entry(0, 2, 1, &[])], &docs, &concepts).is_err());
        assert!(slices_from_manifest(&[entry(0, 5, 3, &[])], &docs, &concepts).is_err());
        assert!(slices_from_manifest(&[entry(0, 5, 2, &["budget"])], &docs, &concepts).is_ok());
    }

    #[test]
    fn reproject_body() {
        let r = ReprojectRequest::from_json(br#"{"remove": ["watch", "https", "watch"]}"#).unwrap();
        assert_eq!(r.remove.into_iter().collect::<Vec<_>>(), vec!["https", "watch"]);
        assert!(ReprojectRequest::from_json(br#"{"remove": "watch"}"#).is_err());
        assert!(ReprojectRequest::from_json(br#"{"remove": [], "extra": 1}"#).is_err());
        assert!(ReprojectRequest::from_json(b"{}").is_err());
    }
}
