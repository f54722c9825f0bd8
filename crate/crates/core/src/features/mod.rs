//! Per-slice concept feature vectors: a row-normalized embedding block
//! joined with a weighted binary document-occurrence block.

mod embeddings;

pub use embeddings::{load_embeddings, EmbeddingTable};

use std::io;
use thiserror::Error;

use crate::ingest::{Concept, Document, Tokenizer};

/// Weight of the occurrence block relative to the embedding block.
pub const DEFAULT_ALPHA_FEAT: f64 = 0.9;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("cannot read embeddings {path}: {source}")]
    Unreadable {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("io error at line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected {expected} components, got {got}")]
    DimensionMismatch { line: usize, expected: usize, got: usize },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("document index {0} does not resolve in the corpus")]
    UnknownDocument(usize),
    #[error("alpha_feat must lie in [0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("occurrence matrix has {got} rows for {expected} concepts")]
    RowMismatch { expected: usize, got: usize },
}

/// Binary concept × document matrix for one slice, stored as sorted column
/// lists per concept row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceMatrix {
    n_docs: usize,
    rows: Vec<Vec<u32>>,
}

impl OccurrenceMatrix {
    /// Build from per-document concept lists. `slice_docs` holds indices
    /// into `occurrences`; column `n` of the result is `slice_docs[n]`.
    pub fn from_concept_lists(
        slice_docs: &[usize],
        occurrences: &[Vec<usize>],
        n_concepts: usize,
    ) -> Result<Self, FeatureError> {
        let mut rows = vec![Vec::new(); n_concepts];
        for (col, &doc) in slice_docs.iter().enumerate() {
            let present = occurrences.get(doc).ok_or(FeatureError::UnknownDocument(doc))?;
            for &c in present {
                if let Some(row) = rows.get_mut(c) {
                    if row.last() != Some(&(col as u32)) {
                        row.push(col as u32);
                    }
                }
            }
        }
        Ok(OccurrenceMatrix { n_docs: slice_docs.len(), rows })
    }

    pub fn n_concepts(&self) -> usize {
        self.rows.len()
    }

    pub fn n_docs(&self) -> usize {
        self.n_docs
    }

    pub fn get(&self, concept: usize, doc: usize) -> bool {
        self.rows[concept].binary_search(&(doc as u32)).is_ok()
    }

    /// Columns (slice-local document positions) where `concept` occurs.
    pub fn row(&self, concept: usize) -> &[u32] {
        &self.rows[concept]
    }

    /// Number of slice documents containing `concept`.
    pub fn doc_freq(&self, concept: usize) -> usize {
        self.rows[concept].len()
    }

    pub fn dense_row(&self, concept: usize) -> Vec<u8> {
        let mut out = vec![0; self.n_docs];
        for &c in &self.rows[concept] {
            out[c as usize] = 1;
        }
        out
    }

    /// Keep only the given rows, in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> OccurrenceMatrix {
        OccurrenceMatrix {
            n_docs: self.n_docs,
            rows: keep.iter().map(|&r| self.rows[r].clone()).collect(),
        }
    }
}

/// Occurrence matrix of `concepts` over the slice documents `slice_docs`
/// (indices into `docs`), tokenizing each document.
pub fn build_occurrence(
    slice_docs: &[usize],
    concepts: &[Concept],
    docs: &[Document],
    tokenizer: &Tokenizer,
) -> Result<OccurrenceMatrix, FeatureError> {
    let index: std::collections::HashMap<&str, usize> = concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (c.token.as_str(), i))
        .collect();
    let mut rows = vec![Vec::new(); concepts.len()];
    for (col, &d) in slice_docs.iter().enumerate() {
        let doc = docs.get(d).ok_or(FeatureError::UnknownDocument(d))?;
        for token in tokenizer.token_set(&doc.text) {
            if let Some(&c) = index.get(token.as_str()) {
                rows[c].push(col as u32);
            }
        }
    }
    Ok(OccurrenceMatrix { n_docs: slice_docs.len(), rows })
}

/// Per-document sorted lists of the concept indices each document contains.
pub fn concept_occurrences(
    docs: &[Document],
    concepts: &[Concept],
    tokenizer: &Tokenizer,
) -> Vec<Vec<usize>> {
    let index: std::collections::HashMap<&str, usize> = concepts
        .iter()
        .enumerate()
        .map(|(i, c)| (c.token.as_str(), i))
        .collect();
    docs.iter()
        .map(|d| {
            let mut present: Vec<usize> = tokenizer
                .token_set(&d.text)
                .iter()
                .filter_map(|t| index.get(t.as_str()).copied())
                .collect();
            present.sort_unstable();
            present
        })
        .collect()
}

/// Feature rows `[D_m | alpha_feat * F_m]` for the concepts of one slice.
///
/// The embedding block is L2-normalized per row (zero rows stay zero, which
/// is also how out-of-vocabulary concepts are represented). The occurrence
/// block stays sparse; distances are computed without densifying it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptFeatureMatrix {
    tokens: Vec<String>,
    embedding: Vec<Vec<f64>>,
    occurrence: OccurrenceMatrix,
    alpha_feat: f64,
}

pub fn build_features(
    table: &EmbeddingTable,
    tokens: &[String],
    occurrence: &OccurrenceMatrix,
    alpha_feat: f64,
) -> Result<ConceptFeatureMatrix, FeatureError> {
    if !(0.0..=1.0).contains(&alpha_feat) {
        return Err(FeatureError::InvalidAlpha(alpha_feat));
    }
    if tokens.len() != occurrence.n_concepts() {
        return Err(FeatureError::RowMismatch {
            expected: tokens.len(),
            got: occurrence.n_concepts(),
        });
    }
    let dim = table.dim();
    let embedding = tokens
        .iter()
        .map(|t| match table.get(t) {
            Some(v) => {
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    v.iter().map(|x| x / norm).collect()
                } else {
                    vec![0.0; dim]
                }
            }
            None => vec![0.0; dim],
        })
        .collect();
    Ok(ConceptFeatureMatrix {
        tokens: tokens.to_vec(),
        embedding,
        occurrence: occurrence.clone(),
        alpha_feat,
    })
}

impl ConceptFeatureMatrix {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn alpha_feat(&self) -> f64 {
        self.alpha_feat
    }

    pub fn occurrence(&self) -> &OccurrenceMatrix {
        &self.occurrence
    }

    pub fn embedding_row(&self, m: usize) -> &[f64] {
        &self.embedding[m]
    }

    /// Row `m` as a dense vector of length `dim + N_t`.
    pub fn dense_row(&self, m: usize) -> Vec<f64> {
        let mut row = self.embedding[m].clone();
        row.extend(
            self.occurrence
                .dense_row(m)
                .into_iter()
                .map(|b| self.alpha_feat * b as f64),
        );
        row
    }

    pub fn norm_sq(&self, m: usize) -> f64 {
        let e: f64 = self.embedding[m].iter().map(|x| x * x).sum();
        e + self.alpha_feat * self.alpha_feat * self.occurrence.doc_freq(m) as f64
    }

    /// Squared Euclidean distance between rows `i` and `j`.
    pub fn sq_dist(&self, i: usize, j: usize) -> f64 {
        let e: f64 = self.embedding[i]
            .iter()
            .zip(&self.embedding[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let sym_diff = symmetric_difference_len(self.occurrence.row(i), self.occurrence.row(j));
        e + self.alpha_feat * self.alpha_feat * sym_diff as f64
    }

    /// Row-major `M × M` matrix of squared distances.
    pub fn sq_distances(&self) -> Vec<f64> {
        let m = self.len();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = self.sq_dist(i, j);
                out[i * m + j] = d;
                out[j * m + i] = d;
            }
        }
        out
    }

    /// Keep only the given rows, in order.
    pub fn select_rows(&self, keep: &[usize]) -> ConceptFeatureMatrix {
        ConceptFeatureMatrix {
            tokens: keep.iter().map(|&r| self.tokens[r].clone()).collect(),
            embedding: keep.iter().map(|&r| self.embedding[r].clone()).collect(),
            occurrence: self.occurrence.select_rows(keep),
            alpha_feat: self.alpha_feat,
        }
    }
}

fn symmetric_difference_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    a.len() + b.len() - 2 * common
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn doc(id: &str, text: &str) -> Document {
        Document {
            id: id.into(),
            timestamp: Utc.timestamp_opt(0, 0).unwrap(),
            text: text.into(),
            group: "g".into(),
            topic: "t".into(),
        }
    }

    fn concept(token: &str) -> Concept {
        Concept { token: token.into(), topic: "t".into(), corpus_doc_freq: 1 }
    }

    #[test]
    fn occurrence_by_brute_force_scan() {
        let docs = [doc("1", "senate budget"), doc("2", "house vote"), doc("3", "budget budget deal")];
        let concepts = [concept("budget"), concept("vote"), concept("absent")];
        let f = build_occurrence(&[0, 1, 2], &concepts, &docs, &Tokenizer::default()).unwrap();
        assert_eq!(f.dense_row(0), [1, 0, 1]);
        assert_eq!(f.dense_row(1), [0, 1, 0]);
        assert_eq!(f.dense_row(2), [0, 0, 0]);
        assert!(build_occurrence(&[7], &concepts, &docs, &Tokenizer::default()).is_err());
    }

    #[test]
    fn concept_lists_agree_with_tokenizing_scan() {
        let docs = [doc("1", "Budget talks, senate"), doc("2", "#budget now"), doc("3", "nothing")];
        let concepts = [concept("budget"), concept("senate")];
        let t = Tokenizer::default();
        let occ = concept_occurrences(&docs, &concepts, &t);
        let a = OccurrenceMatrix::from_concept_lists(&[2, 0, 1], &occ, 2).unwrap();
        let b = build_occurrence(&[2, 0, 1], &concepts, &docs, &t).unwrap();
        assert_eq!(a, b);
    }

    fn table() -> EmbeddingTable {
        EmbeddingTable::from_reader("a 3 4 0\nb 0 2 0".as_bytes()).unwrap()
    }

    fn occ(rows: Vec<Vec<u32>>, n_docs: usize) -> OccurrenceMatrix {
        OccurrenceMatrix { n_docs, rows }
    }

    #[test]
    fn alpha_zero_pads_with_zeros() {
        let f = occ(vec![vec![0, 2]], 3);
        let g = build_features(&table(), &["a".into()], &f, 0.0).unwrap();
        assert_eq!(g.dense_row(0), [0.6, 0.8, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn occurrence_suffix_scaled_by_alpha() {
        let f = occ(vec![vec![0, 2]], 3);
        let g = build_features(&table(), &["b".into()], &f, 0.9).unwrap();
        assert_eq!(g.dense_row(0), [0.0, 1.0, 0.0, 0.9, 0.0, 0.9]);
    }

    #[test]
    fn oov_gets_zero_embedding() {
        let f = occ(vec![vec![1]], 2);
        let g = build_features(&table(), &["nobudgetnopay".into()], &f, 0.9).unwrap();
        assert_eq!(g.dense_row(0), [0.0, 0.0, 0.0, 0.0, 0.9]);
    }

    #[test]
    fn rejects_bad_alpha() {
        let f = occ(vec![vec![]], 1);
        assert!(build_features(&table(), &["a".into()], &f, 1.5).is_err());
    }

    fn dense_sq_dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    proptest! {
        #[test]
        fn sparse_distance_matches_dense(
            bits in prop::collection::vec(prop::collection::vec(any::<bool>(), 12), 4),
            emb in prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 4),
            alpha in 0.0f64..=1.0,
        ) {
            let mut t = EmbeddingTable::new(3);
            let tokens: Vec<String> = (0..4).map(|i| format!("w{i}")).collect();
            for (tok, v) in tokens.iter().zip(&emb) {
                t.insert(tok, v.clone()).unwrap();
            }
            let rows = bits.iter().map(|r| {
                r.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u32).collect()
            }).collect();
            let g = build_features(&t, &tokens, &occ(rows, 12), alpha).unwrap();
            for i in 0..4 {
                let df = bits[i].iter().filter(|&&b| b).count() as f64;
                let emb_sq: f64 = g.embedding_row(i).iter().map(|x| x * x).sum();
                prop_assert!((g.norm_sq(i) - (emb_sq + alpha * alpha * df)).abs() < 1e-12);
                let dense: f64 = g.dense_row(i).iter().map(|x| x * x).sum();
                prop_assert!((g.norm_sq(i) - dense).abs() < 1e-9);
                for j in 0..4 {
                    let want = dense_sq_dist(&g.dense_row(i), &g.dense_row(j));
                    prop_assert!((g.sq_dist(i, j) - want).abs() < 1e-9);
                }
            }
        }
    }
}
