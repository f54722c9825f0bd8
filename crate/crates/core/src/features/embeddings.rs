use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::FeatureError;

/// Token → dense vector lookup loaded from the plain-text vector format:
/// an optional `COUNT DIM` header, then `token v1 ... vDIM` per line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
    /// Non-fatal issues seen while loading (duplicates, count mismatch).
    pub warnings: Vec<String>,
}

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok())
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable { dim, ..Default::default() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Tokens with a vector, in no particular order.
    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.vectors.keys().map(String::as_str)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Insert or replace a vector. Tokens are lowercased.
    pub fn insert(&mut self, token: &str, vector: Vec<f64>) -> Result<(), FeatureError> {
        if vector.len() != self.dim {
            return Err(FeatureError::DimensionMismatch {
                line: 0,
                expected: self.dim,
                got: vector.len(),
            });
        }
        self.vectors.insert(token.to_lowercase(), vector);
        Ok(())
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<EmbeddingTable, FeatureError> {
        let mut table = EmbeddingTable::default();
        let mut declared_count = None;
        let mut dim = None;

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|source| FeatureError::Io { line: lineno, source })?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if dim.is_none() && declared_count.is_none() && table.is_empty() && is_header(&fields) {
                declared_count = fields[0].parse::<usize>().ok();
                let d: usize = fields[1].parse().expect("checked by is_header");
                if d == 0 {
                    return Err(FeatureError::Malformed {
                        line: lineno,
                        reason: "header declares dimension 0".into(),
                    });
                }
                dim = Some(d);
                continue;
            }

            let (token, values) = (fields[0], &fields[1..]);
            let expected = *dim.get_or_insert(values.len());
            if values.len() != expected || expected == 0 {
                return Err(FeatureError::DimensionMismatch {
                    line: lineno,
                    expected,
                    got: values.len(),
                });
            }
            let vector = values
                .iter()
                .map(|v| match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(FeatureError::Malformed {
                        line: lineno,
                        reason: format!("invalid component {v:?}"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let token = token.to_lowercase();
            if table.vectors.insert(token.clone(), vector).is_some() {
                let msg = format!("line {lineno}: duplicate token {token:?}, keeping the later vector");
                log::warn!("{msg}");
                table.warnings.push(msg);
            }
        }

        table.dim = dim.unwrap_or(0);
        if let Some(count) = declared_count {
            if count != table.len() {
                let msg = format!("header declares {count} vectors, read {}", table.len());
                log::warn!("{msg}");
                table.warnings.push(msg);
            }
        }
        Ok(table)
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable, FeatureError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| FeatureError::Unreadable {
        path: path.display().to_string(),
        source,
    })?;
    EmbeddingTable::from_reader(BufReader::new(file))
}
