//! Corpus ingestion: JSON-lines documents, tokenization and per-topic
//! concept extraction.

mod concepts;
mod tokenize;

pub use concepts::{extract_concepts, Concept, DEFAULT_TOP_K};
pub use tokenize::{Tokenizer, DEFAULT_STOPWORDS};

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::HashSet;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

/// Fraction of malformed records above which loading fails.
pub const MAX_REJECT_FRACTION: f64 = 0.10;

const FIELDS: [&str; 5] = ["id", "timestamp", "text", "group", "topic"];

/// One timestamped, topic-labeled text item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub timestamp: DateTime<Utc>,
    pub text: String,
    pub group: String,
    pub topic: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RejectedLine {
    /// 1-based line number in the source file.
    pub line: usize,
    pub reason: String,
}

/// A loaded corpus: documents sorted ascending by timestamp, plus the
/// malformed lines that were skipped.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub rejected: Vec<RejectedLine>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus {path}: {source}")]
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
    #[error("{rejected} of {total} records malformed (lines {lines:?}): {first_reason}")]
    TooManyMalformed {
        rejected: usize,
        total: usize,
        lines: Vec<usize>,
        first_reason: String,
    },
    #[error("duplicate document id {id:?} at line {line} (first seen at line {first_line})")]
    DuplicateId {
        id: String,
        line: usize,
        first_line: usize,
    },
}

/// Parse a single corpus record. Returns a human-readable reason on failure.
pub fn parse_record(line: &str) -> Result<Document, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value
        .as_object()
        .ok_or_else(|| "record is not a JSON object".to_string())?;
    let field = |name: &str| string_field(obj, name);

    let id = field("id")?;
    if id.is_empty() {
        return Err("empty `id`".into());
    }
    let raw_ts = field("timestamp")?;
    let timestamp = parse_timestamp(&raw_ts)?;
    let text = field("text")?;
    let group = field("group")?;
    let topic = field("topic")?;
    if topic.trim().is_empty() {
        return Err("empty `topic`".into());
    }
    Ok(Document {
        id,
        timestamp,
        text,
        group,
        topic,
    })
}

fn string_field(obj: &Map<String, Value>, name: &str) -> Result<String, String> {
    match obj.get(name) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(other) => Err(format!("field `{name}` must be a string, got {other}")),
        None => Err(format!("missing field `{name}`")),
    }
}

/// ISO-8601 / RFC 3339 instant, converted to UTC and truncated to seconds.
pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>, String> {
    let ts = DateTime::parse_from_rfc3339(raw.trim())
        .map_err(|e| format!("bad timestamp {raw:?}: {e}"))?
        .with_timezone(&Utc);
    Ok(ts.with_nanosecond(0).unwrap_or(ts))
}

impl Corpus {
    /// Read a JSON-lines corpus. Blank lines are ignored.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Corpus, CorpusError> {
        let mut documents = Vec::new();
        let mut rejected = Vec::new();
        let mut total = 0usize;
        let mut seen: std::collections::HashMap<String, usize> = Default::default();

        for (idx, line) in reader.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.map_err(|source| CorpusError::Io {
                line: lineno,
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            total += 1;
            match parse_record(&line) {
                Ok(doc) => {
                    if let Some(&first_line) = seen.get(&doc.id) {
                        return Err(CorpusError::DuplicateId {
                            id: doc.id,
                            line: lineno,
                            first_line,
                        });
                    }
                    seen.insert(doc.id.clone(), lineno);
                    documents.push(doc);
                }
                Err(reason) => rejected.push(RejectedLine {
                    line: lineno,
                    reason,
                }),
            }
        }

        if !rejected.is_empty() && rejected.len() as f64 > MAX_REJECT_FRACTION * total as f64 {
            return Err(CorpusError::TooManyMalformed {
                rejected: rejected.len(),
                total,
                lines: rejected.iter().map(|r| r.line).collect(),
                first_reason: rejected[0].reason.clone(),
            });
        }
        for r in &rejected {
            log::warn!("skipping malformed corpus line {}: {}", r.line, r.reason);
        }

        // Stable: equal timestamps keep file order.
        documents.sort_by_key(|d| d.timestamp);
        Ok(Corpus {
            documents,
            rejected,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| CorpusError::Unreadable {
            path: path.display().to_string(),
            source,
        })?;
        Corpus::from_reader(BufReader::new(file))
    }

    /// Distinct topic labels in first-seen order.
    pub fn topics(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.documents
            .iter()
            .filter(|d| seen.insert(d.topic.as_str()))
            .map(|d| d.topic.clone())
            .collect()
    }
}

/// Load a corpus file. See [`Corpus::from_reader`] for the record format.
pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    Corpus::load(path)
}

/// Write documents in the JSON-lines corpus format.
pub fn write_corpus<W: Write>(mut out: W, docs: &[Document]) -> io::Result<()> {
    for doc in docs {
        let mut obj = Map::new();
        for name in FIELDS {
            let v = match name {
                "id" => doc.id.clone(),
                "timestamp" => doc.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                "text" => doc.text.clone(),
                "group" => doc.group.clone(),
                _ => doc.topic.clone(),
            };
            obj.insert(name.to_string(), Value::String(v));
        }
        serde_json::to_writer(&mut out, &Value::Object(obj))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
