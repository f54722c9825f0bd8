use super::{Document, Tokenizer};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Concepts kept per topic when no explicit K is given.
pub const DEFAULT_TOP_K: usize = 50;

/// A high document-frequency keyword of one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub token: String,
    pub topic: String,
    pub corpus_doc_freq: usize,
}

/// Top-`k` tokens of `topic` by document frequency; ties go to the
/// lexicographically smaller token.
pub fn extract_concepts(
    docs: &[Document],
    topic: &str,
    k: usize,
    tokenizer: &Tokenizer,
) -> Vec<Concept> {
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in docs.iter().filter(|d| d.topic == topic) {
        for token in tokenizer.token_set(&doc.text) {
            *df.entry(token).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(token, corpus_doc_freq)| Concept {
            token,
            topic: topic.to_string(),
            corpus_doc_freq,
        })
        .collect()
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

    fn tokens(c: &[Concept]) -> Vec<&str> {
        c.iter().map(|c| c.token.as_str()).collect()
    }

    // Single-letter tokens are stopped by the default tokenizer, so these
    // use an empty stopword list and two-letter stand-ins.
    fn bare() -> Tokenizer {
        Tokenizer::from_stopword_text("")
    }

    #[test]
    fn no_documents() {
        assert!(extract_concepts(&[], "t", 10, &bare()).is_empty());
    }

    #[test]
    fn ranks_by_document_frequency() {
        let docs = [doc("1", "aa bb"), doc("2", "aa cc")];
        let c = extract_concepts(&docs, "t", 1, &bare());
        assert_eq!(tokens(&c), ["aa"]);
        assert_eq!(c[0].corpus_doc_freq, 2);
    }

    #[test]
    fn ties_break_lexicographically() {
        let docs = [doc("1", "aa bb"), doc("2", "bb aa")];
        assert_eq!(tokens(&extract_concepts(&docs, "t", 2, &bare())), ["aa", "bb"]);
    }

    #[test]
    fn repeated_tokens_count_once_per_document() {
        let docs = [doc("1", "aa aa aa"), doc("2", "bb"), doc("3", "bb")];
        assert_eq!(tokens(&extract_concepts(&docs, "t", 2, &bare())), ["bb", "aa"]);
    }

    #[test]
    fn other_topics_ignored() {
        let mut d = doc("1", "aa");
        d.topic = "other".into();
        assert!(extract_concepts(&[d], "t", 5, &bare()).is_empty());
    }

    proptest! {
        #[test]
        fn bounded_and_non_increasing(texts in prop::collection::vec("[a-d ]{0,12}", 0..20), k in 1usize..6) {
            let docs: Vec<_> = texts.iter().enumerate().map(|(i, t)| doc(&i.to_string(), t)).collect();
            let c = extract_concepts(&docs, "t", k, &bare());
            prop_assert!(c.len() <= k);
            for w in c.windows(2) {
                prop_assert!(w[0].corpus_doc_freq >= w[1].corpus_doc_freq);
            }
        }
    }
}
