use regex::Regex;
use std::collections::HashSet;
use std::io::{self, BufRead};
use std::sync::OnceLock;

/// Standard English stopword list, one token per line.
pub const DEFAULT_STOPWORDS: &str = include_str!("stopwords_en.txt");

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b(?:https?://|www\.)\S*").expect("valid regex"))
}

fn word_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // Unicode word runs; a leading `@` marks a mention, a leading `#` a hashtag.
    RE.get_or_init(|| Regex::new(r"[@#]?\w+").expect("valid regex"))
}

/// Lowercasing word tokenizer with URL, mention, punctuation and stopword
/// removal. Tokens are runs of Unicode word characters; hashtags keep their
/// text with the `#` dropped.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Tokenizer::from_stopword_text(DEFAULT_STOPWORDS)
    }
}

impl Tokenizer {
    pub fn from_stopword_text(text: &str) -> Self {
        let stopwords = text
            .lines()
            .map(|l| l.trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        Tokenizer { stopwords }
    }

    pub fn from_stopword_reader<R: BufRead>(reader: R) -> io::Result<Self> {
        let mut text = String::new();
        for line in reader.lines() {
            text.push_str(&line?);
            text.push('\n');
        }
        Ok(Tokenizer::from_stopword_text(&text))
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.stopwords.contains(token)
    }

    fn keep(&self, token: &str) -> bool {
        let mut chars = token.chars();
        if chars.next().is_none() || chars.next().is_none() {
            return false;
        }
        if token.starts_with("http") {
            // Covers both /^https?/ fragments.
            return false;
        }
        if token.chars().all(|c| c.is_ascii_digit()) {
            return false;
        }
        !self.stopwords.contains(token)
    }

    /// Token multiset of `text`, in order of appearance.
    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let lowered = text.to_lowercase();
        let cleaned = url_pattern().replace_all(&lowered, " ");
        word_pattern()
            .find_iter(&cleaned)
            .map(|m| m.as_str())
            .filter(|w| !w.starts_with('@'))
            .map(|w| w.trim_start_matches('#'))
            .filter(|w| self.keep(w))
            .map(str::to_string)
            .collect()
    }

    /// Distinct tokens of `text`, sorted.
    pub fn token_set(&self, text: &str) -> std::collections::BTreeSet<String> {
        self.tokenize(text).into_iter().collect()
    }
}
