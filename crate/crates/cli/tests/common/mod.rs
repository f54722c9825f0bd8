#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const WORDS: [&str; 10] =
    ["budget", "senate", "vote", "deficit", "spending", "taxes", "shutdown", "watch", "video", "https"];

const OFF_TOPIC: [&str; 4] = ["goal", "match", "league", "coach"];

struct XorShift(u64);

impl XorShift {
    fn next(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    fn chance(&mut self, p: f64) -> bool {
        (self.next() % 10_000) as f64 / 10_000.0 < p
    }
}

fn word_rate(word: &str, day: u32) -> f64 {
    match word {
        "shutdown" if (6..9).contains(&day) => 0.9,
        "shutdown" => 0.0,
        "watch" | "video" => 0.8,
        "budget" => 0.7,
        _ => 0.3,
    }
}

/// Twelve days of a "budget" topic, ten documents a day, with "shutdown"
/// bursting on days 6 to 8, plus a few off-topic "sport" documents.
pub fn corpus_jsonl() -> String {
    let mut rng = XorShift(0x9e37_79b9_7f4a_7c15);
    let mut out = String::new();
    let mut id = 0;
    for day in 0..12u32 {
        for j in 0..10u32 {
            let mut words: Vec<&str> = WORDS.iter().copied().filter(|w| rng.chance(word_rate(w, day))).collect();
            if words.is_empty() {
                words.push("budget");
            }
            let text = format!("The {} today", words.join(" and "));
            let ts = format!("2013-01-{:02}T{:02}:{:02}:00Z", day + 1, 8 + j, (7 * j) % 60);
            writeln!(
                out,
                r#"{{"id": "b{id}", "timestamp": "{ts}", "text": "{text}", "group": "g{}", "topic": "budget"}}"#,
                j % 3
            )
            .unwrap();
            id += 1;
        }
        let ts = format!("2013-01-{:02}T20:00:00Z", day + 1);
        let text = OFF_TOPIC.join(" ");
        writeln!(out, r#"{{"id": "s{day}", "timestamp": "{ts}", "text": "{text}", "group": "g0", "topic": "sport"}}"#)
            .unwrap();
    }
    out
}

/// Four-dimensional vectors derived from each word's bytes.
pub fn embeddings_txt() -> String {
    let mut out = String::new();
    for w in WORDS.iter().chain(&OFF_TOPIC) {
        let mut h: u64 = 1469598103934665603;
        let comps: Vec<String> = (0..4)
            .map(|k| {
                for b in w.bytes().chain([k as u8]) {
                    h = (h ^ b as u64).wrapping_mul(1099511628211);
                }
                format!("{:.4}", (h % 2000) as f64 / 1000.0 - 1.0)
            })
            .collect();
        writeln!(out, "{w} {}", comps.join(" ")).unwrap();
    }
    out
}

/// Write corpus, embeddings and a config under `dir`; returns the config path.
/// Paths in the config are relative to `dir`.
pub fn write_fixture(dir: &Path) -> PathBuf {
    fs::write(dir.join("corpus.jsonl"), corpus_jsonl()).unwrap();
    fs::write(dir.join("embeddings.txt"), embeddings_txt()).unwrap();
    let cfg = dir.join("config.json");
    fs::write(
        &cfg,
        r#"{
  "corpus": "corpus.jsonl",
  "embeddings": "embeddings.txt",
  "topic": "budget",
  "top_k": 10,
  "perplexity": 3,
  "output_dir": "out"
}
"#,
    )
    .unwrap();
    cfg
}
