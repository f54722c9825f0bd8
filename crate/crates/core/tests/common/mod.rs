//! Test-only oracles and fixtures. Nothing here calls into the projection
//! internals it is used to check.
#![allow(dead_code)]

use conceptflow::features::{build_features, ConceptFeatureMatrix, EmbeddingTable, OccurrenceMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random feature frame: `m` concepts with `dim`-d embeddings and random
/// occurrences over `n_docs` documents.
pub fn random_frame(rng: &mut ChaCha8Rng, m: usize, dim: usize, n_docs: usize) -> ConceptFeatureMatrix {
    let mut table = EmbeddingTable::new(dim);
    let tokens: Vec<String> = (0..m).map(|i| format!("c{i:02}")).collect();
    for t in &tokens {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        table.insert(t, v).unwrap();
    }
    let occurrences: Vec<Vec<usize>> = (0..n_docs)
        .map(|_| (0..m).filter(|_| rng.random_bool(0.3)).collect())
        .collect();
    let docs: Vec<usize> = (0..n_docs).collect();
    let occ = OccurrenceMatrix::from_concept_lists(&docs, &occurrences, m).unwrap();
    build_features(&table, &tokens, &occ, 0.9).unwrap()
}

/// Clustered frame: `groups` clusters of `per_group` concepts; concepts in
/// a cluster share an embedding direction and co-occur in the same docs.
pub fn clustered_frame(rng: &mut ChaCha8Rng, groups: usize, per_group: usize) -> ConceptFeatureMatrix {
    let dim = 8;
    let m = groups * per_group;
    let mut table = EmbeddingTable::new(dim);
    let tokens: Vec<String> = (0..m).map(|i| format!("c{i:02}")).collect();
    let centers: Vec<Vec<f64>> = (0..groups)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    for (i, t) in tokens.iter().enumerate() {
        let c = &centers[i / per_group];
        let v = c.iter().map(|x| x + rng.random_range(-0.1..0.1)).collect();
        table.insert(t, v).unwrap();
    }
    let n_docs = 60;
    let occurrences: Vec<Vec<usize>> = (0..n_docs)
        .map(|d| {
            let g = d % groups;
            (0..m)
                .filter(|&c| c / per_group == g && rng.random_bool(0.7))
                .collect()
        })
        .collect();
    let docs: Vec<usize> = (0..n_docs).collect();
    let occ = OccurrenceMatrix::from_concept_lists(&docs, &occurrences, m).unwrap();
    build_features(&table, &tokens, &occ, 0.9).unwrap()
}

/// Dense rows of a feature frame.
pub fn dense_rows(g: &ConceptFeatureMatrix) -> Vec<Vec<f64>> {
    (0..g.len()).map(|i| g.dense_row(i)).collect()
}

/// Joint affinities straight from the textbook definition: Gaussian
/// conditionals with per-point sigma found by bisection on sigma itself
/// (perplexity measured in bits), then symmetrized.
pub fn oracle_affinities(rows: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let m = rows.len();
    let dist = |i: usize, j: usize| -> f64 {
        rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum()
    };
    let conditional = |i: usize, sigma: f64| -> Vec<f64> {
        let mut w = vec![0.0; m];
        let d_min = (0..m).filter(|&j| j != i).map(|j| dist(i, j)).fold(f64::INFINITY, f64::min);
        for j in 0..m {
            if j != i {
                w[j] = (-(dist(i, j) - d_min) / (2.0 * sigma * sigma)).exp();
            }
        }
        let s: f64 = w.iter().sum();
        w.iter().map(|x| x / s).collect()
    };
    let perp_of = |p: &[f64]| -> f64 {
        let h: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum();
        2f64.powf(h)
    };
    let mut cond = vec![vec![0.0; m]; m];
    for i in 0..m {
        let (mut lo, mut hi) = (1e-6_f64, 1e6_f64);
        for _ in 0..300 {
            let mid = (lo * hi).sqrt();
            if perp_of(&conditional(i, mid)) > perplexity {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        cond[i] = conditional(i, (lo * hi).sqrt());
    }
    let mut p = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            if i != j {
                p[i][j] = (cond[i][j] + cond[j][i]) / (2.0 * m as f64);
            }
        }
    }
    p
}

pub struct Schedule {
    pub iterations: usize,
    pub learning_rate: f64,
    pub momentum: (f64, f64),
    pub switch_at: usize,
    pub exaggeration: f64,
    pub exaggeration_iters: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            iterations: 1000,
            learning_rate: 50.0,
            momentum: (0.5, 0.8),
            switch_at: 250,
            exaggeration: 4.0,
            exaggeration_iters: 100,
        }
    }
}

/// Plain 1-D t-SNE by direct formula, centered at the end.
pub fn oracle_tsne_1d(p: &[Vec<f64>], init: &[f64], s: &Schedule) -> Vec<f64> {
    let m = init.len();
    let mut y = init.to_vec();
    let mut vel = vec![0.0; m];
    for it in 0..s.iterations {
        let ex = if it < s.exaggeration_iters { s.exaggeration } else { 1.0 };
        let mom = if it < s.switch_at { s.momentum.0 } else { s.momentum.1 };
        let mut num = vec![vec![0.0; m]; m];
        let mut z = 0.0;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    num[i][j] = 1.0 / (1.0 + (y[i] - y[j]).powi(2));
                    z += num[i][j];
                }
            }
        }
        let mut grad = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    let q = num[i][j] / z;
                    grad[i] += 4.0 * (ex * p[i][j] - q) * (y[i] - y[j]) * num[i][j];
                }
            }
        }
        for i in 0..m {
            vel[i] = mom * vel[i] - s.learning_rate * grad[i];
            y[i] += vel[i];
        }
    }
    let mean = y.iter().sum::<f64>() / m as f64;
    y.iter().map(|v| v - mean).collect()
}

/// Central finite-difference gradient of `f` at `y`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, y: &[f64], h: f64) -> Vec<f64> {
    (0..y.len())
        .map(|i| {
            let mut plus = y.to_vec();
            let mut minus = y.to_vec();
            plus[i] += h;
            minus[i] -= h;
            (f(&plus) - f(&minus)) / (2.0 * h)
        })
        .collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn mean_abs_drift(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
}

/// A family of tokens that tend to appear together and share an embedding
/// direction.
pub struct Group {
    pub tokens: &'static [&'static str],
    /// Chance each token appears in a document of this group.
    pub p_token: f64,
}

/// Synthetic single-topic corpus. Each document belongs to one group
/// (chosen uniformly), carries each of that group's tokens with
/// `p_token` (at least one), each `noise` token with its own probability,
/// and some stopword filler. `burst`, when given, is
/// `(token, first_day, days, rate_in, rate_out)` for an extra token whose
/// rate changes inside the window.
pub struct CorpusSpec {
    pub seed: u64,
    pub days: i64,
    pub docs_per_day: usize,
    pub groups: Vec<Group>,
    pub noise: Vec<(&'static str, f64)>,
    pub burst: Option<(&'static str, i64, i64, f64, f64)>,
}

pub fn synth_corpus(spec: &CorpusSpec) -> Vec<conceptflow::ingest::Document> {
    use chrono::{Duration, TimeZone, Utc};
    let mut r = rng(spec.seed);
    let t0 = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap();
    let mut docs = Vec::new();
    for day in 0..spec.days {
        for k in 0..spec.docs_per_day {
            let g = &spec.groups[r.random_range(0..spec.groups.len())];
            let mut words: Vec<&str> = g.tokens.iter().copied().filter(|_| r.random_bool(g.p_token)).collect();
            if words.is_empty() {
                words.push(g.tokens[r.random_range(0..g.tokens.len())]);
            }
            for &(tok, p) in &spec.noise {
                if r.random_bool(p) {
                    words.push(tok);
                }
            }
            if let Some((tok, start, len, rate_in, rate_out)) = spec.burst {
                let rate = if day >= start && day < start + len { rate_in } else { rate_out };
                if r.random_bool(rate) {
                    words.push(tok);
                }
            }
            words.insert(r.random_range(0..=words.len()), "the");
            let secs = (k as i64 * 86_400) / spec.docs_per_day as i64;
            docs.push(conceptflow::ingest::Document {
                id: format!("d{day}-{k}"),
                timestamp: t0 + Duration::days(day) + Duration::seconds(secs),
                text: words.join(" "),
                group: "g".into(),
                topic: "budget".into(),
            });
        }
    }
    docs
}

/// Embedding file text: group members near a shared random direction,
/// every other listed token on its own random direction.
pub fn synth_embeddings(seed: u64, groups: &[Group], others: &[&str], dim: usize) -> String {
    let mut r = rng(seed);
    let mut out = String::new();
    let mut line = |tok: &str, v: &[f64]| {
        out.push_str(tok);
        for x in v {
            out.push_str(&format!(" {x:.6}"));
        }
        out.push('\n');
    };
    for g in groups {
        let center: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        for tok in g.tokens {
            let v: Vec<f64> = center.iter().map(|c| c + r.random_range(-0.1..0.1)).collect();
            line(tok, &v);
        }
    }
    for tok in others {
        let v: Vec<f64> = (0..dim).map(|_| r.random_range(-1.0..1.0)).collect();
        line(tok, &v);
    }
    out
}

/// Write corpus and embeddings into `dir` and return a config pointing at
/// them with output under `dir/out`.
pub fn write_fixture(dir: &std::path::Path, spec: &CorpusSpec) -> conceptflow::pipeline::PipelineConfig {
    let docs = synth_corpus(spec);
    let corpus = dir.join("corpus.jsonl");
    conceptflow::ingest::write_corpus(std::fs::File::create(&corpus).unwrap(), &docs).unwrap();
    let mut others: Vec<&str> = spec.noise.iter().map(|n| n.0).collect();
    others.extend(spec.burst.iter().map(|b| b.0));
    let embeddings = dir.join("embeddings.txt");
    std::fs::write(&embeddings, synth_embeddings(spec.seed ^ 0x5eed, &spec.groups, &others, 16)).unwrap();
    conceptflow::pipeline::PipelineConfig {
        corpus,
        embeddings,
        output_dir: dir.join("out"),
        ..Default::default()
    }
}

pub const PLANTED: Group = Group { tokens: &["deficit", "spending", "taxes", "revenue", "surplus"], p_token: 0.6 };
pub const WEATHER: Group = Group { tokens: &["storm", "flood", "rain", "wind", "coast"], p_token: 0.6 };
pub const SPORT: Group = Group { tokens: &["match", "goal", "team", "coach", "league"], p_token: 0.6 };

/// Three planted groups over `days` days with two near-ubiquitous noise
/// tokens.
pub fn noise_spec(seed: u64, days: i64) -> CorpusSpec {
    CorpusSpec {
        seed,
        days,
        docs_per_day: 30,
        groups: vec![PLANTED, WEATHER, SPORT],
        noise: vec![("watch", 0.9), ("video", 0.85)],
        burst: None,
    }
}

/// Steady groups plus a `spike` token bursting on days 20..25 of 60.
pub fn burst_spec(seed: u64) -> CorpusSpec {
    CorpusSpec {
        seed,
        days: 60,
        docs_per_day: 40,
        groups: vec![PLANTED, WEATHER, SPORT],
        noise: vec![],
        burst: Some(("shutdown", 20, 5, 0.8, 0.05)),
    }
}

/// Day-granularity base slices with binomial concept counts:
/// `rate(day, concept)` is the occurrence probability.
pub fn synthetic_base_slices(
    rng: &mut ChaCha8Rng,
    days: usize,
    docs_per_day: usize,
    n_concepts: usize,
    rate: impl Fn(usize, usize) -> f64,
) -> Vec<conceptflow::slicing::BaseSlice> {
    use chrono::{Duration, TimeZone, Utc};
    use rand_distr::{Binomial, Distribution};
    let t0 = Utc.with_ymd_and_hms(2013, 1, 1, 0, 0, 0).unwrap();
    (0..days)
        .map(|d| {
            let hits: Vec<u64> = (0..n_concepts)
                .map(|c| Binomial::new(docs_per_day as u64, rate(d, c)).unwrap().sample(rng))
                .collect();
            conceptflow::slicing::BaseSlice {
                start: t0 + Duration::days(d as i64),
                end: t0 + Duration::days(d as i64 + 1),
                docs: (d * docs_per_day..(d + 1) * docs_per_day).collect(),
                occ_rate: hits.iter().map(|&h| h as f64 / docs_per_day as f64).collect(),
                hits,
            }
        })
        .collect()
}

/// Day offsets (from the first slice) at which slices open with an
/// anomaly cut.
pub fn cut_days(slices: &[conceptflow::slicing::TimeSlice]) -> Vec<i64> {
    let t0 = slices[0].start;
    slices.iter().filter(|s| s.anomalous_boundary).map(|s| (s.start - t0).num_days()).collect()
}

/// Maximal runs of the sorted positions whose consecutive gaps are within
/// `thresh`, as (first, last) indices into the sorted order.
pub fn runs(sorted_pos: &[f64], thresh: f64) -> Vec<(usize, usize)> {
    let mut out = vec![];
    let mut start = 0;
    for k in 1..=sorted_pos.len() {
        if k == sorted_pos.len() || sorted_pos[k] - sorted_pos[k - 1] > thresh {
            out.push((start, k - 1));
            start = k;
        }
    }
    out
}
