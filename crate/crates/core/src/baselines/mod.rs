//! Classic extractive summarizers (Centroid, LexRank, MMR, TextRank) and
//! the pipeline combinators around them.

pub mod pipelines;
pub mod rank;

pub use pipelines::{
    extract_then_abstract, extract_then_translate, extract_with, translate_then_extract,
    ExtractorMethod,
};
pub use rank::{
    lexrank_stationary, lexrank_summarize, textrank_stationary, textrank_summarize,
    DEFAULT_DAMPING, DEFAULT_SIM_THRESHOLD, DEFAULT_TOLERANCE, MAX_ITERATIONS,
};

use crate::dataset::TransportError;
use crate::graph::ClusterIndex;
use crate::text::{DocumentCluster, Sentence};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("cluster has no sentences")]
    EmptyCluster,
    #[error("summary budget must be at least 1")]
    InvalidBudget,
    #[error("unknown extractor method {0:?}")]
    UnknownMethod(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Generator(#[from] crate::generator::GeneratorError),
}

/// Greedy selection default for the diversity/relevance trade-off.
pub const DEFAULT_MMR_LAMBDA: f64 = 0.7;
/// Sentence budget mirroring the model's default top-K.
pub const DEFAULT_BUDGET: usize = 10;

/// Sparse TF-IDF weights for one sentence with the precomputed Euclidean
/// norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceVector {
    pub weights: BTreeMap<String, f64>,
    pub norm: f64,
}

impl SentenceVector {
    pub fn new(weights: BTreeMap<String, f64>) -> Self {
        let norm = weights.values().map(|w| w * w).sum::<f64>().sqrt();
        SentenceVector { weights, norm }
    }

    pub fn cosine(&self, other: &SentenceVector) -> f64 {
        if self.norm == 0.0 || other.norm == 0.0 {
            return 0.0;
        }
        let (small, large) = if self.weights.len() <= other.weights.len() {
            (self, other)
        } else {
            (other, self)
        };
        let dot: f64 = small
            .weights
            .iter()
            .filter_map(|(token, w)| large.weights.get(token).map(|v| w * v))
            .sum();
        dot / (self.norm * other.norm)
    }
}

/// TF-IDF vectors for every sentence of the cluster, in reading order.
/// All tokens count here; the length filter is a graph-module concern.
pub fn sentence_vectors(cluster: &DocumentCluster) -> Vec<SentenceVector> {
    let index = ClusterIndex::build(cluster);
    cluster
        .sentences()
        .iter()
        .map(|sentence| sentence_vector(sentence, &index))
        .collect()
}

fn sentence_vector(sentence: &Sentence, index: &ClusterIndex) -> SentenceVector {
    let mut weights = BTreeMap::new();
    for token in &sentence.tokens {
        if !weights.contains_key(token) {
            weights.insert(token.clone(), index.tfidf(token, sentence));
        }
    }
    SentenceVector::new(weights)
}

/// Mean of the given vectors as a dense-over-union sparse vector.
pub fn centroid_vector(vectors: &[SentenceVector]) -> SentenceVector {
    let mut sums: BTreeMap<String, f64> = BTreeMap::new();
    for v in vectors {
        for (token, w) in &v.weights {
            *sums.entry(token.clone()).or_insert(0.0) += w;
        }
    }
    let n = vectors.len().max(1) as f64;
    for w in sums.values_mut() {
        *w /= n;
    }
    SentenceVector::new(sums)
}

/// Selected sentences as (doc_index, sent_index) pairs in document order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractiveSummary {
    pub selected: Vec<(usize, usize)>,
    pub budget_sentences: usize,
}

impl ExtractiveSummary {
    /// Concatenate the selected sentence texts in position order.
    pub fn render(&self, cluster: &DocumentCluster) -> String {
        self.selected
            .iter()
            .map(|&(doc, sent)| cluster.documents[doc].sentences[sent].text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Indices of the `budget` largest scores (ties to the lower index),
/// returned in ascending order.
pub(crate) fn select_top(scores: &[f64], budget: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(budget.min(scores.len())).collect();
    picked.sort_unstable();
    picked
}

fn to_summary(cluster: &DocumentCluster, flat: Vec<usize>, budget: usize) -> ExtractiveSummary {
    let sentences = cluster.sentences();
    ExtractiveSummary {
        selected: flat
            .into_iter()
            .map(|i| (sentences[i].doc_index, sentences[i].sent_index))
            .collect(),
        budget_sentences: budget,
    }
}

fn validate(cluster: &DocumentCluster, budget: usize) -> Result<usize, BaselineError> {
    if budget < 1 {
        return Err(BaselineError::InvalidBudget);
    }
    let n = cluster.sentence_count();
    if n == 0 {
        return Err(BaselineError::EmptyCluster);
    }
    Ok(n)
}

/// Rank sentences by cosine similarity to the cluster centroid and keep the
/// top `budget` in document order.
pub fn centroid_summarize(
    cluster: &DocumentCluster,
    budget: usize,
) -> Result<ExtractiveSummary, BaselineError> {
    validate(cluster, budget)?;
    let scores = centroid_scores(cluster);
    Ok(to_summary(cluster, select_top(&scores, budget), budget))
}

/// Cosine of every sentence against the centroid, in reading order.
pub fn centroid_scores(cluster: &DocumentCluster) -> Vec<f64> {
    let vectors = sentence_vectors(cluster);
    let centroid = centroid_vector(&vectors);
    vectors.iter().map(|v| v.cosine(&centroid)).collect()
}

/// Greedy maximal-marginal-relevance selection: the first pick is pure
/// relevance, later picks maximize
/// `lambda * rel(s) - (1 - lambda) * max sim(s, selected)`.
pub fn mmr_summarize(
    cluster: &DocumentCluster,
    budget: usize,
    lambda: f64,
) -> Result<ExtractiveSummary, BaselineError> {
    let n = validate(cluster, budget)?;
    let vectors = sentence_vectors(cluster);
    let centroid = centroid_vector(&vectors);
    let relevance: Vec<f64> = vectors.iter().map(|v| v.cosine(&centroid)).collect();

    let take = budget.min(n);
    let mut selected: Vec<usize> = Vec::with_capacity(take);
    let mut remaining: Vec<usize> = (0..n).collect();
    while selected.len() < take {
        let mut best_idx = 0;
        let mut best_score = f64::NEG_INFINITY;
        for (pos, &i) in remaining.iter().enumerate() {
            let score = if selected.is_empty() {
                relevance[i]
            } else {
                let redundancy = selected
                    .iter()
                    .map(|&j| vectors[i].cosine(&vectors[j]))
                    .fold(f64::NEG_INFINITY, f64::max);
                lambda * relevance[i] - (1.0 - lambda) * redundancy
            };
            if score > best_score {
                best_score = score;
                best_idx = pos;
            }
        }
        selected.push(remaining.remove(best_idx));
    }
    selected.sort_unstable();
    Ok(to_summary(cluster, selected, budget))
}
