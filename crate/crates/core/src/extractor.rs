//! Key-sentence extraction: sentence representation learning over both
//! graphs, fusion, top-K scoring, oracle label construction, and the
//! extractor loss.

use crate::graph::{Embedder, HeterogeneousGraph, HomogeneousGraph};
use crate::nn::gat::{forward_gat, Edge, GatLayer};
use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tape::{Graph, Var};
use crate::nn::tensor::Tensor;
use crate::nn::{FeedForward, NnError};
use crate::text::{DocumentCluster, Sentence};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Probability floor for the cross-entropy logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ExtractorConfig {
    /// Number of key sentences to extract.
    pub k: usize,
    /// Message-passing iterations on the heterogeneous graph.
    pub hetero_iterations: usize,
    /// Node representation width.
    pub dim: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            k: 10,
            hetero_iterations: 2,
            dim: 64,
            learning_rate: 5e-6,
            seed: 0,
        }
    }
}

/// Trainable parameters of the extractor: one GAT + feed-forward block per
/// message direction (shared across iterations) and a linear scoring head
/// over the fused representation.
#[derive(Debug, Clone)]
pub struct ExtractorModel {
    dim: usize,
    homo_gat: GatLayer,
    homo_ffn: FeedForward,
    s2w_gat: GatLayer,
    word_ffn: FeedForward,
    w2s_gat: GatLayer,
    sent_ffn: FeedForward,
    score_weight: ParamId,
    score_bias: ParamId,
}

impl ExtractorModel {
    pub fn new(params: &mut ParamSet, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        ExtractorModel {
            dim,
            homo_gat: GatLayer::new(params, "extractor.homo_gat", dim, dim, rng),
            homo_ffn: FeedForward::new(params, "extractor.homo_ffn", dim, 2 * dim, rng),
            s2w_gat: GatLayer::new(params, "extractor.s2w_gat", dim, dim, rng),
            word_ffn: FeedForward::new(params, "extractor.word_ffn", dim, 2 * dim, rng),
            w2s_gat: GatLayer::new(params, "extractor.w2s_gat", dim, dim, rng),
            sent_ffn: FeedForward::new(params, "extractor.sent_ffn", dim, 2 * dim, rng),
            score_weight: params.add("extractor.score_weight", Tensor::xavier(2 * dim, 1, rng)),
            score_bias: params.add("extractor.score_bias", Tensor::zeros(1, 1)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One attention layer over the sentence-sentence graph followed by the
    /// feed-forward block on the residual sum.
    pub fn homo_layer(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        graph: &HomogeneousGraph,
    ) -> Result<Var, NnError> {
        let h = g.constant(graph.init_reps.clone());
        let edges = graph.attention_edges();
        let gat = forward_gat(g, params, &self.homo_gat, h, h, h, &edges)?;
        let summed = g.add(h, gat.output)?;
        self.homo_ffn.forward(g, params, summed)
    }

    /// `n` rounds of sentence-to-word then word-to-sentence message
    /// passing on the bipartite graph; returns the final sentence
    /// representations.
    pub fn hetero_iterate(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        graph: &HeterogeneousGraph,
        iterations: usize,
    ) -> Result<Var, NnError> {
        let to_words: Vec<Edge> = graph
            .edges
            .iter()
            .map(|e| Edge {
                target: e.word,
                source: e.sentence,
                weight: e.weight,
            })
            .collect();
        let to_sentences: Vec<Edge> = graph
            .edges
            .iter()
            .map(|e| Edge {
                target: e.sentence,
                source: e.word,
                weight: e.weight,
            })
            .collect();

        let mut words = g.constant(graph.word_reps.clone());
        let mut sentences = g.constant(graph.sent_reps.clone());
        for _ in 0..iterations {
            let s2w = forward_gat(
                g,
                params,
                &self.s2w_gat,
                words,
                sentences,
                sentences,
                &to_words,
            )?;
            let word_sum = g.add(words, s2w.output)?;
            words = self.word_ffn.forward(g, params, word_sum)?;

            let w2s = forward_gat(
                g,
                params,
                &self.w2s_gat,
                sentences,
                words,
                words,
                &to_sentences,
            )?;
            let sent_sum = g.add(sentences, w2s.output)?;
            sentences = self.sent_ffn.forward(g, params, sent_sum)?;
        }
        Ok(sentences)
    }

    /// Logistic scores over the fused (n, 2d) representation.
    pub fn score(&self, g: &mut Graph, params: &ParamSet, fused: Var) -> Result<Var, NnError> {
        let w = g.param(params, self.score_weight);
        let b = g.param(params, self.score_bias);
        let raw = g.matmul(fused, w)?;
        let raw = g.add_row(raw, b)?;
        Ok(g.sigmoid(raw))
    }

    /// Full forward pass: homogeneous layer, heterogeneous iterations,
    /// fusion by concatenation, and scoring.
    pub fn forward(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        homo: &HomogeneousGraph,
        hetero: &HeterogeneousGraph,
        iterations: usize,
    ) -> Result<ExtractorVars, NnError> {
        let homo_reps = self.homo_layer(g, params, homo)?;
        let hetero_reps = self.hetero_iterate(g, params, hetero, iterations)?;
        let fused = g.concat_cols(homo_reps, hetero_reps)?;
        let scores = self.score(g, params, fused)?;
        Ok(ExtractorVars {
            homo_reps,
            hetero_reps,
            fused,
            scores,
        })
    }
}

/// Tape handles from one extractor forward pass.
#[derive(Debug, Clone, Copy)]
pub struct ExtractorVars {
    pub homo_reps: Var,
    pub hetero_reps: Var,
    pub fused: Var,
    pub scores: Var,
}

/// Evaluated extractor outputs for one cluster.
#[derive(Debug, Clone)]
pub struct ExtractorState {
    pub homo_reps: Tensor,
    pub hetero_reps: Tensor,
    pub fused: Tensor,
    pub scores: Vec<f64>,
    pub indices: Vec<usize>,
}

impl ExtractorModel {
    /// Forward-only evaluation into concrete tensors plus the top-k
    /// selection.
    pub fn evaluate(
        &self,
        params: &ParamSet,
        homo: &HomogeneousGraph,
        hetero: &HeterogeneousGraph,
        iterations: usize,
        k: usize,
    ) -> Result<ExtractorState, NnError> {
        let mut g = Graph::new();
        let vars = self.forward(&mut g, params, homo, hetero, iterations)?;
        let scores = g.value(vars.scores).data().to_vec();
        let indices = select_top_k(&scores, k);
        Ok(ExtractorState {
            homo_reps: g.value(vars.homo_reps).clone(),
            hetero_reps: g.value(vars.hetero_reps).clone(),
            fused: g.value(vars.fused).clone(),
            scores,
            indices,
        })
    }
}

/// Positions of the `k` largest scores (ties to the lower index), returned
/// ascending. `k >= scores.len()` selects everything.
pub fn select_top_k(scores: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(k.min(scores.len())).collect();
    picked.sort_unstable();
    picked
}

/// Binary key-sentence labels; exactly min(k, n) entries are set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractionLabels(pub Vec<bool>);

impl ExtractionLabels {
    pub fn positives(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &z)| z.then_some(i))
            .collect()
    }
}

/// Label the k sentences whose embeddings are most cosine-similar to the
/// summary embedding. Zero-norm embeddings rank last (similarity -1).
pub fn oracle_labels(
    cluster: &DocumentCluster,
    embedder: &dyn Embedder,
    k: usize,
) -> ExtractionLabels {
    let sentences = cluster.sentences();
    let summary_tokens: Vec<String> = cluster.summary.tokens();
    let summary_vec = embedder.embed_tokens(&summary_tokens);
    let similarities: Vec<f64> = sentences
        .iter()
        .map(|s| cosine(&embedder.embed_sentence(s), &summary_vec))
        .collect();
    let chosen = select_top_k(&similarities, k);
    let mut labels = vec![false; sentences.len()];
    for i in chosen {
        labels[i] = true;
    }
    ExtractionLabels(labels)
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return -1.0;
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot / (na * nb)
}

/// Mean binary cross-entropy between predicted scores and labels, with
/// probabilities clamped to [PROB_CLAMP, 1 - PROB_CLAMP] before the logs.
pub fn extractor_loss(scores: &[f64], labels: &ExtractionLabels) -> f64 {
    assert_eq!(scores.len(), labels.0.len(), "score/label length mismatch");
    let n = scores.len().max(1) as f64;
    let mut total = 0.0;
    for (&score, &z) in scores.iter().zip(&labels.0) {
        let p = score.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        total -= if z { p.ln() } else { (1.0 - p).ln() };
    }
    total / n
}

/// The same cross-entropy as a tape node for training.
pub fn extractor_loss_graph(
    g: &mut Graph,
    scores: Var,
    labels: &ExtractionLabels,
) -> Result<Var, NnError> {
    let n = labels.0.len();
    if g.value(scores).shape() != (n, 1) {
        return Err(NnError::ShapeMismatch {
            op: "extractor_loss_graph",
            detail: format!("scores {:?} vs {n} labels", g.value(scores).shape()),
        });
    }
    let z = g.constant(Tensor::column(
        labels
            .0
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    ));
    let one_minus_z = g.constant(Tensor::column(
        labels
            .0
            .iter()
            .map(|&b| if b { 0.0 } else { 1.0 })
            .collect(),
    ));
    let p = g.clamp(scores, PROB_CLAMP, 1.0 - PROB_CLAMP);
    let ln_p = g.ln(p);
    let neg_p = g.scale(p, -1.0);
    let q = g.add_scalar(neg_p, 1.0);
    let ln_q = g.ln(q);
    let pos = g.mul(z, ln_p)?;
    let neg = g.mul(one_minus_z, ln_q)?;
    let sum = g.add(pos, neg)?;
    let mean = g.mean_all(sum);
    Ok(g.scale(mean, -1.0))
}

/// The selected sentences in original reading order, one snippet per
/// sentence.
#[derive(Debug, Clone)]
pub struct KeySnippet {
    pub sentences: Vec<Sentence>,
}

impl KeySnippet {
    /// One text per snippet.
    pub fn texts(&self) -> Vec<&str> {
        self.sentences.iter().map(|s| s.text.as_str()).collect()
    }
}

/// Locate the selected sentences and restore reading order.
pub fn extract_key_snippet(cluster: &DocumentCluster, indices: &[usize]) -> KeySnippet {
    let sentences = cluster.sentences();
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    KeySnippet {
        sentences: sorted
            .into_iter()
            .filter_map(|i| sentences.get(i).map(|s| (*s).clone()))
            .collect(),
    }
}
