//! Sentence-sentence and sentence-word graph construction with TF-IDF edge
//! weights and deterministic initial node representations.

use crate::nn::tensor::{matmul, Tensor};
use crate::text::{DocumentCluster, Sentence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("cluster has no qualifying tokens (length >= {MIN_TOKEN_LEN})")]
    NoQualifyingTokens,
}

/// Tokens shorter than this never become word nodes or sentence links.
pub const MIN_TOKEN_LEN: usize = 2;

pub fn is_qualifying(token: &str) -> bool {
    token.chars().count() >= MIN_TOKEN_LEN
}

/// Deterministic embeddings for words and token sequences.
pub trait Embedder {
    fn dim(&self) -> usize;
    fn embed_word(&self, token: &str) -> Vec<f64>;

    /// Mean-pooled word vectors; all-zero for an empty token list.
    fn embed_tokens(&self, tokens: &[String]) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim()];
        if tokens.is_empty() {
            return acc;
        }
        for token in tokens {
            for (slot, v) in acc.iter_mut().zip(self.embed_word(token)) {
                *slot += v;
            }
        }
        let n = tokens.len() as f64;
        for slot in &mut acc {
            *slot /= n;
        }
        acc
    }

    fn embed_sentence(&self, sentence: &Sentence) -> Vec<f64> {
        self.embed_tokens(&sentence.tokens)
    }
}

/// Stand-in for a pretrained encoder: each token hashes to a seeded
/// pseudo-random unit vector, so embeddings are reproducible and offline.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
    seed: u64,
}

impl HashEmbedder {
    pub fn new(dim: usize, seed: u64) -> Self {
        HashEmbedder { dim, seed }
    }
}

impl Embedder for HashEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed_word(&self, token: &str) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv1a(token.as_bytes()));
        let mut v: Vec<f64> = (0..self.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        }
        v
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Sentence-only graph: symmetric links between sentences sharing at least
/// one qualifying token, plus a self-loop on every node.
#[derive(Debug, Clone)]
pub struct HomogeneousGraph {
    /// Sorted neighbor lists, self included.
    pub neighbors: Vec<Vec<usize>>,
    /// Initial sentence representations, one row per sentence.
    pub init_reps: Tensor,
}

impl HomogeneousGraph {
    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Directed attention edges (target attends to source), weight 1.
    pub fn attention_edges(&self) -> Vec<crate::nn::Edge> {
        let mut edges = Vec::new();
        for (target, sources) in self.neighbors.iter().enumerate() {
            for &source in sources {
                edges.push(crate::nn::Edge::unweighted(target, source));
            }
        }
        edges
    }
}

/// One sentence-word incidence with its TF-IDF weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteEdge {
    pub sentence: usize,
    pub word: usize,
    pub weight: f64,
}

/// Bipartite sentence-word graph. Word nodes are the unique qualifying
/// tokens of the cluster in first-occurrence order.
#[derive(Debug, Clone)]
pub struct HeterogeneousGraph {
    pub words: Vec<String>,
    pub edges: Vec<BipartiteEdge>,
    /// (word count, d)
    pub word_reps: Tensor,
    /// (sentence count, d)
    pub sent_reps: Tensor,
}

impl HeterogeneousGraph {
    pub fn sentence_count(&self) -> usize {
        self.sent_reps.rows()
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }
}

/// Per-cluster sentence/document-frequency index backing the TF-IDF weights
/// shared by the graphs and the extractive baselines.
#[derive(Debug, Clone)]
pub struct ClusterIndex {
    sentence_count: usize,
    doc_freq: HashMap<String, usize>,
}

impl ClusterIndex {
    pub fn build(cluster: &DocumentCluster) -> Self {
        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let mut sentence_count = 0;
        for sentence in cluster.sentences() {
            sentence_count += 1;
            let mut seen: Vec<&String> = sentence.tokens.iter().collect();
            seen.sort();
            seen.dedup();
            for token in seen {
                *doc_freq.entry(token.clone()).or_insert(0) += 1;
            }
        }
        ClusterIndex {
            sentence_count,
            doc_freq,
        }
    }

    /// Smoothed inverse sentence frequency: ln((1+N)/(1+df)) + 1.
    pub fn idf(&self, token: &str) -> f64 {
        let df = self.doc_freq.get(token).copied().unwrap_or(0);
        ((1.0 + self.sentence_count as f64) / (1.0 + df as f64)).ln() + 1.0
    }

    pub fn tfidf(&self, token: &str, sentence: &Sentence) -> f64 {
        let count = sentence.tokens.iter().filter(|t| *t == token).count();
        if count == 0 || sentence.tokens.is_empty() {
            return 0.0;
        }
        let tf = count as f64 / sentence.tokens.len() as f64;
        tf * self.idf(token)
    }
}

/// TF-IDF of a token within a sentence, scored against the whole cluster.
/// Zero (not an error) when the token is absent from the sentence.
pub fn tfidf(token: &str, sentence: &Sentence, cluster: &DocumentCluster) -> f64 {
    ClusterIndex::build(cluster).tfidf(token, sentence)
}

/// Build the sentence-sentence graph: nodes in reading order, links where
/// two sentences share a qualifying token, self-loops everywhere.
pub fn build_homogeneous(cluster: &DocumentCluster, embedder: &dyn Embedder) -> HomogeneousGraph {
    let sentences = cluster.sentences();
    let n = sentences.len();

    let mut token_to_sentences: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, sentence) in sentences.iter().enumerate() {
        let mut seen: Vec<&String> = sentence
            .tokens
            .iter()
            .filter(|t| is_qualifying(t))
            .collect();
        seen.sort();
        seen.dedup();
        for token in seen {
            token_to_sentences.entry(token).or_default().push(i);
        }
    }

    let mut adjacency = vec![vec![false; n]; n];
    for members in token_to_sentences.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                adjacency[i][j] = true;
                adjacency[j][i] = true;
            }
        }
    }

    let mut neighbors = Vec::with_capacity(n);
    for (i, row) in adjacency.iter().enumerate() {
        let mut list = vec![i];
        for (j, &linked) in row.iter().enumerate() {
            if linked && j != i {
                list.push(j);
            }
        }
        list.sort_unstable();
        neighbors.push(list);
    }

    let dim = embedder.dim();
    let mut init = Tensor::zeros(n, dim);
    for (i, sentence) in sentences.iter().enumerate() {
        let v = embedder.embed_sentence(sentence);
        for (j, x) in v.into_iter().enumerate() {
            init.set(i, j, x);
        }
    }

    HomogeneousGraph {
        neighbors,
        init_reps: init,
    }
}

/// Build the bipartite sentence-word graph with TF-IDF edge weights. Word
/// representations come from the embedder; sentence representations from
/// the convolution + bidirectional-recurrence initializer seeded by `seed`.
pub fn build_heterogeneous(
    cluster: &DocumentCluster,
    embedder: &dyn Embedder,
    seed: u64,
) -> Result<HeterogeneousGraph, GraphError> {
    let sentences = cluster.sentences();
    let index = ClusterIndex::build(cluster);

    let mut words: Vec<String> = Vec::new();
    let mut word_ids: HashMap<String, usize> = HashMap::new();
    let mut edges = Vec::new();
    for (i, sentence) in sentences.iter().enumerate() {
        let mut distinct: Vec<&String> = sentence
            .tokens
            .iter()
            .filter(|t| is_qualifying(t))
            .collect();
        // keep first-occurrence order within the sentence
        let mut seen = std::collections::HashSet::new();
        distinct.retain(|t| seen.insert(t.as_str().to_string()));
        for token in distinct {
            let word = *word_ids.entry(token.clone()).or_insert_with(|| {
                words.push(token.clone());
                words.len() - 1
            });
            edges.push(BipartiteEdge {
                sentence: i,
                word,
                weight: index.tfidf(token, sentence),
            });
        }
    }
    if words.is_empty() {
        return Err(GraphError::NoQualifyingTokens);
    }

    let dim = embedder.dim();
    let mut word_reps = Tensor::zeros(words.len(), dim);
    for (i, word) in words.iter().enumerate() {
        for (j, x) in embedder.embed_word(word).into_iter().enumerate() {
            word_reps.set(i, j, x);
        }
    }

    let init = SentenceInit::new(dim, seed);
    let sent_reps = init.encode(&sentences, embedder);

    Ok(HeterogeneousGraph {
        words,
        edges,
        word_reps,
        sent_reps,
    })
}

/// Frozen sentence encoder: aggregate word vectors, convolve over token
/// windows, run a bidirectional recurrence over the sentence sequence, and
/// combine. Parameters are pseudo-random from `seed` and never trained.
pub struct SentenceInit {
    dim: usize,
    conv_weight: Tensor, // (3*dim, dim)
    conv_bias: Tensor,   // (1, dim)
    fwd_input: Tensor,   // (dim, dim)
    fwd_state: Tensor,   // (dim, dim)
    fwd_bias: Tensor,
    bwd_input: Tensor,
    bwd_state: Tensor,
    bwd_bias: Tensor,
    out_weight: Tensor, // (3*dim, dim)
    out_bias: Tensor,
}

pub const CONV_WINDOW: usize = 3;

impl SentenceInit {
    pub fn new(dim: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SentenceInit {
            dim,
            conv_weight: Tensor::xavier(CONV_WINDOW * dim, dim, &mut rng),
            conv_bias: Tensor::zeros(1, dim),
            fwd_input: Tensor::xavier(dim, dim, &mut rng),
            fwd_state: Tensor::xavier(dim, dim, &mut rng),
            fwd_bias: Tensor::zeros(1, dim),
            bwd_input: Tensor::xavier(dim, dim, &mut rng),
            bwd_state: Tensor::xavier(dim, dim, &mut rng),
            bwd_bias: Tensor::zeros(1, dim),
            out_weight: Tensor::xavier(3 * dim, dim, &mut rng),
            out_bias: Tensor::zeros(1, dim),
        }
    }

    /// (sentence count, dim) representations for the whole cluster.
    pub fn encode(&self, sentences: &[&Sentence], embedder: &dyn Embedder) -> Tensor {
        let locals: Vec<Tensor> = sentences
            .iter()
            .map(|s| self.convolve(s, embedder))
            .collect();

        let n = sentences.len();
        let mut forward = Vec::with_capacity(n);
        let mut state = Tensor::zeros(1, self.dim);
        for local in &locals {
            state = self.step(
                local,
                &state,
                &self.fwd_input,
                &self.fwd_state,
                &self.fwd_bias,
            );
            forward.push(state.clone());
        }
        let mut backward = vec![Tensor::zeros(1, self.dim); n];
        let mut state = Tensor::zeros(1, self.dim);
        for i in (0..n).rev() {
            state = self.step(
                &locals[i],
                &state,
                &self.bwd_input,
                &self.bwd_state,
                &self.bwd_bias,
            );
            backward[i] = state.clone();
        }

        let mut out = Tensor::zeros(n, self.dim);
        for i in 0..n {
            let mut combined = Vec::with_capacity(3 * self.dim);
            combined.extend_from_slice(locals[i].data());
            combined.extend_from_slice(forward[i].data());
            combined.extend_from_slice(backward[i].data());
            let combined = Tensor::from_vec(1, 3 * self.dim, combined);
            let mut row = matmul(&combined, &self.out_weight);
            for j in 0..self.dim {
                let v = (row.get(0, j) + self.out_bias.get(0, j)).tanh();
                row.set(0, j, v);
            }
            for j in 0..self.dim {
                out.set(i, j, row.get(0, j));
            }
        }
        out
    }

    /// Window-3 convolution over the sentence's qualifying tokens with zero
    /// padding, tanh activation, mean-pooled over positions.
    fn convolve(&self, sentence: &Sentence, embedder: &dyn Embedder) -> Tensor {
        let vectors: Vec<Vec<f64>> = sentence
            .tokens
            .iter()
            .filter(|t| is_qualifying(t))
            .map(|t| embedder.embed_word(t))
            .collect();
        let m = vectors.len();
        if m == 0 {
            return Tensor::zeros(1, self.dim);
        }
        let zero = vec![0.0; self.dim];
        let mut pooled = Tensor::zeros(1, self.dim);
        for p in 0..m {
            let mut window = Vec::with_capacity(3 * self.dim);
            for offset in [-1i64, 0, 1] {
                let q = p as i64 + offset;
                let v = if q < 0 || q >= m as i64 {
                    &zero
                } else {
                    &vectors[q as usize]
                };
                window.extend_from_slice(v);
            }
            let window = Tensor::from_vec(1, 3 * self.dim, window);
            let row = matmul(&window, &self.conv_weight);
            for j in 0..self.dim {
                let v = (row.get(0, j) + self.conv_bias.get(0, j)).tanh();
                pooled.data_mut()[j] += v / m as f64;
            }
        }
        pooled
    }

    fn step(
        &self,
        input: &Tensor,
        state: &Tensor,
        w_in: &Tensor,
        w_state: &Tensor,
        bias: &Tensor,
    ) -> Tensor {
        let a = matmul(input, w_in);
        let b = matmul(state, w_state);
        let mut next = Tensor::zeros(1, self.dim);
        for j in 0..self.dim {
            next.set(0, j, (a.get(0, j) + b.get(0, j) + bias.get(0, j)).tanh());
        }
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{tokenize, Document, Language, Split};

    fn cluster(doc_texts: &[&str]) -> DocumentCluster {
        let docs = doc_texts
            .iter()
            .map(|t| Document::new(Language::En, t))
            .collect();
        DocumentCluster::new(
            "c",
            docs,
            Document::new(Language::En, "Summary."),
            Split::Train,
        )
        .unwrap()
    }

    #[test]
    fn tfidf_uniform_token_collapses_idf() {
        let c = cluster(&["cat runs. cat sleeps.", "cat eats."]);
        // "cat" appears in every sentence: idf = ln(1) + 1 = 1, so tfidf = tf
        let sentences = c.sentences();
        let s0 = sentences[0];
        let expected_tf = 1.0 / s0.tokens.len() as f64;
        assert!((tfidf("cat", s0, &c) - expected_tf).abs() < 1e-12);
    }

    #[test]
    fn tfidf_absent_token_is_zero() {
        let c = cluster(&["cat runs.", "dog eats."]);
        let sentences = c.sentences();
        assert_eq!(tfidf("dog", sentences[0], &c), 0.0);
    }

    #[test]
    fn tfidf_hand_value() {
        // N=3 sentences, df=1, tf=2/5 -> 0.4 * (ln 2 + 1)
        let c = cluster(&["zz ab zz cd ef. gh ij.", "kl mn."]);
        let sentences = c.sentences();
        let got = tfidf("zz", sentences[0], &c);
        let expected = 0.4 * (2.0f64.ln() + 1.0);
        assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        assert!((expected - 0.677_258_872_223_978_1).abs() < 1e-12);
    }

    #[test]
    fn homogeneous_single_sentence_self_loop_only() {
        let c = cluster(&["Only one sentence here."]);
        let g = build_homogeneous(&c, &HashEmbedder::new(8, 0));
        assert_eq!(g.neighbors, vec![vec![0]]);
    }

    #[test]
    fn homogeneous_shared_token_rule() {
        let c = cluster(&["the cat runs. a cat sleeps. dogs bark."]);
        let g = build_homogeneous(&c, &HashEmbedder::new(8, 0));
        assert_eq!(g.neighbors[0], vec![0, 1]); // shares "cat" with sentence 1
        assert_eq!(g.neighbors[1], vec![0, 1]);
        assert_eq!(g.neighbors[2], vec![2]); // isolated apart from self-loop
    }

    #[test]
    fn homogeneous_adjacency_symmetric() {
        let c = cluster(&["alpha beta. beta gamma.", "gamma delta. epsilon zeta."]);
        let g = build_homogeneous(&c, &HashEmbedder::new(8, 0));
        for (i, list) in g.neighbors.iter().enumerate() {
            assert!(list.contains(&i), "self-loop missing on {i}");
            for &j in list {
                assert!(g.neighbors[j].contains(&i), "asymmetric edge {i}-{j}");
            }
        }
    }

    #[test]
    fn heterogeneous_three_distinct_tokens() {
        let c = cluster(&["alpha beta gamma."]);
        let g = build_heterogeneous(&c, &HashEmbedder::new(8, 0), 1).unwrap();
        assert_eq!(g.word_count(), 3);
        assert_eq!(g.edges.len(), 3);
        for edge in &g.edges {
            let sentence = c.sentences()[edge.sentence];
            let expected = tfidf(&g.words[edge.word], sentence, &c);
            assert!((edge.weight - expected).abs() < 1e-12);
            assert!(edge.weight > 0.0);
        }
    }

    #[test]
    fn heterogeneous_repeated_token_single_node() {
        let c = cluster(&["alpha beta. alpha gamma."]);
        let g = build_heterogeneous(&c, &HashEmbedder::new(8, 0), 1).unwrap();
        assert_eq!(g.words.iter().filter(|w| **w == "alpha").count(), 1);
        let alpha = g.words.iter().position(|w| w == "alpha").unwrap();
        assert_eq!(g.edges.iter().filter(|e| e.word == alpha).count(), 2);
    }

    #[test]
    fn heterogeneous_edge_count_matches_distinct_sum() {
        let c = cluster(&["aa bb aa. cc dd.", "bb cc. ee."]);
        let g = build_heterogeneous(&c, &HashEmbedder::new(8, 0), 1).unwrap();
        let expected: usize = c
            .sentences()
            .iter()
            .map(|s| {
                let mut d: Vec<&String> = s.tokens.iter().filter(|t| is_qualifying(t)).collect();
                d.sort();
                d.dedup();
                d.len()
            })
            .sum();
        assert_eq!(g.edges.len(), expected);
    }

    #[test]
    fn word_nodes_equal_distinct_qualifying_tokens() {
        let c = cluster(&["aa bb aa. cc a dd.", "bb ee. i ff."]);
        let g = build_heterogeneous(&c, &HashEmbedder::new(8, 0), 1).unwrap();
        let mut distinct: Vec<&String> = c
            .sentences()
            .iter()
            .flat_map(|s| s.tokens.iter())
            .filter(|t| is_qualifying(t))
            .collect();
        distinct.sort();
        distinct.dedup();
        assert_eq!(g.word_count(), distinct.len());
    }

    #[test]
    fn heterogeneous_requires_qualifying_tokens() {
        let c = cluster(&["a b. c d."]);
        let err = build_heterogeneous(&c, &HashEmbedder::new(8, 0), 1).unwrap_err();
        assert_eq!(err, GraphError::NoQualifyingTokens);
    }

    #[test]
    fn construction_is_deterministic() {
        let c = cluster(&["alpha beta gamma. delta alpha.", "beta epsilon."]);
        let e = HashEmbedder::new(16, 42);
        let g1 = build_heterogeneous(&c, &e, 7).unwrap();
        let g2 = build_heterogeneous(&c, &e, 7).unwrap();
        assert_eq!(g1.sent_reps, g2.sent_reps);
        assert_eq!(g1.word_reps, g2.word_reps);
        let h1 = build_homogeneous(&c, &e);
        let h2 = build_homogeneous(&c, &e);
        assert_eq!(h1.init_reps, h2.init_reps);
    }

    #[test]
    fn embedder_units_and_determinism() {
        let e = HashEmbedder::new(32, 5);
        let v1 = e.embed_word("wort");
        let v2 = e.embed_word("wort");
        assert_eq!(v1, v2);
        let norm: f64 = v1.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
        assert_ne!(e.embed_word("wort"), e.embed_word("word"));
    }

    #[test]
    fn tokenize_helper_agrees_with_sentences() {
        let c = cluster(&["The cat. The dog."]);
        for s in c.sentences() {
            assert_eq!(s.tokens, tokenize(&s.text));
        }
    }
}
