//! Marginalized generation over key snippets and the three training
//! losses. The conditional language model is a contract; the shipped
//! implementation is a small trainable recurrent model so the whole loss
//! surface can be exercised offline.

use crate::nn::params::{ParamId, ParamSet};
use crate::nn::tape::{logsumexp, Graph, Var};
use crate::nn::tensor::Tensor;
use crate::nn::NnError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("the key-snippet set is empty")]
    EmptySnippets,
    #[error("the reference token sequence is empty")]
    EmptyReference,
    #[error("max_len must be at least 1")]
    InvalidMaxLen,
    #[error("weight vector at step {step} has length {got}, expected {expected}")]
    LengthMismatch {
        step: usize,
        got: usize,
        expected: usize,
    },
    #[error("token id {0} out of vocabulary range {1}")]
    TokenOutOfRange(usize, usize),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const PAD_ID: usize = 0;
pub const BOS_ID: usize = 1;
pub const EOS_ID: usize = 2;
pub const UNK_ID: usize = 3;

const RESERVED: [&str; 4] = ["<pad>", "<bos>", "<eos>", "<unk>"];

/// Probability floor used before taking logs.
pub const UNDERFLOW_CLAMP: f64 = 1e-30;
/// Floor applied to the consistency target distribution.
pub const CONSISTENCY_CLAMP: f64 = 1e-9;

/// Token-id vocabulary with the four reserved ids. The file format is one
/// token per line; the line number is the id.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocab {
    /// Build from corpus tokens: reserved markers first, then the distinct
    /// tokens in sorted order.
    pub fn build<'a>(corpus_tokens: impl IntoIterator<Item = &'a str>) -> Self {
        let mut distinct: Vec<&str> = corpus_tokens.into_iter().collect();
        distinct.sort_unstable();
        distinct.dedup();
        let mut tokens: Vec<String> = RESERVED.iter().map(|s| s.to_string()).collect();
        tokens.extend(
            distinct
                .into_iter()
                .filter(|t| !RESERVED.contains(t))
                .map(str::to_string),
        );
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Vocab { tokens, ids }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false // reserved ids always present
    }

    pub fn id(&self, token: &str) -> usize {
        self.ids.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> &str {
        self.tokens.get(id).map(String::as_str).unwrap_or("<unk>")
    }

    pub fn encode(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<&str> {
        ids.iter().map(|&i| self.token(i)).collect()
    }

    pub fn save(&self, path: &Path) -> Result<(), GeneratorError> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        for token in &self.tokens {
            file.write_all(token.as_bytes())?;
            file.write_all(b"\n")?;
        }
        file.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, GeneratorError> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut tokens = Vec::new();
        for line in file.lines() {
            tokens.push(line?);
        }
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocab { tokens, ids })
    }
}

/// A conditional language model over token ids: per-snippet next-token
/// distributions and per-snippet dynamic selection logits.
pub trait ConditionalLm {
    fn vocab_size(&self) -> usize;

    /// P(y_t = token | snippet, prefix); sums to 1.
    fn next_token_distribution(&self, snippet: &[usize], prefix: &[usize]) -> Vec<f64>;

    /// Unnormalized selection logits, one per snippet; their softmax is the
    /// dynamic weight distribution.
    fn dynamic_weight_logits(&self, snippets: &[Vec<usize>], prefix: &[usize]) -> Vec<f64>;
}

/// Softmax of the dynamic-weight logits.
pub fn dynamic_weights(
    lm: &dyn ConditionalLm,
    snippets: &[Vec<usize>],
    prefix: &[usize],
) -> Vec<f64> {
    softmax(&lm.dynamic_weight_logits(snippets, prefix))
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let lse = logsumexp(logits);
    logits.iter().map(|&l| (l - lse).exp()).collect()
}

fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let lse = logsumexp(logits);
    logits.iter().map(|&l| l - lse).collect()
}

/// Log probability of `target` under per-step marginalization over the
/// snippets: log Π_t Σ_x P(y_t | x, y_<t) · P(x | X, y_<t), accumulated in
/// log space with log-sum-exp.
pub fn marginal_sequence_probability(
    lm: &dyn ConditionalLm,
    snippets: &[Vec<usize>],
    target: &[usize],
) -> Result<f64, GeneratorError> {
    if snippets.is_empty() {
        return Err(GeneratorError::EmptySnippets);
    }
    if target.is_empty() {
        return Err(GeneratorError::EmptyReference);
    }
    let vocab = lm.vocab_size();
    if let Some(&bad) = target.iter().find(|&&t| t >= vocab) {
        return Err(GeneratorError::TokenOutOfRange(bad, vocab));
    }
    let mut total = 0.0;
    for t in 0..target.len() {
        let prefix = &target[..t];
        let log_weights = log_softmax(&lm.dynamic_weight_logits(snippets, prefix));
        let terms: Vec<f64> = snippets
            .iter()
            .zip(&log_weights)
            .map(|(snippet, &lw)| {
                let p = lm.next_token_distribution(snippet, prefix)[target[t]];
                p.max(UNDERFLOW_CLAMP).ln() + lw
            })
            .collect();
        total += logsumexp(&terms);
    }
    Ok(total)
}

/// The marginalized next-token distribution Σ_x w_x · P(· | x, prefix).
pub fn marginal_next_distribution(
    lm: &dyn ConditionalLm,
    snippets: &[Vec<usize>],
    prefix: &[usize],
) -> Result<Vec<f64>, GeneratorError> {
    if snippets.is_empty() {
        return Err(GeneratorError::EmptySnippets);
    }
    let weights = dynamic_weights(lm, snippets, prefix);
    let mut dist = vec![0.0; lm.vocab_size()];
    for (snippet, &w) in snippets.iter().zip(&weights) {
        for (slot, p) in dist
            .iter_mut()
            .zip(lm.next_token_distribution(snippet, prefix))
        {
            *slot += w * p;
        }
    }
    Ok(dist)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeMode {
    /// Argmax at every step, ties to the lowest token id.
    Greedy,
    /// Ancestral sampling from the marginalized distribution.
    Sampled { seed: u64 },
}

/// Decode until end-of-sequence or `max_len` tokens. The returned sequence
/// excludes the end-of-sequence token.
pub fn generate(
    lm: &dyn ConditionalLm,
    snippets: &[Vec<usize>],
    max_len: usize,
    mode: DecodeMode,
) -> Result<Vec<usize>, GeneratorError> {
    if max_len < 1 {
        return Err(GeneratorError::InvalidMaxLen);
    }
    if snippets.is_empty() {
        return Err(GeneratorError::EmptySnippets);
    }
    let mut rng = match mode {
        DecodeMode::Greedy => None,
        DecodeMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
    };
    let mut output = Vec::new();
    while output.len() < max_len {
        let dist = marginal_next_distribution(lm, snippets, &output)?;
        let token = match &mut rng {
            None => argmax_lowest(&dist),
            Some(rng) => sample_index(&dist, rng),
        };
        if token == EOS_ID {
            break;
        }
        output.push(token);
    }
    Ok(output)
}

fn argmax_lowest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn sample_index(dist: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = dist.iter().sum();
    let mut draw: f64 = rng.random_range(0.0..total.max(f64::MIN_POSITIVE));
    for (i, &p) in dist.iter().enumerate() {
        draw -= p;
        if draw <= 0.0 {
            return i;
        }
    }
    dist.len() - 1
}

/// Negative marginal log-likelihood of the reference.
pub fn generator_loss(
    lm: &dyn ConditionalLm,
    snippets: &[Vec<usize>],
    reference: &[usize],
) -> Result<f64, GeneratorError> {
    Ok(-marginal_sequence_probability(lm, snippets, reference)?)
}

/// KL divergence between the time-averaged dynamic weights and the
/// softmaxed extractor scores of the selected sentences. Zero target mass
/// under positive weight mass is clamped at [`CONSISTENCY_CLAMP`].
pub fn consistency_loss(
    step_weights: &[Vec<f64>],
    extractor_scores: &[f64],
) -> Result<f64, GeneratorError> {
    if step_weights.is_empty() {
        return Err(GeneratorError::EmptyReference);
    }
    let k = extractor_scores.len();
    for (step, weights) in step_weights.iter().enumerate() {
        if weights.len() != k {
            return Err(GeneratorError::LengthMismatch {
                step,
                got: weights.len(),
                expected: k,
            });
        }
    }
    let t = step_weights.len() as f64;
    let mut mean = vec![0.0; k];
    for weights in step_weights {
        for (slot, w) in mean.iter_mut().zip(weights) {
            *slot += w / t;
        }
    }
    let target = softmax(extractor_scores);
    let mut kl = 0.0;
    for (p, q) in mean.iter().zip(&target) {
        if *p <= 0.0 {
            continue; // 0 * ln 0 = 0
        }
        let mut q = *q;
        if q < CONSISTENCY_CLAMP {
            eprintln!("warning: consistency target clamped at {CONSISTENCY_CLAMP}");
            q = CONSISTENCY_CLAMP;
        }
        kl += p * (p / q).ln();
    }
    Ok(kl)
}

/// Loss mixing weights; the defaults are the published settings.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct LossConfig {
    pub lambda_ext: f64,
    pub lambda_gen: f64,
    pub lambda_con: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            lambda_ext: 1.0,
            lambda_gen: 0.1,
            lambda_con: 0.0001,
        }
    }
}

/// λ_ext·L_ext + λ_gen·L_gen + λ_con·L_con.
pub fn total_loss(l_ext: f64, l_gen: f64, l_con: f64, config: &LossConfig) -> f64 {
    config.lambda_ext * l_ext + config.lambda_gen * l_gen + config.lambda_con * l_con
}

/// Trainable toy conditional LM: shared token embeddings, one tanh
/// recurrence over the prefix, a vocabulary head over the combined
/// snippet/prefix state, and a one-hidden-layer perceptron head for the
/// dynamic weights.
#[derive(Debug, Clone)]
pub struct RecurrentLm {
    vocab_size: usize,
    dim: usize,
    pub embedding: ParamId,
    pub rec_input: ParamId,
    pub rec_state: ParamId,
    pub rec_bias: ParamId,
    pub combine_snippet: ParamId,
    pub combine_state: ParamId,
    pub combine_bias: ParamId,
    pub out_weight: ParamId,
    pub out_bias: ParamId,
    pub gate_hidden: ParamId,
    pub gate_hidden_bias: ParamId,
    pub gate_out: ParamId,
    pub gate_out_bias: ParamId,
}

/// Default embedding/recurrent width of the toy model.
pub const LM_DIM: usize = 32;

impl RecurrentLm {
    pub fn new(params: &mut ParamSet, vocab_size: usize, dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut embedding = Tensor::zeros(vocab_size, dim);
        for v in embedding.data_mut() {
            *v = rng.random_range(-0.1..0.1);
        }
        RecurrentLm {
            vocab_size,
            dim,
            embedding: params.add("lm.embedding", embedding),
            rec_input: params.add("lm.rec_input", Tensor::xavier(dim, dim, rng)),
            rec_state: params.add("lm.rec_state", Tensor::xavier(dim, dim, rng)),
            rec_bias: params.add("lm.rec_bias", Tensor::zeros(1, dim)),
            combine_snippet: params.add("lm.combine_snippet", Tensor::xavier(dim, dim, rng)),
            combine_state: params.add("lm.combine_state", Tensor::xavier(dim, dim, rng)),
            combine_bias: params.add("lm.combine_bias", Tensor::zeros(1, dim)),
            out_weight: params.add("lm.out_weight", Tensor::xavier(dim, vocab_size, rng)),
            out_bias: params.add("lm.out_bias", Tensor::zeros(1, vocab_size)),
            gate_hidden: params.add("lm.gate_hidden", Tensor::xavier(dim, dim, rng)),
            gate_hidden_bias: params.add("lm.gate_hidden_bias", Tensor::zeros(1, dim)),
            gate_out: params.add("lm.gate_out", Tensor::xavier(dim, 1, rng)),
            gate_out_bias: params.add("lm.gate_out_bias", Tensor::zeros(1, 1)),
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Mean-pooled snippet embeddings, one row per snippet.
    fn snippet_rows(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        embedding: Var,
        snippets: &[Vec<usize>],
    ) -> Result<Var, GeneratorError> {
        let _ = params;
        let mut rows = Vec::with_capacity(snippets.len());
        for snippet in snippets {
            if snippet.is_empty() {
                return Err(GeneratorError::EmptySnippets);
            }
            let gathered = g.gather_rows(embedding, snippet)?;
            rows.push(g.mean_rows(gathered)?);
        }
        Ok(g.vstack(&rows)?)
    }

    /// Recurrent states: index t holds the state after consuming bos and
    /// the first t prefix tokens.
    fn prefix_states(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        embedding: Var,
        prefix: &[usize],
    ) -> Result<Vec<Var>, GeneratorError> {
        let w_in = g.param(params, self.rec_input);
        let w_state = g.param(params, self.rec_state);
        let bias = g.param(params, self.rec_bias);
        let mut states = Vec::with_capacity(prefix.len() + 1);
        let mut state = g.constant(Tensor::zeros(1, self.dim));
        let mut tokens = Vec::with_capacity(prefix.len() + 1);
        tokens.push(BOS_ID);
        tokens.extend_from_slice(prefix);
        for &token in &tokens {
            let emb = g.gather_rows(embedding, &[token])?;
            let a = g.matmul(emb, w_in)?;
            let b = g.matmul(state, w_state)?;
            let sum = g.add(a, b)?;
            let sum = g.add_row(sum, bias)?;
            state = g.tanh(sum);
            states.push(state);
        }
        Ok(states)
    }

    /// Per-snippet vocabulary logits (K, V) and weight logits (K, 1) for
    /// one decoding step.
    fn step_heads(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        snippet_rows: Var,
        state: Var,
    ) -> Result<(Var, Var), GeneratorError> {
        let w_cs = g.param(params, self.combine_snippet);
        let w_ch = g.param(params, self.combine_state);
        let b_c = g.param(params, self.combine_bias);
        let snip = g.matmul(snippet_rows, w_cs)?;
        let ctx = g.matmul(state, w_ch)?;
        let combined = g.add_row(snip, ctx)?;
        let combined = g.add_row(combined, b_c)?;
        let combined = g.tanh(combined);

        let w_out = g.param(params, self.out_weight);
        let b_out = g.param(params, self.out_bias);
        let logits = g.matmul(combined, w_out)?;
        let logits = g.add_row(logits, b_out)?;

        let w_g1 = g.param(params, self.gate_hidden);
        let b_g1 = g.param(params, self.gate_hidden_bias);
        let w_g2 = g.param(params, self.gate_out);
        let b_g2 = g.param(params, self.gate_out_bias);
        let hidden = g.matmul(combined, w_g1)?;
        let hidden = g.add_row(hidden, b_g1)?;
        let hidden = g.relu(hidden);
        let gate = g.matmul(hidden, w_g2)?;
        let gate = g.add_row(gate, b_g2)?;
        Ok((logits, gate))
    }

    /// Differentiable sequence NLL over the reference plus the per-step
    /// dynamic weight distributions (as tape nodes) for the consistency
    /// loss.
    pub fn sequence_loss_graph(
        &self,
        g: &mut Graph,
        params: &ParamSet,
        snippets: &[Vec<usize>],
        reference: &[usize],
    ) -> Result<(Var, Vec<Var>), GeneratorError> {
        if snippets.is_empty() {
            return Err(GeneratorError::EmptySnippets);
        }
        if reference.is_empty() {
            return Err(GeneratorError::EmptyReference);
        }
        if let Some(&bad) = reference.iter().find(|&&t| t >= self.vocab_size) {
            return Err(GeneratorError::TokenOutOfRange(bad, self.vocab_size));
        }
        let embedding = g.param(params, self.embedding);
        let snippet_rows = self.snippet_rows(g, params, embedding, snippets)?;
        let states = self.prefix_states(g, params, embedding, &reference[..reference.len() - 1])?;

        let mut step_logps = Vec::with_capacity(reference.len());
        let mut step_weights = Vec::with_capacity(reference.len());
        for (t, &token) in reference.iter().enumerate() {
            let (logits, gate) = self.step_heads(g, params, snippet_rows, states[t])?;
            let log_probs = g.log_softmax_rows(logits);
            let token_logp = g.gather_col(log_probs, token)?;
            let log_weights = g.log_softmax_flat(gate);
            let weights = g.softmax_flat(gate);
            let joint = g.add(token_logp, log_weights)?;
            step_logps.push(g.logsumexp_all(joint));
            step_weights.push(weights);
        }
        let mut total = step_logps[0];
        for &step in &step_logps[1..] {
            total = g.add(total, step)?;
        }
        let loss = g.scale(total, -1.0);
        Ok((loss, step_weights))
    }

    /// Bind parameter values for read-only inference through the
    /// [`ConditionalLm`] contract.
    pub fn bind<'a>(&'a self, params: &'a ParamSet) -> BoundLm<'a> {
        BoundLm { lm: self, params }
    }
}

/// A [`RecurrentLm`] paired with its parameter values.
pub struct BoundLm<'a> {
    lm: &'a RecurrentLm,
    params: &'a ParamSet,
}

impl ConditionalLm for BoundLm<'_> {
    fn vocab_size(&self) -> usize {
        self.lm.vocab_size
    }

    fn next_token_distribution(&self, snippet: &[usize], prefix: &[usize]) -> Vec<f64> {
        let mut g = Graph::new();
        let embedding = g.param(self.params, self.lm.embedding);
        let rows = self
            .lm
            .snippet_rows(&mut g, self.params, embedding, &[snippet.to_vec()])
            .expect("non-empty snippet");
        let states = self
            .lm
            .prefix_states(&mut g, self.params, embedding, prefix)
            .expect("state construction");
        let state = *states.last().expect("at least the bos state");
        let (logits, _) = self
            .lm
            .step_heads(&mut g, self.params, rows, state)
            .expect("step heads");
        let probs = g.log_softmax_rows(logits);
        g.value(probs).data().iter().map(|lp| lp.exp()).collect()
    }

    fn dynamic_weight_logits(&self, snippets: &[Vec<usize>], prefix: &[usize]) -> Vec<f64> {
        let mut g = Graph::new();
        let embedding = g.param(self.params, self.lm.embedding);
        let rows = self
            .lm
            .snippet_rows(&mut g, self.params, embedding, snippets)
            .expect("non-empty snippets");
        let states = self
            .lm
            .prefix_states(&mut g, self.params, embedding, prefix)
            .expect("state construction");
        let state = *states.last().expect("at least the bos state");
        let (_, gate) = self
            .lm
            .step_heads(&mut g, self.params, rows, state)
            .expect("step heads");
        g.value(gate).data().to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Table LM with deterministic pseudo-random distributions per
    /// (snippet, prefix) pair; used to drive the marginalization oracle.
    pub(crate) struct TableLm {
        pub vocab: usize,
        pub seed: u64,
    }

    impl TableLm {
        fn rng_for(&self, tag: u64, snippet: &[usize], prefix: &[usize]) -> ChaCha8Rng {
            let mut key = self.seed ^ tag.wrapping_mul(0x9e3779b97f4a7c15);
            for &t in snippet {
                key = key.wrapping_mul(31).wrapping_add(t as u64 + 1);
            }
            key = key.wrapping_mul(37).wrapping_add(17);
            for &t in prefix {
                key = key.wrapping_mul(31).wrapping_add(t as u64 + 1);
            }
            ChaCha8Rng::seed_from_u64(key)
        }
    }

    impl ConditionalLm for TableLm {
        fn vocab_size(&self) -> usize {
            self.vocab
        }

        fn next_token_distribution(&self, snippet: &[usize], prefix: &[usize]) -> Vec<f64> {
            let mut rng = self.rng_for(1, snippet, prefix);
            let raw: Vec<f64> = (0..self.vocab)
                .map(|_| rng.random_range(0.05..1.0))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|v| v / total).collect()
        }

        fn dynamic_weight_logits(&self, snippets: &[Vec<usize>], prefix: &[usize]) -> Vec<f64> {
            snippets
                .iter()
                .map(|s| {
                    let mut rng = self.rng_for(2, s, prefix);
                    rng.random_range(-1.5..1.5)
                })
                .collect()
        }
    }

    /// Probability-space oracle: explicit per-step sums, plain product.
    pub(crate) fn brute_force_marginal(
        lm: &dyn ConditionalLm,
        snippets: &[Vec<usize>],
        target: &[usize],
    ) -> f64 {
        let mut probability = 1.0;
        for t in 0..target.len() {
            let prefix = &target[..t];
            let logits = lm.dynamic_weight_logits(snippets, prefix);
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
            let z: f64 = exps.iter().sum();
            let mut step = 0.0;
            for (x, snippet) in snippets.iter().enumerate() {
                let w = exps[x] / z;
                step += w * lm.next_token_distribution(snippet, prefix)[target[t]];
            }
            probability *= step;
        }
        probability
    }

    #[test]
    fn singleton_marginalization_is_plain_product() {
        let lm = TableLm { vocab: 6, seed: 3 };
        let snippets = vec![vec![4, 5]];
        let target = vec![3, 1, 2];
        let marginal = marginal_sequence_probability(&lm, &snippets, &target).unwrap();
        let mut direct = 0.0;
        for t in 0..target.len() {
            direct += lm.next_token_distribution(&snippets[0], &target[..t])[target[t]].ln();
        }
        assert_eq!(marginal, direct);
    }

    #[test]
    fn identical_distributions_collapse_marginalization() {
        // two snippets with identical tables: the mixture equals either one
        struct Constant;
        impl ConditionalLm for Constant {
            fn vocab_size(&self) -> usize {
                4
            }
            fn next_token_distribution(&self, _: &[usize], _: &[usize]) -> Vec<f64> {
                vec![0.1, 0.2, 0.3, 0.4]
            }
            fn dynamic_weight_logits(&self, snippets: &[Vec<usize>], _: &[usize]) -> Vec<f64> {
                (0..snippets.len()).map(|i| i as f64).collect()
            }
        }
        let one = marginal_sequence_probability(&Constant, &[vec![0]], &[3, 2]).unwrap();
        let two = marginal_sequence_probability(&Constant, &[vec![0], vec![1]], &[3, 2]).unwrap();
        assert!((one - two).abs() < 1e-12);
    }

    #[test]
    fn hand_marginal_single_step() {
        // weights (0.6, 0.4), token probabilities (0.5, 0.25): P = 0.4
        struct Hand;
        impl ConditionalLm for Hand {
            fn vocab_size(&self) -> usize {
                2
            }
            fn next_token_distribution(&self, snippet: &[usize], _: &[usize]) -> Vec<f64> {
                if snippet[0] == 0 {
                    vec![0.5, 0.5]
                } else {
                    vec![0.25, 0.75]
                }
            }
            fn dynamic_weight_logits(&self, _: &[Vec<usize>], _: &[usize]) -> Vec<f64> {
                vec![0.6f64.ln(), 0.4f64.ln()]
            }
        }
        let logp = marginal_sequence_probability(&Hand, &[vec![0], vec![1]], &[0]).unwrap();
        assert!((logp.exp() - 0.4).abs() < 1e-12);
        let loss = generator_loss(&Hand, &[vec![0], vec![1]], &[0]).unwrap();
        assert!((loss - 0.916_290_731_874_155).abs() < 1e-9);
    }

    #[test]
    fn marginal_matches_brute_force_oracle() {
        for seed in 0..20 {
            let lm = TableLm { vocab: 7, seed };
            let snippets = vec![vec![4], vec![5, 6], vec![3, 3]];
            let target = vec![1, 4, 6, 2];
            let log_p = marginal_sequence_probability(&lm, &snippets, &target).unwrap();
            let oracle = brute_force_marginal(&lm, &snippets, &target);
            assert!(
                ((log_p.exp() - oracle) / oracle).abs() < 1e-9,
                "seed {seed}: {} vs {oracle}",
                log_p.exp()
            );
        }
    }

    #[test]
    fn empty_inputs_are_errors() {
        let lm = TableLm { vocab: 4, seed: 0 };
        assert!(matches!(
            marginal_sequence_probability(&lm, &[], &[1]),
            Err(GeneratorError::EmptySnippets)
        ));
        assert!(matches!(
            marginal_sequence_probability(&lm, &[vec![0]], &[]),
            Err(GeneratorError::EmptyReference)
        ));
    }

    #[test]
    fn marginal_next_distribution_sums_to_one() {
        for seed in 0..50 {
            let lm = TableLm { vocab: 9, seed };
            let snippets = vec![vec![4, 5], vec![6], vec![7, 8]];
            let dist = marginal_next_distribution(&lm, &snippets, &[3, 1]).unwrap();
            let total: f64 = dist.iter().sum();
            assert!((total - 1.0).abs() < 1e-9, "seed {seed}: {total}");
            assert!(dist.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn greedy_generation_is_deterministic() {
        let lm = TableLm { vocab: 8, seed: 11 };
        let snippets = vec![vec![5, 6], vec![7]];
        let a = generate(&lm, &snippets, 6, DecodeMode::Greedy).unwrap();
        let b = generate(&lm, &snippets, 6, DecodeMode::Greedy).unwrap();
        assert_eq!(a, b);
        assert!(a.len() <= 6);
    }

    #[test]
    fn sampled_generation_reproducible_for_fixed_seed() {
        let lm = TableLm { vocab: 8, seed: 11 };
        let snippets = vec![vec![5]];
        let a = generate(&lm, &snippets, 5, DecodeMode::Sampled { seed: 42 }).unwrap();
        let b = generate(&lm, &snippets, 5, DecodeMode::Sampled { seed: 42 }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn eos_point_mass_yields_empty_summary() {
        struct EosLm;
        impl ConditionalLm for EosLm {
            fn vocab_size(&self) -> usize {
                4
            }
            fn next_token_distribution(&self, _: &[usize], _: &[usize]) -> Vec<f64> {
                let mut d = vec![0.0; 4];
                d[EOS_ID] = 1.0;
                d
            }
            fn dynamic_weight_logits(&self, snippets: &[Vec<usize>], _: &[usize]) -> Vec<f64> {
                vec![0.0; snippets.len()]
            }
        }
        let out = generate(&EosLm, &[vec![0]], 10, DecodeMode::Greedy).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn consistency_loss_identities() {
        // identical distributions
        let zero = consistency_loss(&[vec![0.25, 0.75]], &[0.25f64.ln(), 0.75f64.ln()]).unwrap();
        assert!(zero.abs() < 1e-12);
        // hand value: p = (0.5, 0.5), q = (0.25, 0.75)
        let kl = consistency_loss(&[vec![0.5, 0.5]], &[0.25f64.ln(), 0.75f64.ln()]).unwrap();
        let expected = 0.5 * 2.0f64.ln() + 0.5 * (2.0f64 / 3.0).ln();
        assert!((kl - expected).abs() < 1e-12);
        assert!((kl - 0.143_841).abs() < 1e-6);
    }

    #[test]
    fn consistency_loss_rejects_mismatched_lengths() {
        assert!(matches!(
            consistency_loss(&[vec![0.5, 0.5], vec![1.0]], &[0.0, 0.0]),
            Err(GeneratorError::LengthMismatch { step: 1, .. })
        ));
    }

    #[test]
    fn total_loss_hand_values() {
        let config = LossConfig::default();
        assert_eq!(total_loss(0.0, 0.0, 0.0, &config), 0.0);
        let v = total_loss(1.0, 2.0, 3.0, &config);
        assert!((v - 1.2003).abs() < 1e-12);
        let ext_only = LossConfig {
            lambda_ext: 1.0,
            lambda_gen: 0.0,
            lambda_con: 0.0,
        };
        assert_eq!(total_loss(7.0, 5.0, 3.0, &ext_only), 7.0);
    }

    #[test]
    fn vocab_reserved_ids_and_round_trip() {
        let vocab = Vocab::build(["zebra", "alpha", "zebra"]);
        assert_eq!(vocab.id("<pad>"), PAD_ID);
        assert_eq!(vocab.id("<bos>"), BOS_ID);
        assert_eq!(vocab.id("<eos>"), EOS_ID);
        assert_eq!(vocab.id("<unk>"), UNK_ID);
        assert_eq!(vocab.id("alpha"), 4);
        assert_eq!(vocab.id("zebra"), 5);
        assert_eq!(vocab.id("missing"), UNK_ID);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        vocab.save(&path).unwrap();
        let loaded = Vocab::load(&path).unwrap();
        assert_eq!(loaded.len(), vocab.len());
        assert_eq!(loaded.id("zebra"), 5);
    }

    #[test]
    fn recurrent_lm_distributions_are_normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut params = ParamSet::new();
        let lm = RecurrentLm::new(&mut params, 12, 8, &mut rng);
        let bound = lm.bind(&params);
        let dist = bound.next_token_distribution(&[4, 5], &[6]);
        let total: f64 = dist.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(dist.iter().all(|&p| p >= 0.0));
        let weights = dynamic_weights(&bound, &[vec![4], vec![5, 6]], &[7]);
        let total: f64 = weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn recurrent_lm_sequence_loss_matches_pure_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut params = ParamSet::new();
        let lm = RecurrentLm::new(&mut params, 10, 8, &mut rng);
        let snippets = vec![vec![4, 5], vec![6]];
        let reference = vec![4, 7, EOS_ID];
        let mut g = Graph::new();
        let (loss, weights) = lm
            .sequence_loss_graph(&mut g, &params, &snippets, &reference)
            .unwrap();
        let tape_loss = g.value(loss).item();
        let pure = generator_loss(&lm.bind(&params), &snippets, &reference).unwrap();
        assert!(
            (tape_loss - pure).abs() < 1e-9,
            "tape {tape_loss} vs pure {pure}"
        );
        // per-step weights sum to 1 on the tape as well
        for w in weights {
            let total: f64 = g.value(w).data().iter().sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn recurrent_lm_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut params = ParamSet::new();
        let lm = RecurrentLm::new(&mut params, 6, 4, &mut rng);
        let snippets = vec![vec![4], vec![5, 4]];
        let reference = vec![5, EOS_ID];
        let report = crate::nn::check_gradients(&mut params, 1e-4, |g, p| {
            let (loss, _) = lm
                .sequence_loss_graph(g, p, &snippets, &reference)
                .map_err(|e| NnError::InvalidArgument(e.to_string()))?;
            Ok(loss)
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
    }
}
