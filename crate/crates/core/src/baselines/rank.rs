//! Damped power-iteration sentence ranking: LexRank over a cosine
//! similarity graph and TextRank over normalized token overlap.

use super::{sentence_vectors, to_summary, validate, BaselineError, ExtractiveSummary};
use crate::text::DocumentCluster;
use std::collections::BTreeSet;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_SIM_THRESHOLD: f64 = 0.1;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const MAX_ITERATIONS: usize = 200;

/// Stationary scores of the LexRank random walk on an unweighted undirected
/// graph given as neighbor lists (no self-loops). Update rule:
/// `p_i = (1 - d)/n + d * sum_{j in N(i)} p_j / deg(j)`.
/// Nodes without neighbors contribute nothing, so a fully disconnected
/// graph settles at the teleport mass (1 - d)/n per node.
pub fn lexrank_stationary(
    adjacency: &[Vec<usize>],
    damping: f64,
    tol: f64,
    max_iterations: usize,
) -> Vec<f64> {
    let n = adjacency.len();
    if n == 0 {
        return Vec::new();
    }
    let teleport = (1.0 - damping) / n as f64;
    let mut scores = vec![1.0 / n as f64; n];
    for _ in 0..max_iterations {
        let mut next = vec![teleport; n];
        for (j, neighbors) in adjacency.iter().enumerate() {
            if neighbors.is_empty() {
                continue;
            }
            let share = damping * scores[j] / neighbors.len() as f64;
            for &i in neighbors {
                next[i] += share;
            }
        }
        let delta = scores
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        scores = next;
        if delta < tol {
            break;
        }
    }
    scores
}

/// Stationary scores of weighted TextRank. `weights[j]` lists `(i, w_ji)`
/// neighbors of node `j`; the graph is undirected so each edge appears in
/// both lists. Update rule:
/// `s_i = (1 - d) + d * sum_{j in N(i)} w_ji / sum_k w_jk * s_j`.
pub fn textrank_stationary(
    weights: &[Vec<(usize, f64)>],
    damping: f64,
    tol: f64,
    max_iterations: usize,
) -> Vec<f64> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let out_sums: Vec<f64> = weights
        .iter()
        .map(|list| list.iter().map(|(_, w)| w).sum())
        .collect();
    let mut scores = vec![1.0; n];
    for _ in 0..max_iterations {
        let mut next = vec![1.0 - damping; n];
        for (j, list) in weights.iter().enumerate() {
            if out_sums[j] <= 0.0 {
                continue;
            }
            let base = damping * scores[j] / out_sums[j];
            for &(i, w) in list {
                next[i] += base * w;
            }
        }
        let delta = scores
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        scores = next;
        if delta < tol {
            break;
        }
    }
    scores
}

/// Cosine-similarity adjacency over the cluster's sentences: an edge joins
/// distinct sentences with similarity at or above the threshold.
pub fn lexrank_adjacency(cluster: &DocumentCluster, sim_threshold: f64) -> Vec<Vec<usize>> {
    let vectors = sentence_vectors(cluster);
    let n = vectors.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if vectors[i].cosine(&vectors[j]) >= sim_threshold {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    adjacency
}

/// Normalized token-set overlap graph: `|A ∩ B| / (ln|A| + ln|B|)`, raw
/// overlap when either set has at most one element, no edge on zero
/// overlap.
pub fn textrank_weights(cluster: &DocumentCluster) -> Vec<Vec<(usize, f64)>> {
    let sets: Vec<BTreeSet<&str>> = cluster
        .sentences()
        .iter()
        .map(|s| s.tokens.iter().map(String::as_str).collect())
        .collect();
    let n = sets.len();
    let mut weights = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let overlap = sets[i].intersection(&sets[j]).count() as f64;
            if overlap == 0.0 {
                continue;
            }
            let w = if sets[i].len() <= 1 || sets[j].len() <= 1 {
                overlap
            } else {
                overlap / ((sets[i].len() as f64).ln() + (sets[j].len() as f64).ln())
            };
            weights[i].push((j, w));
            weights[j].push((i, w));
        }
    }
    weights
}

pub fn lexrank_scores(
    cluster: &DocumentCluster,
    sim_threshold: f64,
    damping: f64,
    tol: f64,
) -> Vec<f64> {
    lexrank_stationary(
        &lexrank_adjacency(cluster, sim_threshold),
        damping,
        tol,
        MAX_ITERATIONS,
    )
}

pub fn textrank_scores(cluster: &DocumentCluster, damping: f64, tol: f64) -> Vec<f64> {
    textrank_stationary(&textrank_weights(cluster), damping, tol, MAX_ITERATIONS)
}

pub fn lexrank_summarize(
    cluster: &DocumentCluster,
    budget: usize,
    sim_threshold: f64,
    damping: f64,
    tol: f64,
) -> Result<ExtractiveSummary, BaselineError> {
    validate(cluster, budget)?;
    let scores = lexrank_scores(cluster, sim_threshold, damping, tol);
    Ok(to_summary(
        cluster,
        super::select_top(&scores, budget),
        budget,
    ))
}

pub fn textrank_summarize(
    cluster: &DocumentCluster,
    budget: usize,
    damping: f64,
    tol: f64,
) -> Result<ExtractiveSummary, BaselineError> {
    validate(cluster, budget)?;
    let scores = textrank_scores(cluster, damping, tol);
    Ok(to_summary(
        cluster,
        super::select_top(&scores, budget),
        budget,
    ))
}
