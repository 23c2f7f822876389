//! Single-head graph attention over an explicit edge list.
//!
//! Scores follow the standard formulation: LeakyReLU(aᵀ[Wq_i ‖ Wk_j]),
//! softmax-normalized over each query's in-neighborhood. Positive edge
//! weights (TF-IDF on the bipartite graph) enter as an additive log-weight
//! on the pre-softmax score, i.e. they multiply the softmax mass of the
//! edge. `edge_score_bias` is the one place that rule lives.

use super::params::{ParamId, ParamSet};
use super::tape::{Graph, Var};
use super::tensor::Tensor;
use super::NnError;
use rand_chacha::ChaCha8Rng;

pub const LEAKY_SLOPE: f64 = 0.2;

/// A directed attention edge: `target` (query side) attends to `source`
/// (key/value side). `weight` must be positive; 1.0 means unweighted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub target: usize,
    pub source: usize,
    pub weight: f64,
}

impl Edge {
    pub fn unweighted(target: usize, source: usize) -> Self {
        Edge {
            target,
            source,
            weight: 1.0,
        }
    }
}

/// Parameters of one GAT layer: a shared projection and the attention
/// vector over the concatenated projected pair.
#[derive(Debug, Clone)]
pub struct GatLayer {
    pub weight: ParamId,
    pub attention: ParamId,
    pub leaky_slope: f64,
    d_out: usize,
}

impl GatLayer {
    pub fn new(
        params: &mut ParamSet,
        prefix: &str,
        d_in: usize,
        d_out: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let weight = params.add(format!("{prefix}.weight"), Tensor::xavier(d_in, d_out, rng));
        let attention = params.add(
            format!("{prefix}.attention"),
            Tensor::xavier(2 * d_out, 1, rng),
        );
        GatLayer {
            weight,
            attention,
            leaky_slope: LEAKY_SLOPE,
            d_out,
        }
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }
}

/// Forward output plus the per-edge attention coefficients (in the order of
/// the input edge list), kept inspectable for the normalization invariant.
#[derive(Debug)]
pub struct GatOutput {
    pub output: Var,
    pub attention: Var,
}

/// How a positive edge weight enters the attention score: add its natural
/// log to the pre-softmax score, multiplying that edge's softmax mass.
pub fn edge_score_bias(weight: f64) -> f64 {
    weight.ln()
}

/// Attention-weighted aggregation of transformed neighbor values for every
/// query node. Every query must have at least one incoming edge.
pub fn forward_gat(
    g: &mut Graph,
    params: &ParamSet,
    layer: &GatLayer,
    queries: Var,
    keys: Var,
    values: Var,
    edges: &[Edge],
) -> Result<GatOutput, NnError> {
    let n_q = g.value(queries).rows();
    let n_k = g.value(keys).rows();
    if g.value(values).rows() != n_k {
        return Err(NnError::ShapeMismatch {
            op: "forward_gat",
            detail: format!(
                "keys have {n_k} rows but values have {}",
                g.value(values).rows()
            ),
        });
    }

    let mut covered = vec![false; n_q];
    for edge in edges {
        if edge.target >= n_q || edge.source >= n_k {
            return Err(NnError::InvalidArgument(format!(
                "edge ({}, {}) out of range for {n_q} queries / {n_k} keys",
                edge.target, edge.source
            )));
        }
        if edge.weight <= 0.0 {
            return Err(NnError::InvalidArgument(format!(
                "edge ({}, {}) has non-positive weight {}",
                edge.target, edge.source, edge.weight
            )));
        }
        covered[edge.target] = true;
    }
    if let Some(node) = covered.iter().position(|&c| !c) {
        return Err(NnError::EmptyNeighborhood { node });
    }

    let w = g.param(params, layer.weight);
    let a = g.param(params, layer.attention);

    let wq = g.matmul(queries, w)?;
    let wk = g.matmul(keys, w)?;
    let wv = g.matmul(values, w)?;

    let targets: Vec<usize> = edges.iter().map(|e| e.target).collect();
    let sources: Vec<usize> = edges.iter().map(|e| e.source).collect();

    let edge_q = g.gather_rows(wq, &targets)?;
    let edge_k = g.gather_rows(wk, &sources)?;
    let pair = g.concat_cols(edge_q, edge_k)?;
    let raw = g.matmul(pair, a)?;
    let scored = g.leaky_relu(raw, layer.leaky_slope);

    let bias = Tensor::column(edges.iter().map(|e| edge_score_bias(e.weight)).collect());
    let biased = if bias.data().iter().any(|&b| b != 0.0) {
        let bias_var = g.constant(bias);
        g.add(scored, bias_var)?
    } else {
        scored
    };

    let attention = g.segment_softmax(biased, &targets, n_q)?;
    let edge_v = g.gather_rows(wv, &sources)?;
    let output = g.segment_weighted_sum(attention, edge_v, &targets, n_q)?;

    Ok(GatOutput { output, attention })
}
