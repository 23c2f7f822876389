//! Minimal dense-tensor and reverse-mode autodiff engine: enough for GAT
//! layers, the sentence initializer, feed-forward blocks, and toy-scale
//! training loops.

pub mod checkpoint;
pub mod gat;
pub mod gradcheck;
pub mod params;
pub mod tape;
pub mod tensor;

pub use gat::{forward_gat, Edge, GatLayer, GatOutput};
pub use gradcheck::{check_gradients, GradCheckReport};
pub use params::{sgd_step, sgd_step_grouped, ParamId, ParamSet, Parameter};
pub use tape::{logsumexp, Graph, Var};
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("backward requires a scalar loss, got ({rows}, {cols})")]
    NonScalarLoss { rows: usize, cols: usize },
    #[error("query node {node} has an empty neighborhood")]
    EmptyNeighborhood { node: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One-hidden-layer feed-forward block with ReLU and a residual connection:
/// `x + W2·relu(x·W1 + b1) + b2`. Hidden width is fixed at twice the model
/// width by the callers that construct it.
#[derive(Debug, Clone)]
pub struct FeedForward {
    pub w1: ParamId,
    pub b1: ParamId,
    pub w2: ParamId,
    pub b2: ParamId,
}

impl FeedForward {
    pub fn new(
        params: &mut ParamSet,
        prefix: &str,
        dim: usize,
        hidden: usize,
        rng: &mut rand_chacha::ChaCha8Rng,
    ) -> Self {
        FeedForward {
            w1: params.add(format!("{prefix}.w1"), Tensor::xavier(dim, hidden, rng)),
            b1: params.add(format!("{prefix}.b1"), Tensor::zeros(1, hidden)),
            w2: params.add(format!("{prefix}.w2"), Tensor::xavier(hidden, dim, rng)),
            b2: params.add(format!("{prefix}.b2"), Tensor::zeros(1, dim)),
        }
    }

    pub fn forward(&self, g: &mut Graph, params: &ParamSet, x: Var) -> Result<Var, NnError> {
        let w1 = g.param(params, self.w1);
        let b1 = g.param(params, self.b1);
        let w2 = g.param(params, self.w2);
        let b2 = g.param(params, self.b2);
        let hidden = g.matmul(x, w1)?;
        let hidden = g.add_row(hidden, b1)?;
        let hidden = g.relu(hidden);
        let out = g.matmul(hidden, w2)?;
        let out = g.add_row(out, b2)?;
        g.add(x, out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn feed_forward_preserves_shape_and_differentiates() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = ParamSet::new();
        let ffn = FeedForward::new(&mut params, "ffn", 4, 8, &mut rng);
        let input = Tensor::xavier(3, 4, &mut rng);
        let report = check_gradients(&mut params, 1e-4, |g, p| {
            let x = g.constant(input.clone());
            let y = ffn.forward(g, p, x)?;
            Ok(g.mean_all(y))
        })
        .unwrap();
        assert!(report.passes(1e-4), "{report:?}");
    }
}
