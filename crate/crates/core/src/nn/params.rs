//! Named trainable parameters with accumulated gradients.

use super::tensor::Tensor;
use super::NnError;
use std::collections::HashMap;

/// A named tensor paired with a gradient of the same shape.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub grad: Tensor,
}

impl Parameter {
    pub fn new(name: impl Into<String>, mut value: Tensor) -> Self {
        value.requires_grad = true;
        let grad = Tensor::zeros(value.rows(), value.cols());
        Parameter {
            name: name.into(),
            value,
            grad,
        }
    }
}

/// Stable handle into a [`ParamSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamId(pub(crate) usize);

/// Ordered collection of parameters with lookup by name. Insertion order is
/// the checkpoint serialization order.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    params: Vec<Parameter>,
    by_name: HashMap<String, usize>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        let name = name.into();
        assert!(
            !self.by_name.contains_key(&name),
            "duplicate parameter name {name:?}"
        );
        let id = ParamId(self.params.len());
        self.by_name.insert(name.clone(), id.0);
        self.params.push(Parameter::new(name, value));
        id
    }

    pub fn get(&self, id: ParamId) -> &Parameter {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Parameter {
        &mut self.params[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied().map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Parameter> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut Parameter> {
        self.params.iter_mut()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.fill(0.0);
        }
    }

    pub(crate) fn accumulate_grad(&mut self, id: ParamId, grad: &Tensor) -> Result<(), NnError> {
        let param = &mut self.params[id.0];
        if param.grad.shape() != grad.shape() {
            return Err(NnError::ShapeMismatch {
                op: "accumulate_grad",
                detail: format!(
                    "parameter {:?} has shape {:?}, gradient {:?}",
                    param.name,
                    param.grad.shape(),
                    grad.shape()
                ),
            });
        }
        param.grad.add_assign(grad);
        Ok(())
    }
}

/// One step of plain stochastic gradient descent: `p <- p - lr * grad` for
/// every parameter, then gradients are zeroed.
pub fn sgd_step(params: &mut ParamSet, learning_rate: f64) {
    sgd_step_grouped(params, |_| learning_rate);
}

/// SGD with a per-parameter learning rate chosen by name, for model parts
/// trained at different rates. Gradients are zeroed afterwards.
pub fn sgd_step_grouped(params: &mut ParamSet, rate_for: impl Fn(&str) -> f64) {
    for p in params.iter_mut() {
        let learning_rate = rate_for(&p.name);
        let (rows, cols) = p.value.shape();
        for i in 0..rows * cols {
            p.value.data_mut()[i] -= learning_rate * p.grad.data()[i];
        }
        p.grad.fill(0.0);
    }
}
