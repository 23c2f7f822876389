//! Reverse-mode automatic differentiation on a growable tape.
//!
//! A [`Graph`] records every operation in creation order, which is already a
//! topological order, so the backward pass is a single reverse sweep. Node
//! handles ([`Var`]) are cheap copies. Gradients accumulate into bound
//! [`ParamSet`] entries on `backward`.

use super::params::{ParamId, ParamSet};
use super::tensor::{self, Tensor};
use super::NnError;

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    AddScalar(Var),
    MatMul(Var, Var),
    Tanh(Var),
    Relu(Var),
    LeakyRelu(Var, f64),
    Sigmoid(Var),
    Ln(Var),
    Clamp(Var, f64, f64),
    GatherRows(Var, Vec<usize>),
    GatherCol(Var, usize),
    ConcatCols(Var, Var),
    VStack(Vec<Var>),
    AddRow(Var, Var),
    MeanRows(Var),
    SumAll(Var),
    MeanAll(Var),
    LogSumExpAll(Var),
    SoftmaxFlat(Var),
    LogSoftmaxFlat(Var),
    LogSoftmaxRows(Var),
    SegmentSoftmax(Var, Vec<usize>, usize),
    SegmentWeightedSum(Var, Var, Vec<usize>),
}

struct Node {
    value: Tensor,
    op: Op,
}

/// A recorded computation. Build values forward, then call
/// [`Graph::backward`] on a scalar loss.
#[derive(Default)]
pub struct Graph {
    nodes: Vec<Node>,
    bindings: Vec<(usize, ParamId)>,
    grads: Vec<Option<Tensor>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Tensor, op: Op) -> Var {
        debug_assert!(
            value.is_finite(),
            "non-finite value produced by {:?}",
            std::mem::discriminant(&op)
        );
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    /// Insert a constant leaf (no gradient is tracked back into it).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, Op::Leaf)
    }

    pub fn scalar(&mut self, value: f64) -> Var {
        self.constant(Tensor::scalar(value))
    }

    /// Insert a parameter leaf; its gradient accumulates into `params` on
    /// [`Graph::backward`].
    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        let var = self.push(params.get(id).value.clone(), Op::Leaf);
        self.bindings.push((var.0, id));
        var
    }

    pub fn value(&self, var: Var) -> &Tensor {
        &self.nodes[var.0].value
    }

    /// Gradient of the most recent backward pass with respect to `var`.
    pub fn grad(&self, var: Var) -> Option<&Tensor> {
        self.grads.get(var.0).and_then(|g| g.as_ref())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn shape_err(op: &'static str, detail: String) -> NnError {
        NnError::ShapeMismatch { op, detail }
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<(usize, usize), NnError> {
        let sa = self.value(a).shape();
        let sb = self.value(b).shape();
        if sa != sb {
            return Err(Self::shape_err(op, format!("{sa:?} vs {sb:?}")));
        }
        Ok(sa)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_shape("add", a, b)?;
        let mut out = self.value(a).clone();
        out.add_assign(self.value(b));
        Ok(self.push(out, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_shape("sub", a, b)?;
        let out = Tensor::from_vec(
            self.value(a).rows(),
            self.value(a).cols(),
            self.value(a)
                .data()
                .iter()
                .zip(self.value(b).data())
                .map(|(x, y)| x - y)
                .collect(),
        );
        Ok(self.push(out, Op::Sub(a, b)))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        self.same_shape("mul", a, b)?;
        let out = Tensor::from_vec(
            self.value(a).rows(),
            self.value(a).cols(),
            self.value(a)
                .data()
                .iter()
                .zip(self.value(b).data())
                .map(|(x, y)| x * y)
                .collect(),
        );
        Ok(self.push(out, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        let out = self.value(a).map(|v| v * factor);
        self.push(out, Op::Scale(a, factor))
    }

    pub fn add_scalar(&mut self, a: Var, shift: f64) -> Var {
        let out = self.value(a).map(|v| v + shift);
        self.push(out, Op::AddScalar(a))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        if self.value(a).cols() != self.value(b).rows() {
            return Err(Self::shape_err(
                "matmul",
                format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            ));
        }
        let out = tensor::matmul(self.value(a), self.value(b));
        Ok(self.push(out, Op::MatMul(a, b)))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::tanh);
        self.push(out, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| v.max(0.0));
        self.push(out, Op::Relu(a))
    }

    pub fn leaky_relu(&mut self, a: Var, slope: f64) -> Var {
        let out = self.value(a).map(|v| if v > 0.0 { v } else { slope * v });
        self.push(out, Op::LeakyRelu(a, slope))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        let out = self.value(a).map(|v| 1.0 / (1.0 + (-v).exp()));
        self.push(out, Op::Sigmoid(a))
    }

    /// Natural log; the caller is responsible for keeping inputs positive
    /// (see [`Graph::clamp`]).
    pub fn ln(&mut self, a: Var) -> Var {
        let out = self.value(a).map(f64::ln);
        self.push(out, Op::Ln(a))
    }

    /// Clamp into [lo, hi]; gradient is passed through inside the interval
    /// and zero outside.
    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        let out = self.value(a).map(|v| v.clamp(lo, hi));
        self.push(out, Op::Clamp(a, lo, hi))
    }

    /// Select rows of `a` by index, with repetition allowed.
    pub fn gather_rows(&mut self, a: Var, indices: &[usize]) -> Result<Var, NnError> {
        let src = self.value(a);
        let cols = src.cols();
        let mut data = Vec::with_capacity(indices.len() * cols);
        for &i in indices {
            if i >= src.rows() {
                return Err(NnError::InvalidArgument(format!(
                    "gather_rows index {i} out of range for {} rows",
                    src.rows()
                )));
            }
            data.extend_from_slice(src.row_slice(i));
        }
        let out = Tensor::from_vec(indices.len(), cols, data);
        Ok(self.push(out, Op::GatherRows(a, indices.to_vec())))
    }

    /// Select one column of `a` as an (m, 1) tensor.
    pub fn gather_col(&mut self, a: Var, col: usize) -> Result<Var, NnError> {
        let src = self.value(a);
        if col >= src.cols() {
            return Err(NnError::InvalidArgument(format!(
                "gather_col index {col} out of range for {} cols",
                src.cols()
            )));
        }
        let data: Vec<f64> = (0..src.rows()).map(|i| src.get(i, col)).collect();
        let out = Tensor::column(data);
        Ok(self.push(out, Op::GatherCol(a, col)))
    }

    /// Concatenate along columns: (m, p) ++ (m, q) -> (m, p + q).
    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var, NnError> {
        let (ra, ca) = self.value(a).shape();
        let (rb, cb) = self.value(b).shape();
        if ra != rb {
            return Err(Self::shape_err(
                "concat_cols",
                format!("row counts differ: {ra} vs {rb}"),
            ));
        }
        let mut data = Vec::with_capacity(ra * (ca + cb));
        for i in 0..ra {
            data.extend_from_slice(self.value(a).row_slice(i));
            data.extend_from_slice(self.value(b).row_slice(i));
        }
        let out = Tensor::from_vec(ra, ca + cb, data);
        Ok(self.push(out, Op::ConcatCols(a, b)))
    }

    /// Stack tensors with equal column counts along rows.
    pub fn vstack(&mut self, parts: &[Var]) -> Result<Var, NnError> {
        let first = *parts
            .first()
            .ok_or_else(|| NnError::InvalidArgument("vstack of zero tensors".into()))?;
        let cols = self.value(first).cols();
        let mut rows = 0;
        let mut data = Vec::new();
        for &part in parts {
            let t = self.value(part);
            if t.cols() != cols {
                return Err(Self::shape_err(
                    "vstack",
                    format!("column counts differ: {cols} vs {}", t.cols()),
                ));
            }
            rows += t.rows();
            data.extend_from_slice(t.data());
        }
        let out = Tensor::from_vec(rows, cols, data);
        Ok(self.push(out, Op::VStack(parts.to_vec())))
    }

    /// Broadcast-add a (1, n) row to every row of an (m, n) tensor.
    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var, NnError> {
        let (m, n) = self.value(a).shape();
        let (rr, rc) = self.value(row).shape();
        if rr != 1 || rc != n {
            return Err(Self::shape_err(
                "add_row",
                format!("({m}, {n}) plus ({rr}, {rc})"),
            ));
        }
        let mut out = self.value(a).clone();
        for i in 0..m {
            for j in 0..n {
                let v = out.get(i, j) + self.value(row).get(0, j);
                out.set(i, j, v);
            }
        }
        Ok(self.push(out, Op::AddRow(a, row)))
    }

    /// Column-wise mean: (m, n) -> (1, n).
    pub fn mean_rows(&mut self, a: Var) -> Result<Var, NnError> {
        let (m, n) = self.value(a).shape();
        if m == 0 {
            return Err(NnError::InvalidArgument("mean_rows over zero rows".into()));
        }
        let mut out = Tensor::zeros(1, n);
        for i in 0..m {
            for j in 0..n {
                out.data_mut()[j] += self.value(a).get(i, j) / m as f64;
            }
        }
        Ok(self.push(out, Op::MeanRows(a)))
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let total: f64 = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(total), Op::SumAll(a))
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let len = self.value(a).len() as f64;
        let total: f64 = self.value(a).data().iter().sum();
        self.push(Tensor::scalar(total / len), Op::MeanAll(a))
    }

    /// log Σ exp over every element, computed with a max shift. A single
    /// element reduces exactly to that element.
    pub fn logsumexp_all(&mut self, a: Var) -> Var {
        let value = logsumexp(self.value(a).data());
        self.push(Tensor::scalar(value), Op::LogSumExpAll(a))
    }

    /// Softmax over all elements jointly (shape preserved).
    pub fn softmax_flat(&mut self, a: Var) -> Var {
        let lse = logsumexp(self.value(a).data());
        let out = self.value(a).map(|v| (v - lse).exp());
        self.push(out, Op::SoftmaxFlat(a))
    }

    pub fn log_softmax_flat(&mut self, a: Var) -> Var {
        let lse = logsumexp(self.value(a).data());
        let out = self.value(a).map(|v| v - lse);
        self.push(out, Op::LogSoftmaxFlat(a))
    }

    /// Row-wise log-softmax of an (m, n) tensor.
    pub fn log_softmax_rows(&mut self, a: Var) -> Var {
        let (m, n) = self.value(a).shape();
        let mut out = Tensor::zeros(m, n);
        for i in 0..m {
            let lse = logsumexp(self.value(a).row_slice(i));
            for j in 0..n {
                out.set(i, j, self.value(a).get(i, j) - lse);
            }
        }
        self.push(out, Op::LogSoftmaxRows(a))
    }

    /// Softmax of an (e, 1) score column within segments: entry `i` is
    /// normalized over all entries sharing `segments[i]`. Every segment id
    /// must be `< n_segments`; empty segments are allowed here (the GAT
    /// layer rejects them earlier with a structural error).
    pub fn segment_softmax(
        &mut self,
        scores: Var,
        segments: &[usize],
        n_segments: usize,
    ) -> Result<Var, NnError> {
        let (e, c) = self.value(scores).shape();
        if c != 1 || e != segments.len() {
            return Err(Self::shape_err(
                "segment_softmax",
                format!("scores ({e}, {c}) with {} segment ids", segments.len()),
            ));
        }
        if let Some(&bad) = segments.iter().find(|&&s| s >= n_segments) {
            return Err(NnError::InvalidArgument(format!(
                "segment id {bad} out of range ({n_segments} segments)"
            )));
        }
        let data = self.value(scores).data();
        let mut maxes = vec![f64::NEG_INFINITY; n_segments];
        for (i, &seg) in segments.iter().enumerate() {
            maxes[seg] = maxes[seg].max(data[i]);
        }
        let mut sums = vec![0.0; n_segments];
        let mut exps = vec![0.0; e];
        for (i, &seg) in segments.iter().enumerate() {
            exps[i] = (data[i] - maxes[seg]).exp();
            sums[seg] += exps[i];
        }
        for (i, &seg) in segments.iter().enumerate() {
            exps[i] /= sums[seg];
        }
        let out = Tensor::column(exps);
        Ok(self.push(
            out,
            Op::SegmentSoftmax(scores, segments.to_vec(), n_segments),
        ))
    }

    /// `out[s] = Σ_{i: segments[i] = s} alpha[i] * rows[i]` for alpha
    /// (e, 1) and rows (e, d), producing (n_segments, d).
    pub fn segment_weighted_sum(
        &mut self,
        alpha: Var,
        rows: Var,
        segments: &[usize],
        n_segments: usize,
    ) -> Result<Var, NnError> {
        let (ea, ca) = self.value(alpha).shape();
        let (er, d) = self.value(rows).shape();
        if ca != 1 || ea != er || ea != segments.len() {
            return Err(Self::shape_err(
                "segment_weighted_sum",
                format!(
                    "alpha ({ea}, {ca}), rows ({er}, {d}), {} segment ids",
                    segments.len()
                ),
            ));
        }
        let mut out = Tensor::zeros(n_segments, d);
        for (i, &seg) in segments.iter().enumerate() {
            let w = self.value(alpha).data()[i];
            for j in 0..d {
                let v = out.get(seg, j) + w * self.value(rows).get(i, j);
                out.set(seg, j, v);
            }
        }
        Ok(self.push(out, Op::SegmentWeightedSum(alpha, rows, segments.to_vec())))
    }

    /// Reverse-mode sweep from a scalar `loss`. Gradients for bound
    /// parameters are added into `params.grad`; intermediate gradients stay
    /// inspectable through [`Graph::grad`].
    pub fn backward(&mut self, loss: Var, params: &mut ParamSet) -> Result<(), NnError> {
        let (r, c) = self.value(loss).shape();
        if (r, c) != (1, 1) {
            return Err(NnError::NonScalarLoss { rows: r, cols: c });
        }
        let n = self.nodes.len();
        self.grads = vec![None; n];
        self.grads[loss.0] = Some(Tensor::scalar(1.0));

        for id in (0..=loss.0).rev() {
            let Some(grad) = self.grads[id].clone() else {
                continue;
            };
            let op = self.nodes[id].op.clone();
            match op {
                Op::Leaf => {}
                Op::Add(a, b) => {
                    self.accumulate(a, &grad);
                    self.accumulate(b, &grad);
                }
                Op::Sub(a, b) => {
                    self.accumulate(a, &grad);
                    self.accumulate(b, &grad.map(|v| -v));
                }
                Op::Mul(a, b) => {
                    let ga = elementwise(&grad, self.value(b), |g, y| g * y);
                    let gb = elementwise(&grad, self.value(a), |g, x| g * x);
                    self.accumulate(a, &ga);
                    self.accumulate(b, &gb);
                }
                Op::Scale(a, factor) => self.accumulate(a, &grad.map(|v| v * factor)),
                Op::AddScalar(a) => self.accumulate(a, &grad),
                Op::MatMul(a, b) => {
                    let ga = tensor::matmul_nt(&grad, self.value(b));
                    let gb = tensor::matmul_tn(self.value(a), &grad);
                    self.accumulate(a, &ga);
                    self.accumulate(b, &gb);
                }
                Op::Tanh(a) => {
                    let y = &self.nodes[id].value;
                    let ga = elementwise(&grad, y, |g, y| g * (1.0 - y * y));
                    self.accumulate(a, &ga);
                }
                Op::Relu(a) => {
                    let ga =
                        elementwise(&grad, self.value(a), |g, x| if x > 0.0 { g } else { 0.0 });
                    self.accumulate(a, &ga);
                }
                Op::LeakyRelu(a, slope) => {
                    let ga = elementwise(
                        &grad,
                        self.value(a),
                        |g, x| if x > 0.0 { g } else { g * slope },
                    );
                    self.accumulate(a, &ga);
                }
                Op::Sigmoid(a) => {
                    let y = &self.nodes[id].value;
                    let ga = elementwise(&grad, y, |g, y| g * y * (1.0 - y));
                    self.accumulate(a, &ga);
                }
                Op::Ln(a) => {
                    let ga = elementwise(&grad, self.value(a), |g, x| g / x);
                    self.accumulate(a, &ga);
                }
                Op::Clamp(a, lo, hi) => {
                    let ga = elementwise(&grad, self.value(a), |g, x| {
                        if (lo..=hi).contains(&x) {
                            g
                        } else {
                            0.0
                        }
                    });
                    self.accumulate(a, &ga);
                }
                Op::GatherRows(a, indices) => {
                    let (rows, cols) = self.value(a).shape();
                    let mut ga = Tensor::zeros(rows, cols);
                    for (out_row, &src_row) in indices.iter().enumerate() {
                        for j in 0..cols {
                            let v = ga.get(src_row, j) + grad.get(out_row, j);
                            ga.set(src_row, j, v);
                        }
                    }
                    self.accumulate(a, &ga);
                }
                Op::GatherCol(a, col) => {
                    let (rows, cols) = self.value(a).shape();
                    let mut ga = Tensor::zeros(rows, cols);
                    for i in 0..rows {
                        ga.set(i, col, grad.get(i, 0));
                    }
                    self.accumulate(a, &ga);
                }
                Op::ConcatCols(a, b) => {
                    let (m, ca) = self.value(a).shape();
                    let cb = self.value(b).cols();
                    let mut ga = Tensor::zeros(m, ca);
                    let mut gb = Tensor::zeros(m, cb);
                    for i in 0..m {
                        for j in 0..ca {
                            ga.set(i, j, grad.get(i, j));
                        }
                        for j in 0..cb {
                            gb.set(i, j, grad.get(i, ca + j));
                        }
                    }
                    self.accumulate(a, &ga);
                    self.accumulate(b, &gb);
                }
                Op::VStack(parts) => {
                    let mut offset = 0;
                    for part in parts {
                        let (rows, cols) = self.value(part).shape();
                        let mut gp = Tensor::zeros(rows, cols);
                        for i in 0..rows {
                            for j in 0..cols {
                                gp.set(i, j, grad.get(offset + i, j));
                            }
                        }
                        offset += rows;
                        self.accumulate(part, &gp);
                    }
                }
                Op::AddRow(a, row) => {
                    self.accumulate(a, &grad);
                    let (m, n) = grad.shape();
                    let mut gr = Tensor::zeros(1, n);
                    for i in 0..m {
                        for j in 0..n {
                            gr.data_mut()[j] += grad.get(i, j);
                        }
                    }
                    self.accumulate(row, &gr);
                }
                Op::MeanRows(a) => {
                    let (m, n) = self.value(a).shape();
                    let mut ga = Tensor::zeros(m, n);
                    for i in 0..m {
                        for j in 0..n {
                            ga.set(i, j, grad.get(0, j) / m as f64);
                        }
                    }
                    self.accumulate(a, &ga);
                }
                Op::SumAll(a) => {
                    let g = grad.item();
                    let ga = self.value(a).map(|_| g);
                    self.accumulate(a, &ga);
                }
                Op::MeanAll(a) => {
                    let g = grad.item() / self.value(a).len() as f64;
                    let ga = self.value(a).map(|_| g);
                    self.accumulate(a, &ga);
                }
                Op::LogSumExpAll(a) => {
                    let g = grad.item();
                    let lse = logsumexp(self.value(a).data());
                    let ga = self.value(a).map(|v| g * (v - lse).exp());
                    self.accumulate(a, &ga);
                }
                Op::SoftmaxFlat(a) => {
                    let y = &self.nodes[id].value;
                    let dot: f64 = grad.data().iter().zip(y.data()).map(|(g, p)| g * p).sum();
                    let ga = elementwise(&grad, y, |g, p| p * (g - dot));
                    self.accumulate(a, &ga);
                }
                Op::LogSoftmaxFlat(a) => {
                    let y = &self.nodes[id].value;
                    let gsum: f64 = grad.data().iter().sum();
                    let ga = elementwise(&grad, y, |g, logp| g - logp.exp() * gsum);
                    self.accumulate(a, &ga);
                }
                Op::LogSoftmaxRows(a) => {
                    let y = &self.nodes[id].value;
                    let (m, n) = y.shape();
                    let mut ga = Tensor::zeros(m, n);
                    for i in 0..m {
                        let gsum: f64 = grad.row_slice(i).iter().sum();
                        for j in 0..n {
                            ga.set(i, j, grad.get(i, j) - y.get(i, j).exp() * gsum);
                        }
                    }
                    self.accumulate(a, &ga);
                }
                Op::SegmentSoftmax(a, segments, n_segments) => {
                    let y = &self.nodes[id].value;
                    let mut seg_dot = vec![0.0; n_segments];
                    for (i, &seg) in segments.iter().enumerate() {
                        seg_dot[seg] += grad.data()[i] * y.data()[i];
                    }
                    let mut ga = Tensor::zeros(y.rows(), 1);
                    for (i, &seg) in segments.iter().enumerate() {
                        ga.data_mut()[i] = y.data()[i] * (grad.data()[i] - seg_dot[seg]);
                    }
                    self.accumulate(a, &ga);
                }
                Op::SegmentWeightedSum(alpha, rows, segments) => {
                    let d = self.value(rows).cols();
                    let e = segments.len();
                    let mut galpha = Tensor::zeros(e, 1);
                    let mut grows = Tensor::zeros(e, d);
                    for (i, &seg) in segments.iter().enumerate() {
                        let mut dot = 0.0;
                        for j in 0..d {
                            dot += grad.get(seg, j) * self.value(rows).get(i, j);
                            grows.set(i, j, self.value(alpha).data()[i] * grad.get(seg, j));
                        }
                        galpha.data_mut()[i] = dot;
                    }
                    self.accumulate(alpha, &galpha);
                    self.accumulate(rows, &grows);
                }
            }
        }

        for &(node_id, param_id) in &self.bindings {
            if let Some(grad) = &self.grads[node_id] {
                params.accumulate_grad(param_id, grad)?;
            }
        }
        Ok(())
    }

    fn accumulate(&mut self, var: Var, grad: &Tensor) {
        debug_assert_eq!(self.nodes[var.0].value.shape(), grad.shape());
        match &mut self.grads[var.0] {
            Some(existing) => existing.add_assign(grad),
            slot @ None => *slot = Some(grad.clone()),
        }
    }
}

fn elementwise(grad: &Tensor, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    debug_assert_eq!(grad.shape(), other.shape());
    Tensor::from_vec(
        grad.rows(),
        grad.cols(),
        grad.data()
            .iter()
            .zip(other.data())
            .map(|(&g, &o)| f(g, o))
            .collect(),
    )
}

/// Max-shifted log Σ exp; returns -inf for an empty slice.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param_scalar(params: &mut ParamSet, name: &str, v: f64) -> ParamId {
        params.add(name, Tensor::scalar(v))
    }

    #[test]
    fn grad_of_sum_is_ones() {
        let mut params = ParamSet::new();
        let id = params.add("x", Tensor::row(vec![1.0, 2.0, 3.0]));
        let mut g = Graph::new();
        let x = g.param(&params, id);
        let loss = g.sum_all(x);
        g.backward(loss, &mut params).unwrap();
        assert_eq!(params.get(id).grad.data(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn grad_of_quadratic_is_two_x() {
        let mut params = ParamSet::new();
        let id = params.add("x", Tensor::row(vec![1.0, -2.0, 0.5]));
        let mut g = Graph::new();
        let x = g.param(&params, id);
        let sq = g.mul(x, x).unwrap();
        let loss = g.sum_all(sq);
        g.backward(loss, &mut params).unwrap();
        assert_eq!(params.get(id).grad.data(), &[2.0, -4.0, 1.0]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut params = ParamSet::new();
        let id = params.add("x", Tensor::row(vec![1.0, 2.0]));
        let mut g = Graph::new();
        let x = g.param(&params, id);
        let err = g.backward(x, &mut params).unwrap_err();
        assert!(matches!(err, NnError::NonScalarLoss { .. }));
    }

    #[test]
    fn logsumexp_singleton_is_exact() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::scalar(-3.25));
        let y = g.logsumexp_all(x);
        assert_eq!(g.value(y).item(), -3.25);
    }

    #[test]
    fn softmax_flat_sums_to_one() {
        let mut g = Graph::new();
        let x = g.constant(Tensor::column(vec![0.1, 2.0, -1.0]));
        let p = g.softmax_flat(x);
        let total: f64 = g.value(p).data().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_softmax_normalizes_per_segment() {
        let mut g = Graph::new();
        let s = g.constant(Tensor::column(vec![1.0, 2.0, 3.0, 4.0]));
        let p = g.segment_softmax(s, &[0, 1, 0, 1], 2).unwrap();
        let d = g.value(p).data();
        assert!((d[0] + d[2] - 1.0).abs() < 1e-12);
        assert!((d[1] + d[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn param_reused_twice_accumulates() {
        let mut params = ParamSet::new();
        let id = param_scalar(&mut params, "x", 3.0);
        let mut g = Graph::new();
        let x = g.param(&params, id);
        let y = g.add(x, x).unwrap(); // y = 2x, dy/dx = 2
        g.backward(y, &mut params).unwrap();
        assert_eq!(params.get(id).grad.item(), 2.0);
    }

    #[test]
    fn matmul_grads() {
        // loss = sum(A·B); dA = 1·Bᵀ, dB = Aᵀ·1
        let mut params = ParamSet::new();
        let a_id = params.add("a", Tensor::from_vec(1, 2, vec![2.0, 3.0]));
        let b_id = params.add("b", Tensor::from_vec(2, 1, vec![5.0, 7.0]));
        let mut g = Graph::new();
        let a = g.param(&params, a_id);
        let b = g.param(&params, b_id);
        let y = g.matmul(a, b).unwrap();
        g.backward(y, &mut params).unwrap();
        assert_eq!(params.get(a_id).grad.data(), &[5.0, 7.0]);
        assert_eq!(params.get(b_id).grad.data(), &[2.0, 3.0]);
    }
}
