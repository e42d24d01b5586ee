//! Tape-based reverse-mode differentiation over dense `f64` matrices.
//!
//! Every value on the tape is an `Array2<f64>`; vectors are `1 × n` rows
//! and scalars are `1 × 1`. Operations append a node; [`Tape::backward`]
//! walks the tape once in reverse, so each node is visited exactly once
//! in topological order.

use std::sync::Arc;

use ndarray::{s, Array2, Axis, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

/// Sparse constant matrix used for neighborhood aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// `(row, col, value)` triples; duplicates are summed.
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn mul_dense(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, x.ncols()));
        for &(i, j, c) in &self.entries {
            let src = x.row(j);
            out.row_mut(i).scaled_add(c, &src);
        }
        out
    }

    pub fn transpose_mul_dense(&self, y: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((self.cols, y.ncols()));
        for &(i, j, c) in &self.entries {
            let src = y.row(i);
            out.row_mut(j).scaled_add(c, &src);
        }
        out
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows, self.cols));
        for &(i, j, c) in &self.entries {
            out[[i, j]] += c;
        }
        out
    }
}

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    OneMinus(Var),
    Relu(Var),
    Sigmoid(Var),
    Tanh(Var),
    ConcatCols(Var, Var),
    Gather(Var, Arc<[usize]>),
    Propagate(Var, Arc<SparseMatrix>),
    SegmentSum(Var, Arc<[usize]>),
    SumAll(Var),
    MeanSquaredError(Var, Arc<[f64]>),
    SoftmaxCrossEntropy(Var, Arc<[usize]>),
}

#[derive(Debug)]
struct Node {
    value: Array2<f64>,
    op: Op,
}

/// Handle to a trainable parameter inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamId(pub usize);

/// Named trainable matrices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Array2<f64>>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Array2<f64>) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
        ParamId(self.values.len() - 1)
    }

    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.values[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.values[id.0]
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn values(&self) -> &[Array2<f64>] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.values
    }

    /// Total number of scalars.
    pub fn num_scalars(&self) -> usize {
        self.values.iter().map(Array2::len).sum()
    }
}

#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    bindings: Vec<(ParamId, Var)>,
}

/// Gradients of a scalar with respect to every tape node.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Array2<f64>>>,
    shapes: Vec<(usize, usize)>,
    bindings: Vec<(ParamId, Var)>,
}

impl Gradients {
    /// Gradient of `var`; zeros when the output does not depend on it.
    pub fn wrt(&self, var: Var) -> Array2<f64> {
        self.grads[var.0]
            .clone()
            .unwrap_or_else(|| Array2::zeros(self.shapes[var.0]))
    }

    /// Gradients for every parameter of `store`, zero for unbound ones.
    pub fn for_params(&self, store: &ParamStore) -> Vec<Array2<f64>> {
        let mut out: Vec<Array2<f64>> = store
            .values()
            .iter()
            .map(|v| Array2::zeros(v.raw_dim()))
            .collect();
        for &(id, var) in &self.bindings {
            if let Some(g) = &self.grads[var.0] {
                out[id.0] += g;
            }
        }
        out
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, var: Var) -> &Array2<f64> {
        &self.nodes[var.0].value
    }

    pub fn shape(&self, var: Var) -> (usize, usize) {
        self.nodes[var.0].value.dim()
    }

    fn push(&mut self, value: Array2<f64>, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, value: Array2<f64>) -> Var {
        self.push(value, Op::Leaf)
    }

    /// Leaf holding a parameter's current value; repeated calls reuse the node.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> Var {
        if let Some(&(_, var)) = self.bindings.iter().find(|(p, _)| *p == id) {
            return var;
        }
        let var = self.leaf(store.get(id).clone());
        self.bindings.push((id, var));
        var
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::DimensionMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let ((_, k1), (k2, _)) = (self.shape(a), self.shape(b));
        if k1 != k2 {
            return Err(Error::DimensionMismatch(format!(
                "matmul {:?} x {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        let v = self.value(a).dot(self.value(b));
        Ok(self.push(v, Op::MatMul(a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let v = self.value(a) + self.value(b);
        Ok(self.push(v, Op::Add(a, b)))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "sub")?;
        let v = self.value(a) - self.value(b);
        Ok(self.push(v, Op::Sub(a, b)))
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let v = self.value(a) * self.value(b);
        Ok(self.push(v, Op::Mul(a, b)))
    }

    /// `x + 1 · row`, broadcasting a `1 × n` row over every row of `x`.
    pub fn add_row(&mut self, x: Var, row: Var) -> Result<Var> {
        let ((_, n), (r, m)) = (self.shape(x), self.shape(row));
        if r != 1 || n != m {
            return Err(Error::DimensionMismatch(format!(
                "add_row {:?} + {:?}",
                self.shape(x),
                self.shape(row)
            )));
        }
        let v = self.value(x) + self.value(row);
        Ok(self.push(v, Op::AddRow(x, row)))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let v = self.value(x) * c;
        self.push(v, Op::Scale(x, c))
    }

    pub fn one_minus(&mut self, x: Var) -> Var {
        let v = self.value(x).mapv(|a| 1.0 - a);
        self.push(v, Op::OneMinus(x))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let v = self.value(x).mapv(|a| a.max(0.0));
        self.push(v, Op::Relu(x))
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        let v = self.value(x).mapv(sigmoid);
        self.push(v, Op::Sigmoid(x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        let v = self.value(x).mapv(f64::tanh);
        self.push(v, Op::Tanh(x))
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a).0 != self.shape(b).0 {
            return Err(Error::DimensionMismatch(format!(
                "concat {:?} | {:?}",
                self.shape(a),
                self.shape(b)
            )));
        }
        let v = ndarray::concatenate(Axis(1), &[self.value(a).view(), self.value(b).view()])
            .expect("row counts checked");
        Ok(self.push(v, Op::ConcatCols(a, b)))
    }

    /// Row lookup: output row `r` is `table[rows[r]]`.
    pub fn gather(&mut self, table: Var, rows: Arc<[usize]>) -> Result<Var> {
        let (n, d) = self.shape(table);
        if let Some(&bad) = rows.iter().find(|&&r| r >= n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                num_nodes: n,
            });
        }
        let src = self.value(table);
        let mut v = Array2::zeros((rows.len(), d));
        for (r, &j) in rows.iter().enumerate() {
            v.row_mut(r).assign(&src.row(j));
        }
        Ok(self.push(v, Op::Gather(table, rows)))
    }

    /// `A · x` for a constant sparse `A`.
    pub fn propagate(&mut self, x: Var, matrix: Arc<SparseMatrix>) -> Result<Var> {
        if matrix.cols != self.shape(x).0 {
            return Err(Error::DimensionMismatch(format!(
                "propagate {}x{} over {:?}",
                matrix.rows,
                matrix.cols,
                self.shape(x)
            )));
        }
        let v = matrix.mul_dense(self.value(x));
        Ok(self.push(v, Op::Propagate(x, matrix)))
    }

    /// Sums rows into segments: output row `s` is the sum of rows `r` with
    /// `segments[r] == s`. The number of output rows is `num_segments`.
    pub fn segment_sum(
        &mut self,
        x: Var,
        segments: Arc<[usize]>,
        num_segments: usize,
    ) -> Result<Var> {
        let (n, d) = self.shape(x);
        if segments.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} segment ids for {n} rows",
                segments.len()
            )));
        }
        if let Some(&bad) = segments.iter().find(|&&s| s >= num_segments) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                num_nodes: num_segments,
            });
        }
        let src = self.value(x);
        let mut v = Array2::zeros((num_segments, d));
        for (r, &s) in segments.iter().enumerate() {
            v.row_mut(s).scaled_add(1.0, &src.row(r));
        }
        Ok(self.push(v, Op::SegmentSum(x, segments)))
    }

    pub fn sum_all(&mut self, x: Var) -> Var {
        let v = Array2::from_elem((1, 1), self.value(x).sum());
        self.push(v, Op::SumAll(x))
    }

    /// Mean over rows of `(pred - target)²` for an `n × 1` prediction.
    pub fn mean_squared_error(&mut self, pred: Var, targets: Arc<[f64]>) -> Result<Var> {
        let (n, c) = self.shape(pred);
        if c != 1 || n != targets.len() || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "mse over {:?} with {} targets",
                self.shape(pred),
                targets.len()
            )));
        }
        let p = self.value(pred);
        let loss = (0..n)
            .map(|i| (p[[i, 0]] - targets[i]).powi(2))
            .sum::<f64>()
            / n as f64;
        Ok(self.push(
            Array2::from_elem((1, 1), loss),
            Op::MeanSquaredError(pred, targets),
        ))
    }

    /// Mean softmax cross-entropy of `n × C` logits against class indices.
    pub fn softmax_cross_entropy(&mut self, logits: Var, classes: Arc<[usize]>) -> Result<Var> {
        let (n, c) = self.shape(logits);
        if n != classes.len() || n == 0 || classes.iter().any(|&k| k >= c) {
            return Err(Error::DimensionMismatch(format!(
                "cross-entropy over {:?} with {} classes",
                self.shape(logits),
                classes.len()
            )));
        }
        let z = self.value(logits);
        let mut loss = 0.0;
        for (i, row) in z.outer_iter().enumerate() {
            let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let lse = max + row.mapv(|a| (a - max).exp()).sum().ln();
            loss += lse - row[classes[i]];
        }
        loss /= n as f64;
        Ok(self.push(
            Array2::from_elem((1, 1), loss),
            Op::SoftmaxCrossEntropy(logits, classes),
        ))
    }

    /// Reverse pass from a `1 × 1` output.
    pub fn backward(&self, output: Var) -> Result<Gradients> {
        let shape = self.shape(output);
        if shape != (1, 1) {
            return Err(Error::NonScalarOutput(shape));
        }
        let mut grads: Vec<Option<Array2<f64>>> = vec![None; output.0 + 1];
        grads[output.0] = Some(Array2::ones((1, 1)));

        fn accumulate(grads: &mut [Option<Array2<f64>>], var: Var, g: Array2<f64>) {
            match &mut grads[var.0] {
                Some(existing) => *existing += &g,
                slot => *slot = Some(g),
            }
        }

        for index in (0..=output.0).rev() {
            let Some(g) = grads[index].take() else {
                continue;
            };
            let node = &self.nodes[index];
            match &node.op {
                Op::Leaf => {}
                Op::MatMul(a, b) => {
                    let ga = g.dot(&self.value(*b).t());
                    let gb = self.value(*a).t().dot(&g);
                    accumulate(&mut grads, *a, ga);
                    accumulate(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g.clone());
                }
                Op::Sub(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, -&g);
                }
                Op::Mul(a, b) => {
                    accumulate(&mut grads, *a, &g * self.value(*b));
                    accumulate(&mut grads, *b, &g * self.value(*a));
                }
                Op::AddRow(x, row) => {
                    let grow = g.sum_axis(Axis(0)).insert_axis(Axis(0));
                    accumulate(&mut grads, *x, g.clone());
                    accumulate(&mut grads, *row, grow);
                }
                Op::Scale(x, c) => accumulate(&mut grads, *x, &g * *c),
                Op::OneMinus(x) => accumulate(&mut grads, *x, -&g),
                Op::Relu(x) => {
                    let mut gx = g.clone();
                    Zip::from(&mut gx).and(self.value(*x)).for_each(|gi, &xi| {
                        if xi <= 0.0 {
                            *gi = 0.0;
                        }
                    });
                    accumulate(&mut grads, *x, gx);
                }
                Op::Sigmoid(x) => {
                    let mut gx = g.clone();
                    Zip::from(&mut gx)
                        .and(&node.value)
                        .for_each(|gi, &y| *gi *= y * (1.0 - y));
                    accumulate(&mut grads, *x, gx);
                }
                Op::Tanh(x) => {
                    let mut gx = g.clone();
                    Zip::from(&mut gx)
                        .and(&node.value)
                        .for_each(|gi, &y| *gi *= 1.0 - y * y);
                    accumulate(&mut grads, *x, gx);
                }
                Op::ConcatCols(a, b) => {
                    let split = self.shape(*a).1;
                    accumulate(&mut grads, *a, g.slice(s![.., ..split]).to_owned());
                    accumulate(&mut grads, *b, g.slice(s![.., split..]).to_owned());
                }
                Op::Gather(table, rows) => {
                    let mut gt = Array2::zeros(self.shape(*table));
                    for (r, &j) in rows.iter().enumerate() {
                        gt.row_mut(j).scaled_add(1.0, &g.row(r));
                    }
                    accumulate(&mut grads, *table, gt);
                }
                Op::Propagate(x, matrix) => {
                    accumulate(&mut grads, *x, matrix.transpose_mul_dense(&g));
                }
                Op::SegmentSum(x, segments) => {
                    let mut gx = Array2::zeros(self.shape(*x));
                    for (r, &s) in segments.iter().enumerate() {
                        gx.row_mut(r).assign(&g.row(s));
                    }
                    accumulate(&mut grads, *x, gx);
                }
                Op::SumAll(x) => {
                    accumulate(&mut grads, *x, Array2::from_elem(self.shape(*x), g[[0, 0]]));
                }
                Op::MeanSquaredError(pred, targets) => {
                    let p = self.value(*pred);
                    let n = targets.len() as f64;
                    let scale = g[[0, 0]] * 2.0 / n;
                    let gp = Array2::from_shape_fn(p.raw_dim(), |(i, _)| {
                        scale * (p[[i, 0]] - targets[i])
                    });
                    accumulate(&mut grads, *pred, gp);
                }
                Op::SoftmaxCrossEntropy(logits, classes) => {
                    let z = self.value(*logits);
                    let n = classes.len() as f64;
                    let mut gz = Array2::zeros(z.raw_dim());
                    for (i, row) in z.outer_iter().enumerate() {
                        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
                        let exps = row.mapv(|a| (a - max).exp());
                        let total = exps.sum();
                        for (k, e) in exps.iter().enumerate() {
                            let target = if k == classes[i] { 1.0 } else { 0.0 };
                            gz[[i, k]] = g[[0, 0]] * (e / total - target) / n;
                        }
                    }
                    accumulate(&mut grads, *logits, gz);
                }
            }
            grads[index] = Some(g);
        }

        let mut shapes: Vec<(usize, usize)> = self.nodes.iter().map(|n| n.value.dim()).collect();
        shapes.truncate(self.nodes.len());
        grads.resize(self.nodes.len(), None);
        Ok(Gradients {
            grads,
            shapes,
            bindings: self.bindings.clone(),
        })
    }
}

/// Reverse-mode gradients of a scalar tape output for every parameter
/// bound on the tape; parameters the output does not reach get zeros.
pub fn gradient_of(tape: &Tape, output: Var, store: &ParamStore) -> Result<Vec<Array2<f64>>> {
    Ok(tape.backward(output)?.for_params(store))
}
