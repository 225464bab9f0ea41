use std::ops::Range;
use std::sync::Arc;

use rand::Rng;

use super::{matmul_raw, transpose_raw, Result, SparseMatrix, Tensor, TensorError};

/// Probabilities below this are clamped before taking a log.
pub const PROB_FLOOR: f64 = 1e-12;

/// Handle to a value recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

enum Op {
    Leaf,
    MatMul(Var, Var),
    Transpose(Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Concat {
        parts: Vec<Var>,
        axis: usize,
    },
    Slice {
        input: Var,
        axis: usize,
        start: usize,
    },
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    Softmax(Var),
    Dropout {
        input: Var,
        mask: Vec<f64>,
    },
    Embedding {
        table: Var,
        indices: Vec<usize>,
        padding: Option<usize>,
    },
    Sum(Var),
    Mean(Var),
    SumRows(Var),
    MeanRows(Var),
    SpMM {
        matrix: Arc<SparseMatrix>,
        input: Var,
    },
    CrossEntropy {
        probs: Var,
        label: usize,
    },
}

struct Node {
    value: Tensor,
    requires_grad: bool,
    op: Op,
}

/// Records a forward computation and replays it backwards.
///
/// A tape is single-owner. Gradients from [`Tape::backward`] are kept per
/// node until [`Tape::zero_grad`]; a second `backward` without a reset is an
/// error unless accumulation was switched on with [`Tape::set_accumulate`],
/// in which case the new gradients are added to the stored ones.
#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    grads: Vec<Option<Vec<f64>>>,
    has_grads: bool,
    accumulate: bool,
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

    pub fn set_accumulate(&mut self, accumulate: bool) {
        self.accumulate = accumulate;
    }

    pub fn zero_grad(&mut self) {
        self.grads.clear();
        self.has_grads = false;
    }

    /// Trainable input.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(value, true, Op::Leaf)
    }

    /// Input that never receives a gradient.
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push(value, false, Op::Leaf)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    pub fn requires_grad(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    pub fn grad(&self, v: Var) -> Option<Tensor> {
        self.grad_data(v).map(|g| Tensor {
            shape: self.nodes[v.0].value.shape().to_vec(),
            data: g.to_vec(),
        })
    }

    pub fn grad_data(&self, v: Var) -> Option<&[f64]> {
        self.grads.get(v.0).and_then(|g| g.as_deref())
    }

    fn push(&mut self, value: Tensor, requires_grad: bool, op: Op) -> Var {
        self.nodes.push(Node {
            value,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn any_grad(&self, vars: &[Var]) -> bool {
        vars.iter().any(|v| self.nodes[v.0].requires_grad)
    }

    fn mismatch(&self, op: &'static str, a: Var, b: Var) -> TensorError {
        TensorError::ShapeMismatch {
            op,
            lhs: self.shape(a).to_vec(),
            rhs: self.shape(b).to_vec(),
        }
    }

    fn require_matrix(&self, op: &'static str, v: Var) -> Result<(usize, usize)> {
        let s = self.shape(v);
        if s.len() != 2 {
            return Err(TensorError::ShapeMismatch {
                op,
                lhs: s.to_vec(),
                rhs: vec![],
            });
        }
        Ok((s[0], s[1]))
    }

    fn unary(&mut self, a: Var, f: impl Fn(f64) -> f64, op: Op) -> Var {
        let src = &self.nodes[a.0].value;
        let value = Tensor {
            shape: src.shape.clone(),
            data: src.data.iter().map(|&x| f(x)).collect(),
        };
        let rg = self.nodes[a.0].requires_grad;
        self.push(value, rg, op)
    }

    /// `[m, k] x [k, n] -> [m, n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.require_matrix("matmul", a)?;
        let (k2, n) = self.require_matrix("matmul", b)?;
        if k != k2 {
            return Err(self.mismatch("matmul", a, b));
        }
        let data = matmul_raw(self.value(a).data(), self.value(b).data(), m, k, n);
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(
            Tensor {
                shape: vec![m, n],
                data,
            },
            rg,
            Op::MatMul(a, b),
        ))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.require_matrix("transpose", a)?;
        let data = transpose_raw(self.value(a).data(), m, n);
        let rg = self.any_grad(&[a]);
        Ok(self.push(
            Tensor {
                shape: vec![n, m],
                data,
            },
            rg,
            Op::Transpose(a),
        ))
    }

    /// Elementwise sum. A `[1, n]` or `[n]` right operand is broadcast over
    /// the rows of an `[m, n]` left operand.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let sa = self.shape(a).to_vec();
        let sb = self.shape(b).to_vec();
        let rg = self.any_grad(&[a, b]);
        if sa == sb {
            let data = self
                .value(a)
                .data
                .iter()
                .zip(&self.value(b).data)
                .map(|(x, y)| x + y)
                .collect();
            return Ok(self.push(Tensor { shape: sa, data }, rg, Op::Add(a, b)));
        }
        let row_like = match sb.as_slice() {
            [1, n] | [n] => sa.len() == 2 && sa[1] == *n,
            _ => false,
        };
        if !row_like {
            return Err(self.mismatch("add", a, b));
        }
        let n = sa[1];
        let bias = self.value(b).data.clone();
        let data = self
            .value(a)
            .data
            .iter()
            .enumerate()
            .map(|(i, x)| x + bias[i % n])
            .collect();
        Ok(self.push(Tensor { shape: sa, data }, rg, Op::AddRow(a, b)))
    }

    /// Elementwise (Hadamard) product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(self.mismatch("mul", a, b));
        }
        let data = self
            .value(a)
            .data
            .iter()
            .zip(&self.value(b).data)
            .map(|(x, y)| x * y)
            .collect();
        let shape = self.shape(a).to_vec();
        let rg = self.any_grad(&[a, b]);
        Ok(self.push(Tensor { shape, data }, rg, Op::Mul(a, b)))
    }

    pub fn scale(&mut self, a: Var, factor: f64) -> Var {
        self.unary(a, |x| x * factor, Op::Scale(a, factor))
    }

    /// Concatenates along `axis` (0 = rows, 1 = columns for matrices; vectors
    /// only have axis 0).
    pub fn concat(&mut self, parts: &[Var], axis: usize) -> Result<Var> {
        let first = *parts.first().ok_or(TensorError::InvalidArgument {
            op: "concat",
            reason: "no inputs".into(),
        })?;
        let rank = self.shape(first).len();
        if rank == 0 || axis >= rank {
            return Err(TensorError::InvalidArgument {
                op: "concat",
                reason: format!("axis {axis} invalid for rank {rank}"),
            });
        }
        for &p in &parts[1..] {
            let (sp, sf) = (self.shape(p), self.shape(first));
            let compatible = sp.len() == rank
                && sp
                    .iter()
                    .zip(sf)
                    .enumerate()
                    .all(|(d, (x, y))| d == axis || x == y);
            if !compatible {
                return Err(self.mismatch("concat", first, p));
            }
        }
        let total: usize = parts.iter().map(|p| self.shape(*p)[axis]).sum();
        let mut shape = self.shape(first).to_vec();
        shape[axis] = total;
        let data = if rank == 1 || axis == 0 {
            parts
                .iter()
                .flat_map(|p| self.value(*p).data.iter().copied())
                .collect()
        } else {
            let rows = shape[0];
            let mut data = Vec::with_capacity(rows * total);
            for r in 0..rows {
                for p in parts {
                    data.extend_from_slice(self.value(*p).row_slice(r));
                }
            }
            data
        };
        let rg = self.any_grad(parts);
        Ok(self.push(
            Tensor { shape, data },
            rg,
            Op::Concat {
                parts: parts.to_vec(),
                axis,
            },
        ))
    }

    /// Contiguous sub-range along `axis`.
    pub fn slice(&mut self, a: Var, axis: usize, range: Range<usize>) -> Result<Var> {
        let shape = self.shape(a).to_vec();
        if axis >= shape.len() || range.start > range.end || range.end > shape[axis] {
            return Err(TensorError::InvalidArgument {
                op: "slice",
                reason: format!("range {range:?} on axis {axis} of shape {shape:?}"),
            });
        }
        let mut out_shape = shape.clone();
        out_shape[axis] = range.len();
        let src = self.value(a);
        let data = if shape.len() == 1 {
            src.data[range.clone()].to_vec()
        } else if axis == 0 {
            src.data[range.start * shape[1]..range.end * shape[1]].to_vec()
        } else {
            (0..shape[0])
                .flat_map(|r| src.row_slice(r)[range.clone()].iter().copied())
                .collect()
        };
        let rg = self.any_grad(&[a]);
        Ok(self.push(
            Tensor {
                shape: out_shape,
                data,
            },
            rg,
            Op::Slice {
                input: a,
                axis,
                start: range.start,
            },
        ))
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.unary(a, |x| 1.0 / (1.0 + (-x).exp()), Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.unary(a, f64::tanh, Op::Tanh(a))
    }

    pub fn relu(&mut self, a: Var) -> Var {
        self.unary(a, |x| x.max(0.0), Op::Relu(a))
    }

    /// Row-wise softmax (a vector is one row).
    pub fn softmax(&mut self, a: Var) -> Var {
        let cols = self.value(a).cols();
        self.softmax_impl(a, cols)
    }

    /// Row-wise softmax over the first `valid` columns; the remaining columns
    /// get probability exactly zero.
    pub fn masked_softmax(&mut self, a: Var, valid: usize) -> Result<Var> {
        let cols = self.value(a).cols();
        if valid == 0 || valid > cols {
            return Err(TensorError::InvalidArgument {
                op: "masked_softmax",
                reason: format!("{valid} valid columns of {cols}"),
            });
        }
        Ok(self.softmax_impl(a, valid))
    }

    fn softmax_impl(&mut self, a: Var, valid: usize) -> Var {
        let src = self.value(a);
        let cols = src.cols();
        let mut data = vec![0.0; src.len()];
        for r in 0..src.rows() {
            let row = &src.row_slice(r)[..valid];
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let out = &mut data[r * cols..r * cols + valid];
            let mut total = 0.0;
            for (o, x) in out.iter_mut().zip(row) {
                *o = (x - max).exp();
                total += *o;
            }
            for o in out.iter_mut() {
                *o /= total;
            }
        }
        let shape = src.shape.clone();
        let rg = self.any_grad(&[a]);
        self.push(Tensor { shape, data }, rg, Op::Softmax(a))
    }

    /// Inverted dropout. Identity (no node recorded) when not training or
    /// when `rate` is zero.
    pub fn dropout<R: Rng + ?Sized>(
        &mut self,
        a: Var,
        rate: f64,
        training: bool,
        rng: &mut R,
    ) -> Result<Var> {
        if !(0.0..1.0).contains(&rate) {
            return Err(TensorError::InvalidArgument {
                op: "dropout",
                reason: format!("rate {rate} outside [0, 1)"),
            });
        }
        if !training || rate == 0.0 {
            return Ok(a);
        }
        let keep = 1.0 - rate;
        let mask: Vec<f64> = (0..self.value(a).len())
            .map(|_| {
                if rng.random::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect();
        let src = self.value(a);
        let data = src.data.iter().zip(&mask).map(|(x, m)| x * m).collect();
        let shape = src.shape.clone();
        let rg = self.any_grad(&[a]);
        Ok(self.push(Tensor { shape, data }, rg, Op::Dropout { input: a, mask }))
    }

    /// Gathers rows of a `[rows, d]` table. Rows at the `padding` index come
    /// out as zeros and never receive gradient.
    pub fn embedding(
        &mut self,
        table: Var,
        indices: &[usize],
        padding: Option<usize>,
    ) -> Result<Var> {
        let (rows, d) = self.require_matrix("embedding", table)?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= rows) {
            return Err(TensorError::IndexOutOfRange { index: bad, rows });
        }
        let src = self.value(table);
        let mut data = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            if Some(i) == padding {
                data.extend(std::iter::repeat_n(0.0, d));
            } else {
                data.extend_from_slice(src.row_slice(i));
            }
        }
        let rg = self.any_grad(&[table]);
        Ok(self.push(
            Tensor {
                shape: vec![indices.len(), d],
                data,
            },
            rg,
            Op::Embedding {
                table,
                indices: indices.to_vec(),
                padding,
            },
        ))
    }

    /// Sum of all entries, as a scalar.
    pub fn sum(&mut self, a: Var) -> Var {
        let total = self.value(a).data.iter().sum();
        let rg = self.any_grad(&[a]);
        self.push(Tensor::scalar(total), rg, Op::Sum(a))
    }

    pub fn mean(&mut self, a: Var) -> Var {
        let src = self.value(a);
        let total: f64 = src.data.iter().sum::<f64>() / src.len() as f64;
        let rg = self.any_grad(&[a]);
        self.push(Tensor::scalar(total), rg, Op::Mean(a))
    }

    /// Column sums of a matrix, `[m, n] -> [1, n]`.
    pub fn sum_rows(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.require_matrix("sum_rows", a)?;
        let data = column_sums(self.value(a).data(), m, n);
        let rg = self.any_grad(&[a]);
        Ok(self.push(
            Tensor {
                shape: vec![1, n],
                data,
            },
            rg,
            Op::SumRows(a),
        ))
    }

    /// Column means of a matrix, `[m, n] -> [1, n]`.
    pub fn mean_rows(&mut self, a: Var) -> Result<Var> {
        let (m, n) = self.require_matrix("mean_rows", a)?;
        if m == 0 {
            return Err(TensorError::InvalidArgument {
                op: "mean_rows",
                reason: "no rows".into(),
            });
        }
        let data = column_sums(self.value(a).data(), m, n)
            .into_iter()
            .map(|s| s / m as f64)
            .collect();
        let rg = self.any_grad(&[a]);
        Ok(self.push(
            Tensor {
                shape: vec![1, n],
                data,
            },
            rg,
            Op::MeanRows(a),
        ))
    }

    /// Constant sparse matrix times a dense `[cols, n]` matrix.
    pub fn spmm(&mut self, matrix: Arc<SparseMatrix>, a: Var) -> Result<Var> {
        let (k, n) = self.require_matrix("spmm", a)?;
        if k != matrix.cols() {
            return Err(TensorError::ShapeMismatch {
                op: "spmm",
                lhs: vec![matrix.rows(), matrix.cols()],
                rhs: vec![k, n],
            });
        }
        let data = matrix.mul_dense(self.value(a).data(), n);
        let rg = self.any_grad(&[a]);
        let shape = vec![matrix.rows(), n];
        Ok(self.push(Tensor { shape, data }, rg, Op::SpMM { matrix, input: a }))
    }

    /// `-ln p[label]` with `p` clamped at [`PROB_FLOOR`].
    pub fn cross_entropy(&mut self, probs: Var, label: usize) -> Result<Var> {
        let p = self.value(probs);
        if p.rows() != 1 {
            return Err(TensorError::ShapeMismatch {
                op: "cross_entropy",
                lhs: p.shape.clone(),
                rhs: vec![1, p.cols()],
            });
        }
        if label >= p.len() {
            return Err(TensorError::LabelOutOfRange {
                label,
                classes: p.len(),
            });
        }
        let loss = -p.data[label].max(PROB_FLOOR).ln();
        let rg = self.any_grad(&[probs]);
        Ok(self.push(Tensor::scalar(loss), rg, Op::CrossEntropy { probs, label }))
    }

    /// Reverse sweep from a scalar `loss`, filling gradients for every node
    /// that depends on a trainable leaf.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        let shape = self.shape(loss);
        if self.value(loss).len() != 1 {
            return Err(TensorError::NonScalarLoss(shape.to_vec()));
        }
        if self.has_grads && !self.accumulate {
            return Err(TensorError::GradientsNotReset);
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let Some(g) = grads[i].take() else { continue };
            if self.nodes[i].requires_grad {
                self.propagate(i, &g, &mut grads);
            }
            grads[i] = Some(g);
        }
        if self.grads.len() < grads.len() {
            self.grads.resize(grads.len(), None);
        }
        for (slot, g) in self.grads.iter_mut().zip(grads) {
            let Some(g) = g else { continue };
            match slot {
                Some(existing) => existing.iter_mut().zip(&g).for_each(|(e, x)| *e += x),
                None => *slot = Some(g),
            }
        }
        self.has_grads = true;
        Ok(())
    }

    fn propagate(&self, i: usize, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let node = &self.nodes[i];
        let out = &node.value;
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = (self.shape(*a)[0], self.shape(*a)[1]);
                let n = self.shape(*b)[1];
                if self.requires_grad(*a) {
                    let bt = transpose_raw(self.value(*b).data(), k, n);
                    self.accumulate_into(grads, *a, matmul_raw(g, &bt, m, n, k));
                }
                if self.requires_grad(*b) {
                    let at = transpose_raw(self.value(*a).data(), m, k);
                    self.accumulate_into(grads, *b, matmul_raw(&at, g, k, m, n));
                }
            }
            Op::Transpose(a) => {
                let (m, n) = (self.shape(*a)[0], self.shape(*a)[1]);
                self.accumulate_into(grads, *a, transpose_raw(g, n, m));
            }
            Op::Add(a, b) => {
                self.accumulate_into(grads, *a, g.to_vec());
                self.accumulate_into(grads, *b, g.to_vec());
            }
            Op::AddRow(a, b) => {
                self.accumulate_into(grads, *a, g.to_vec());
                if self.requires_grad(*b) {
                    let n = out.cols();
                    self.accumulate_into(grads, *b, column_sums(g, out.rows(), n));
                }
            }
            Op::Mul(a, b) => {
                if self.requires_grad(*a) {
                    let gb = g
                        .iter()
                        .zip(&self.value(*b).data)
                        .map(|(g, y)| g * y)
                        .collect();
                    self.accumulate_into(grads, *a, gb);
                }
                if self.requires_grad(*b) {
                    let ga = g
                        .iter()
                        .zip(&self.value(*a).data)
                        .map(|(g, x)| g * x)
                        .collect();
                    self.accumulate_into(grads, *b, ga);
                }
            }
            Op::Scale(a, f) => self.accumulate_into(grads, *a, g.iter().map(|x| x * f).collect()),
            Op::Concat { parts, axis } => {
                let mut offset = 0;
                for p in parts {
                    let ps = self.shape(*p);
                    let width = ps[*axis];
                    if self.requires_grad(*p) {
                        let piece = if ps.len() == 1 || *axis == 0 {
                            let len = self.value(*p).len();
                            let start = offset * if ps.len() == 1 { 1 } else { ps[1] };
                            g[start..start + len].to_vec()
                        } else {
                            let total = out.cols();
                            (0..ps[0])
                                .flat_map(|r| {
                                    g[r * total + offset..r * total + offset + width]
                                        .iter()
                                        .copied()
                                })
                                .collect()
                        };
                        self.accumulate_into(grads, *p, piece);
                    }
                    offset += width;
                }
            }
            Op::Slice { input, axis, start } => {
                let src_shape = self.shape(*input).to_vec();
                let Some(full) = self.grad_slot(grads, *input) else {
                    return;
                };
                if src_shape.len() == 1 || *axis == 0 {
                    let offset = if src_shape.len() == 1 {
                        *start
                    } else {
                        start * src_shape[1]
                    };
                    add_assign(&mut full[offset..offset + g.len()], g);
                } else {
                    let (c, w) = (src_shape[1], out.cols());
                    for r in 0..src_shape[0] {
                        add_assign(
                            &mut full[r * c + start..r * c + start + w],
                            &g[r * w..(r + 1) * w],
                        );
                    }
                }
            }
            Op::Sigmoid(a) => {
                let d = g
                    .iter()
                    .zip(&out.data)
                    .map(|(g, y)| g * y * (1.0 - y))
                    .collect();
                self.accumulate_into(grads, *a, d);
            }
            Op::Tanh(a) => {
                let d = g
                    .iter()
                    .zip(&out.data)
                    .map(|(g, y)| g * (1.0 - y * y))
                    .collect();
                self.accumulate_into(grads, *a, d);
            }
            Op::Relu(a) => {
                let d = g
                    .iter()
                    .zip(&self.value(*a).data)
                    .map(|(g, x)| if *x > 0.0 { *g } else { 0.0 })
                    .collect();
                self.accumulate_into(grads, *a, d);
            }
            Op::Softmax(a) => {
                let cols = out.cols();
                let mut d = vec![0.0; g.len()];
                for r in 0..out.rows() {
                    let y = out.row_slice(r);
                    let gr = &g[r * cols..(r + 1) * cols];
                    let dot: f64 = y.iter().zip(gr).map(|(y, g)| y * g).sum();
                    for c in 0..cols {
                        d[r * cols + c] = y[c] * (gr[c] - dot);
                    }
                }
                self.accumulate_into(grads, *a, d);
            }
            Op::Dropout { input, mask } => {
                self.accumulate_into(
                    grads,
                    *input,
                    g.iter().zip(mask).map(|(g, m)| g * m).collect(),
                );
            }
            Op::Embedding {
                table,
                indices,
                padding,
            } => {
                let d = self.shape(*table)[1];
                let Some(full) = self.grad_slot(grads, *table) else {
                    return;
                };
                for (t, &idx) in indices.iter().enumerate() {
                    if Some(idx) != *padding {
                        add_assign(&mut full[idx * d..(idx + 1) * d], &g[t * d..(t + 1) * d]);
                    }
                }
            }
            Op::Sum(a) => {
                let n = self.value(*a).len();
                self.accumulate_into(grads, *a, vec![g[0]; n]);
            }
            Op::Mean(a) => {
                let n = self.value(*a).len();
                self.accumulate_into(grads, *a, vec![g[0] / n as f64; n]);
            }
            Op::SumRows(a) | Op::MeanRows(a) => {
                let m = self.shape(*a)[0];
                let scale = if matches!(node.op, Op::MeanRows(_)) {
                    1.0 / m as f64
                } else {
                    1.0
                };
                let d: Vec<f64> = (0..m).flat_map(|_| g.iter().map(|x| x * scale)).collect();
                self.accumulate_into(grads, *a, d);
            }
            Op::SpMM { matrix, input } => {
                let n = out.cols();
                self.accumulate_into(grads, *input, matrix.mul_dense_transposed(g, n));
            }
            Op::CrossEntropy { probs, label } => {
                let p = self.value(*probs).data[*label];
                let mut d = vec![0.0; self.value(*probs).len()];
                if p > PROB_FLOOR {
                    d[*label] = -g[0] / p;
                }
                self.accumulate_into(grads, *probs, d);
            }
        }
    }

    fn accumulate_into(&self, grads: &mut [Option<Vec<f64>>], v: Var, contrib: Vec<f64>) {
        if !self.nodes[v.0].requires_grad {
            return;
        }
        match &mut grads[v.0] {
            Some(existing) => existing.iter_mut().zip(&contrib).for_each(|(e, c)| *e += c),
            slot @ None => *slot = Some(contrib),
        }
    }

    /// Gradient buffer of `v`, zero-initialized on first use, for ops that
    /// scatter into a small part of a large input.
    fn grad_slot<'g>(&self, grads: &'g mut [Option<Vec<f64>>], v: Var) -> Option<&'g mut Vec<f64>> {
        if !self.nodes[v.0].requires_grad {
            return None;
        }
        let len = self.value(v).len();
        Some(grads[v.0].get_or_insert_with(|| vec![0.0; len]))
    }
}

fn add_assign(dst: &mut [f64], src: &[f64]) {
    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s);
}

fn column_sums(data: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for r in 0..rows {
        for (o, x) in out.iter_mut().zip(&data[r * cols..(r + 1) * cols]) {
            *o += x;
        }
    }
    out
}
