//! Tape-based reverse-mode differentiation over dense matrices.
//!
//! Every operation appends a node holding its forward value; [`Tape::backward`]
//! walks the tape in reverse and accumulates gradients into each node.

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::tensor::{Matrix, SparseMatrix};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

impl Var {
    pub fn id(self) -> usize {
        self.0
    }
}

enum Op<'a> {
    Leaf,
    MatMul(Var, Var),
    SparseMatMul(&'a SparseMatrix, Var),
    Add(Var, Var),
    BiasAdd(Var, Var),
    Relu(Var),
    MeanNeighbors(&'a Graph, Vec<f64>, Var),
    ConcatCols(Var, Var),
    SoftmaxCrossEntropy {
        logits: Var,
        labels: &'a [usize],
        mask: &'a [usize],
        probs: Matrix,
    },
}

struct Node<'a> {
    value: Matrix,
    grad: Option<Matrix>,
    op: Op<'a>,
}

#[derive(Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    fn push(&mut self, value: Matrix, op: Op<'a>, what: &'static str) -> Result<Var> {
        if !value.is_finite() {
            return Err(Error::NonFiniteValue(what));
        }
        self.nodes.push(Node {
            value,
            grad: None,
            op,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    pub fn leaf(&mut self, value: Matrix) -> Result<Var> {
        self.push(value, Op::Leaf, "leaf")
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    /// Gradient after [`backward`](Self::backward); zeros for nodes the
    /// output does not depend on.
    pub fn grad(&self, v: Var) -> Matrix {
        let node = &self.nodes[v.0];
        node.grad
            .clone()
            .unwrap_or_else(|| Matrix::zeros(node.value.rows, node.value.cols))
    }

    fn shape(&self, v: Var) -> (usize, usize) {
        self.nodes[v.0].value.shape()
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.1 != sb.0 {
            return Err(Error::ShapeMismatch(format!("matmul {sa:?} x {sb:?}")));
        }
        let v = self.value(a).matmul(self.value(b));
        self.push(v, Op::MatMul(a, b), "matmul")
    }

    pub fn sparse_matmul(&mut self, s: &'a SparseMatrix, x: Var) -> Result<Var> {
        let sx = self.shape(x);
        if s.cols != sx.0 {
            return Err(Error::ShapeMismatch(format!(
                "sparse_matmul {}x{} x {sx:?}",
                s.rows, s.cols
            )));
        }
        let v = s.matmul(self.value(x));
        self.push(v, Op::SparseMatMul(s, x), "sparse_matmul")
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        if self.shape(a) != self.shape(b) {
            return Err(Error::ShapeMismatch(format!("add {:?} + {:?}", self.shape(a), self.shape(b))));
        }
        let mut v = self.value(a).clone();
        v.add_assign(self.value(b));
        self.push(v, Op::Add(a, b), "add")
    }

    /// Adds the `1 x c` row `bias` to every row of `x`.
    pub fn bias_add(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (sx, sb) = (self.shape(x), self.shape(bias));
        if sb != (1, sx.1) {
            return Err(Error::ShapeMismatch(format!("bias_add {sx:?} + {sb:?}")));
        }
        let mut v = self.value(x).clone();
        let b = self.value(bias).data.clone();
        for i in 0..v.rows {
            v.row_mut(i).iter_mut().zip(&b).for_each(|(a, b)| *a += b);
        }
        self.push(v, Op::BiasAdd(x, bias), "bias_add")
    }

    pub fn relu(&mut self, x: Var) -> Result<Var> {
        let mut v = self.value(x).clone();
        v.data.iter_mut().for_each(|a| *a = a.max(0.0));
        self.push(v, Op::Relu(x), "relu")
    }

    /// Row `u` of the result is the weighted mean of the rows of `x` over the
    /// neighbors of `u`; isolated nodes get zeros.
    pub fn mean_rows_by_neighbors(&mut self, g: &'a Graph, x: Var) -> Result<Var> {
        let sx = self.shape(x);
        if sx.0 != g.n() {
            return Err(Error::ShapeMismatch(format!("mean_rows_by_neighbors n={} x {sx:?}", g.n())));
        }
        let deg = g.degree_vector().0;
        let xv = self.value(x);
        let mut v = Matrix::zeros(sx.0, sx.1);
        for u in 0..g.n() {
            if deg[u] == 0.0 {
                continue;
            }
            for (nb, w) in g.neighbors(u) {
                let scale = w / deg[u];
                let src = xv.row(nb).to_vec();
                v.row_mut(u).iter_mut().zip(&src).for_each(|(o, b)| *o += scale * b);
            }
        }
        self.push(v, Op::MeanNeighbors(g, deg, x), "mean_rows_by_neighbors")
    }

    pub fn concat_cols(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.0 != sb.0 {
            return Err(Error::ShapeMismatch(format!("concat_cols {sa:?} | {sb:?}")));
        }
        let (va, vb) = (self.value(a), self.value(b));
        let v = Matrix::from_fn(sa.0, sa.1 + sb.1, |i, j| {
            if j < sa.1 {
                va.get(i, j)
            } else {
                vb.get(i, j - sa.1)
            }
        });
        self.push(v, Op::ConcatCols(a, b), "concat_cols")
    }

    /// Mean cross-entropy of `softmax(logits)` over the rows in `mask`;
    /// returns a `1 x 1` node.
    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: &'a [usize], mask: &'a [usize]) -> Result<Var> {
        let (rows, c) = self.shape(logits);
        if labels.len() != rows {
            return Err(Error::ShapeMismatch(format!("{} labels for {rows} rows", labels.len())));
        }
        if mask.is_empty() {
            return Err(Error::ShapeMismatch("empty loss mask".into()));
        }
        let lv = self.value(logits);
        let mut probs = Matrix::zeros(rows, c);
        let mut loss = 0.0;
        for &i in mask {
            if i >= rows || labels[i] >= c {
                return Err(Error::ShapeMismatch(format!("row {i} / label out of range")));
            }
            let r = lv.row(i);
            let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = r.iter().map(|v| (v - max).exp()).sum();
            let log_z = max + sum.ln();
            loss += log_z - r[labels[i]];
            for j in 0..c {
                probs.data[i * c + j] = (r[j] - log_z).exp();
            }
        }
        loss /= mask.len() as f64;
        let v = Matrix::from_vec(1, 1, vec![loss])?;
        self.push(
            v,
            Op::SoftmaxCrossEntropy {
                logits,
                labels,
                mask,
                probs,
            },
            "softmax_cross_entropy",
        )
    }

    fn accumulate(&mut self, v: Var, g: Matrix) {
        match &mut self.nodes[v.0].grad {
            Some(existing) => existing.add_assign(&g),
            slot @ None => *slot = Some(g),
        }
    }

    /// Back-propagates from the scalar node `out` (seed gradient 1).
    pub fn backward(&mut self, out: Var) -> Result<()> {
        if self.shape(out) != (1, 1) {
            return Err(Error::ShapeMismatch("backward needs a 1x1 output".into()));
        }
        self.nodes[out.0].grad = Some(Matrix::from_vec(1, 1, vec![1.0])?);
        for idx in (0..=out.0).rev() {
            let Some(g) = self.nodes[idx].grad.take() else {
                continue;
            };
            let updates: Vec<(Var, Matrix)> = match &self.nodes[idx].op {
                Op::Leaf => Vec::new(),
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    vec![(*a, ga), (*b, gb)]
                }
                Op::SparseMatMul(s, x) => vec![(*x, s.t_matmul(&g))],
                Op::Add(a, b) => vec![(*a, g.clone()), (*b, g.clone())],
                Op::BiasAdd(x, b) => {
                    let mut gb = Matrix::zeros(1, g.cols);
                    for i in 0..g.rows {
                        gb.data.iter_mut().zip(g.row(i)).for_each(|(o, v)| *o += v);
                    }
                    vec![(*x, g.clone()), (*b, gb)]
                }
                Op::Relu(x) => {
                    let xv = self.value(*x);
                    let mut gx = g.clone();
                    // subgradient 0 at 0
                    gx.data.iter_mut().zip(&xv.data).for_each(|(o, &a)| {
                        if a <= 0.0 {
                            *o = 0.0
                        }
                    });
                    vec![(*x, gx)]
                }
                Op::MeanNeighbors(graph, deg, x) => {
                    let mut gx = Matrix::zeros(g.rows, g.cols);
                    for u in 0..graph.n() {
                        if deg[u] == 0.0 {
                            continue;
                        }
                        for (nb, w) in graph.neighbors(u) {
                            let scale = w / deg[u];
                            let src = g.row(u);
                            gx.data[nb * g.cols..(nb + 1) * g.cols]
                                .iter_mut()
                                .zip(src)
                                .for_each(|(o, b)| *o += scale * b);
                        }
                    }
                    vec![(*x, gx)]
                }
                Op::ConcatCols(a, b) => {
                    let ca = self.shape(*a).1;
                    let ga = Matrix::from_fn(g.rows, ca, |i, j| g.get(i, j));
                    let gb = Matrix::from_fn(g.rows, g.cols - ca, |i, j| g.get(i, ca + j));
                    vec![(*a, ga), (*b, gb)]
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    labels,
                    mask,
                    probs,
                } => {
                    let scale = g.data[0] / mask.len() as f64;
                    let mut gl = Matrix::zeros(probs.rows, probs.cols);
                    for &i in mask.iter() {
                        for j in 0..probs.cols {
                            let y = if labels[i] == j { 1.0 } else { 0.0 };
                            gl.data[i * probs.cols + j] += scale * (probs.get(i, j) - y);
                        }
                    }
                    vec![(*logits, gl)]
                }
            };
            self.nodes[idx].grad = Some(g);
            for (v, gv) in updates {
                self.accumulate(v, gv);
            }
        }
        Ok(())
    }
}
