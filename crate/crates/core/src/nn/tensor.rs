use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (p, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in orow.iter_mut().zip(other.row(p)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self^T * other`.
    pub fn t_matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.rows, other.rows);
        let mut out = Matrix::zeros(self.cols, other.cols);
        for r in 0..self.rows {
            let brow = other.row(r);
            for (i, &a) in self.row(r).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// `self * other^T`.
    pub fn matmul_t(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.cols);
        Matrix::from_fn(self.rows, other.rows, |i, j| {
            self.row(i).iter().zip(other.row(j)).map(|(a, b)| a * b).sum()
        })
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
    }

    /// Index of the largest entry in each row; ties go to the lower index.
    pub fn argmax_rows(&self) -> Vec<usize> {
        (0..self.rows)
            .map(|i| {
                let r = self.row(i);
                (1..r.len()).fold(0, |b, j| if r[j] > r[b] { j } else { b })
            })
            .collect()
    }
}

/// Compressed sparse row matrix used for message passing.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    /// `A + diag` with `diag` on every diagonal entry, optionally scaled by
    /// `scale(u, v)`.
    fn adjacency_plus_identity(g: &Graph, diag: f64, scale: impl Fn(usize, usize) -> f64) -> Self {
        let n = g.n();
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::with_capacity(g.col_indices().len() + n);
        let mut values = Vec::with_capacity(g.col_indices().len() + n);
        row_offsets.push(0);
        for u in 0..n {
            let mut placed = false;
            for (v, w) in g.neighbors(u) {
                if !placed && v > u {
                    col_indices.push(u);
                    values.push(diag * scale(u, u));
                    placed = true;
                }
                col_indices.push(v);
                values.push(w * scale(u, v));
            }
            if !placed {
                col_indices.push(u);
                values.push(diag * scale(u, u));
            }
            row_offsets.push(col_indices.len());
        }
        Self {
            rows: n,
            cols: n,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// `D^-1/2 (A + I) D^-1/2` with `D` the degrees of `A + I`.
    pub fn gcn_propagation(g: &Graph) -> Self {
        let inv_sqrt: Vec<f64> = g
            .degree_vector()
            .0
            .iter()
            .map(|d| 1.0 / (d + 1.0).sqrt())
            .collect();
        Self::adjacency_plus_identity(g, 1.0, |u, v| inv_sqrt[u] * inv_sqrt[v])
    }

    /// `A + (1 + eps) I`: GIN's sum aggregation with the self term.
    pub fn gin_aggregation(g: &Graph, eps: f64) -> Self {
        Self::adjacency_plus_identity(g, 1.0 + eps, |_, _| 1.0)
    }

    /// `D^-1 A`; rows of isolated nodes are empty.
    pub fn mean_aggregation(g: &Graph) -> Self {
        let deg = g.degree_vector();
        Self {
            rows: g.n(),
            cols: g.n(),
            row_offsets: g.row_offsets().to_vec(),
            col_indices: g.col_indices().to_vec(),
            values: (0..g.n())
                .flat_map(|u| g.neighbors(u).map(move |(_, w)| (u, w)))
                .map(|(u, w)| w / deg.0[u])
                .collect(),
        }
    }

    pub fn row_entries(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_offsets[u], self.row_offsets[u + 1]);
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// `S * x`.
    pub fn matmul(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, x.cols);
        for u in 0..self.rows {
            let orow = &mut out.data[u * x.cols..(u + 1) * x.cols];
            for (v, w) in self.row_entries(u) {
                for (o, &b) in orow.iter_mut().zip(x.row(v)) {
                    *o += w * b;
                }
            }
        }
        out
    }

    /// `S^T * x`.
    pub fn t_matmul(&self, x: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.cols, x.cols);
        for u in 0..self.rows {
            let xrow = x.row(u);
            for (v, w) in self.row_entries(u) {
                let orow = &mut out.data[v * x.cols..(v + 1) * x.cols];
                for (o, &b) in orow.iter_mut().zip(xrow) {
                    *o += w * b;
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for u in 0..self.rows {
            for (v, w) in self.row_entries(u) {
                m.data[u * self.cols + v] += w;
            }
        }
        m
    }
}
