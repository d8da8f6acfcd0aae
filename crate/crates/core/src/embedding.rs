//! Node embeddings from eigenvectors of `M(t, s)` and of the adjacency
//! matrix, and their use as extra node features.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eigensolver::{largest_k, smallest_k, EigenPairs, SolverOptions};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::operator::{InterpolatedOperator, Shifted};

/// Which end of the spectrum the columns come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// Smallest eigenvalues of `M(t, s)`, ascending.
    SmallestEnd,
    /// Largest eigenvalues of `A`, descending.
    LargestEnd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// `n x k`, row `u` is the embedding of node `u`.
    pub coords: DMatrix<f64>,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub k: usize,
    pub convention: Convention,
    /// Indices (into the solved eigenpairs) dropped as trivial zero modes.
    pub skipped: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub tol: f64,
    pub seed: u64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSidecar {
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub k: usize,
    pub convention: Convention,
    pub skipped: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    pub tol: f64,
    pub seed: u64,
}

/// Embedding from the `k` smallest nontrivial eigenvectors of `M(t, s)`.
///
/// When `t == s` the operator is a multiple of the Laplacian and the
/// constant vector is an exact eigenvector with eigenvalue zero; that mode
/// is dropped and the next `k` are kept. For any other `(t, s)` the `k`
/// smallest are kept.
pub fn compute_ile(g: &Graph, t: f64, s: f64, k: usize, opts: &SolverOptions) -> Result<Embedding> {
    compute_ile_shifted(g, t, s, 0.0, k, opts)
}

/// [`compute_ile`] on `M(t, s) + zeta I`. The zero-mode rule is applied to
/// the unshifted eigenvalues, so the result matches `compute_ile` up to
/// column signs whenever the retained eigenvalues are simple.
pub fn compute_ile_shifted(
    g: &Graph,
    t: f64,
    s: f64,
    zeta: f64,
    k: usize,
    opts: &SolverOptions,
) -> Result<Embedding> {
    check_embeddable(g, k)?;
    let op = Shifted {
        inner: InterpolatedOperator::new(g, t, s)?,
        shift: zeta,
    };
    let pairs = smallest_k(&op, k + 1, opts)?;

    let mut skip = None;
    if t == s {
        let threshold = 1e-8 * t.abs().max(1.0) * op.inner.degrees().max();
        skip = pairs
            .eigenvalues
            .iter()
            .position(|&lambda| (lambda - zeta).abs() < threshold);
    }
    let keep: Vec<usize> = (0..=k).filter(|&j| Some(j) != skip).take(k).collect();
    Ok(select(&pairs, &keep, Some(t), Some(s), Convention::SmallestEnd, skip.into_iter().collect(), opts))
}

/// Adjacency spectral embedding: the `k` leading eigenvectors of `A`,
/// ordered by descending eigenvalue.
pub fn compute_adjacency_embedding(g: &Graph, k: usize, opts: &SolverOptions) -> Result<Embedding> {
    check_embeddable(g, k)?;
    let op = InterpolatedOperator::adjacency(g)?;
    let pairs = largest_k(&op, k, opts)?;
    let keep: Vec<usize> = (0..k).rev().collect();
    Ok(select(&pairs, &keep, None, None, Convention::LargestEnd, Vec::new(), opts))
}

fn check_embeddable(g: &Graph, k: usize) -> Result<()> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if !g.is_connected() {
        return Err(Error::NotConnected);
    }
    if k == 0 || k >= g.n() {
        return Err(Error::KTooLarge { k, n: g.n() });
    }
    Ok(())
}

fn select(
    pairs: &EigenPairs,
    keep: &[usize],
    t: Option<f64>,
    s: Option<f64>,
    convention: Convention,
    skipped: Vec<usize>,
    opts: &SolverOptions,
) -> Embedding {
    let n = pairs.eigenvectors.nrows();
    let coords = DMatrix::from_fn(n, keep.len(), |i, j| pairs.eigenvectors[(i, keep[j])]);
    Embedding {
        coords,
        t,
        s,
        k: keep.len(),
        convention,
        skipped,
        eigenvalues: keep.iter().map(|&j| pairs.eigenvalues[j]).collect(),
        tol: opts.tol,
        seed: opts.seed,
        degenerate: pairs.degenerate,
    }
}

/// Centres each column and scales it to unit population variance. Constant
/// columns become zero.
pub fn standardize_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let rows = m.nrows() as f64;
    for mut col in out.column_iter_mut() {
        let mean = col.iter().sum::<f64>() / rows;
        col.iter_mut().for_each(|v| *v -= mean);
        let std = (col.iter().map(|v| v * v).sum::<f64>() / rows).sqrt();
        if std > 0.0 {
            col.iter_mut().for_each(|v| *v /= std);
        }
    }
    out
}

/// `[base | standardized coords]`, or the standardized coords alone.
pub fn augment_features(base: Option<&DMatrix<f64>>, emb: &Embedding) -> Result<DMatrix<f64>> {
    let n = emb.coords.nrows();
    let extra = standardize_columns(&emb.coords);
    let Some(base) = base else {
        return Ok(extra);
    };
    if base.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: base.nrows(),
        });
    }
    let d = base.ncols();
    Ok(DMatrix::from_fn(n, d + emb.k, |i, j| {
        if j < d {
            base[(i, j)]
        } else {
            extra[(i, j - d)]
        }
    }))
}

impl Embedding {
    /// CSV with header `node,ev_1..ev_k`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("node");
        for j in 1..=self.k {
            let _ = write!(s, ",ev_{j}");
        }
        s.push('\n');
        for (u, row) in self.coords.row_iter().enumerate() {
            let _ = write!(s, "{u}");
            for v in row.iter() {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn sidecar(&self) -> EmbeddingSidecar {
        EmbeddingSidecar {
            t: self.t,
            s: self.s,
            k: self.k,
            convention: self.convention,
            skipped: self.skipped.clone(),
            eigenvalues: self.eigenvalues.clone(),
            tol: self.tol,
            seed: self.seed,
        }
    }
}
