//! Choosing `k` and `(t, s)`: scree elbows, linear-probe screening and
//! cross-validation.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::k_folds;
use crate::eigensolver::SolverOptions;
use crate::embedding::{augment_features, compute_ile};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::nn::{build_model, train, Matrix, ModelConfig};
use crate::seeds::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Scree,
    Correlation,
    Cv,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Scree => "scree",
            Method::Correlation => "correlation",
            Method::Cv => "cv",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Candidate {
    K(usize),
    Ts { t: f64, s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub chosen: Candidate,
    /// Every candidate with its score, in evaluation order.
    pub scores: Vec<(Candidate, f64)>,
}

impl SelectionResult {
    /// CSV with header `method,k,t,s,score,chosen`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,k,t,s,score,chosen\n");
        for (c, score) in &self.scores {
            let (k, t, s) = match c {
                Candidate::K(k) => (k.to_string(), String::new(), String::new()),
                Candidate::Ts { t, s } => (String::new(), t.to_string(), s.to_string()),
            };
            let chosen = *c == self.chosen;
            let _ = writeln!(out, "{},{k},{t},{s},{score},{chosen}", self.method.name());
        }
        out
    }
}

/// Elbow of a scree plot of the first `k_max` values, as a 1-based count.
///
/// Both axes are scaled to `[0, 1]` and the elbow is the point farthest
/// from the chord joining the first and last plotted points.
pub fn scree_elbow(eigenvalues: &[f64], k_max: usize) -> Result<usize> {
    if eigenvalues.len() < 3 {
        return Err(Error::TooFewValues {
            min: 3,
            got: eigenvalues.len(),
        });
    }
    if k_max < 3 || k_max > eigenvalues.len() {
        return Err(Error::InvalidK {
            k: k_max,
            n: eigenvalues.len(),
        });
    }
    let vals = &eigenvalues[..k_max];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteValue("scree eigenvalues"));
    }
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = hi - lo;
    if range == 0.0 {
        return Ok(1);
    }
    let pts: Vec<(f64, f64)> = vals
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64 / (k_max - 1) as f64, (v - lo) / range))
        .collect();
    let (x0, y0) = pts[0];
    let (dx, dy) = (pts[k_max - 1].0 - x0, pts[k_max - 1].1 - y0);
    let len = dx.hypot(dy);
    let mut best = (0, 0.0);
    for (i, &(x, y)) in pts.iter().enumerate() {
        let d = (dx * (y - y0) - dy * (x - x0)).abs() / len;
        if d > best.1 + 1e-12 {
            best = (i, d);
        }
    }
    Ok(best.0 + 1)
}

fn check_labels(g: &Graph, labels: &[usize]) -> Result<usize> {
    if labels.len() != g.n() {
        return Err(Error::DimensionMismatch {
            expected: g.n(),
            got: labels.len(),
        });
    }
    labels
        .iter()
        .max()
        .map(|m| m + 1)
        .ok_or(Error::MissingLabels(0))
}

/// Training accuracy of a one-vs-rest least-squares probe (with intercept)
/// fitted on the rows `idx` of `x`.
pub fn linear_probe_accuracy(x: &DMatrix<f64>, labels: &[usize], idx: &[usize]) -> Result<f64> {
    if idx.is_empty() {
        return Err(Error::TooSmall { min: 1, got: 0 });
    }
    let classes = idx.iter().map(|&i| labels[i]).max().unwrap_or(0) + 1;
    let d = x.ncols();
    let a = DMatrix::from_fn(idx.len(), d + 1, |r, c| if c < d { x[(idx[r], c)] } else { 1.0 });
    let y = DMatrix::from_fn(idx.len(), classes, |r, c| if labels[idx[r]] == c { 1.0 } else { -1.0 });
    let w = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
    let pred = a * w;
    let hits = (0..idx.len())
        .filter(|&r| {
            let row = pred.row(r);
            let arg = (1..classes).fold(0, |b, c| if row[c] > row[b] { c } else { b });
            arg == labels[idx[r]]
        })
        .count();
    Ok(hits as f64 / idx.len() as f64)
}

fn pick_best(method: Method, scores: Vec<(Candidate, f64)>) -> Result<SelectionResult> {
    let mut best: Option<(Candidate, f64)> = None;
    for &(c, score) in &scores {
        let better = match best {
            None => true,
            Some((bc, bs)) => score > bs || (score == bs && candidate_lt(c, bc)),
        };
        if better {
            best = Some((c, score));
        }
    }
    let (chosen, _) = best.ok_or(Error::InvalidConfig("empty candidate grid".into()))?;
    Ok(SelectionResult {
        method,
        chosen,
        scores,
    })
}

fn candidate_lt(a: Candidate, b: Candidate) -> bool {
    match (a, b) {
        (Candidate::K(x), Candidate::K(y)) => x < y,
        (Candidate::Ts { t: t1, s: s1 }, Candidate::Ts { t: t2, s: s2 }) => (t1, s1) < (t2, s2),
        _ => false,
    }
}

/// Scores each `(t, s)` by [`linear_probe_accuracy`] of its `k`-dimensional
/// embedding on the labelled rows `train_idx`.
pub fn correlation_screen(
    g: &Graph,
    labels: &[usize],
    train_idx: &[usize],
    grid: &[(f64, f64)],
    k: usize,
    opts: &SolverOptions,
) -> Result<SelectionResult> {
    check_labels(g, labels)?;
    let scores = grid
        .par_iter()
        .map(|&(t, s)| {
            let emb = compute_ile(g, t, s, k, opts)?;
            Ok((Candidate::Ts { t, s }, linear_probe_accuracy(&emb.coords, labels, train_idx)?))
        })
        .collect::<Result<Vec<_>>>()?;
    pick_best(Method::Correlation, scores)
}

/// Mean validation accuracy of the model in `cfg` over seeded folds, for
/// each `(t, s)`; the embedding is appended to `features` when given.
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    g: &Graph,
    features: Option<&DMatrix<f64>>,
    labels: &[usize],
    grid: &[(f64, f64)],
    k: usize,
    folds: usize,
    cfg: &ModelConfig,
    seed: u64,
    opts: &SolverOptions,
) -> Result<SelectionResult> {
    let classes = check_labels(g, labels)?;
    if folds < 2 {
        return Err(Error::TooSmall { min: 2, got: folds });
    }
    let splits = k_folds(g.n(), folds, derive_seed(seed, "folds"))?;
    let scores = grid
        .par_iter()
        .map(|&(t, s)| {
            let emb = compute_ile(g, t, s, k, opts)?;
            let x = Matrix::from_dmatrix(&augment_features(features, &emb)?);
            let mut total = 0.0;
            for (f, split) in splits.iter().enumerate() {
                let fold_cfg = ModelConfig {
                    seed: cfg.seed.wrapping_add(f as u64),
                    ..cfg.clone()
                };
                let mut model = build_model(&fold_cfg, x.cols, classes, g)?;
                total += train(&mut model, &x, labels, split)?.test_accuracy;
            }
            Ok((Candidate::Ts { t, s }, total / splits.len() as f64))
        })
        .collect::<Result<Vec<_>>>()?;
    pick_best(Method::Cv, scores)
}

/// [`scree_elbow`] as a selection result; each candidate `k` is scored by
/// its eigenvalue.
pub fn scree_selection(eigenvalues: &[f64], k_max: usize) -> Result<SelectionResult> {
    let k = scree_elbow(eigenvalues, k_max)?;
    Ok(SelectionResult {
        method: Method::Scree,
        chosen: Candidate::K(k),
        scores: eigenvalues[..k_max]
            .iter()
            .enumerate()
            .map(|(i, &v)| (Candidate::K(i + 1), v))
            .collect(),
    })
}
