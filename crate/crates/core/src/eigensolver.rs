//! Extremal eigenpairs of symmetric matrix-free operators.
//!
//! [`smallest_k`] runs Lanczos with full reorthogonalization and thick
//! restarts on the shifted operator `cI - M`, where `c` is the Gershgorin
//! upper bound of `M`, so the wanted end of the spectrum of `M` is the
//! dominant end of the iterated operator. The basis `V` and its image
//! `W = (cI - M) V` are both kept, which makes the projected matrix and every
//! Ritz residual available without extra operator applications.
//!
//! [`dense_eig`] materializes the operator and is meant as an oracle for
//! small problems.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{dot, materialize, Negated, SymmetricOperator};

/// Consecutive eigenvalues closer than this are reported as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-6;

/// Eigenpairs in ascending eigenvalue order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub eigenvalues: Vec<f64>,
    /// `n x k`, column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: DMatrix<f64>,
    /// `||M z_j - lambda_j z_j||` per pair.
    pub residuals: Vec<f64>,
    /// Operator applications spent by the solver.
    pub iterations: usize,
    /// Some consecutive pair of returned eigenvalues is closer than
    /// [`DEGENERATE_GAP`]; the basis of that eigenspace is arbitrary.
    pub degenerate: bool,
}

impl EigenPairs {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Same pairs in descending eigenvalue order.
    pub fn descending(&self) -> (Vec<f64>, DMatrix<f64>) {
        let k = self.k();
        let values = self.eigenvalues.iter().rev().copied().collect();
        let vectors = DMatrix::from_fn(self.eigenvectors.nrows(), k, |i, j| {
            self.eigenvectors[(i, k - 1 - j)]
        });
        (values, vectors)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Residual tolerance on `||M z - lambda z||`.
    pub tol: f64,
    /// Operator application budget; `None` means `max(10k + 100, 2n)`.
    pub max_iter: Option<usize>,
    pub seed: u64,
    /// Largest `n` accepted by [`dense_eig`].
    pub dense_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            seed: 0,
            dense_limit: 2000,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }
}

/// Gershgorin upper bound on the spectrum of `op`.
pub fn gershgorin_upper_bound<O: SymmetricOperator + ?Sized>(op: &O) -> f64 {
    op.gershgorin_bounds().1
}

/// Flips each column so its largest-magnitude entry is positive. Among
/// entries of equal magnitude the lowest index decides.
pub fn canonicalize_sign(vectors: &mut DMatrix<f64>) -> Result<()> {
    for (j, mut col) in vectors.column_iter_mut().enumerate() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col.is_empty() || col[best] == 0.0 {
            return Err(Error::ZeroColumn(j));
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(())
}

/// All `n` eigenpairs from a dense symmetric decomposition.
pub fn dense_eig<O: SymmetricOperator + ?Sized>(op: &O, opts: &SolverOptions) -> Result<EigenPairs> {
    let n = op.dim();
    if n > opts.dense_limit {
        return Err(Error::TooLarge {
            n,
            limit: opts.dense_limit,
        });
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let eig = SymmetricEigen::new(materialize(op));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    canonicalize_sign(&mut eigenvectors)?;
    Ok(finish(op, eigenvalues, eigenvectors, 0))
}

/// The `k` algebraically smallest eigenpairs.
pub fn smallest_k<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &SolverOptions,
) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::InvalidK { k, n });
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::InvalidConfig(format!("tolerance must be positive, got {}", opts.tol)));
    }
    Lanczos::new(op, k, opts).run()
}

/// The `k` algebraically largest eigenpairs, still stored ascending; use
/// [`EigenPairs::descending`] for the descending view.
pub fn largest_k<O: SymmetricOperator + ?Sized>(
    op: &O,
    k: usize,
    opts: &SolverOptions,
) -> Result<EigenPairs> {
    let neg = smallest_k(&Negated(op), k, opts)?;
    let k = neg.k();
    let n = neg.eigenvectors.nrows();
    Ok(EigenPairs {
        eigenvalues: neg.eigenvalues.iter().rev().map(|v| -v).collect(),
        eigenvectors: DMatrix::from_fn(n, k, |i, j| neg.eigenvectors[(i, k - 1 - j)]),
        residuals: neg.residuals.iter().rev().copied().collect(),
        iterations: neg.iterations,
        degenerate: neg.degenerate,
    })
}

fn finish<O: SymmetricOperator + ?Sized>(
    op: &O,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    iterations: usize,
) -> EigenPairs {
    let residuals = residual_norms(op, &eigenvalues, &eigenvectors);
    let degenerate = eigenvalues.windows(2).any(|w| w[1] - w[0] < DEGENERATE_GAP);
    EigenPairs {
        eigenvalues,
        eigenvectors,
        residuals,
        iterations,
        degenerate,
    }
}

fn residual_norms<O: SymmetricOperator + ?Sized>(op: &O, values: &[f64], vectors: &DMatrix<f64>) -> Vec<f64> {
    let n = op.dim();
    let mut mz = vec![0.0; n];
    values
        .iter()
        .zip(vectors.column_iter())
        .map(|(&lambda, z)| {
            op.apply_into(z.as_slice(), &mut mz);
            mz.iter()
                .zip(z.iter())
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Ritz pairs of the current subspace, dominant first.
struct Ritz {
    theta: Vec<f64>,
    /// Coefficient vectors in the basis, one per column.
    coeffs: DMatrix<f64>,
}

struct Lanczos<'a, O: ?Sized> {
    op: &'a O,
    n: usize,
    k: usize,
    tol: f64,
    shift: f64,
    max_basis: usize,
    max_iter: usize,
    rng: ChaCha8Rng,
    basis: Vec<Vec<f64>>,
    image: Vec<Vec<f64>>,
    projected: DMatrix<f64>,
    iterations: usize,
    scratch: Vec<f64>,
}

impl<'a, O: SymmetricOperator + ?Sized> Lanczos<'a, O> {
    fn new(op: &'a O, k: usize, opts: &SolverOptions) -> Self {
        let n = op.dim();
        let max_basis = n.min((4 * k).max(40));
        let max_iter = opts.max_iter.unwrap_or_else(|| (10 * k + 100).max(2 * n));
        Self {
            op,
            n,
            k,
            tol: opts.tol,
            shift: gershgorin_upper_bound(op),
            max_basis,
            max_iter,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
            basis: Vec::with_capacity(max_basis),
            image: Vec::with_capacity(max_basis),
            projected: DMatrix::zeros(max_basis, max_basis),
            iterations: 0,
            scratch: vec![0.0; n],
        }
    }

    /// `(cI - M) x`.
    fn apply_shifted(&mut self, x: &[f64]) -> Vec<f64> {
        self.op.apply_into(x, &mut self.scratch);
        self.iterations += 1;
        x.iter()
            .zip(&self.scratch)
            .map(|(xi, mi)| self.shift * xi - mi)
            .collect()
    }

    fn random_vector(&mut self) -> Vec<f64> {
        (0..self.n).map(|_| self.rng.random::<f64>() - 0.5).collect()
    }

    /// Orthogonalizes `c` against the basis twice; returns its remaining norm.
    fn orthogonalize(&self, c: &mut [f64]) -> f64 {
        for _ in 0..2 {
            for v in &self.basis {
                let h = dot(v, c);
                c.iter_mut().zip(v).for_each(|(ci, vi)| *ci -= h * vi);
            }
        }
        dot(c, c).sqrt()
    }

    /// Adds the normalized, orthogonalized candidate to the basis. A
    /// candidate that collapses is replaced by a fresh random direction.
    /// Returns the image of the new vector, or `None` once the basis spans
    /// the whole space.
    fn expand(&mut self, mut cand: Vec<f64>) -> Option<Vec<f64>> {
        if self.basis.len() >= self.n {
            return None;
        }
        let before = dot(&cand, &cand).sqrt();
        let mut norm = self.orthogonalize(&mut cand);
        if norm.is_nan() || norm <= 1e-10 * before.max(f64::MIN_POSITIVE) {
            cand = self.random_vector();
            let before = dot(&cand, &cand).sqrt();
            norm = self.orthogonalize(&mut cand);
            if norm.is_nan() || norm <= 1e-10 * before {
                return None;
            }
        }
        cand.iter_mut().for_each(|c| *c /= norm);
        let w = self.apply_shifted(&cand);
        let j = self.basis.len();
        for (i, v) in self.basis.iter().enumerate() {
            let h = dot(v, &w);
            self.projected[(i, j)] = h;
            self.projected[(j, i)] = h;
        }
        self.projected[(j, j)] = dot(&cand, &w);
        self.basis.push(cand);
        self.image.push(w.clone());
        Some(w)
    }

    fn ritz(&self) -> Ritz {
        let m = self.basis.len();
        let h = self.projected.view((0, 0), (m, m)).into_owned();
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        Ritz {
            theta: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
            coeffs: DMatrix::from_fn(m, m, |r, c| eig.eigenvectors[(r, order[c])]),
        }
    }

    fn combine(vectors: &[Vec<f64>], coeffs: &DMatrix<f64>, col: usize) -> Vec<f64> {
        let mut out = vec![0.0; vectors[0].len()];
        for (v, &c) in vectors.iter().zip(coeffs.column(col).iter()) {
            out.iter_mut().zip(v).for_each(|(o, vi)| *o += c * vi);
        }
        out
    }

    /// Ritz vector `j` and its residual `(cI - M) y - theta y`.
    fn ritz_residual(&self, ritz: &Ritz, j: usize) -> (Vec<f64>, Vec<f64>) {
        let y = Self::combine(&self.basis, &ritz.coeffs, j);
        let by = Self::combine(&self.image, &ritz.coeffs, j);
        let r = by.iter().zip(&y).map(|(b, yi)| b - ritz.theta[j] * yi).collect();
        (y, r)
    }

    /// Index of the first wanted Ritz pair whose residual exceeds `tol`,
    /// with that residual.
    fn first_unconverged(&self, ritz: &Ritz) -> Option<(usize, Vec<f64>)> {
        (0..self.k).find_map(|j| {
            let (_, r) = self.ritz_residual(ritz, j);
            (dot(&r, &r).sqrt() > self.tol).then_some((j, r))
        })
    }

    /// Replaces the basis by its `keep` dominant Ritz vectors.
    fn compress(&mut self, ritz: &Ritz, keep: usize) {
        let basis: Vec<_> = (0..keep).map(|j| Self::combine(&self.basis, &ritz.coeffs, j)).collect();
        let image: Vec<_> = (0..keep).map(|j| Self::combine(&self.image, &ritz.coeffs, j)).collect();
        self.basis = basis;
        self.image = image;
        self.projected.fill(0.0);
        for j in 0..keep {
            for i in 0..keep {
                self.projected[(i, j)] = dot(&self.basis[i], &self.image[j]);
            }
        }
        let h = self.projected.view((0, 0), (keep, keep)).into_owned();
        let sym = (&h + h.transpose()) * 0.5;
        self.projected.view_mut((0, 0), (keep, keep)).copy_from(&sym);
    }

    fn run(mut self) -> Result<EigenPairs> {
        let mut cand = self.random_vector();
        // wanted Ritz values when the last probe started, and probes left
        let mut probe_base: Option<Vec<f64>> = None;
        let mut probes = 0usize;
        let mut probe_left = 0usize;
        let mut exhausted = false;

        loop {
            if !exhausted {
                match self.expand(cand.clone()) {
                    Some(w) => cand = w,
                    None => exhausted = true,
                }
            }
            let m = self.basis.len();
            if probe_left > 0 {
                probe_left -= 1;
                if probe_left > 0 && !exhausted {
                    continue;
                }
            }
            if m < self.k && !exhausted {
                continue;
            }

            let ritz = self.ritz();
            match self.first_unconverged(&ritz) {
                None => {
                    // A single Krylov sequence sees one copy of a repeated
                    // eigenvalue. Probe from fresh random directions until a
                    // probe leaves the wanted values unchanged.
                    let room = self.max_basis.min(self.n).saturating_sub(self.k);
                    let steps = room.min(self.k.max(10));
                    let wanted: Vec<f64> = ritz.theta[..self.k].to_vec();
                    let stable = probe_base.as_ref().is_some_and(|prev| {
                        prev.iter().zip(&wanted).all(|(a, b)| (a - b).abs() <= 10.0 * self.tol)
                    });
                    if stable || exhausted || steps == 0 || probes > self.k + 1 {
                        return self.converged(&ritz);
                    }
                    probe_base = Some(wanted);
                    probes += 1;
                    if m + steps > self.max_basis {
                        self.compress(&ritz, self.k);
                    }
                    probe_left = steps;
                    cand = self.random_vector();
                }
                Some((_, residual)) => {
                    if exhausted || self.iterations >= self.max_iter {
                        let residuals = (0..self.k.min(m))
                            .map(|j| {
                                let (_, r) = self.ritz_residual(&ritz, j);
                                dot(&r, &r).sqrt()
                            })
                            .collect();
                        return Err(Error::NoConvergence {
                            iterations: self.iterations,
                            residuals,
                        });
                    }
                    if m >= self.max_basis {
                        let keep = (self.k + (self.max_basis - self.k) / 2).min(self.max_basis - 1);
                        self.compress(&ritz, keep.max(self.k.min(self.max_basis - 1)));
                        cand = residual;
                    }
                }
            }
        }
    }

    fn converged(&self, ritz: &Ritz) -> Result<EigenPairs> {
        let k = self.k;
        let mut vectors = DMatrix::zeros(self.n, k);
        for j in 0..k {
            let y = Self::combine(&self.basis, &ritz.coeffs, j);
            let norm = dot(&y, &y).sqrt();
            for (i, yi) in y.iter().enumerate() {
                vectors[(i, j)] = yi / norm;
            }
        }
        // dominant theta first means ascending lambda = c - theta
        let values: Vec<f64> = ritz.theta[..k].iter().map(|th| self.shift - th).collect();
        canonicalize_sign(&mut vectors)?;
        let pairs = finish(self.op, values, vectors, self.iterations);
        if pairs.residuals.iter().any(|&r| r > self.tol) {
            return Err(Error::NoConvergence {
                iterations: self.iterations,
                residuals: pairs.residuals,
            });
        }
        Ok(pairs)
    }
}
