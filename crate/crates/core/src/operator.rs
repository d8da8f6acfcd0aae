//! The interpolated Laplacian family `M(t, s) = tD - sA`.
//!
//! `(1, 1)` is the combinatorial Laplacian, `(0, -1)` the adjacency matrix and
//! `(1, -1)` the signless Laplacian. Operators are matrix-free: they hold a
//! borrowed [`Graph`] and its cached degrees.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{check_len, DegreeVector, Graph};

/// A real symmetric linear operator on `R^n` given by its action.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = M x`. Both slices have length [`dim`](Self::dim).
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    /// Gershgorin interval `(lo, hi)` containing the whole spectrum.
    fn gershgorin_bounds(&self) -> (f64, f64);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }
}

#[derive(Debug, Clone)]
pub struct InterpolatedOperator<'g> {
    graph: &'g Graph,
    t: f64,
    s: f64,
    degrees: DegreeVector,
}

impl<'g> InterpolatedOperator<'g> {
    pub fn new(graph: &'g Graph, t: f64, s: f64) -> Result<Self> {
        if graph.n() == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Self {
            graph,
            t,
            s,
            degrees: graph.degree_vector(),
        })
    }

    /// The Laplacian `D - A`.
    pub fn laplacian(graph: &'g Graph) -> Result<Self> {
        Self::new(graph, 1.0, 1.0)
    }

    /// `+A`, i.e. `M(0, -1)`.
    pub fn adjacency(graph: &'g Graph) -> Result<Self> {
        Self::new(graph, 0.0, -1.0)
    }

    /// The signless Laplacian `D + A`.
    pub fn signless_laplacian(graph: &'g Graph) -> Result<Self> {
        Self::new(graph, 1.0, -1.0)
    }

    /// Maps the deformed Laplacian `I - qA + q^2 (D - I)` onto the family.
    ///
    /// Returns `M(q^2, q)` and the shift `1 - q^2`; the deformed Laplacian is
    /// `M + shift * I`.
    pub fn from_deformed(graph: &'g Graph, q: f64) -> Result<(Self, f64)> {
        Ok((Self::new(graph, q * q, q)?, 1.0 - q * q))
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    /// `sum over edges w_ij [t (x_i - x_j)^2 - 2 (s - t) x_i x_j]`, which
    /// equals `x^T M x`.
    pub fn quadratic_form_edges(&self, x: &[f64]) -> Result<f64> {
        check_len(self.graph.n(), x.len())?;
        let (t, s) = (self.t, self.s);
        Ok(self
            .graph
            .edges()
            .into_iter()
            .map(|(i, j, w)| {
                let d = x[i] - x[j];
                w * (t * d * d - 2.0 * (s - t) * x[i] * x[j])
            })
            .sum())
    }

    /// `<x, Mx> / <x, x>`.
    pub fn rayleigh_quotient(&self, x: &[f64]) -> Result<f64> {
        let norm2 = dot(x, x);
        if norm2 == 0.0 {
            check_len(self.graph.n(), x.len())?;
            return Err(Error::ZeroVector);
        }
        let mx = self.apply(x)?;
        Ok(dot(x, &mx) / norm2)
    }
}

impl SymmetricOperator for InterpolatedOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.graph.adjacency_apply_into(x, y);
        for ((yu, &xu), &du) in y.iter_mut().zip(x).zip(&self.degrees.0) {
            *yu = self.t * du * xu - self.s * *yu;
        }
    }

    fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &d in &self.degrees.0 {
            let centre = self.t * d;
            let radius = self.s.abs() * d;
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }
}

/// `M + shift * I`.
#[derive(Debug, Clone)]
pub struct Shifted<O> {
    pub inner: O,
    pub shift: f64,
}

impl<O: SymmetricOperator> SymmetricOperator for Shifted<O> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_into(x, y);
        for (yu, xu) in y.iter_mut().zip(x) {
            *yu += self.shift * xu;
        }
    }

    fn gershgorin_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.inner.gershgorin_bounds();
        (lo + self.shift, hi + self.shift)
    }
}

/// `-M`.
#[derive(Debug, Clone)]
pub struct Negated<O>(pub O);

impl<O: SymmetricOperator> SymmetricOperator for Negated<O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_into(x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }

    fn gershgorin_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.0.gershgorin_bounds();
        (-hi, -lo)
    }
}

impl<O: SymmetricOperator + ?Sized> SymmetricOperator for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }

    fn gershgorin_bounds(&self) -> (f64, f64) {
        (**self).gershgorin_bounds()
    }
}

/// Dense `n x n` matrix of an operator, built column by column from unit
/// vectors and symmetrized.
pub fn materialize<O: SymmetricOperator + ?Sized>(op: &O) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_into(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    (&m + m.transpose()) * 0.5
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
