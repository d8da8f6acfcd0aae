//! Immutable undirected weighted graphs in compressed sparse row form.
//!
//! Every undirected edge `{u, v}` is stored twice, once in row `u` and once in
//! row `v`, so adjacency products and neighbor aggregation are plain row scans.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

/// A simple undirected graph with positive edge weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    weights: Vec<f64>,
}

/// Weighted degrees, `values[u] = sum_v A[u][v]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(pub Vec<f64>);

impl DegreeVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }
}

impl Graph {
    /// Builds a graph from undirected edges `(u, v, w)`.
    ///
    /// Self-loops, duplicate pairs (in either orientation) and weights that
    /// are not strictly positive are rejected.
    pub fn from_edge_list(edges: &[(usize, usize, f64)], n: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        let mut counts = vec![0usize; n];
        for &(u, v, w) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::IndexOutOfRange { index: x, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::NonPositiveWeight { u, v, w });
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::DuplicateEdge(u, v));
            }
            counts[u] += 1;
            counts[v] += 1;
        }

        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        for c in &counts {
            row_offsets.push(row_offsets.last().unwrap() + c);
        }
        let nnz = *row_offsets.last().unwrap();
        let mut cursor = row_offsets[..n].to_vec();
        let mut col_indices = vec![0usize; nnz];
        let mut weights = vec![0.0; nnz];
        for &(u, v, w) in edges {
            for (a, b) in [(u, v), (v, u)] {
                col_indices[cursor[a]] = b;
                weights[cursor[a]] = w;
                cursor[a] += 1;
            }
        }
        for u in 0..n {
            let (lo, hi) = (row_offsets[u], row_offsets[u + 1]);
            let mut row: Vec<(usize, f64)> = col_indices[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            for (p, (c, w)) in row.into_iter().enumerate() {
                col_indices[lo + p] = c;
                weights[lo + p] = w;
            }
        }

        Ok(Self {
            n,
            row_offsets,
            col_indices,
            weights,
        })
    }

    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            row_offsets: vec![0; n + 1],
            col_indices: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Neighbors of `u` with edge weights, ascending by neighbor index.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_offsets[u], self.row_offsets[u + 1]);
        self.col_indices[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    /// Number of stored neighbors of `u` (unweighted degree).
    pub fn neighbor_count(&self, u: usize) -> usize {
        self.row_offsets[u + 1] - self.row_offsets[u]
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, in row order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.n {
            for (v, w) in self.neighbors(u) {
                if u < v {
                    out.push((u, v, w));
                }
            }
        }
        out
    }

    pub fn degree_vector(&self) -> DegreeVector {
        DegreeVector(
            (0..self.n)
                .map(|u| self.neighbors(u).fold(0.0, |acc, (_, w)| acc + w))
                .collect(),
        )
    }

    /// `A x` without materializing `A`.
    pub fn adjacency_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut y = vec![0.0; self.n];
        self.adjacency_apply_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x`; lengths are the caller's responsibility.
    pub(crate) fn adjacency_apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (u, yu) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_offsets[u], self.row_offsets[u + 1]);
            *yu = self.col_indices[lo..hi]
                .iter()
                .zip(&self.weights[lo..hi])
                .fold(0.0, |acc, (&v, &w)| acc + w * x[v]);
        }
    }

    /// Component id per vertex, numbered in order of smallest contained vertex.
    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for (v, _) in self.neighbors(u) {
                    if comp[v] == usize::MAX {
                        comp[v] = next;
                        queue.push_back(v);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// True iff a BFS from vertex 0 reaches every vertex. The empty graph is
    /// connected.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut visited = vec![false; self.n];
        visited[0] = true;
        let mut reached = 1;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for (v, _) in self.neighbors(u) {
                if !visited[v] {
                    visited[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    /// The largest connected component and, for each new index, its
    /// original vertex id. Equal sizes resolve to the component holding the
    /// smallest original index.
    pub fn largest_connected_component(&self) -> Result<(Graph, Vec<usize>)> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        let comp = self.components();
        let num = comp.iter().max().map_or(0, |c| c + 1);
        let mut sizes = vec![0usize; num];
        for &c in &comp {
            sizes[c] += 1;
        }
        // components are numbered by smallest vertex, so the first maximum wins ties
        let best = (0..num).fold(0, |b, c| if sizes[c] > sizes[b] { c } else { b });
        let keep: Vec<usize> = (0..self.n).filter(|&u| comp[u] == best).collect();
        Ok((self.induced_subgraph(&keep), keep))
    }

    /// Subgraph induced by `keep` (original ids, ascending), re-indexed 0..len.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Graph {
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &u) in keep.iter().enumerate() {
            new_id[u] = i;
        }
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|&(u, v, _)| new_id[u] != usize::MAX && new_id[v] != usize::MAX)
            .map(|(u, v, w)| (new_id[u], new_id[v], w))
            .collect();
        Graph::from_edge_list(&edges, keep.len()).expect("subgraph of a valid graph is valid")
    }

    /// Relabels vertices so that old vertex `u` becomes `perm[u]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Graph> {
        check_len(self.n, perm.len())?;
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(u, v, w)| (perm[u], perm[v], w))
            .collect();
        Graph::from_edge_list(&edges, self.n)
    }

    /// Parses the edge-list text format: `u v [w]` per line, `#` comments.
    ///
    /// When `n` is `None` the vertex count is one more than the largest id.
    pub fn parse_edge_list<R: Read>(reader: R, n: Option<usize>) -> Result<Graph> {
        let mut edges = Vec::new();
        let mut max_id = None::<usize>;
        for (lineno, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: None,
                line: lineno + 1,
                msg,
            };
            let fields: Vec<&str> = trimmed.split_whitespace().collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(err(format!("expected `u v [w]`, got {trimmed:?}")));
            }
            let u: usize = fields[0]
                .parse()
                .map_err(|_| err(format!("bad vertex id {:?}", fields[0])))?;
            let v: usize = fields[1]
                .parse()
                .map_err(|_| err(format!("bad vertex id {:?}", fields[1])))?;
            let w: f64 = match fields.get(2) {
                Some(f) => f.parse().map_err(|_| err(format!("bad weight {f:?}")))?,
                None => 1.0,
            };
            if !w.is_finite() || w <= 0.0 {
                return Err(err(format!("weight must be positive, got {w}")));
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v, w));
        }
        let n = n.unwrap_or_else(|| max_id.map_or(0, |m| m + 1));
        Graph::from_edge_list(&edges, n)
    }

    pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<Graph> {
        let file = std::fs::File::open(path)?;
        Self::parse_edge_list(file, n).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::Parse {
                path: Some(path.to_path_buf()),
                line,
                msg,
            },
            other => other,
        })
    }

    /// Serializes to the edge-list text format. Unit weights are omitted.
    ///
    /// Isolated trailing vertices cannot be expressed in the format, so a
    /// `# n = ...` comment line records the vertex count.
    pub fn to_edge_list_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n = {}", self.n);
        for (u, v, w) in self.edges() {
            if w == 1.0 {
                let _ = writeln!(s, "{u} {v}");
            } else {
                let _ = writeln!(s, "{u} {v} {w}");
            }
        }
        s
    }

    /// Reads `# n = <count>` from an edge-list header, if present.
    pub fn declared_vertex_count(text: &str) -> Option<usize> {
        text.lines()
            .take_while(|l| l.trim_start().starts_with('#') || l.trim().is_empty())
            .find_map(|l| {
                l.trim_start_matches('#')
                    .trim()
                    .strip_prefix("n =")
                    .and_then(|r| r.trim().parse().ok())
            })
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
