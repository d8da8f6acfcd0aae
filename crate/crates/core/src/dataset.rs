//! Dataset files, synthetic degree labels, feature corruption and splits.
//!
//! File formats (all indices 0-based):
//!
//! * edges: the edge-list text format of [`Graph::parse_edge_list`]
//! * features: CSV without header, one row of `d` reals per node
//! * labels: CSV `node,label`, header optional

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub graph: Graph,
    /// `n x d`, absent for featureless datasets.
    pub features: Option<DMatrix<f64>>,
    /// Class ids, contiguous from 0.
    pub labels: Vec<usize>,
    pub name: String,
    /// Original vertex id of each node when the raw graph was cut down to
    /// its largest connected component.
    pub index_map: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub seed: u64,
}

/// Where node labels come from.
#[derive(Debug, Clone, PartialEq)]
pub enum LabelSource {
    File(PathBuf),
    /// Top fraction of nodes by degree get label 1.
    DegreeTop(f64),
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn num_classes(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    /// Checks dimensions and label contiguity.
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        if self.labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.labels.len(),
            });
        }
        if let Some(x) = &self.features {
            if x.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: x.nrows(),
                });
            }
        }
        let c = self.num_classes();
        let mut present = vec![false; c];
        self.labels.iter().for_each(|&l| present[l] = true);
        if present.iter().any(|p| !p) {
            return Err(Error::InvalidConfig("labels are not contiguous from 0".into()));
        }
        Ok(())
    }

    /// Writes edges, labels and (when present) features next to each other.
    pub fn write(&self, edges: &Path, labels: &Path, features: Option<&Path>) -> Result<()> {
        fs::write(edges, self.graph.to_edge_list_string())?;
        write_labels(labels, &self.labels)?;
        if let (Some(path), Some(x)) = (features, &self.features) {
            write_features(path, x)?;
        }
        Ok(())
    }
}

/// Loads a dataset whose labels come from a file.
pub fn load_dataset(edge_path: &Path, feature_path: Option<&Path>, label_path: Option<&Path>) -> Result<Dataset> {
    let labels = label_path.ok_or(Error::MissingLabels(0))?;
    load_dataset_with(edge_path, feature_path, &LabelSource::File(labels.to_path_buf()))
}

/// Loads a dataset; a disconnected graph is reduced to its largest connected
/// component and features and labels are re-indexed to match.
pub fn load_dataset_with(edge_path: &Path, feature_path: Option<&Path>, labels: &LabelSource) -> Result<Dataset> {
    let text = fs::read_to_string(edge_path)?;
    let declared = Graph::declared_vertex_count(&text);
    let raw = Graph::parse_edge_list(text.as_bytes(), None).map_err(|e| with_path(e, edge_path))?;

    let features = feature_path.map(read_features).transpose()?;
    let label_pairs = match labels {
        LabelSource::File(p) => Some(read_labels(p)?),
        LabelSource::DegreeTop(_) => None,
    };

    let mut n = raw.n().max(declared.unwrap_or(0));
    if let Some(x) = &features {
        n = n.max(x.nrows());
    }
    if let Some(pairs) = &label_pairs {
        n = n.max(pairs.keys().next_back().map_or(0, |m| m + 1));
    }
    let graph = if n == raw.n() {
        raw
    } else {
        Graph::from_edge_list(&raw.edges(), n)?
    };
    if let Some(x) = &features {
        if x.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.nrows(),
            });
        }
    }

    let (graph, features, keep) = if graph.is_connected() {
        (graph, features, None)
    } else {
        let (lcc, keep) = graph.largest_connected_component()?;
        let x = features.map(|x| x.select_rows(keep.iter()));
        (lcc, x, Some(keep))
    };
    let original = |u: usize| keep.as_ref().map_or(u, |k| k[u]);

    let raw_labels: Vec<usize> = match (labels, &label_pairs) {
        (LabelSource::File(_), Some(pairs)) => (0..graph.n())
            .map(|u| pairs.get(&original(u)).copied().ok_or(Error::MissingLabels(original(u))))
            .collect::<Result<_>>()?,
        (LabelSource::DegreeTop(f), _) => degree_labels(&graph, *f)?,
        _ => unreachable!(),
    };

    let name = edge_path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let ds = Dataset {
        graph,
        features,
        labels: contiguous(&raw_labels),
        name,
        index_map: keep,
    };
    ds.validate()?;
    Ok(ds)
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Parse { line, msg, .. } => Error::Parse {
            path: Some(path.to_path_buf()),
            line,
            msg,
        },
        other => other,
    }
}

/// Maps arbitrary class ids onto `0..C`, preserving their order.
pub fn contiguous(labels: &[usize]) -> Vec<usize> {
    let mut uniq: Vec<usize> = labels.to_vec();
    uniq.sort_unstable();
    uniq.dedup();
    labels
        .iter()
        .map(|l| uniq.binary_search(l).expect("present"))
        .collect()
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: Some(path.to_path_buf()),
        line,
        msg: msg.into(),
    }
}

pub fn read_features(path: &Path) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| parse_err(path, i + 1, e.to_string()))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(path, i + 1, format!("expected {} columns, got {}", first.len(), row.len())));
            }
        }
        rows.push(row);
    }
    let d = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]))
}

pub fn write_features(path: &Path, x: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for row in x.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `node,label` pairs; a non-numeric first line is treated as header.
pub fn read_labels(path: &Path) -> Result<BTreeMap<usize, usize>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(parse_err(path, i + 1, "expected `node,label`"));
        }
        let (node, label) = (rec[0].parse::<usize>(), rec[1].parse::<usize>());
        match (node, label) {
            (Ok(u), Ok(l)) => {
                out.insert(u, l);
            }
            _ if i == 0 => continue,
            _ => return Err(parse_err(path, i + 1, format!("bad label row {:?}", rec.as_slice()))),
        }
    }
    Ok(out)
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["node", "label"])?;
    for (u, l) in labels.iter().enumerate() {
        w.write_record([u.to_string(), l.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `ceil(x)` for a product that should be an integer or just above one,
/// robust to representation error in `x`.
fn ceil_count(x: f64) -> usize {
    (x - 1e-9).ceil().max(0.0) as usize
}

fn floor_count(x: f64) -> usize {
    (x + 1e-9).floor().max(0.0) as usize
}

/// Label 1 for the `ceil(top_fraction * n)` highest-degree nodes, 0 for the
/// rest. Among equal degrees the lower index enters the top set first.
pub fn degree_labels(g: &Graph, top_fraction: f64) -> Result<Vec<usize>> {
    if !(top_fraction > 0.0 && top_fraction < 1.0) {
        return Err(Error::InvalidFraction(top_fraction));
    }
    let deg = g.degree_vector();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| deg.0[b].total_cmp(&deg.0[a]).then(a.cmp(&b)));
    let top = ceil_count(top_fraction * g.n() as f64);
    let mut labels = vec![0; g.n()];
    for &u in &order[..top] {
        labels[u] = 1;
    }
    Ok(labels)
}

/// Adds `N(0, sigma^2)` noise to every entry of a seed-chosen set of
/// `floor(ratio * n)` rows. Other rows are returned untouched.
pub fn corrupt_features(x: &DMatrix<f64>, ratio: f64, sigma: f64, seed: u64) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&ratio) || !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidRatio(ratio));
    }
    let n = x.nrows();
    let count = floor_count(ratio * n as f64).min(n);
    let mut out = x.clone();
    if count == 0 || sigma == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = index::sample(&mut rng, n, count).into_vec();
    rows.sort_unstable();
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for r in rows {
        for j in 0..x.ncols() {
            out[(r, j)] += normal.sample(&mut rng);
        }
    }
    Ok(out)
}

/// Uniform random 70/30 split: the first `floor(0.7 n)` nodes of a seeded
/// permutation train, the rest test.
pub fn split_70_30(n: usize, seed: u64) -> Result<Split> {
    if n < 2 {
        return Err(Error::TooSmall { min: 2, got: n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test_idx = perm.split_off(n * 7 / 10);
    Ok(Split {
        train_idx: perm,
        test_idx,
        seed,
    })
}

/// `folds` disjoint validation sets covering `0..n` from a seeded
/// permutation, each paired with its complement as the training set.
pub fn k_folds(n: usize, folds: usize, seed: u64) -> Result<Vec<Split>> {
    if folds < 2 || n < folds {
        return Err(Error::TooSmall {
            min: folds.max(2),
            got: n,
        });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok((0..folds)
        .map(|f| {
            let (lo, hi) = (f * n / folds, (f + 1) * n / folds);
            let test_idx = perm[lo..hi].to_vec();
            let train_idx = perm[..lo].iter().chain(&perm[hi..]).copied().collect();
            Split {
                train_idx,
                test_idx,
                seed,
            }
        })
        .collect())
}
