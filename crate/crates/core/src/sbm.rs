//! Seeded stochastic block models.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub block_sizes: Vec<usize>,
    /// Symmetric `B x B` edge probabilities.
    pub probabilities: Vec<Vec<f64>>,
    pub seed: u64,
}

/// A graph with one class id per node.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<usize>,
    pub meta: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    CorePeriphery,
    Community,
}

impl Preset {
    pub fn spec(self, n: usize, seed: u64) -> Result<SbmSpec> {
        match self {
            Preset::CorePeriphery => core_periphery_preset(n, seed),
            Preset::Community => community_preset(n, seed),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::CorePeriphery => "core-periphery",
            Preset::Community => "community",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "core-periphery" | "core_periphery" | "cp" => Ok(Preset::CorePeriphery),
            "community" => Ok(Preset::Community),
            other => Err(format!("unknown preset {other:?} (expected community or core-periphery)")),
        }
    }
}

/// Half core, half periphery: core-core 0.9, core-periphery 0.5,
/// periphery-periphery 0.1.
pub fn core_periphery_preset(n: usize, seed: u64) -> Result<SbmSpec> {
    two_block(n, seed, [[0.9, 0.5], [0.5, 0.1]])
}

/// Two equal communities: within 0.99, between 0.3.
pub fn community_preset(n: usize, seed: u64) -> Result<SbmSpec> {
    two_block(n, seed, [[0.99, 0.3], [0.3, 0.99]])
}

fn two_block(n: usize, seed: u64, p: [[f64; 2]; 2]) -> Result<SbmSpec> {
    if !n.is_multiple_of(2) {
        return Err(Error::OddN(n));
    }
    Ok(SbmSpec {
        block_sizes: vec![n / 2, n / 2],
        probabilities: p.iter().map(|r| r.to_vec()).collect(),
        seed,
    })
}

impl SbmSpec {
    pub fn n(&self) -> usize {
        self.block_sizes.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        let b = self.block_sizes.len();
        if b == 0 || self.block_sizes.contains(&0) {
            return Err(Error::EmptyBlocks);
        }
        if self.probabilities.len() != b || self.probabilities.iter().any(|r| r.len() != b) {
            return Err(Error::ShapeMismatch(format!(
                "probability matrix must be {b} x {b}"
            )));
        }
        for i in 0..b {
            for j in 0..b {
                let p = self.probabilities[i][j];
                if !(0.0..=1.0).contains(&p) || p != self.probabilities[j][i] {
                    return Err(Error::InvalidProbability(p));
                }
            }
        }
        Ok(())
    }

    /// Block id of every node; blocks are contiguous index ranges.
    pub fn block_labels(&self) -> Vec<usize> {
        self.block_sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
            .collect()
    }
}

/// Draws each pair `u < v` independently with its block probability.
pub fn generate(spec: &SbmSpec) -> Result<LabeledGraph> {
    spec.validate()?;
    let labels = spec.block_labels();
    let n = labels.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut edges = Vec::new();
    for u in 0..n {
        let row = &spec.probabilities[labels[u]];
        for v in (u + 1)..n {
            if rng.random::<f64>() < row[labels[v]] {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok(LabeledGraph {
        graph: Graph::from_edge_list(&edges, n)?,
        labels,
        meta: format!(
            "sbm blocks={:?} p={:?} seed={}",
            spec.block_sizes, spec.probabilities, spec.seed
        ),
    })
}

impl LabeledGraph {
    /// Relabels nodes by a seed-derived uniform permutation. Returns the
    /// shuffled graph and `perm`, where old node `u` becomes `perm[u]`.
    pub fn shuffled(&self, seed: u64) -> (LabeledGraph, Vec<usize>) {
        let n = self.labels.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let graph = self.graph.permute(&perm).expect("permutation of a valid graph");
        let mut labels = vec![0; n];
        for (u, &p) in perm.iter().enumerate() {
            labels[p] = self.labels[u];
        }
        let meta = format!("{} shuffle_seed={seed}", self.meta);
        (LabeledGraph { graph, labels, meta }, perm)
    }

    /// Labels CSV with header `node,label`.
    pub fn labels_csv(&self) -> String {
        let mut s = String::from("node,label\n");
        for (u, l) in self.labels.iter().enumerate() {
            s.push_str(&format!("{u},{l}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_one_probabilities() {
        let spec = SbmSpec {
            block_sizes: vec![3, 3],
            probabilities: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
            seed: 1,
        };
        assert_eq!(generate(&spec).unwrap().graph.num_edges(), 0);
        let spec = SbmSpec {
            probabilities: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            ..spec
        };
        let lg = generate(&spec).unwrap();
        assert_eq!(lg.graph.num_edges(), 15);
        assert_eq!(lg.labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn presets() {
        let cp = core_periphery_preset(1000, 0).unwrap();
        assert_eq!(cp.block_sizes, vec![500, 500]);
        assert_eq!(cp.probabilities, vec![vec![0.9, 0.5], vec![0.5, 0.1]]);
        assert_eq!(core_periphery_preset(40, 0).unwrap().block_sizes, vec![20, 20]);
        let cm = community_preset(1000, 0).unwrap();
        assert_eq!(cm.probabilities, vec![vec![0.99, 0.3], vec![0.3, 0.99]]);
        assert_eq!(community_preset(40, 0).unwrap().block_sizes, vec![20, 20]);
        assert!(matches!(core_periphery_preset(7, 0), Err(Error::OddN(7))));
        assert!(matches!(community_preset(7, 0), Err(Error::OddN(7))));
    }

    #[test]
    fn invalid_specs() {
        let bad = SbmSpec {
            block_sizes: vec![2, 2],
            probabilities: vec![vec![0.5, 1.5], vec![1.5, 0.5]],
            seed: 0,
        };
        assert!(matches!(generate(&bad), Err(Error::InvalidProbability(_))));
        let asym = SbmSpec {
            probabilities: vec![vec![0.5, 0.2], vec![0.3, 0.5]],
            ..bad.clone()
        };
        assert!(matches!(generate(&asym), Err(Error::InvalidProbability(_))));
        let empty = SbmSpec {
            block_sizes: vec![],
            probabilities: vec![],
            seed: 0,
        };
        assert!(matches!(generate(&empty), Err(Error::EmptyBlocks)));
    }

    #[test]
    fn deterministic() {
        let spec = community_preset(60, 4).unwrap();
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = community_preset(60, 5).unwrap();
        assert_ne!(generate(&spec).unwrap().graph, generate(&other).unwrap().graph);
    }

    #[test]
    fn shuffle_keeps_labels_attached() {
        let lg = generate(&core_periphery_preset(40, 2).unwrap()).unwrap();
        let (sh, perm) = lg.shuffled(11);
        let deg = lg.graph.degree_vector();
        let sdeg = sh.graph.degree_vector();
        for u in 0..40 {
            assert_eq!(sh.labels[perm[u]], lg.labels[u]);
            assert_eq!(sdeg.0[perm[u]], deg.0[u]);
        }
    }
}
