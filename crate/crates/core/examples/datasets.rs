//! Load the bundled karate club files, derive degree labels, corrupt
//! features and draw a split.
//!
//!     cargo run --example datasets

use std::path::Path;

use ile::dataset::{corrupt_features, degree_labels, load_dataset, split_70_30};
use nalgebra::DMatrix;

fn main() -> ile::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let ds = load_dataset(&dir.join("karate.edges"), None, Some(&dir.join("karate.labels.csv")))?;
    println!("{}: n={} edges={} classes={}", ds.name, ds.n(), ds.graph.num_edges(), ds.num_classes());

    let hubs = degree_labels(&ds.graph, 0.1)?;
    let top: Vec<usize> = (0..ds.n()).filter(|&u| hubs[u] == 1).collect();
    println!("top 10% by degree: {top:?}");

    let x = DMatrix::from_fn(ds.n(), 4, |i, j| ((i + j) % 3) as f64);
    let noisy = corrupt_features(&x, 0.5, 1.0, 0)?;
    let changed = (0..ds.n()).filter(|&i| x.row(i) != noisy.row(i)).count();
    println!("corrupted {changed} of {} rows", ds.n());

    let split = split_70_30(ds.n(), 0)?;
    println!("split: {} train / {} test", split.train_idx.len(), split.test_idx.len());
    Ok(())
}
