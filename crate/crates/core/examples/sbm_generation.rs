//! Sample the two presets and a custom three-block model, then write an
//! edge list and labels.
//!
//!     cargo run --example sbm_generation -- /tmp/sbm

use std::path::PathBuf;

use ile::sbm::{core_periphery_preset, generate, SbmSpec};

fn main() -> ile::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| std::env::temp_dir().join("sbm").display().to_string()));
    std::fs::create_dir_all(&out)?;

    let cp = generate(&core_periphery_preset(40, 0)?)?;
    println!("{}: {} edges", cp.meta, cp.graph.num_edges());

    let spec = SbmSpec {
        block_sizes: vec![30, 30, 40],
        probabilities: vec![vec![0.3, 0.02, 0.01], vec![0.02, 0.3, 0.01], vec![0.01, 0.01, 0.2]],
        seed: 7,
    };
    let lg = generate(&spec)?;
    let (shuffled, perm) = lg.shuffled(3);
    println!("three blocks: {} edges, node 0 moved to {}", lg.graph.num_edges(), perm[0]);

    std::fs::write(out.join("three.edges"), shuffled.graph.to_edge_list_string())?;
    std::fs::write(out.join("three.labels.csv"), shuffled.labels_csv())?;
    println!("wrote {}", out.display());
    Ok(())
}
