//! Core-periphery and community structure live at opposite ends of the
//! spectrum. Embed both presets at both ends and measure how well one
//! eigenvector recovers the planted blocks.
//!
//!     cargo run --release --example two_truths

use ile::eigensolver::SolverOptions;
use ile::embedding::{compute_adjacency_embedding, compute_ile, Embedding};
use ile::sbm::{generate, Preset};

fn agreement(emb: &Embedding, labels: &[usize]) -> f64 {
    let col = emb.coords.column(0);
    let median = {
        let mut v: Vec<f64> = col.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let hits = (0..labels.len()).filter(|&u| (col[u] > median) == (labels[u] == 0)).count();
    let frac = hits as f64 / labels.len() as f64;
    frac.max(1.0 - frac)
}

fn main() -> ile::Result<()> {
    let opts = SolverOptions::with_seed(0);
    for preset in [Preset::CorePeriphery, Preset::Community] {
        let lg = generate(&preset.spec(400, 0)?)?;
        let fiedler = compute_ile(&lg.graph, 1.0, 1.0, 1, &opts)?;
        let perron = compute_adjacency_embedding(&lg.graph, 1, &opts)?;
        println!(
            "{:>15}: laplacian end {:.3}, adjacency end {:.3}",
            preset.name(),
            agreement(&fiedler, &lg.labels),
            agreement(&perron, &lg.labels)
        );
    }
    Ok(())
}
