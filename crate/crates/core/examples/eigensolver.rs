//! Matrix-free Lanczos against the dense decomposition on a random graph.
//!
//!     cargo run --release --example eigensolver -- 400

use std::time::Instant;

use ile::eigensolver::{dense_eig, largest_k, smallest_k, SolverOptions};
use ile::operator::InterpolatedOperator;
use ile::sbm::{community_preset, generate};

fn main() -> ile::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(300);
    let g = generate(&community_preset(n, 1)?)?.graph;
    let opts = SolverOptions::with_seed(1);

    let lap = InterpolatedOperator::laplacian(&g)?;
    let start = Instant::now();
    let low = smallest_k(&lap, 4, &opts)?;
    println!(
        "lanczos: smallest 4 of L = {:?} in {:?} ({} iterations, max residual {:.1e})",
        low.eigenvalues,
        start.elapsed(),
        low.iterations,
        low.residuals.iter().cloned().fold(0.0, f64::max)
    );

    let start = Instant::now();
    let dense = dense_eig(&lap, &opts)?;
    println!("dense:   smallest 4 of L = {:?} in {:?}", &dense.eigenvalues[..4], start.elapsed());

    let adj = InterpolatedOperator::adjacency(&g)?;
    let (top, _) = largest_k(&adj, 3, &opts)?.descending();
    println!("top 3 of A = {top:?}");
    Ok(())
}
