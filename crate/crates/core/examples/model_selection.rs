//! Pick k with the scree rule, then (t, s) by linear-probe screening and by
//! cross-validation.
//!
//!     cargo run --release --example model_selection

use ile::dataset::split_70_30;
use ile::eigensolver::SolverOptions;
use ile::embedding::compute_ile;
use ile::nn::{Arch, ModelConfig};
use ile::sbm::{core_periphery_preset, generate};
use ile::select::{correlation_screen, cross_validate, scree_selection};

fn main() -> ile::Result<()> {
    let opts = SolverOptions::default();
    let lg = generate(&core_periphery_preset(200, 1)?)?;

    let spectrum = compute_ile(&lg.graph, 1.0, 1.0, 10, &opts)?;
    let scree = scree_selection(&spectrum.eigenvalues, 10)?;
    println!("scree: {:?}", scree.chosen);

    let grid: Vec<(f64, f64)> = [-1.0, 1.0]
        .iter()
        .flat_map(|&t| [-1.0, 0.0, 1.0].map(|s| (t, s)))
        .collect();
    let split = split_70_30(200, 1)?;
    let screen = correlation_screen(&lg.graph, &lg.labels, &split.train_idx, &grid, 2, &opts)?;
    print!("{}", screen.to_csv());

    let cfg = ModelConfig {
        epochs: 100,
        ..ModelConfig::for_arch(Arch::Mlp)
    };
    let cv = cross_validate(&lg.graph, None, &lg.labels, &grid, 2, 3, &cfg, 1, &opts)?;
    print!("{}", cv.to_csv());
    Ok(())
}
