//! Train each architecture on a community SBM, with and without a
//! Laplacian embedding as input features.
//!
//!     cargo run --release --example train_gnn

use ile::dataset::split_70_30;
use ile::eigensolver::SolverOptions;
use ile::embedding::{augment_features, compute_ile};
use ile::nn::{build_model, train, Arch, Matrix, ModelConfig};
use ile::sbm::{community_preset, generate};

fn main() -> ile::Result<()> {
    let lg = generate(&community_preset(300, 0)?)?;
    let split = split_70_30(300, 0)?;
    let ones = Matrix::from_fn(300, 1, |_, _| 1.0);
    let emb = compute_ile(&lg.graph, 1.0, 1.0, 4, &SolverOptions::default())?;
    let ile_x = Matrix::from_dmatrix(&augment_features(None, &emb)?);

    for arch in [Arch::Mlp, Arch::Gcn, Arch::Gin, Arch::Sage] {
        let cfg = ModelConfig::for_arch(arch);
        for (name, x) in [("none", &ones), ("ile(1,1)", &ile_x)] {
            let mut model = build_model(&cfg, x.cols, 2, &lg.graph)?;
            match train(&mut model, x, &lg.labels, &split) {
                Ok(r) => println!(
                    "{arch:>4} {name:>9}: test {:.3}  train {:.3}  loss {:.3} -> {:.3}",
                    r.test_accuracy, r.train_accuracy, r.initial_loss, r.final_loss
                ),
                Err(e) => println!("{arch:>4} {name:>9}: {e}"),
            }
        }
    }
    Ok(())
}
