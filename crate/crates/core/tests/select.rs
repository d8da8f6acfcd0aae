mod common;

use ile::dataset::{k_folds, split_70_30};
use ile::eigensolver::SolverOptions;
use ile::embedding::compute_ile;
use ile::nn::{build_model, train, Arch, Matrix, ModelConfig};
use ile::sbm::{community_preset, generate};
use ile::select::{correlation_screen, cross_validate, scree_selection, Candidate, Method};
use rand::Rng;

#[test]
fn scree_finds_two_communities() {
    for seed in 0..3 {
        let lg = generate(&community_preset(200, seed).unwrap()).unwrap();
        let emb = compute_ile(&lg.graph, 1.0, 1.0, 10, &SolverOptions::with_seed(seed)).unwrap();
        let r = scree_selection(&emb.eigenvalues, 10).unwrap();
        assert_eq!(r.chosen, Candidate::K(2), "seed {seed}");
        assert_eq!(r.method, Method::Scree);
        assert_eq!(r.scores.len(), 10);
    }
}

#[test]
fn thresholded_embedding_column_scores_one() {
    let lg = generate(&community_preset(200, 4).unwrap()).unwrap();
    let opts = SolverOptions::with_seed(4);
    let emb = compute_ile(&lg.graph, 1.0, 1.0, 1, &opts).unwrap();
    let labels: Vec<usize> = (0..200).map(|u| (emb.coords[(u, 0)] > 0.0) as usize).collect();
    let train: Vec<usize> = (0..200).collect();
    let r = correlation_screen(&lg.graph, &labels, &train, &[(1.0, 1.0)], 1, &opts).unwrap();
    assert_eq!(r.scores[0].1, 1.0);
}

#[test]
fn random_labels_score_near_chance() {
    let lg = generate(&community_preset(300, 6).unwrap()).unwrap();
    let mut rng = common::rng(6);
    let labels: Vec<usize> = (0..300).map(|_| rng.random_range(0..2)).collect();
    let split = split_70_30(300, 6).unwrap();
    let grid = [(1.0, 1.0), (0.0, -1.0), (1.0, -1.0), (1.0, 0.5)];
    let r = correlation_screen(&lg.graph, &labels, &split.train_idx, &grid, 2, &SolverOptions::with_seed(6)).unwrap();
    for (c, score) in &r.scores {
        assert!((score - 0.5).abs() <= 0.15, "{c:?}: {score}");
    }
}

#[test]
fn laplacian_beats_adjacency_end_on_communities() {
    let lg = generate(&community_preset(200, 7).unwrap()).unwrap();
    let split = split_70_30(200, 7).unwrap();
    let grid = [(0.0, -1.0), (1.0, 1.0)];
    let r = correlation_screen(&lg.graph, &lg.labels, &split.train_idx, &grid, 2, &SolverOptions::with_seed(7)).unwrap();
    let score = |t: f64, s: f64| r.scores.iter().find(|(c, _)| *c == Candidate::Ts { t, s }).unwrap().1;
    assert!(score(1.0, 1.0) >= score(0.0, -1.0));
    assert!(r.scores.iter().all(|(_, v)| (0.0..=1.0).contains(v)));
}

fn cv_config() -> ModelConfig {
    ModelConfig {
        epochs: 60,
        hidden_dim: 16,
        seed: 3,
        ..ModelConfig::for_arch(Arch::Mlp)
    }
}

#[test]
fn single_cell_grid_is_chosen() {
    let lg = generate(&community_preset(80, 1).unwrap()).unwrap();
    let r = cross_validate(&lg.graph, None, &lg.labels, &[(1.0, 0.5)], 2, 3, &cv_config(), 1, &SolverOptions::with_seed(1))
        .unwrap();
    assert_eq!(r.chosen, Candidate::Ts { t: 1.0, s: 0.5 });
    assert!((0.0..=1.0).contains(&r.scores[0].1));
}

#[test]
fn embedding_cell_beats_noise_columns() {
    let lg = generate(&community_preset(120, 2).unwrap()).unwrap();
    let cfg = cv_config();
    let opts = SolverOptions::with_seed(2);
    let r = cross_validate(&lg.graph, None, &lg.labels, &[(1.0, 1.0)], 2, 3, &cfg, 2, &opts).unwrap();

    // the same folds and model budget on two seeded noise columns
    let mut rng = common::rng(2);
    let noise = Matrix::from_fn(120, 2, |_, _| rng.random_range(-1.0..1.0));
    let folds = k_folds(120, 3, 2).unwrap();
    let mut total = 0.0;
    for (f, split) in folds.iter().enumerate() {
        let c = ModelConfig {
            seed: cfg.seed + f as u64,
            ..cfg.clone()
        };
        let mut m = build_model(&c, 2, 2, &lg.graph).unwrap();
        total += train(&mut m, &noise, &lg.labels, split).unwrap().test_accuracy;
    }
    let noise_score = total / 3.0;
    assert!(r.scores[0].1 > noise_score + 0.2, "{} vs noise {noise_score}", r.scores[0].1);
}

#[test]
fn selection_is_deterministic() {
    let lg = generate(&community_preset(80, 9).unwrap()).unwrap();
    let grid = [(1.0, 1.0), (1.0, 0.0), (0.5, 1.0)];
    let opts = SolverOptions::with_seed(9);
    let run = || cross_validate(&lg.graph, None, &lg.labels, &grid, 2, 2, &cv_config(), 9, &opts).unwrap();
    assert_eq!(run(), run());
    let train: Vec<usize> = (0..40).collect();
    let screen = || correlation_screen(&lg.graph, &lg.labels, &train, &grid, 2, &opts).unwrap();
    assert_eq!(screen(), screen());
}
