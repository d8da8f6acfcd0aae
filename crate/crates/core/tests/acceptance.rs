#![allow(clippy::needless_range_loop)]

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any failed.

mod common;

use std::time::Instant;

use common::*;
use ile::dataset::degree_labels;
use ile::eigensolver::{canonicalize_sign, smallest_k, SolverOptions};
use ile::embedding::{compute_adjacency_embedding, compute_ile, compute_ile_shifted};
use ile::graph::Graph;
use ile::harness::{run_grid, DatasetSource, ExperimentReport, GridConfig, Variant};
use ile::nn::{build_model, Arch, Matrix, ModelConfig, SparseMatrix};
use ile::operator::{InterpolatedOperator, SymmetricOperator};
use ile::sbm::{generate, Preset};
use ile::stats::spearman;
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

fn eigensolver_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1001);
    let k = 6;
    let mut worst_val: f64 = 0.0;
    let mut worst_vec: f64 = 0.0;
    let mut compared = 0;
    for trial in 0..50 {
        let n = rng.random_range(12..=60);
        let p = rng.random_range(0.05..0.4);
        let (g, edges) = random_graph(&mut rng, n, p, false, true);
        let t = rng.random_range(-2.0..2.0);
        let s = rng.random_range(-2.0..2.0);
        let op = InterpolatedOperator::new(&g, t, s).map_err(|e| e.to_string())?;
        let opts = SolverOptions {
            dense_limit: 0,
            ..SolverOptions::with_seed(trial)
        };
        let got = smallest_k(&op, k, &opts).map_err(|e| format!("graph {trial}: {e}"))?;
        let (values, mut vectors) = dense_spectrum(dense_m(&edges, n, t, s));
        canonicalize_sign(&mut vectors).map_err(|e| e.to_string())?;
        for j in 0..k {
            worst_val = worst_val.max((got.eigenvalues[j] - values[j]).abs());
        }
        for j in isolated(&values, k, 1e-4) {
            let d: f64 = column(&got.eigenvectors, j)
                .iter()
                .zip(vectors.column(j).iter())
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            worst_vec = worst_vec.max(d);
            compared += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "max |dlambda| = {worst_val:.2e}, max vector error = {worst_vec:.2e} over {compared} separated pairs, {secs:.1} s"
    );
    if worst_val <= 1e-7 && worst_vec <= 1e-5 && secs < 30.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn quadratic_form() -> Outcome {
    let mut rng = rng(1002);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(2..=40);
        let (g, edges) = random_graph(&mut rng, n, 0.3, false, true);
        let t = rng.random_range(-3.0..3.0);
        let s = rng.random_range(-3.0..3.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let op = InterpolatedOperator::new(&g, t, s).map_err(|e| e.to_string())?;
        let edge_form = op.quadratic_form_edges(&x).map_err(|e| e.to_string())?;
        let mx = op.apply(&x).map_err(|e| e.to_string())?;
        let inner: f64 = x.iter().zip(&mx).map(|(a, b)| a * b).sum();
        let m = dense_m(&edges, n, t, s);
        let xv = nalgebra::DVector::from_vec(x.clone());
        let oracle = xv.dot(&(&m * &xv));
        // natural scale of the form: |t| x'Dx + |s| |x|'A|x|
        let d = dense_degrees(&edges, n);
        let scale = t.abs() * x.iter().zip(&d).map(|(a, b)| a * a * b).sum::<f64>()
            + s.abs() * 2.0 * edges.iter().map(|&(u, v, w)| w * (x[u] * x[v]).abs()).sum::<f64>();
        let scale = scale.max(f64::MIN_POSITIVE);
        worst = worst
            .max((edge_form - inner).abs() / scale)
            .max((edge_form - oracle).abs() / scale);
    }
    let detail = format!("max relative gap = {worst:.2e}");
    if worst <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest principal-angle style mismatch between the spans of two column
/// sets: `||P_a - P_b||_F`.
fn subspace_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * a.transpose() - b * b.transpose()).norm()
}

/// Groups of column indices whose consecutive eigenvalues are within `gap`.
fn clusters(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for j in 0..values.len() {
        match out.last_mut() {
            Some(c) if values[j] - values[*c.last().unwrap()] <= gap => c.push(j),
            _ => out.push(vec![j]),
        }
    }
    out
}

fn shift_invariance() -> Outcome {
    let mut rng = rng(1003);
    let k = 5;
    let mut worst_vec: f64 = 0.0;
    let mut worst_val: f64 = 0.0;
    for trial in 0..20 {
        let n = rng.random_range(15..=50);
        let (g, _) = random_graph(&mut rng, n, 0.2, true, true);
        let t = rng.random_range(-2.0..2.0);
        let s = rng.random_range(-2.0..2.0);
        let opts = SolverOptions {
            tol: 1e-11,
            ..SolverOptions::with_seed(trial)
        };
        let base = compute_ile(&g, t, s, k, &opts).map_err(|e| e.to_string())?;
        for zeta in [-1.0, 0.5, 3.0] {
            let shifted = compute_ile_shifted(&g, t, s, zeta, k, &opts).map_err(|e| e.to_string())?;
            for j in 0..k {
                worst_val = worst_val.max((shifted.eigenvalues[j] - base.eigenvalues[j] - zeta).abs());
            }
            for c in clusters(&base.eigenvalues, 1e-4) {
                let pick = |m: &DMatrix<f64>| DMatrix::from_fn(n, c.len(), |i, j| m[(i, c[j])]);
                let gap = if c.len() == 1 {
                    sign_free_distance(&column(&base.coords, c[0]), &column(&shifted.coords, c[0]))
                } else {
                    subspace_gap(&pick(&base.coords), &pick(&shifted.coords))
                };
                worst_vec = worst_vec.max(gap);
            }
        }
    }
    let detail = format!("max vector gap = {worst_vec:.2e}, max |dlambda - zeta| = {worst_val:.2e}");
    if worst_vec <= 1e-6 && worst_val <= 1e-8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn deformed_laplacian() -> Outcome {
    let mut rng = rng(1004);
    let k = 5;
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for trial in 0..10 {
        let n = rng.random_range(15..=50);
        let (g, edges) = random_graph(&mut rng, n, 0.2, true, false);
        let d = dense_degrees(&edges, n);
        for q in [0.3, 0.7, 1.5] {
            // (1 - q^2) I - q A + q^2 D
            let mut h = DMatrix::<f64>::identity(n, n) * (1.0 - q * q);
            for &(u, v, w) in &edges {
                h[(u, v)] -= q * w;
                h[(v, u)] -= q * w;
            }
            for (u, du) in d.iter().enumerate() {
                h[(u, u)] += q * q * du;
            }
            let (values, vectors) = dense_spectrum(h);
            let opts = SolverOptions {
                tol: 1e-11,
                ..SolverOptions::with_seed(trial)
            };
            let emb = compute_ile(&g, q * q, q, k, &opts).map_err(|e| e.to_string())?;
            for j in isolated(&values, k, 1e-4) {
                worst = worst.max(sign_free_distance(&column(&emb.coords, j), &column(&vectors, j)));
                compared += 1;
            }
        }
    }
    let detail = format!("max column gap = {worst:.2e} over {compared} separated columns");
    if worst <= 1e-6 && compared > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn two_truths() -> Outcome {
    let mut community_hits = 0;
    let mut agreements = Vec::new();
    let mut cp_hits = 0;
    let mut rhos = Vec::new();
    for seed in 0..5u64 {
        let opts = SolverOptions::with_seed(seed);
        let lg = generate(&Preset::Community.spec(300, seed).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let emb = compute_ile(&lg.graph, 1.0, 1.0, 1, &opts).map_err(|e| e.to_string())?;
        let same = (0..300)
            .filter(|&u| (emb.coords[(u, 0)] > 0.0) == (lg.labels[u] == 1))
            .count() as f64
            / 300.0;
        let agreement = same.max(1.0 - same);
        agreements.push(agreement);
        if agreement >= 0.9 {
            community_hits += 1;
        }

        let lg = generate(&Preset::CorePeriphery.spec(300, seed).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let emb = compute_adjacency_embedding(&lg.graph, 1, &opts).map_err(|e| e.to_string())?;
        let coord: Vec<f64> = emb.coords.column(0).iter().copied().collect();
        let rho = spearman(&coord, lg.graph.degree_vector().values());
        rhos.push(rho);
        if rho >= 0.8 {
            cp_hits += 1;
        }
    }
    let detail = format!(
        "community agreement {agreements:.3?} ({community_hits}/5 >= 0.90); core-periphery Spearman {rhos:.3?} ({cp_hits}/5 >= 0.80)"
    );
    if community_hits >= 4 && cp_hits >= 4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn gradient_checks() -> Outcome {
    let mut rng = rng(1006);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut record = |name: &str, (bad, w): (usize, f64)| {
        worst = worst.max(w);
        if bad > 0 {
            failures.push(format!("{name}: {bad} entries"));
        }
    };

    let n = 20;
    let edges = random_edges(&mut rng, n - 1, 0.2, true, true);
    // node n-1 stays isolated
    let g = Graph::from_edge_list(&edges, n).unwrap();
    let gcn = SparseMatrix::gcn_propagation(&g);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
    let mask: Vec<usize> = (0..n).filter(|u| u % 3 != 0).collect();

    let a = away_from_zero(&mut rng, 4, 3);
    let b = away_from_zero(&mut rng, 3, 5);
    record("matmul", gradcheck(&mut rng, &[a.clone(), b], (4, 5), |t, v| t.matmul(v[0], v[1]).unwrap()));
    let x = away_from_zero(&mut rng, n, 3);
    record("sparse_matmul", gradcheck(&mut rng, std::slice::from_ref(&x), (n, 3), |t, v| t.sparse_matmul(&gcn, v[0]).unwrap()));
    let a2 = away_from_zero(&mut rng, 4, 3);
    record("add", gradcheck(&mut rng, &[a.clone(), a2], (4, 3), |t, v| t.add(v[0], v[1]).unwrap()));
    let bias = away_from_zero(&mut rng, 1, 3);
    record("bias_add", gradcheck(&mut rng, &[a.clone(), bias], (4, 3), |t, v| t.bias_add(v[0], v[1]).unwrap()));
    record("relu", gradcheck(&mut rng, std::slice::from_ref(&a), (4, 3), |t, v| t.relu(v[0]).unwrap()));
    record("mean_rows_by_neighbors", gradcheck(&mut rng, std::slice::from_ref(&x), (n, 3), |t, v| t.mean_rows_by_neighbors(&g, v[0]).unwrap()));
    let y = away_from_zero(&mut rng, n, 2);
    record("concat_cols", gradcheck(&mut rng, &[x.clone(), y], (n, 5), |t, v| t.concat_cols(v[0], v[1]).unwrap()));
    let logits = away_from_zero(&mut rng, n, 3);
    record(
        "softmax_cross_entropy",
        gradcheck(&mut rng, &[logits], (1, 1), |t, v| t.softmax_cross_entropy(v[0], &labels, &mask).unwrap()),
    );

    let feats = away_from_zero(&mut rng, n, 3);
    let feats = Matrix::from_fn(n, 3, |i, j| feats.get(i, j));
    for arch in [Arch::Mlp, Arch::Gcn, Arch::Gin, Arch::Sage] {
        let cfg = ModelConfig {
            hidden_dim: 4,
            seed: 7,
            ..ModelConfig::for_arch(arch)
        };
        let mut model = build_model(&cfg, 3, 3, &g).unwrap();
        randomize_biases(&mut rng, &mut model);
        record(arch.name(), model_gradcheck(&model, &feats, &labels, &mask));
    }
    let detail = format!("8 primitives + 4 architectures, worst relative error {worst:.2e}");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failures.join(", ")))
    }
}

fn row(report: &ExperimentReport, model: Arch, variant: Variant, t: Option<f64>, s: Option<f64>) -> &ile::harness::ReportRow {
    report
        .rows
        .iter()
        .find(|r| r.model == model && r.variant == variant && r.t == t && r.s == s)
        .expect("cell present")
}

fn fmt_row(r: &ile::harness::ReportRow) -> String {
    match (r.mean_acc, &r.error) {
        (Some(m), _) => format!("{m:.3}"),
        (None, Some(e)) => format!("error ({e})"),
        _ => "missing".into(),
    }
}

fn table1_community() -> Outcome {
    let start = Instant::now();
    let mut cfg = GridConfig::new(DatasetSource::Sbm {
        preset: Preset::Community,
        n: 300,
        shuffle: false,
    });
    cfg.models = vec![Arch::Gcn, Arch::Mlp];
    cfg.variants = vec![Variant::None, Variant::Adjacency, Variant::Ile];
    cfg.s_values = vec![1.0];
    cfg.t_values = vec![1.0];
    cfg.k = 8;
    cfg.repeats = 5;
    let report = run_grid(&cfg, None).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let gcn_ile = row(&report, Arch::Gcn, Variant::Ile, Some(1.0), Some(1.0));
    let gcn_none = row(&report, Arch::Gcn, Variant::None, None, None);
    let mlp_adj = row(&report, Arch::Mlp, Variant::Adjacency, None, None);
    let mlp_ile = row(&report, Arch::Mlp, Variant::Ile, Some(1.0), Some(1.0));
    let in_band = |r: &ile::harness::ReportRow| r.mean_acc.is_some_and(|m| (0.35..=0.70).contains(&m));
    let checks = [
        ("GCN+ILE(1,1) >= 0.95", gcn_ile.mean_acc.is_some_and(|m| m >= 0.95)),
        ("GCN+None <= 0.65", gcn_none.mean_acc.is_some_and(|m| m <= 0.65)),
        ("MLP+Adjacency in [0.35,0.70]", in_band(mlp_adj)),
        ("MLP+ILE(1,1) in [0.35,0.70]", in_band(mlp_ile)),
        ("runtime < 300 s", secs < 300.0),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "GCN+ILE {}, GCN+None {}, MLP+Adjacency {}, MLP+ILE {}, {secs:.1} s",
        fmt_row(gcn_ile),
        fmt_row(gcn_none),
        fmt_row(mlp_adj),
        fmt_row(mlp_ile)
    );
    if failed.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; not met: {}", failed.join(", ")))
    }
}

fn core_periphery() -> Outcome {
    let mut cfg = GridConfig::new(DatasetSource::Sbm {
        preset: Preset::CorePeriphery,
        n: 300,
        shuffle: false,
    });
    cfg.models = vec![Arch::Gcn];
    cfg.variants = vec![Variant::Ile];
    cfg.s_values = vec![0.0];
    cfg.t_values = vec![-1.0, 1.0];
    cfg.repeats = 5;
    let report = run_grid(&cfg, None).map_err(|e| e.to_string())?;
    let neg = row(&report, Arch::Gcn, Variant::Ile, Some(-1.0), Some(0.0));
    let pos = row(&report, Arch::Gcn, Variant::Ile, Some(1.0), Some(0.0));
    let detail = format!("t=-1: {}, t=1: {}", fmt_row(neg), fmt_row(pos));
    if [neg, pos].iter().all(|r| r.mean_acc.is_some_and(|m| m >= 0.85)) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

const DETERMINISM_CONFIG: &str = r#"{
  "dataset": {"sbm": {"preset": "community", "n": 60, "shuffle": true}},
  "models": ["GCN", "MLP", "GIN", "SAGE"],
  "variants": ["None", "Adjacency", "ILE"],
  "s_values": [0, 1],
  "t_values": [-1, 1],
  "k": 4,
  "repeats": 3,
  "base_seed": 42,
  "nn": {"epochs": 40},
  "record_runtime": false
}"#;

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("grid.json");
    std::fs::write(&config, DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("report-{threads}.csv"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_ile"))
            .args(["--threads", threads, "grid"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("grid run with {threads} threads exited with {status}"));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let rows = String::from_utf8_lossy(&outputs[0]).lines().count() - 1;
    if outputs[0] == outputs[1] {
        Ok(format!("{rows} rows, {} bytes identical", outputs[0].len()))
    } else {
        Err(format!("{rows} rows, reports differ"))
    }
}

fn degree_label_contract() -> Outcome {
    let mut rng = rng(1010);
    let mut checked_order = 0;
    for trial in 0..20 {
        let n = rng.random_range(5..=80);
        let p = rng.random_range(0.05..0.5);
        let (g, edges) = random_graph(&mut rng, n, p, false, trial % 2 == 0);
        let labels = degree_labels(&g, 0.2).map_err(|e| e.to_string())?;
        let expected = (0.2 * n as f64 - 1e-9).ceil() as usize;
        let ones = labels.iter().filter(|&&l| l == 1).count();
        if ones != expected {
            return Err(format!("graph {trial}: {ones} label-1 nodes, expected {expected}"));
        }
        let d = dense_degrees(&edges, n);
        let mut sorted = d.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let straddles = expected < n && sorted[expected - 1] == sorted[expected];
        if !straddles {
            let min1 = (0..n).filter(|&u| labels[u] == 1).map(|u| d[u]).fold(f64::INFINITY, f64::min);
            let max0 = (0..n).filter(|&u| labels[u] == 0).map(|u| d[u]).fold(f64::NEG_INFINITY, f64::max);
            if min1 < max0 {
                return Err(format!("graph {trial}: label-1 min degree {min1} < label-0 max degree {max0}"));
            }
            checked_order += 1;
        }
    }
    Ok(format!("20 graphs, counts exact, degree order checked on {checked_order} without boundary ties"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("eigensolver matches dense oracle", eigensolver_oracle),
        ("edge quadratic form equals <x, Mx>", quadratic_form),
        ("shift invariance of eigenvectors", shift_invariance),
        ("deformed Laplacian as M(q^2, q)", deformed_laplacian),
        ("two truths on SBM presets", two_truths),
        ("finite-difference gradient checks", gradient_checks),
        ("community SBM accuracy table", table1_community),
        ("core-periphery SBM accuracy", core_periphery),
        ("grid report determinism across thread counts", determinism),
        ("degree label contract", degree_label_contract),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
