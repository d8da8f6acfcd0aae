use std::fs;
use std::path::Path;

use ile::harness::{run_grid, DatasetSource, ExperimentReport, GridConfig, ReportFormat, Variant};
use ile::nn::Arch;
use ile::sbm::Preset;

fn sbm(preset: Preset, n: usize) -> GridConfig {
    let mut cfg = GridConfig::new(DatasetSource::Sbm {
        preset,
        n,
        shuffle: false,
    });
    cfg.nn.epochs = 60;
    cfg.nn.hidden_dim = 16;
    cfg.record_runtime = false;
    cfg
}

#[test]
fn featureless_mlp_is_at_chance() {
    let mut cfg = sbm(Preset::Community, 200);
    cfg.models = vec![Arch::Mlp];
    cfg.variants = vec![Variant::None];
    cfg.repeats = 5;
    let report = run_grid(&cfg, None).unwrap();
    assert_eq!(report.rows.len(), 1);
    let row = &report.rows[0];
    assert_eq!(row.accuracies.len(), 5);
    let mean = row.mean_acc.unwrap();
    assert!((mean - 0.5).abs() <= 0.15, "{mean}");
}

#[test]
fn gcn_laplacian_cell_on_communities() {
    let mut cfg = sbm(Preset::Community, 300);
    cfg.models = vec![Arch::Gcn];
    cfg.variants = vec![Variant::Ile];
    cfg.t_values = vec![1.0];
    cfg.s_values = vec![1.0];
    cfg.nn.epochs = 200;
    cfg.repeats = 5;
    let report = run_grid(&cfg, None).unwrap();
    let mean = report.rows[0].mean_acc.unwrap();
    assert!(mean >= 0.95, "{mean}");
}

#[test]
fn grid_layout_counts() {
    let mut cfg = sbm(Preset::CorePeriphery, 40);
    cfg.models = vec![Arch::Mlp, Arch::Gcn];
    cfg.corruption_ratios = vec![0.0, 0.5];
    cfg.repeats = 1;
    cfg.nn.epochs = 5;
    let cells = cfg.cells();
    // per model and corruption level: None, Adjacency, and |s| x |t| ILE cells
    assert_eq!(cells.len(), 2 * 2 * (2 + 5 * 4));
    assert_eq!(cells.iter().filter(|c| c.variant == Variant::Ile).count(), 2 * 2 * 20);
}

#[test]
fn removing_a_cell_leaves_others_unchanged() {
    let mut full = sbm(Preset::Community, 60);
    full.models = vec![Arch::Mlp, Arch::Sage];
    full.variants = vec![Variant::Adjacency, Variant::Ile];
    full.t_values = vec![1.0, -1.0];
    full.s_values = vec![1.0, 0.0];
    full.repeats = 2;
    let mut part = full.clone();
    part.models = vec![Arch::Sage];
    part.t_values = vec![1.0];

    let a = run_grid(&full, Some(2)).unwrap();
    let b = run_grid(&part, Some(3)).unwrap();
    assert!(b.rows.len() < a.rows.len());
    for row in &b.rows {
        let same = a
            .rows
            .iter()
            .find(|r| r.model == row.model && r.variant == row.variant && r.t == row.t && r.s == row.s)
            .unwrap();
        assert_eq!(same, row);
    }
}

#[test]
fn file_dataset_with_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let features = dir.path().join("karate.features.csv");
    let rows: String = (0..34).map(|u| format!("{},{}\n", u % 3, (u * u) % 7)).collect();
    fs::write(&features, rows).unwrap();

    let mut cfg = GridConfig::new(DatasetSource::Files {
        edges: fixtures.join("karate.edges"),
        features: Some(features),
        labels: Some(fixtures.join("karate.labels.csv")),
        degree_top: None,
    });
    cfg.models = vec![Arch::Gcn];
    cfg.variants = vec![Variant::None, Variant::Ile];
    cfg.t_values = vec![1.0];
    cfg.s_values = vec![0.5];
    cfg.corruption_ratios = vec![0.0, 0.5];
    cfg.repeats = 2;
    cfg.nn.epochs = 20;
    cfg.record_runtime = false;
    let report = run_grid(&cfg, None).unwrap();
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.dataset, "karate");
    for row in &report.rows {
        assert!(row.error.is_none(), "{:?}", row.error);
        assert!(row.accuracies.iter().all(|a| (0.0..=1.0).contains(a)));
    }

    let csv_path = dir.path().join("report.csv");
    report.emit(&csv_path, ReportFormat::Csv).unwrap();
    let back = ExperimentReport::from_csv(&fs::read_to_string(&csv_path).unwrap()).unwrap();
    assert_eq!(back.rows, report.rows);
    let md_path = dir.path().join("report.md");
    report.emit(&md_path, ReportFormat::Markdown).unwrap();
    assert!(fs::read_to_string(md_path).unwrap().contains("GCN"));
}

#[test]
fn config_file_round_trip() {
    let json = r#"{
        "dataset": {"sbm": {"preset": "core-periphery", "n": 30}},
        "models": ["MLP"],
        "variants": ["None", "ILE"],
        "t_values": [1.0],
        "s_values": [-1.0],
        "repeats": 1,
        "nn": {"epochs": 3},
        "record_runtime": false
    }"#;
    let cfg = GridConfig::from_json(json).unwrap();
    assert_eq!(cfg.k, GridConfig::new(cfg.dataset.clone()).k);
    let report = run_grid(&cfg, Some(1)).unwrap();
    assert_eq!(report.rows.len(), 2);
    assert_eq!(report.rows[0].std_acc, Some(0.0));
}
