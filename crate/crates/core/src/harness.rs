//! Grid experiments: models x feature variants x `(t, s)` x corruption,
//! repeated over seeds, reported as CSV or markdown tables.
//!
//! Seeds: repeat `r` uses `base_seed + r` for everything that defines the
//! data (SBM draw, node shuffle, split, corruption mask, eigensolver start),
//! so all cells of one repeat see the same graph and split. Each of these
//! draws from its own stream via [`derive_seed`]. Parameter initialisation
//! uses `(base_seed ^ fnv1a(cell_id)) + r`.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{corrupt_features, load_dataset_with, split_70_30, Dataset, LabelSource, Split};
use crate::eigensolver::SolverOptions;
use crate::embedding::{augment_features, compute_adjacency_embedding, compute_ile, Embedding};
use crate::error::{Error, Result};
use crate::nn::{build_model, train, Arch, Matrix, ModelConfig, Optimizer};
use crate::sbm::{generate, Preset};
use crate::seeds::derive_seed;
pub use crate::seeds::fnv1a;
use crate::stats::{mean, population_std};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    None,
    Adjacency,
    #[serde(rename = "ILE")]
    Ile,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::None => "None",
            Variant::Adjacency => "Adjacency",
            Variant::Ile => "ILE",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Variant::None),
            "adjacency" | "adj" => Ok(Variant::Adjacency),
            "ile" => Ok(Variant::Ile),
            _ => Err(format!("unknown variant {s:?} (expected None, Adjacency or ILE)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Sbm {
        preset: Preset,
        n: usize,
        /// Relabel nodes with a per-repeat random permutation.
        #[serde(default)]
        shuffle: bool,
    },
    Files {
        edges: PathBuf,
        #[serde(default)]
        features: Option<PathBuf>,
        #[serde(default)]
        labels: Option<PathBuf>,
        /// Used when `labels` is absent: top fraction by degree is class 1.
        #[serde(default)]
        degree_top: Option<f64>,
    },
}

/// Training settings shared by every model in a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnSettings {
    pub hidden_dim: usize,
    pub lr: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub optimizer: Optimizer,
    pub gnn_layers: usize,
    pub mlp_layers: usize,
    pub gin_epsilon: f64,
}

impl Default for NnSettings {
    fn default() -> Self {
        let gcn = ModelConfig::for_arch(Arch::Gcn);
        Self {
            hidden_dim: gcn.hidden_dim,
            lr: gcn.lr,
            epochs: gcn.epochs,
            weight_decay: gcn.weight_decay,
            optimizer: gcn.optimizer,
            gnn_layers: gcn.layers,
            mlp_layers: Arch::Mlp.default_layers(),
            gin_epsilon: gcn.gin_epsilon,
        }
    }
}

impl NnSettings {
    pub fn model_config(&self, arch: Arch, seed: u64) -> ModelConfig {
        ModelConfig {
            arch,
            layers: if arch == Arch::Mlp {
                self.mlp_layers
            } else {
                self.gnn_layers
            },
            hidden_dim: self.hidden_dim,
            lr: self.lr,
            epochs: self.epochs,
            weight_decay: self.weight_decay,
            seed,
            gin_epsilon: self.gin_epsilon,
            optimizer: self.optimizer,
        }
    }
}

fn default_s() -> Vec<f64> {
    vec![-1.0, -0.5, 0.0, 0.5, 1.0]
}

fn default_t() -> Vec<f64> {
    vec![-1.0, -0.5, 0.5, 1.0]
}

fn default_k() -> usize {
    8
}

fn default_repeats() -> usize {
    5
}

fn default_models() -> Vec<Arch> {
    vec![Arch::Gcn, Arch::Mlp, Arch::Gin, Arch::Sage]
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::None, Variant::Adjacency, Variant::Ile]
}

fn default_sigma() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub dataset: DatasetSource,
    #[serde(default = "default_models")]
    pub models: Vec<Arch>,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default = "default_s")]
    pub s_values: Vec<f64>,
    #[serde(default = "default_t")]
    pub t_values: Vec<f64>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Fractions of nodes whose features get Gaussian noise. Empty means a
    /// single uncorrupted level.
    #[serde(default)]
    pub corruption_ratios: Vec<f64>,
    /// Standard deviation of the corruption noise.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub nn: NnSettings,
    #[serde(default)]
    pub tol: Option<f64>,
    /// Record wall-clock time per cell. Turn off for byte-reproducible
    /// reports; `runtime_ms` is then written as 0.
    #[serde(default = "default_true")]
    pub record_runtime: bool,
}

impl GridConfig {
    /// Defaults for everything except the dataset.
    pub fn new(dataset: DatasetSource) -> Self {
        Self {
            dataset,
            models: default_models(),
            variants: default_variants(),
            s_values: default_s(),
            t_values: default_t(),
            k: default_k(),
            repeats: default_repeats(),
            corruption_ratios: Vec::new(),
            sigma: default_sigma(),
            base_seed: 0,
            nn: NnSettings::default(),
            tol: None,
            record_runtime: true,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GridConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.repeats == 0 {
            return bad("repeats must be at least 1");
        }
        if self.models.is_empty() || self.variants.is_empty() {
            return bad("models and variants must be nonempty");
        }
        if self.variants.contains(&Variant::Ile) && (self.s_values.is_empty() || self.t_values.is_empty()) {
            return bad("the ILE variant needs nonempty s_values and t_values");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.s_values.iter().chain(&self.t_values).any(|v| !v.is_finite()) {
            return bad("s_values and t_values must be finite");
        }
        if let Some(&r) = self.corruption_ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidRatio(r));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be finite and non-negative");
        }
        self.nn.model_config(Arch::Gcn, 0).validate()?;
        self.nn.model_config(Arch::Mlp, 0).validate()?;
        Ok(())
    }

    fn corruption_levels(&self) -> Vec<Option<f64>> {
        if self.corruption_ratios.is_empty() {
            vec![None]
        } else {
            self.corruption_ratios.iter().map(|&c| Some(c)).collect()
        }
    }

    /// Every cell in report order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for corruption in self.corruption_levels() {
            for &model in &self.models {
                for &variant in &self.variants {
                    if variant == Variant::Ile {
                        for &s in &self.s_values {
                            for &t in &self.t_values {
                                cells.push(Cell {
                                    model,
                                    variant,
                                    t: Some(t),
                                    s: Some(s),
                                    corruption,
                                });
                            }
                        }
                    } else {
                        cells.push(Cell {
                            model,
                            variant,
                            t: None,
                            s: None,
                            corruption,
                        });
                    }
                }
            }
        }
        cells
    }

    fn solver_options(&self, seed: u64) -> SolverOptions {
        let mut opts = SolverOptions::with_seed(seed);
        if let Some(tol) = self.tol {
            opts.tol = tol;
        }
        opts
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub model: Arch,
    pub variant: Variant,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub corruption: Option<f64>,
}

fn opt_str(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Cell {
    pub fn id(&self) -> String {
        format!(
            "{}|{}|t={}|s={}|c={}",
            self.model,
            self.variant.name(),
            opt_str(self.t),
            opt_str(self.s),
            opt_str(self.corruption)
        )
    }
}

/// Seed for parameter initialisation of `cell` in repeat `r`.
pub fn init_seed(base_seed: u64, cell: &Cell, r: usize) -> u64 {
    (base_seed ^ fnv1a(cell.id().as_bytes())).wrapping_add(r as u64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub model: Arch,
    pub variant: Variant,
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub corruption: Option<f64>,
    /// `None` when the cell failed.
    pub mean_acc: Option<f64>,
    pub std_acc: Option<f64>,
    pub accuracies: Vec<f64>,
    pub error: Option<String>,
    pub runtime_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub dataset: String,
    pub rows: Vec<ReportRow>,
}

struct RepeatData {
    dataset: Dataset,
    split: Split,
}

fn repeat_data(cfg: &GridConfig, r: usize) -> Result<RepeatData> {
    let seed = cfg.base_seed.wrapping_add(r as u64);
    let dataset = match &cfg.dataset {
        DatasetSource::Sbm { preset, n, shuffle } => {
            let mut lg = generate(&preset.spec(*n, seed)?)?;
            if *shuffle {
                lg = lg.shuffled(derive_seed(seed, "shuffle")).0;
            }
            Dataset {
                graph: lg.graph,
                features: None,
                labels: lg.labels,
                name: format!("sbm-{}-{n}", preset.name()),
                index_map: None,
            }
        }
        DatasetSource::Files {
            edges,
            features,
            labels,
            degree_top,
        } => {
            let source = match (labels, degree_top) {
                (Some(p), _) => LabelSource::File(p.clone()),
                (None, Some(f)) => LabelSource::DegreeTop(*f),
                (None, None) => return Err(Error::MissingLabels(0)),
            };
            load_dataset_with(edges, features.as_deref(), &source)?
        }
    };
    let split = split_70_30(dataset.n(), derive_seed(seed, "split"))?;
    Ok(RepeatData { dataset, split })
}

type EmbKey = (usize, Variant, u64, u64);

fn emb_key(r: usize, variant: Variant, t: Option<f64>, s: Option<f64>) -> EmbKey {
    (
        r,
        variant,
        t.unwrap_or(0.0).to_bits(),
        s.unwrap_or(0.0).to_bits(),
    )
}

fn base_features(cfg: &GridConfig, data: &RepeatData, corruption: Option<f64>, r: usize) -> Result<Option<DMatrix<f64>>> {
    let Some(x) = &data.dataset.features else {
        return Ok(None);
    };
    match corruption {
        Some(c) => {
            let seed = derive_seed(cfg.base_seed.wrapping_add(r as u64), "corrupt");
            Ok(Some(corrupt_features(x, c, cfg.sigma, seed)?))
        }
        None => Ok(Some(x.clone())),
    }
}

fn run_job(
    cfg: &GridConfig,
    cell: &Cell,
    r: usize,
    data: &RepeatData,
    emb: Option<&std::result::Result<Embedding, String>>,
) -> Result<f64> {
    let base = base_features(cfg, data, cell.corruption, r)?;
    let n = data.dataset.n();
    let x = match (cell.variant, emb) {
        (Variant::None, _) => base.unwrap_or_else(|| DMatrix::from_element(n, 1, 1.0)),
        (_, Some(Ok(e))) => augment_features(base.as_ref(), e)?,
        (_, Some(Err(msg))) => return Err(Error::InvalidConfig(format!("embedding failed: {msg}"))),
        (_, None) => unreachable!("embedding jobs cover every embedded cell"),
    };
    let x = Matrix::from_dmatrix(&x);
    let model_cfg = cfg.nn.model_config(cell.model, init_seed(cfg.base_seed, cell, r));
    let mut model = build_model(&model_cfg, x.cols, data.dataset.num_classes(), &data.dataset.graph)?;
    Ok(train(&mut model, &x, &data.dataset.labels, &data.split)?.test_accuracy)
}

/// Runs every cell of `cfg` for every repeat. `threads` bounds the worker
/// pool (`None` uses rayon's default).
pub fn run_grid(cfg: &GridConfig, threads: Option<usize>) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    pool.install(|| run_grid_inner(cfg))
}

fn run_grid_inner(cfg: &GridConfig) -> Result<ExperimentReport> {
    let data = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| repeat_data(cfg, r))
        .collect::<Result<Vec<_>>>()?;
    let cells = cfg.cells();

    let mut emb_jobs: Vec<EmbKey> = Vec::new();
    let mut params: HashMap<EmbKey, (Option<f64>, Option<f64>)> = HashMap::new();
    for r in 0..cfg.repeats {
        for c in cells.iter().filter(|c| c.variant != Variant::None) {
            let key = emb_key(r, c.variant, c.t, c.s);
            if params.insert(key, (c.t, c.s)).is_none() {
                emb_jobs.push(key);
            }
        }
    }
    let embeddings: HashMap<EmbKey, std::result::Result<Embedding, String>> = emb_jobs
        .par_iter()
        .map(|&key| {
            let (r, variant, _, _) = key;
            let (t, s) = params[&key];
            let g = &data[r].dataset.graph;
            let opts = cfg.solver_options(derive_seed(cfg.base_seed.wrapping_add(r as u64), "solver"));
            let e = match variant {
                Variant::Adjacency => compute_adjacency_embedding(g, cfg.k, &opts),
                _ => compute_ile(g, t.unwrap_or(0.0), s.unwrap_or(0.0), cfg.k, &opts),
            };
            (key, e.map_err(|e| e.to_string()))
        })
        .collect();

    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.repeats).map(move |r| (c, r)))
        .collect();
    let results: Vec<(std::result::Result<f64, String>, u64)> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let cell = &cells[c];
            let start = Instant::now();
            let emb = (cell.variant != Variant::None).then(|| &embeddings[&emb_key(r, cell.variant, cell.t, cell.s)]);
            let acc = run_job(cfg, cell, r, &data[r], emb).map_err(|e| e.to_string());
            let ms = if cfg.record_runtime {
                start.elapsed().as_millis() as u64
            } else {
                0
            };
            (acc, ms)
        })
        .collect();

    let rows = cells
        .iter()
        .zip(results.chunks(cfg.repeats))
        .map(|(cell, runs)| {
            let runtime_ms = runs.iter().map(|(_, ms)| ms).sum();
            let error = runs.iter().find_map(|(a, _)| a.as_ref().err().cloned());
            let accuracies: Vec<f64> = runs.iter().filter_map(|(a, _)| a.as_ref().ok().copied()).collect();
            let (mean_acc, std_acc) = if error.is_none() {
                (Some(mean(&accuracies)), Some(population_std(&accuracies)))
            } else {
                (None, None)
            };
            ReportRow {
                model: cell.model,
                variant: cell.variant,
                t: cell.t,
                s: cell.s,
                corruption: cell.corruption,
                mean_acc,
                std_acc,
                accuracies,
                error,
                runtime_ms,
            }
        })
        .collect();
    Ok(ExperimentReport {
        dataset: data[0].dataset.name.clone(),
        rows,
    })
}

pub const CSV_HEADER: [&str; 9] = [
    "model",
    "variant",
    "t",
    "s",
    "corruption",
    "mean_acc",
    "std_acc",
    "seeds",
    "runtime_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let seeds = match &row.error {
                Some(msg) => format!("ERR:{msg}"),
                None => row
                    .accuracies
                    .iter()
                    .map(|a| a.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            };
            w.write_record([
                row.model.name().to_string(),
                row.variant.name().to_string(),
                opt_str(row.t),
                opt_str(row.s),
                opt_str(row.corruption),
                opt_str(row.mean_acc),
                opt_str(row.std_acc),
                seeds,
                row.runtime_ms.to_string(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Parses CSV written by [`to_csv`](Self::to_csv).
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(text.as_bytes());
        let parse_err = |line: usize, msg: String| Error::Parse {
            path: None,
            line,
            msg,
        };
        let header = rd.headers()?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(parse_err(1, format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let opt = |j: usize| -> Result<Option<f64>> {
                let f = &rec[j];
                if f.is_empty() {
                    Ok(None)
                } else {
                    f.parse().map(Some).map_err(|_| parse_err(line, format!("bad number {f:?}")))
                }
            };
            let (accuracies, error) = match rec[7].strip_prefix("ERR:") {
                Some(msg) => (Vec::new(), Some(msg.to_string())),
                None if rec[7].is_empty() => (Vec::new(), None),
                None => (
                    rec[7]
                        .split(';')
                        .map(|a| a.parse().map_err(|_| parse_err(line, format!("bad accuracy {a:?}"))))
                        .collect::<Result<Vec<f64>>>()?,
                    None,
                ),
            };
            rows.push(ReportRow {
                model: rec[0].parse().map_err(|e| parse_err(line, e))?,
                variant: rec[1].parse().map_err(|e| parse_err(line, e))?,
                t: opt(2)?,
                s: opt(3)?,
                corruption: opt(4)?,
                mean_acc: opt(5)?,
                std_acc: opt(6)?,
                accuracies,
                error,
                runtime_ms: rec[8]
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad runtime {:?}", &rec[8])))?,
            });
        }
        Ok(Self {
            dataset: String::new(),
            rows,
        })
    }

    /// One table per corruption level: a row per model and variant (per `s`
    /// for ILE), a column per `t`. Entries are "mean (std)" in percent.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {}\n", if self.dataset.is_empty() { "report" } else { &self.dataset });
        let mut levels: Vec<Option<f64>> = Vec::new();
        for r in &self.rows {
            if !levels.iter().any(|l| l.map(f64::to_bits) == r.corruption.map(f64::to_bits)) {
                levels.push(r.corruption);
            }
        }
        for level in levels {
            let rows: Vec<&ReportRow> = self
                .rows
                .iter()
                .filter(|r| r.corruption.map(f64::to_bits) == level.map(f64::to_bits))
                .collect();
            if let Some(c) = level {
                let _ = writeln!(out, "## corruption {c}\n");
            }
            let mut ts: Vec<f64> = Vec::new();
            for t in rows.iter().filter_map(|r| r.t) {
                if !ts.contains(&t) {
                    ts.push(t);
                }
            }
            let _ = write!(out, "| Model | Variant | s |");
            if ts.is_empty() {
                out.push_str(" accuracy |");
            }
            for t in &ts {
                let _ = write!(out, " t={t} |");
            }
            out.push_str("\n|---|---|---|");
            out.push_str(&"---|".repeat(ts.len().max(1)));
            out.push('\n');
            // (model, variant, s) -> t -> cell text, in first-seen order
            let mut order: Vec<(Arch, Variant, Option<u64>)> = Vec::new();
            let mut table: BTreeMap<usize, Vec<(Option<f64>, String)>> = BTreeMap::new();
            for r in rows {
                let key = (r.model, r.variant, r.s.map(f64::to_bits));
                let idx = match order.iter().position(|k| *k == key) {
                    Some(i) => i,
                    None => {
                        order.push(key);
                        order.len() - 1
                    }
                };
                let text = match (r.mean_acc, r.std_acc) {
                    (Some(m), Some(s)) => format!("{:.2} ({:.2})", 100.0 * m, 100.0 * s),
                    _ => "error".to_string(),
                };
                table.entry(idx).or_default().push((r.t, text));
            }
            for (i, (model, variant, s)) in order.iter().enumerate() {
                let entries = &table[&i];
                let s = s.map(|b| f64::from_bits(b).to_string()).unwrap_or_else(|| "-".into());
                let _ = write!(out, "| {model} | {} | {s} |", variant.name());
                if ts.is_empty() {
                    let _ = write!(out, " {} |", entries[0].1);
                }
                for t in &ts {
                    // None and Adjacency do not depend on t
                    let text = entries
                        .iter()
                        .find(|(et, _)| et.is_none() || *et == Some(*t))
                        .map(|(_, s)| s.as_str())
                        .unwrap_or("");
                    let _ = write!(out, " {text} |");
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }

    pub fn emit(&self, path: &Path, format: ReportFormat) -> Result<()> {
        let text = match format {
            ReportFormat::Csv => self.to_csv()?,
            ReportFormat::Markdown => self.to_markdown(),
        };
        std::fs::write(path, text)?;
        Ok(())
    }
}
