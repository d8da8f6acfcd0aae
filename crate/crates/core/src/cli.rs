//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 on usage errors, 2 on runtime errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dataset::{load_dataset_with, split_70_30, LabelSource};
use crate::eigensolver::SolverOptions;
use crate::embedding::{augment_features, compute_adjacency_embedding, compute_ile};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::harness::{run_grid, GridConfig, ReportFormat, Variant};
use crate::nn::{build_model, train, Arch, Matrix, ModelConfig, Optimizer};
use crate::sbm::{generate, Preset};
use crate::seeds::derive_seed;
use crate::select::{correlation_screen, cross_validate, scree_selection};

#[derive(Parser, Debug)]
#[command(name = "ile", version, about = "Interpolated Laplacian embeddings and GNN experiments")]
struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Eigensolver residual tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral embedding of an edge list as CSV.
    Embed(EmbedArgs),
    /// Sample a stochastic block model.
    Sbm(SbmArgs),
    /// Train one model and print its report as JSON.
    Train(TrainArgs),
    /// Run a grid experiment from a JSON config.
    Grid(GridArgs),
    /// Choose k or (t, s).
    Select(SelectArgs),
}

#[derive(Args, Debug)]
struct EmbedArgs {
    /// Edge list file.
    graph: PathBuf,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    t: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    s: f64,
    #[arg(long)]
    k: usize,
    /// Top-k adjacency embedding instead of M(t, s).
    #[arg(long)]
    adjacency: bool,
    /// Vertex count, if larger than the edge list implies.
    #[arg(long)]
    n: Option<usize>,
    /// Output CSV (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Write solver metadata as JSON here.
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SbmArgs {
    #[arg(long, default_value = "community")]
    preset: Preset,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Randomly relabel nodes.
    #[arg(long)]
    shuffle: bool,
    /// Edge list output (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Labels CSV output.
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Edge list file.
    graph: PathBuf,
    /// Node labels CSV (`node,label`).
    #[arg(long, conflicts_with = "degree_top")]
    labels: Option<PathBuf>,
    /// Label the top fraction of nodes by degree as class 1.
    #[arg(long)]
    degree_top: Option<f64>,
    /// Feature CSV, one row per node.
    #[arg(long)]
    features: Option<PathBuf>,
}

impl DataArgs {
    fn label_source(&self) -> std::result::Result<LabelSource, String> {
        match (&self.labels, self.degree_top) {
            (Some(p), _) => Ok(LabelSource::File(p.clone())),
            (None, Some(f)) => Ok(LabelSource::DegreeTop(f)),
            (None, None) => Err("one of --labels or --degree-top is required".into()),
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "GCN")]
    model: Arch,
    #[arg(long, default_value = "ile")]
    variant: Variant,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    t: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    s: f64,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_enum)]
    optimizer: Option<OptimizerArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OptimizerArg {
    Gd,
    Adam,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// GridConfig JSON file.
    config: PathBuf,
    /// Report CSV (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write a markdown table here.
    #[arg(long)]
    markdown: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Scree,
    Correlation,
    Cv,
}

#[derive(Args, Debug)]
struct SelectArgs {
    /// Edge list file.
    graph: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Node labels CSV (correlation and cv).
    #[arg(long, conflicts_with = "degree_top")]
    labels: Option<PathBuf>,
    #[arg(long)]
    degree_top: Option<f64>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    k: usize,
    /// Number of eigenvalues shown to the scree rule.
    #[arg(long, default_value_t = 10)]
    k_max: usize,
    /// (t, s) used for the scree spectrum.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    t: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
    s: f64,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, -0.5, 0.5, 1.0])]
    t_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-1.0, -0.5, 0.0, 0.5, 1.0])]
    s_values: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value = "GCN")]
    model: Arch,
    /// Score table CSV (default: stdout).
    #[arg(long, short)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

const SYNOPSIS: &str = "usage: ile [--seed N] [--tol X] [--threads N] <embed|sbm|train|grid|select> ...\n       ile <command> --help for details";

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", e.render().to_string().trim_end());
            eprintln!("{SYNOPSIS}");
            return 1;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("{SYNOPSIS}");
            1
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn solver_options(cli: &Cli) -> SolverOptions {
    let mut opts = SolverOptions::with_seed(cli.seed);
    if let Some(tol) = cli.tol {
        opts.tol = tol;
    }
    opts
}

fn execute(cli: &Cli) -> std::result::Result<(), Failure> {
    if cli.threads == Some(0) {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    if let Some(tol) = cli.tol {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Failure::Usage("--tol must be positive".into()));
        }
    }
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = cli.threads {
            b = b.num_threads(t);
        }
        b.build()
            .map_err(|e| Failure::Runtime(Error::InvalidConfig(e.to_string())))?
    };
    pool.install(|| match &cli.command {
        Command::Embed(a) => embed(cli, a),
        Command::Sbm(a) => sbm(cli, a),
        Command::Train(a) => train_cmd(cli, a),
        Command::Grid(a) => grid(cli, a),
        Command::Select(a) => select(cli, a),
    })
}

fn embed(cli: &Cli, a: &EmbedArgs) -> std::result::Result<(), Failure> {
    let g = Graph::read_edge_list(&a.graph, a.n)?;
    let opts = solver_options(cli);
    let emb = if a.adjacency {
        compute_adjacency_embedding(&g, a.k, &opts)?
    } else {
        compute_ile(&g, a.t, a.s, a.k, &opts)?
    };
    write_output(a.out.as_deref(), &emb.to_csv())?;
    if let Some(p) = &a.sidecar {
        std::fs::write(p, serde_json::to_string_pretty(&emb.sidecar()).map_err(Error::from)?).map_err(Error::from)?;
    }
    Ok(())
}

fn sbm(cli: &Cli, a: &SbmArgs) -> std::result::Result<(), Failure> {
    let mut lg = generate(&a.preset.spec(a.n, cli.seed)?)?;
    if a.shuffle {
        lg = lg.shuffled(derive_seed(cli.seed, "shuffle")).0;
    }
    write_output(a.out.as_deref(), &lg.graph.to_edge_list_string())?;
    if let Some(p) = &a.labels {
        std::fs::write(p, lg.labels_csv()).map_err(Error::from)?;
    }
    Ok(())
}

fn train_cmd(cli: &Cli, a: &TrainArgs) -> std::result::Result<(), Failure> {
    let source = a.data.label_source().map_err(Failure::Usage)?;
    let data = load_dataset_with(&a.data.graph, a.data.features.as_deref(), &source)?;
    let opts = solver_options(cli);
    let x = match a.variant {
        Variant::None => data
            .features
            .clone()
            .unwrap_or_else(|| nalgebra::DMatrix::from_element(data.n(), 1, 1.0)),
        Variant::Adjacency => augment_features(data.features.as_ref(), &compute_adjacency_embedding(&data.graph, a.k, &opts)?)?,
        Variant::Ile => augment_features(data.features.as_ref(), &compute_ile(&data.graph, a.t, a.s, a.k, &opts)?)?,
    };
    let x = Matrix::from_dmatrix(&x);
    let mut cfg = ModelConfig {
        seed: cli.seed,
        ..ModelConfig::for_arch(a.model)
    };
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(lr) = a.lr {
        cfg.lr = lr;
    }
    if let Some(h) = a.hidden {
        cfg.hidden_dim = h;
    }
    if let Some(l) = a.layers {
        cfg.layers = l;
    }
    if let Some(o) = a.optimizer {
        cfg.optimizer = match o {
            OptimizerArg::Gd => Optimizer::Gd,
            OptimizerArg::Adam => Optimizer::Adam,
        };
    }
    let split = split_70_30(data.n(), derive_seed(cli.seed, "split"))?;
    let mut model = build_model(&cfg, x.cols, data.num_classes(), &data.graph)?;
    let report = train(&mut model, &x, &data.labels, &split)?;
    let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
    write_output(None, &(json + "\n"))?;
    Ok(())
}

fn grid(cli: &Cli, a: &GridArgs) -> std::result::Result<(), Failure> {
    let mut cfg = GridConfig::read(&a.config)?;
    if cli.tol.is_some() {
        cfg.tol = cli.tol;
    }
    let report = run_grid(&cfg, cli.threads)?;
    write_output(a.out.as_deref(), &report.to_csv()?)?;
    if let Some(p) = &a.markdown {
        report.emit(p, ReportFormat::Markdown)?;
    }
    Ok(())
}

fn select(cli: &Cli, a: &SelectArgs) -> std::result::Result<(), Failure> {
    let opts = solver_options(cli);
    let grid: Vec<(f64, f64)> = a
        .t_values
        .iter()
        .flat_map(|&t| a.s_values.iter().map(move |&s| (t, s)))
        .collect();
    let result = match a.method {
        MethodArg::Scree => {
            let g = Graph::read_edge_list(&a.graph, None)?;
            let emb = compute_ile(&g, a.t, a.s, a.k_max, &opts)?;
            scree_selection(&emb.eigenvalues, a.k_max)?
        }
        MethodArg::Correlation | MethodArg::Cv => {
            let source = match (&a.labels, a.degree_top) {
                (Some(p), _) => LabelSource::File(p.clone()),
                (None, Some(f)) => LabelSource::DegreeTop(f),
                (None, None) => return Err(Failure::Usage("one of --labels or --degree-top is required".into())),
            };
            let data = load_dataset_with(&a.graph, a.features.as_deref(), &source)?;
            if matches!(a.method, MethodArg::Correlation) {
                let split = split_70_30(data.n(), derive_seed(cli.seed, "split"))?;
                correlation_screen(&data.graph, &data.labels, &split.train_idx, &grid, a.k, &opts)?
            } else {
                let cfg = ModelConfig {
                    seed: cli.seed,
                    ..ModelConfig::for_arch(a.model)
                };
                cross_validate(
                    &data.graph,
                    data.features.as_ref(),
                    &data.labels,
                    &grid,
                    a.k,
                    a.folds,
                    &cfg,
                    cli.seed,
                    &opts,
                )?
            }
        }
    };
    write_output(a.out.as_deref(), &result.to_csv())?;
    Ok(())
}
