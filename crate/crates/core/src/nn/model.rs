use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Split;
use crate::error::{Error, Result};
use crate::graph::Graph;

use super::autodiff::{Tape, Var};
use super::tensor::{Matrix, SparseMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Arch {
    Mlp,
    Gcn,
    Gin,
    Sage,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Mlp => "MLP",
            Arch::Gcn => "GCN",
            Arch::Gin => "GIN",
            Arch::Sage => "SAGE",
        }
    }

    /// Default depth: 5 for the MLP baseline, 2 for the graph models.
    pub fn default_layers(self) -> usize {
        match self {
            Arch::Mlp => 5,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Arch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Arch {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "MLP" => Ok(Arch::Mlp),
            "GCN" => Ok(Arch::Gcn),
            "GIN" => Ok(Arch::Gin),
            "SAGE" | "GRAPHSAGE" => Ok(Arch::Sage),
            _ => Err(format!("unknown model {s:?} (expected MLP, GCN, GIN or SAGE)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// Plain full-batch gradient descent.
    Gd,
    /// Adam with betas (0.9, 0.999) and eps 1e-8; weight decay is added to
    /// the gradient.
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub arch: Arch,
    pub layers: usize,
    pub hidden_dim: usize,
    pub lr: f64,
    pub epochs: usize,
    pub weight_decay: f64,
    pub seed: u64,
    pub gin_epsilon: f64,
    pub optimizer: Optimizer,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self::for_arch(Arch::Gcn)
    }
}

impl ModelConfig {
    pub fn for_arch(arch: Arch) -> Self {
        Self {
            arch,
            layers: arch.default_layers(),
            hidden_dim: 32,
            lr: 0.01,
            epochs: 200,
            weight_decay: 5e-4,
            seed: 0,
            gin_epsilon: 0.0,
            optimizer: Optimizer::Adam,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 {
            return Err(Error::InvalidConfig("layers must be at least 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::InvalidConfig("hidden_dim must be at least 1".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::InvalidConfig(format!("lr must be positive, got {}", self.lr)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            )));
        }
        if !self.gin_epsilon.is_finite() {
            return Err(Error::InvalidConfig("gin_epsilon must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub test_accuracy: f64,
    pub train_accuracy: f64,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs_run: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
struct Linear {
    weight: usize,
    bias: usize,
}

/// A model with its parameters and the graph operators it propagates with.
#[derive(Debug, Clone)]
pub struct Model {
    cfg: ModelConfig,
    in_dim: usize,
    num_classes: usize,
    params: Vec<Matrix>,
    /// For GIN each layer holds two linears; otherwise one.
    layers: Vec<Vec<Linear>>,
    propagation: Option<SparseMatrix>,
    graph: Option<Graph>,
}

fn glorot(rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize) -> Matrix {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Matrix::from_fn(fan_in, fan_out, |_, _| rng.random_range(-a..=a))
}

pub fn build_model(cfg: &ModelConfig, in_dim: usize, num_classes: usize, g: &Graph) -> Result<Model> {
    cfg.validate()?;
    if in_dim == 0 || num_classes == 0 {
        return Err(Error::InvalidConfig(format!(
            "need in_dim >= 1 and num_classes >= 1, got {in_dim} and {num_classes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = Vec::new();
    let mut linear = |rng: &mut ChaCha8Rng, fan_in: usize, fan_out: usize| {
        params.push(glorot(rng, fan_in, fan_out));
        params.push(Matrix::zeros(1, fan_out));
        Linear {
            weight: params.len() - 2,
            bias: params.len() - 1,
        }
    };
    let mut layers = Vec::with_capacity(cfg.layers);
    for l in 0..cfg.layers {
        let fan_in = if l == 0 { in_dim } else { cfg.hidden_dim };
        let fan_out = if l + 1 == cfg.layers {
            num_classes
        } else {
            cfg.hidden_dim
        };
        layers.push(match cfg.arch {
            Arch::Mlp | Arch::Gcn => vec![linear(&mut rng, fan_in, fan_out)],
            Arch::Sage => vec![linear(&mut rng, 2 * fan_in, fan_out)],
            Arch::Gin => vec![
                linear(&mut rng, fan_in, cfg.hidden_dim),
                linear(&mut rng, cfg.hidden_dim, fan_out),
            ],
        });
    }
    let mut model = Model {
        cfg: cfg.clone(),
        in_dim,
        num_classes,
        params,
        layers,
        propagation: None,
        graph: None,
    };
    model.attach_graph(g);
    Ok(model)
}

impl Model {
    fn attach_graph(&mut self, g: &Graph) {
        let (propagation, graph) = match self.cfg.arch {
            Arch::Mlp => (None, None),
            Arch::Gcn => (Some(SparseMatrix::gcn_propagation(g)), None),
            Arch::Gin => (Some(SparseMatrix::gin_aggregation(g, self.cfg.gin_epsilon)), None),
            Arch::Sage => (None, Some(g.clone())),
        };
        self.propagation = propagation;
        self.graph = graph;
    }

    /// The same parameters propagating over a different graph.
    pub fn with_graph(&self, g: &Graph) -> Model {
        let mut m = self.clone();
        m.attach_graph(g);
        m
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Parameter matrices in creation order (weight, bias, weight, bias, ...).
    pub fn params(&self) -> &[Matrix] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Matrix] {
        &mut self.params
    }

    fn check_input(&self, x: &Matrix) -> Result<()> {
        if x.cols != self.in_dim {
            return Err(Error::ShapeMismatch(format!(
                "model expects {} input features, got {}",
                self.in_dim, x.cols
            )));
        }
        let n = self
            .propagation
            .as_ref()
            .map(|p| p.rows)
            .or(self.graph.as_ref().map(|g| g.n()));
        if let Some(n) = n {
            if n != x.rows {
                return Err(Error::ShapeMismatch(format!("graph has {n} nodes, features have {} rows", x.rows)));
            }
        }
        Ok(())
    }

    fn forward<'a>(&'a self, tape: &mut Tape<'a>, x: &Matrix) -> Result<(Var, Vec<Var>)> {
        self.check_input(x)?;
        let params = self
            .params
            .iter()
            .map(|p| tape.leaf(p.clone()))
            .collect::<Result<Vec<_>>>()?;
        let affine = |tape: &mut Tape<'a>, h: Var, lin: &Linear| -> Result<Var> {
            let z = tape.matmul(h, params[lin.weight])?;
            tape.bias_add(z, params[lin.bias])
        };
        let mut h = tape.leaf(x.clone())?;
        let depth = self.layers.len();
        for (l, lins) in self.layers.iter().enumerate() {
            h = match self.cfg.arch {
                Arch::Mlp => affine(tape, h, &lins[0])?,
                Arch::Gcn => {
                    let s = self.propagation.as_ref().expect("gcn propagation");
                    let z = tape.sparse_matmul(s, h)?;
                    affine(tape, z, &lins[0])?
                }
                Arch::Gin => {
                    let s = self.propagation.as_ref().expect("gin aggregation");
                    let z = tape.sparse_matmul(s, h)?;
                    let z = affine(tape, z, &lins[0])?;
                    let z = tape.relu(z)?;
                    affine(tape, z, &lins[1])?
                }
                Arch::Sage => {
                    let g = self.graph.as_ref().expect("sage graph");
                    let mean = tape.mean_rows_by_neighbors(g, h)?;
                    let z = tape.concat_cols(h, mean)?;
                    affine(tape, z, &lins[0])?
                }
            };
            if l + 1 < depth {
                h = tape.relu(h)?;
            }
        }
        Ok((h, params))
    }

    pub fn logits(&self, x: &Matrix) -> Result<Matrix> {
        let mut tape = Tape::new();
        let (out, _) = self.forward(&mut tape, x)?;
        Ok(tape.value(out).clone())
    }

    /// Masked mean cross-entropy (no weight decay term) and its gradient
    /// with respect to every parameter matrix.
    pub fn loss_and_grads(&self, x: &Matrix, labels: &[usize], mask: &[usize]) -> Result<(f64, Vec<Matrix>)> {
        let mut tape = Tape::new();
        let (logits, params) = self.forward(&mut tape, x)?;
        let loss = tape.softmax_cross_entropy(logits, labels, mask)?;
        tape.backward(loss)?;
        let value = tape.value(loss).data[0];
        Ok((value, params.into_iter().map(|p| tape.grad(p)).collect()))
    }

    pub fn loss(&self, x: &Matrix, labels: &[usize], mask: &[usize]) -> Result<f64> {
        let mut tape = Tape::new();
        let (logits, _) = self.forward(&mut tape, x)?;
        let loss = tape.softmax_cross_entropy(logits, labels, mask)?;
        Ok(tape.value(loss).data[0])
    }

    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.logits(x)?.argmax_rows())
    }
}

struct AdamState {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    t: i32,
}

impl AdamState {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(params: &[Matrix]) -> Self {
        Self {
            m: params.iter().map(|p| vec![0.0; p.data.len()]).collect(),
            v: params.iter().map(|p| vec![0.0; p.data.len()]).collect(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [Matrix], grads: &[Matrix], lr: f64, wd: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for (i, (p, g)) in params.iter_mut().zip(grads).enumerate() {
            for (j, (w, dw)) in p.data.iter_mut().zip(&g.data).enumerate() {
                let d = dw + wd * *w;
                let m = &mut self.m[i][j];
                let v = &mut self.v[i][j];
                *m = Self::BETA1 * *m + (1.0 - Self::BETA1) * d;
                *v = Self::BETA2 * *v + (1.0 - Self::BETA2) * d * d;
                *w -= lr * (*m / c1) / ((*v / c2).sqrt() + Self::EPS);
            }
        }
    }
}

fn accuracy(pred: &[usize], labels: &[usize], idx: &[usize]) -> f64 {
    if idx.is_empty() {
        return 0.0;
    }
    let hits = idx.iter().filter(|&&i| pred[i] == labels[i]).count();
    hits as f64 / idx.len() as f64
}

/// Full-batch training with weight decay on the training rows of `split`,
/// then accuracy on both halves.
pub fn train(model: &mut Model, x: &Matrix, labels: &[usize], split: &Split) -> Result<TrainReport> {
    if labels.len() != x.rows {
        return Err(Error::ShapeMismatch(format!("{} labels for {} nodes", labels.len(), x.rows)));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= model.num_classes) {
        return Err(Error::ShapeMismatch(format!(
            "label {bad} out of range for {} classes",
            model.num_classes
        )));
    }
    if split.train_idx.iter().chain(&split.test_idx).any(|&i| i >= x.rows) {
        return Err(Error::ShapeMismatch("split index out of range".into()));
    }
    let (lr, wd) = (model.cfg.lr, model.cfg.weight_decay);
    let mut initial_loss = f64::NAN;
    let mut adam = AdamState::new(&model.params);
    for epoch in 0..model.cfg.epochs {
        let (loss, grads) = match model.loss_and_grads(x, labels, &split.train_idx) {
            Ok(v) => v,
            Err(Error::NonFiniteValue(_)) => return Err(Error::NonFiniteLoss { epoch, loss: f64::NAN }),
            Err(e) => return Err(e),
        };
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch, loss });
        }
        if epoch == 0 {
            initial_loss = loss;
        }
        match model.cfg.optimizer {
            Optimizer::Gd => {
                for (p, g) in model.params.iter_mut().zip(&grads) {
                    for (w, dw) in p.data.iter_mut().zip(&g.data) {
                        *w -= lr * (dw + wd * *w);
                    }
                }
            }
            Optimizer::Adam => adam.step(&mut model.params, &grads, lr, wd),
        }
    }
    let epochs = model.cfg.epochs;
    let final_loss = match model.loss(x, labels, &split.train_idx) {
        Ok(l) if l.is_finite() => l,
        Ok(l) => return Err(Error::NonFiniteLoss { epoch: epochs, loss: l }),
        Err(Error::NonFiniteValue(_)) => return Err(Error::NonFiniteLoss { epoch: epochs, loss: f64::NAN }),
        Err(e) => return Err(e),
    };
    if epochs == 0 {
        initial_loss = final_loss;
    }
    let pred = model.predict(x)?;
    Ok(TrainReport {
        test_accuracy: accuracy(&pred, labels, &split.test_idx),
        train_accuracy: accuracy(&pred, labels, &split.train_idx),
        initial_loss,
        final_loss,
        epochs_run: epochs,
        seed: model.cfg.seed,
    })
}
