//! Small reverse-mode autodiff engine and the node classifiers built on it.

mod autodiff;
mod model;
mod tensor;

pub use autodiff::{Tape, Var};
pub use model::{build_model, train, Arch, Model, ModelConfig, Optimizer, TrainReport};
pub use tensor::{Matrix, SparseMatrix};
