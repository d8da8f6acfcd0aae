#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod dataset;
pub mod eigensolver;
pub mod embedding;
pub mod error;
pub mod graph;
pub mod harness;
pub mod nn;
pub mod operator;
pub mod sbm;
pub mod seeds;
pub mod select;
pub mod stats;

pub use error::{Error, Result};
