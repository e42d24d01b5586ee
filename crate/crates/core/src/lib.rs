//! Weisfeiler-Lehman node embeddings for graph neural networks.
//!
//! The crate covers the whole pipeline: labeled multigraphs and SMILES
//! ingestion, WL label expansion, the atomic / naive WL / C-WL / G-WL
//! embeddings, a small reverse-mode differentiation engine with GCN layers
//! and Adam, synthetic label-counting and subgraph-detection benchmarks,
//! and numerical checks of the maximum-dimensionality bounds for sum
//! readouts.

pub mod analysis;
pub mod autodiff;
pub mod checkpoint;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod nn;
pub mod smiles;
pub mod subgraph;
pub mod synthetic;
pub mod theory;
pub mod train;
pub mod wl;

pub use error::{Error, Result};
pub use graph::{DatasetRecord, LabeledMultigraph};
