//! GCN message passing, sum readout and the assembled prediction model.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamId, ParamStore, SparseMatrix, Tape, Var};
use crate::embedding::{EmbeddingKind, EmbeddingParams, EncodedBatch, EncodedGraph, Featurizer};
use crate::error::{Error, Result};
use crate::graph::LabeledMultigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    Regression,
    Classification,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Self::Regression => "regression",
            Self::Classification => "classification",
        }
    }

    pub fn outputs(self) -> usize {
        match self {
            Self::Regression => 1,
            Self::Classification => 2,
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "regression" => Ok(Self::Regression),
            "classification" => Ok(Self::Classification),
            other => Err(format!("unknown task `{other}`")),
        }
    }
}

/// Architecture of a model: embedding, `layers` GCN layers of width `dim`,
/// sum readout and an affine head.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub embedding: EmbeddingKind,
    pub layers: usize,
    pub dim: usize,
    pub task: Task,
    /// Label expansion depth `T` for the WL embeddings.
    pub wl_iterations: usize,
    /// `(d1, d2)` for C-WL; defaults to `(dim, dim)`.
    pub cwl_dims: Option<(usize, usize)>,
}

impl ModelSpec {
    pub fn new(embedding: EmbeddingKind, layers: usize, dim: usize, task: Task) -> Self {
        Self {
            embedding,
            layers,
            dim,
            task,
            wl_iterations: 1,
            cwl_dims: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GcnLayerParams {
    /// `d_in × d_out`.
    pub weight: ParamId,
    /// `1 × d_out`.
    pub bias: ParamId,
}

impl GcnLayerParams {
    pub fn init<R: Rng>(
        d_in: usize,
        d_out: usize,
        name: &str,
        store: &mut ParamStore,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (d_in + d_out) as f64).sqrt();
        let weight = store.add(
            format!("{name}.weight"),
            Array2::from_shape_fn((d_in, d_out), |_| rng.random_range(-limit..limit)),
        );
        let bias = store.add(format!("{name}.bias"), Array2::zeros((1, d_out)));
        Self { weight, bias }
    }
}

/// `H' = ReLU(Â H W + b)`.
pub fn gcn_layer(
    tape: &mut Tape,
    h: Var,
    propagation: Arc<SparseMatrix>,
    params: &GcnLayerParams,
    store: &ParamStore,
) -> Result<Var> {
    let w = tape.param(store, params.weight);
    let b = tape.param(store, params.bias);
    let aggregated = tape.propagate(h, propagation)?;
    let mixed = tape.matmul(aggregated, w)?;
    let shifted = tape.add_row(mixed, b)?;
    Ok(tape.relu(shifted))
}

/// Column sums of a node-feature matrix.
pub fn sum_readout(h: &Array2<f64>) -> Result<Array1<f64>> {
    if h.nrows() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(h.sum_axis(Axis(0)))
}

/// Model output for one graph.
#[derive(Debug, Clone, PartialEq)]
pub enum Prediction {
    Value(f64),
    Logits([f64; 2]),
}

impl Prediction {
    /// Regression value, or the probability of class 1.
    pub fn score(&self) -> f64 {
        match *self {
            Self::Value(v) => v,
            Self::Logits([a, b]) => 1.0 / (1.0 + (a - b).exp()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub spec: ModelSpec,
    pub featurizer: Featurizer,
    pub store: ParamStore,
    pub embedding: EmbeddingParams,
    pub layers: Vec<GcnLayerParams>,
    pub head_weight: ParamId,
    pub head_bias: ParamId,
}

impl Model {
    /// Fits the featurizer on `graphs` and initializes all parameters.
    pub fn init<'a, R, I>(spec: ModelSpec, graphs: I, rng: &mut R) -> Result<Self>
    where
        R: Rng,
        I: IntoIterator<Item = &'a LabeledMultigraph>,
    {
        if spec.dim == 0 {
            return Err(Error::DimensionMismatch(
                "model width must be at least 1".into(),
            ));
        }
        let featurizer = Featurizer::fit(spec.embedding, spec.wl_iterations, graphs);
        let mut store = ParamStore::new();
        let dims = spec.cwl_dims.unwrap_or((spec.dim, spec.dim));
        let embedding = EmbeddingParams::init(&featurizer, spec.dim, dims, &mut store, rng);
        let layers = (0..spec.layers)
            .map(|l| GcnLayerParams::init(spec.dim, spec.dim, &format!("gcn{l}"), &mut store, rng))
            .collect();
        let outputs = spec.task.outputs();
        let limit = (6.0 / (spec.dim + outputs) as f64).sqrt();
        let head_weight = store.add(
            "head.weight",
            Array2::from_shape_fn((spec.dim, outputs), |_| rng.random_range(-limit..limit)),
        );
        let head_bias = store.add("head.bias", Array2::zeros((1, outputs)));
        Ok(Self {
            spec,
            featurizer,
            store,
            embedding,
            layers,
            head_weight,
            head_bias,
        })
    }

    pub fn encode(&self, graph: &LabeledMultigraph) -> EncodedGraph {
        self.featurizer.encode(graph)
    }

    /// Graph readout vectors `num_graphs × d` on the tape.
    pub fn readout(&self, tape: &mut Tape, batch: &EncodedBatch) -> Result<Var> {
        if batch.num_nodes() == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut h = self.embedding.forward(tape, &self.store, batch)?;
        for layer in &self.layers {
            h = gcn_layer(tape, h, batch.propagation.clone(), layer, &self.store)?;
        }
        tape.segment_sum(h, batch.segments.clone(), batch.num_graphs)
    }

    /// Outputs `num_graphs × outputs` on the tape.
    pub fn forward_batch(&self, tape: &mut Tape, batch: &EncodedBatch) -> Result<Var> {
        let pooled = self.readout(tape, batch)?;
        let w = tape.param(&self.store, self.head_weight);
        let b = tape.param(&self.store, self.head_bias);
        let out = tape.matmul(pooled, w)?;
        tape.add_row(out, b)
    }

    pub fn predict_encoded(&self, graphs: &[EncodedGraph]) -> Result<Vec<Prediction>> {
        if graphs.iter().any(|g| g.num_nodes == 0) {
            return Err(Error::EmptyGraph);
        }
        let mut out = Vec::with_capacity(graphs.len());
        for chunk in graphs.chunks(256) {
            let batch = EncodedBatch::new(chunk);
            let mut tape = Tape::new();
            let y = self.forward_batch(&mut tape, &batch)?;
            let values = tape.value(y);
            out.extend(values.outer_iter().map(|row| match self.spec.task {
                Task::Regression => Prediction::Value(row[0]),
                Task::Classification => Prediction::Logits([row[0], row[1]]),
            }));
        }
        Ok(out)
    }

    pub fn predict(&self, graphs: &[LabeledMultigraph]) -> Result<Vec<Prediction>> {
        let encoded: Vec<EncodedGraph> = graphs.iter().map(|g| self.encode(g)).collect();
        self.predict_encoded(&encoded)
    }
}

/// Prediction for a single graph.
pub fn forward(model: &Model, graph: &LabeledMultigraph) -> Result<Prediction> {
    let encoded = model.encode(graph);
    Ok(model
        .predict_encoded(std::slice::from_ref(&encoded))?
        .pop()
        .expect("one graph in, one prediction out"))
}
