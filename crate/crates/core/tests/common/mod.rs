#![allow(dead_code)]

use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use wl_embed::autodiff::{ParamStore, Tape, Var};
use wl_embed::embedding::{EmbeddingKind, EmbeddingParams, EncodedBatch, Featurizer};
use wl_embed::graph::LabeledMultigraph;
use wl_embed::nn::{gcn_layer, GcnLayerParams};
use wl_embed::Result;

/// Erdős–Rényi style graph with labels drawn from `1..=alphabet`.
pub fn random_graph<R: Rng>(
    rng: &mut R,
    max_nodes: usize,
    edge_p: f64,
    alphabet: u32,
) -> LabeledMultigraph {
    let n = rng.random_range(1..=max_nodes);
    let labels = (0..n).map(|_| rng.random_range(1..=alphabet)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(edge_p) {
                edges.push((u, v));
            }
        }
    }
    LabeledMultigraph::new(n, labels, edges, alphabet).expect("valid random graph")
}

pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Post-embedding operation mixed into a gradient-check graph.
#[derive(Debug, Clone, Copy)]
pub enum ExtraOp {
    None,
    Tanh,
    Sigmoid,
    /// Elementwise product with a fixed random leaf.
    Mul,
}

/// A random scalar computation: embedding, GCN layers, an extra op, sum
/// readout, affine head and a loss.
pub struct GradCase {
    pub store: ParamStore,
    embedding: EmbeddingParams,
    layers: Vec<GcnLayerParams>,
    head: wl_embed::autodiff::ParamId,
    extra: ExtraOp,
    mask: Option<Array2<f64>>,
    batch: EncodedBatch,
    classification: bool,
    targets: Vec<f64>,
}

impl GradCase {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let kind = EmbeddingKind::ALL[rng.random_range(0..4)];
        let graphs: Vec<LabeledMultigraph> = (0..rng.random_range(1..=3))
            .map(|_| random_graph(rng, 6, 0.4, 3))
            .collect();
        let featurizer = Featurizer::fit(kind, 1, &graphs);
        let dim = rng.random_range(2..=4);
        let dims = (rng.random_range(1..=3), rng.random_range(1..=3));
        let mut store = ParamStore::new();
        let embedding = EmbeddingParams::init(&featurizer, dim, dims, &mut store, rng);
        let depth = rng.random_range(0..=3);
        let layers = (0..depth)
            .map(|l| GcnLayerParams::init(dim, dim, &format!("gcn{l}"), &mut store, rng))
            .collect();
        let classification = rng.random_bool(0.5);
        let outputs = if classification { 2 } else { 1 };
        let head = store.add("head", Array2::zeros((dim, outputs)));
        // spread every parameter, including zero-initialized biases and UNKNOWN rows
        for value in store.values_mut() {
            value.mapv_inplace(|_| rng.random_range(-1.0..1.0));
        }
        let extra = match rng.random_range(0..4) {
            0 => ExtraOp::None,
            1 => ExtraOp::Tanh,
            2 => ExtraOp::Sigmoid,
            _ => ExtraOp::Mul,
        };
        let encoded: Vec<_> = graphs.iter().map(|g| featurizer.encode(g)).collect();
        let batch = EncodedBatch::new(&encoded);
        let mask = matches!(extra, ExtraOp::Mul).then(|| {
            Array2::from_shape_fn((batch.num_nodes(), dim), |_| rng.random_range(-1.0..1.0))
        });
        let targets = (0..graphs.len())
            .map(|_| {
                if classification {
                    f64::from(rng.random_range(0..2u8))
                } else {
                    rng.random_range(-2.0..2.0)
                }
            })
            .collect();
        Self {
            store,
            embedding,
            layers,
            head,
            extra,
            mask,
            batch,
            classification,
            targets,
        }
    }

    /// Builds the loss on `tape`, returning it with every ReLU pre-activation.
    fn build(&self, tape: &mut Tape, store: &ParamStore) -> Result<(Var, Vec<Var>)> {
        let mut h = self.embedding.forward(tape, store, &self.batch)?;
        let mut pre = Vec::new();
        for layer in &self.layers {
            // the same affine map as inside gcn_layer, kept for kink detection
            let w = tape.param(store, layer.weight);
            let b = tape.param(store, layer.bias);
            let agg = tape.propagate(h, self.batch.propagation.clone())?;
            let mixed = tape.matmul(agg, w)?;
            pre.push(tape.add_row(mixed, b)?);
            h = gcn_layer(tape, h, self.batch.propagation.clone(), layer, store)?;
        }
        h = match self.extra {
            ExtraOp::None => h,
            ExtraOp::Tanh => tape.tanh(h),
            ExtraOp::Sigmoid => tape.sigmoid(h),
            ExtraOp::Mul => {
                let m = tape.leaf(self.mask.clone().expect("mask for Mul"));
                tape.mul(h, m)?
            }
        };
        let pooled = tape.segment_sum(h, self.batch.segments.clone(), self.batch.num_graphs)?;
        let head = tape.param(store, self.head);
        let out = tape.matmul(pooled, head)?;
        let loss = if self.classification {
            let classes: Vec<usize> = self.targets.iter().map(|&t| t as usize).collect();
            tape.softmax_cross_entropy(out, Arc::from(classes))?
        } else {
            tape.mean_squared_error(out, Arc::from(self.targets.clone()))?
        };
        Ok((loss, pre))
    }

    pub fn loss(&self, store: &ParamStore) -> Result<f64> {
        let mut tape = Tape::new();
        let (loss, _) = self.build(&mut tape, store)?;
        Ok(tape.value(loss)[[0, 0]])
    }

    /// Smallest |pre-activation| over all ReLU units.
    pub fn kink_margin(&self) -> Result<f64> {
        let mut tape = Tape::new();
        let (_, pre) = self.build(&mut tape, &self.store)?;
        Ok(pre
            .iter()
            .flat_map(|&v| tape.value(v).iter().map(|x| x.abs()).collect::<Vec<_>>())
            .fold(f64::INFINITY, f64::min))
    }

    pub fn analytic(&self) -> Result<Vec<Array2<f64>>> {
        let mut tape = Tape::new();
        let (loss, _) = self.build(&mut tape, &self.store)?;
        Ok(tape.backward(loss)?.for_params(&self.store))
    }

    /// Largest relative error between reverse mode and the five-point
    /// central difference with step `h`, over every scalar parameter.
    ///
    /// The relative error is `|a - n| / max(|a|, |n|, floor)`.
    pub fn max_relative_error(&self, h: f64, floor: f64) -> Result<f64> {
        let analytic = self.analytic()?;
        let mut store = self.store.clone();
        let mut worst: f64 = 0.0;
        for (p, grad) in analytic.iter().enumerate() {
            for idx in 0..grad.len() {
                let (r, c) = (idx / grad.ncols(), idx % grad.ncols());
                let original = store.values()[p][[r, c]];
                let mut at = |offset: f64| -> Result<f64> {
                    store.values_mut()[p][[r, c]] = original + offset;
                    self.loss(&store)
                };
                let numeric =
                    (at(-2.0 * h)? - 8.0 * at(-h)? + 8.0 * at(h)? - at(2.0 * h)?) / (12.0 * h);
                store.values_mut()[p][[r, c]] = original;
                let a = grad[[r, c]];
                let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(floor);
                worst = worst.max(err);
            }
        }
        Ok(worst)
    }

    /// A random case whose ReLU pre-activations all stay at least `margin`
    /// away from the kink.
    pub fn smooth<R: Rng>(rng: &mut R, margin: f64) -> Self {
        loop {
            let case = Self::random(rng);
            if case.kink_margin().expect("forward pass") > margin {
                return case;
            }
        }
    }
}
