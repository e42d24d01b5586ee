//! Adam and the minibatch training loop.

use std::sync::Arc;

use ndarray::{Array2, Zip};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamStore, Tape};
use crate::embedding::{EncodedBatch, EncodedGraph};
use crate::error::{Error, Result};
use crate::graph::DatasetRecord;
use crate::nn::{Model, ModelSpec, Task};

/// Bias-corrected Adam with `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e-8`.
#[derive(Debug, Clone)]
pub struct Adam {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    first: Vec<Array2<f64>>,
    second: Vec<Array2<f64>>,
    step: i32,
}

impl Adam {
    pub fn new(store: &ParamStore) -> Self {
        let zeros: Vec<Array2<f64>> = store
            .values()
            .iter()
            .map(|v| Array2::zeros(v.raw_dim()))
            .collect();
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }

    pub fn steps_taken(&self) -> i32 {
        self.step
    }

    pub fn step(&mut self, params: &mut [Array2<f64>], grads: &[Array2<f64>], alpha: f64) {
        self.step += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            Zip::from(p).and(g).and(m).and(v).for_each(|p, &g, m, v| {
                *m = b1 * *m + (1.0 - b1) * g;
                *v = b2 * *v + (1.0 - b2) * g * g;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                *p -= alpha * m_hat / (v_hat.sqrt() + eps);
            });
        }
    }
}

/// One Adam update of every parameter in `store`.
pub fn adam_step(store: &mut ParamStore, grads: &[Array2<f64>], state: &mut Adam, alpha: f64) {
    state.step(store.values_mut(), grads, alpha);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Adam step size.
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-3,
            epochs: 100,
            batch_size: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: Model,
    /// Mean per-graph training loss of each epoch.
    pub loss_history: Vec<f64>,
}

fn check_targets(task: Task, records: &[DatasetRecord]) -> Result<()> {
    for r in records {
        let ok = match task {
            Task::Regression => r.target.is_finite(),
            Task::Classification => r.target == 0.0 || r.target == 1.0,
        };
        if !ok {
            return Err(Error::TargetTypeMismatch {
                target: r.target,
                task: task.name(),
            });
        }
    }
    Ok(())
}

/// Loss over a batch on the tape.
pub fn batch_loss(
    model: &Model,
    tape: &mut Tape,
    batch: &EncodedBatch,
    targets: &[f64],
) -> Result<crate::autodiff::Var> {
    let out = model.forward_batch(tape, batch)?;
    match model.spec.task {
        Task::Regression => tape.mean_squared_error(out, Arc::from(targets)),
        Task::Classification => {
            let classes: Vec<usize> = targets.iter().map(|&t| t as usize).collect();
            tape.softmax_cross_entropy(out, Arc::from(classes))
        }
    }
}

/// Mean loss of `model` over encoded graphs, no gradient.
pub fn evaluate_loss(model: &Model, graphs: &[EncodedGraph], targets: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (chunk, t) in graphs.chunks(256).zip(targets.chunks(256)) {
        let batch = EncodedBatch::new(chunk);
        let mut tape = Tape::new();
        let loss = batch_loss(model, &mut tape, &batch, t)?;
        total += tape.value(loss)[[0, 0]] * chunk.len() as f64;
    }
    Ok(total / graphs.len() as f64)
}

/// Trains a fresh model on `dataset` with minibatch Adam.
///
/// The featurizer vocabulary is fitted on `dataset`. The run is fully
/// determined by `(spec, dataset, config)`.
pub fn train(
    spec: ModelSpec,
    dataset: &[DatasetRecord],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    check_targets(spec.task, dataset)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model = Model::init(spec, dataset.iter().map(|r| &r.graph), &mut rng)?;
    let encoded: Vec<EncodedGraph> = dataset.iter().map(|r| model.encode(&r.graph)).collect();
    let targets: Vec<f64> = dataset.iter().map(|r| r.target).collect();
    let mut adam = Adam::new(&model.store);
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let batch_size = config.batch_size.max(1);
    let mut history = Vec::with_capacity(config.epochs);

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch_size) {
            let batch = EncodedBatch::new(chunk.iter().map(|&i| &encoded[i]));
            let batch_targets: Vec<f64> = chunk.iter().map(|&i| targets[i]).collect();
            let mut tape = Tape::new();
            let loss = batch_loss(&model, &mut tape, &batch, &batch_targets)?;
            epoch_loss += tape.value(loss)[[0, 0]] * chunk.len() as f64;
            let grads = tape.backward(loss)?.for_params(&model.store);
            adam_step(&mut model.store, &grads, &mut adam, config.alpha);
        }
        history.push(epoch_loss / dataset.len() as f64);
    }
    Ok(TrainOutcome {
        model,
        loss_history: history,
    })
}
