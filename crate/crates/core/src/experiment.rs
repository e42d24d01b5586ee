//! Layer-sweep benchmark on the synthetic tasks.
//!
//! Every `(embedding, L)` cell trains `datasets × runs` models. Datasets
//! are shared across cells (and optionally cached on disk), so the
//! embedding and depth are the only factors that vary between cells.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{evaluate, Metrics};
use crate::embedding::EmbeddingKind;
use crate::error::{Error, Result};
use crate::graph::{read_jsonl, write_jsonl, DatasetRecord};
use crate::nn::{ModelSpec, Task};
use crate::synthetic::{generate_indexed, split_seed, GeneratorSpec, SyntheticTask};
use crate::train::{train, TrainConfig};

pub const MAX_LAYERS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: SyntheticTask,
    pub embeddings: Vec<EmbeddingKind>,
    /// Depths to sweep, each in `1..=6`.
    pub layers: Vec<usize>,
    pub datasets: usize,
    pub runs_per_dataset: usize,
    pub dim: usize,
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Fraction of each dataset held out for evaluation.
    pub test_fraction: f64,
    pub seed: u64,
    /// Directory for generated datasets, keyed by task and dataset seed.
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(task: SyntheticTask, seed: u64) -> Self {
        Self {
            task,
            embeddings: EmbeddingKind::ALL.to_vec(),
            layers: (1..=MAX_LAYERS).collect(),
            datasets: 3,
            runs_per_dataset: 5,
            dim: 32,
            alpha: 0.001,
            epochs: 50,
            batch_size: 32,
            test_fraction: 0.2,
            seed,
            cache_dir: None,
        }
    }

    pub fn seeds_per_cell(&self) -> usize {
        self.datasets * self.runs_per_dataset
    }

    pub fn model_task(&self) -> Task {
        match self.task {
            SyntheticTask::Counting => Task::Regression,
            SyntheticTask::Detection => Task::Classification,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.layers.is_empty() || self.layers.iter().any(|l| !(1..=MAX_LAYERS).contains(l)) {
            return invalid("layer counts must lie in 1..=6");
        }
        if self.embeddings.is_empty() {
            return invalid("no embeddings selected");
        }
        if self.datasets == 0 || self.runs_per_dataset == 0 {
            return invalid("need at least one dataset and one run");
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return invalid("test fraction must lie strictly between 0 and 1");
        }
        if self.dim == 0 || self.epochs == 0 {
            return invalid("width and epochs must be positive");
        }
        Ok(())
    }
}

/// Aggregated metric of one `(embedding, L)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub task: SyntheticTask,
    pub embedding: EmbeddingKind,
    pub layers: usize,
    pub metrics: Metrics,
}

impl CellResult {
    pub fn csv_header() -> &'static str {
        "task,embedding,L,mean,std"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.task.name(),
            self.embedding.name(),
            self.layers,
            self.metrics.mean,
            self.metrics.std
        )
    }
}

/// Train / test split of one generated dataset.
#[derive(Debug, Clone)]
pub struct Split {
    pub dataset_seed: u64,
    pub train: Vec<DatasetRecord>,
    pub test: Vec<DatasetRecord>,
}

fn cache_path(dir: &Path, task: SyntheticTask, seed: u64) -> PathBuf {
    dir.join(format!("{}-{seed:016x}.jsonl", task.name()))
}

/// Dataset `index` for `config`, read from the cache when present.
pub fn load_or_generate(
    config: &ExperimentConfig,
    index: usize,
) -> Result<(u64, Vec<DatasetRecord>)> {
    let spec = GeneratorSpec::new(config.task, config.seed);
    let seed = spec.dataset_seed(index);
    if let Some(dir) = &config.cache_dir {
        let path = cache_path(dir, config.task, seed);
        if path.exists() {
            return Ok((seed, read_jsonl(&path, Some(spec.alphabet))?));
        }
        let records = generate_indexed(&spec, index)?.records;
        fs::create_dir_all(dir)?;
        write_jsonl(&path, &records)?;
        return Ok((seed, records));
    }
    Ok((seed, generate_indexed(&spec, index)?.records))
}

/// Deterministic shuffle-then-cut split.
pub fn split_dataset(
    records: Vec<DatasetRecord>,
    test_fraction: f64,
    seed: u64,
) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    let mut records = records;
    records.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test_len = ((records.len() as f64) * test_fraction).round() as usize;
    let test_len = test_len.clamp(1, records.len().saturating_sub(1).max(1));
    let train = records.split_off(test_len);
    (train, records)
}

pub fn prepare_splits(config: &ExperimentConfig) -> Result<Vec<Split>> {
    (0..config.datasets)
        .map(|index| {
            let (seed, records) = load_or_generate(config, index)?;
            let (train, test) = split_dataset(records, config.test_fraction, split_seed(seed, 1));
            Ok(Split {
                dataset_seed: seed,
                train,
                test,
            })
        })
        .collect()
}

/// Test metric of one training run.
pub fn run_trial(
    config: &ExperimentConfig,
    split: &Split,
    embedding: EmbeddingKind,
    layers: usize,
    run: usize,
) -> Result<f64> {
    let spec = ModelSpec::new(embedding, layers, config.dim, config.model_task());
    let train_config = TrainConfig {
        alpha: config.alpha,
        epochs: config.epochs,
        batch_size: config.batch_size,
        seed: split_seed(split.dataset_seed, 100 + run as u64),
    };
    let outcome = train(spec, &split.train, &train_config)?;
    evaluate(&outcome.model, &split.test)
}

/// Runs every cell and hands each finished row to `sink` in sweep order
/// (embedding-major, then depth).
pub fn run_figure3<F>(config: &ExperimentConfig, mut sink: F) -> Result<Vec<CellResult>>
where
    F: FnMut(&CellResult) -> Result<()>,
{
    config.validate()?;
    let splits = prepare_splits(config)?;
    let mut results = Vec::new();
    for &embedding in &config.embeddings {
        for &layers in &config.layers {
            let jobs: Vec<(usize, usize)> = (0..config.datasets)
                .flat_map(|d| (0..config.runs_per_dataset).map(move |r| (d, r)))
                .collect();
            let values = jobs
                .into_par_iter()
                .map(|(d, r)| run_trial(config, &splits[d], embedding, layers, r))
                .collect::<Result<Vec<f64>>>()?;
            let cell = CellResult {
                task: config.task,
                embedding,
                layers,
                metrics: Metrics::from_values(config.model_task(), values)?,
            };
            sink(&cell)?;
            results.push(cell);
        }
    }
    Ok(results)
}

/// Runs the sweep and writes the CSV to `out`, flushing after every cell.
pub fn write_figure3<W: Write>(config: &ExperimentConfig, mut out: W) -> Result<Vec<CellResult>> {
    writeln!(out, "{}", CellResult::csv_header())?;
    out.flush()?;
    run_figure3(config, |cell| {
        writeln!(out, "{}", cell.to_csv())?;
        out.flush()?;
        Ok(())
    })
}
