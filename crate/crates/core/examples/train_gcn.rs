// Trains atomic and C-WL models on a small counting dataset.

use wl_embed::analysis::evaluate;
use wl_embed::embedding::EmbeddingKind;
use wl_embed::experiment::split_dataset;
use wl_embed::nn::{ModelSpec, Task};
use wl_embed::synthetic::{generate_indexed, GeneratorSpec, SyntheticTask};
use wl_embed::train::{train, TrainConfig};
use wl_embed::Result;

pub fn run_example() -> Result<()> {
    let mut spec = GeneratorSpec::new(SyntheticTask::Counting, 7);
    spec.positives = 60;
    spec.negatives = 60;
    let records = generate_indexed(&spec, 0)?.records;
    let (train_set, test_set) = split_dataset(records, 0.2, 1);
    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    for kind in [EmbeddingKind::Atomic, EmbeddingKind::Cwl] {
        let outcome = train(
            ModelSpec::new(kind, 1, 16, Task::Regression),
            &train_set,
            &config,
        )?;
        let first = outcome.loss_history[0];
        let last = *outcome.loss_history.last().expect("at least one epoch");
        println!(
            "{:<6} loss {first:.3} -> {last:.3}, test MAE {:.3}",
            kind.name(),
            evaluate(&outcome.model, &test_set)?
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
