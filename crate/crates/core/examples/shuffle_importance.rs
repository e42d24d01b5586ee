// Trains a C-WL detector, then measures how much the test AUC drops when
// atom or neighborhood keys are replaced, and inspects the mixing weights.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wl_embed::analysis::{cwl_weight_magnitudes, shuffle_importance, ShuffleMode};
use wl_embed::embedding::EmbeddingKind;
use wl_embed::experiment::split_dataset;
use wl_embed::nn::{ModelSpec, Task};
use wl_embed::synthetic::{generate_indexed, GeneratorSpec, SyntheticTask};
use wl_embed::train::{train, TrainConfig};
use wl_embed::Result;

pub fn run_example() -> Result<()> {
    let mut spec = GeneratorSpec::new(SyntheticTask::Detection, 3);
    spec.positives = 80;
    spec.negatives = 80;
    let records = generate_indexed(&spec, 0)?.records;
    let (train_set, test_set) = split_dataset(records, 0.25, 2);
    let config = TrainConfig {
        epochs: 15,
        ..TrainConfig::default()
    };
    let model = train(
        ModelSpec::new(EmbeddingKind::Cwl, 1, 16, Task::Classification),
        &train_set,
        &config,
    )?
    .model;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for mode in [ShuffleMode::Atom, ShuffleMode::Neighborhood] {
        let report = shuffle_importance(&model, &test_set, mode, &mut rng)?;
        println!(
            "shuffle {mode:<4} AUC {:.3} -> {:.3} (delta {:+.3})",
            report.baseline,
            report.shuffled,
            report.delta()
        );
    }
    let weights = cwl_weight_magnitudes(&model)?;
    println!(
        "mixing weights: atom side mean {:.4}, neighborhood side mean {:.4}",
        weights.atom_mean, weights.neighborhood_mean
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
