// Saves a trained model and its binary embedding, then reloads both.

use wl_embed::checkpoint::{
    load_embedding, load_model, loss_history_csv, save_embedding, save_model, EmbeddingCheckpoint,
};
use wl_embed::embedding::EmbeddingKind;
use wl_embed::nn::{ModelSpec, Task};
use wl_embed::smiles::{parse_smiles, AtomAlphabet};
use wl_embed::train::{train, TrainConfig};
use wl_embed::{DatasetRecord, Result};

pub fn run_example() -> Result<()> {
    let alphabet = AtomAlphabet::default();
    let records = [
        ("CCO", 1.0),
        ("CCCO", 1.0),
        ("CCN", 0.0),
        ("c1ccccc1", 0.0),
        ("OCCO", 2.0),
    ]
    .iter()
    .map(|&(s, t)| {
        Ok(DatasetRecord {
            graph: parse_smiles(s, &alphabet)?,
            target: t,
        })
    })
    .collect::<Result<Vec<_>>>()?;
    let config = TrainConfig {
        epochs: 10,
        batch_size: 2,
        ..TrainConfig::default()
    };
    let outcome = train(
        ModelSpec::new(EmbeddingKind::Gwl, 1, 4, Task::Regression),
        &records,
        &config,
    )?;
    print!("{}", loss_history_csv(&outcome.loss_history));

    let dir = tempfile::tempdir()?;
    let model_path = dir.path().join("model.ckpt");
    let emb_path = dir.path().join("model.ckpt.emb");
    save_model(&model_path, &outcome.model)?;
    let embedding = EmbeddingCheckpoint::from_model(&outcome.model);
    save_embedding(&emb_path, &embedding)?;

    let reloaded = load_model(&model_path)?;
    assert_eq!(reloaded, outcome.model);
    assert_eq!(load_embedding(&emb_path)?, embedding);
    println!(
        "model checkpoint {} bytes, embedding checkpoint {} bytes",
        std::fs::metadata(&model_path)?.len(),
        std::fs::metadata(&emb_path)?.len()
    );
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
