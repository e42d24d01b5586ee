// A miniature layer sweep on the detection task.

use wl_embed::embedding::EmbeddingKind;
use wl_embed::experiment::{write_figure3, ExperimentConfig};
use wl_embed::synthetic::SyntheticTask;
use wl_embed::Result;

pub fn run_example() -> Result<()> {
    let config = ExperimentConfig {
        embeddings: vec![EmbeddingKind::Atomic, EmbeddingKind::Gwl],
        layers: vec![1, 2],
        datasets: 1,
        runs_per_dataset: 2,
        epochs: 5,
        dim: 8,
        ..ExperimentConfig::new(SyntheticTask::Detection, 5)
    };
    let cells = write_figure3(&config, std::io::stdout().lock())?;
    assert_eq!(cells.len(), 4);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
