// Builds an untrained model for each embedding variant and compares
// vocabulary sizes and outputs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wl_embed::embedding::EmbeddingKind;
use wl_embed::nn::{Model, ModelSpec, Task};
use wl_embed::smiles::{parse_smiles, AtomAlphabet};
use wl_embed::Result;

pub fn run_example() -> Result<()> {
    let alphabet = AtomAlphabet::default();
    let graphs = ["CCO", "CCN", "c1ccccc1O", "CC(=O)N"]
        .iter()
        .map(|s| parse_smiles(s, &alphabet))
        .collect::<Result<Vec<_>>>()?;
    for kind in EmbeddingKind::ALL {
        let spec = ModelSpec::new(kind, 2, 8, Task::Regression);
        let model = Model::init(spec, &graphs, &mut ChaCha8Rng::seed_from_u64(1))?;
        let outputs: Vec<String> = model
            .predict(&graphs)?
            .iter()
            .map(|p| format!("{:+.3}", p.score()))
            .collect();
        let rows = if kind.is_split() {
            format!(
                "{}+{}",
                model.featurizer.primary_rows(),
                model.featurizer.secondary_rows()
            )
        } else {
            model.featurizer.primary_rows().to_string()
        };
        println!(
            "{:<6} table rows={rows:<6} outputs=[{}]",
            kind.name(),
            outputs.join(", ")
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
