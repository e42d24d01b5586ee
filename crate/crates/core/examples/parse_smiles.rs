// Parses a few molecules and prints their graph statistics.

use wl_embed::smiles::{parse_smiles, AtomAlphabet};
use wl_embed::Result;

pub fn run_example() -> Result<()> {
    let alphabet = AtomAlphabet::default();
    for smiles in ["CCO", "c1ccccc1", "CC(=O)Oc1ccccc1C(=O)O", "C1CC1Cl"] {
        let graph = parse_smiles(smiles, &alphabet)?;
        let symbols: Vec<&str> = graph
            .labels()
            .iter()
            .map(|&l| alphabet.symbol(l).unwrap_or("?"))
            .collect();
        println!(
            "{smiles:<24} nodes={:<3} bonds={:<3} max_degree={} atoms={}",
            graph.num_nodes(),
            graph.simple_edges().len(),
            graph.max_degree(),
            symbols.join("")
        );
    }
    match parse_smiles("C1CC", &alphabet) {
        Err(e) => println!("C1CC rejected: {e}"),
        Ok(_) => unreachable!("an unclosed ring must be rejected"),
    }
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
