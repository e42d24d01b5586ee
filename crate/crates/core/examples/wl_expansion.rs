// WL label expansion on small molecules and the classic 1-WL blind spot.

use wl_embed::graph::LabeledMultigraph;
use wl_embed::smiles::{parse_smiles, AtomAlphabet};
use wl_embed::wl::{
    expansion_counts, wl_isomorphism_test, wl_refine, IsomorphismVerdict, LabelRegistry,
};
use wl_embed::Result;

fn cycle(n: usize, offset: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (offset + i, offset + (i + 1) % n)).collect()
}

pub fn run_example() -> Result<()> {
    let alphabet = AtomAlphabet::default();
    let graphs = ["CCO", "CC(C)O", "OCCN", "c1ccncc1"]
        .iter()
        .map(|s| parse_smiles(s, &alphabet))
        .collect::<Result<Vec<_>>>()?;

    let mut registry = LabelRegistry::new();
    let refined = wl_refine(&graphs[1], 2, &mut registry);
    println!("isopropanol colors per iteration: {:?}", refined.colors);
    print!("{}", registry.dump());
    println!(
        "J per iteration over four molecules: {:?}",
        expansion_counts(&graphs, 3)
    );

    // a hexagon and two triangles look the same to 1-WL
    let hexagon = LabeledMultigraph::new(6, vec![1; 6], cycle(6, 0), 1)?;
    let mut triangles = cycle(3, 0);
    triangles.extend(cycle(3, 3));
    let triangles = LabeledMultigraph::new(6, vec![1; 6], triangles, 1)?;
    let verdict = wl_isomorphism_test(&hexagon, &triangles, 6);
    println!("C6 vs 2xC3: {verdict:?}");
    assert_eq!(verdict, IsomorphismVerdict::Inconclusive);
    Ok(())
}

fn main() -> Result<()> {
    run_example()
}
