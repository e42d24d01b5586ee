//! Synthetic label-counting and subgraph-detection datasets.
//!
//! Positives start from the 4-regular graph on five nodes (K₅), lose each
//! edge with probability 0.25 and get one target pattern attached through
//! random cross edges. Negatives are thinned random 4-regular graphs on ten
//! nodes. Node labels are drawn uniformly after the topology is fixed.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DatasetRecord, LabeledMultigraph};
use crate::subgraph::contains_subgraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SyntheticTask {
    /// Regression target: number of nodes labeled 1.
    Counting,
    /// Binary target: 1 for graphs holding a target pattern.
    Detection,
}

impl SyntheticTask {
    pub fn name(self) -> &'static str {
        match self {
            Self::Counting => "counting",
            Self::Detection => "detection",
        }
    }
}

impl fmt::Display for SyntheticTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SyntheticTask {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "counting" => Ok(Self::Counting),
            "detection" => Ok(Self::Detection),
            other => Err(format!("unknown task `{other}` (counting|detection)")),
        }
    }
}

fn skeleton(n: usize, edges: &[(usize, usize)]) -> LabeledMultigraph {
    LabeledMultigraph::new(n, vec![1; n], edges.to_vec(), 1).expect("static pattern is valid")
}

/// The three 5-node target patterns.
pub fn target_patterns() -> Vec<LabeledMultigraph> {
    vec![
        // wheel: hub 0 over the 4-cycle 1-2-3-4
        skeleton(
            5,
            &[
                (0, 1),
                (0, 2),
                (0, 3),
                (0, 4),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 1),
            ],
        ),
        // house: 5-cycle with the chord 0-2
        skeleton(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]),
        // K5 without the disjoint edges 0-1 and 2-3
        skeleton(
            5,
            &[
                (0, 2),
                (0, 3),
                (0, 4),
                (1, 2),
                (1, 3),
                (1, 4),
                (2, 4),
                (3, 4),
            ],
        ),
    ]
}

pub const PATTERN_NAMES: [&str; 3] = ["wheel", "house", "k5-minus-2k2"];

#[derive(Debug, Clone)]
pub struct GeneratorSpec {
    pub task: SyntheticTask,
    pub positives: usize,
    pub negatives: usize,
    pub num_datasets: usize,
    pub alphabet: u32,
    pub drop_probability: f64,
    pub attach_probability: f64,
    pub max_degree: usize,
    pub positive_base_nodes: usize,
    pub negative_nodes: usize,
    pub regular_degree: usize,
    pub patterns: Vec<LabeledMultigraph>,
    /// Rejection attempts allowed per accepted graph.
    pub max_attempts: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(task: SyntheticTask, seed: u64) -> Self {
        Self {
            task,
            positives: 300,
            negatives: 300,
            num_datasets: 3,
            alphabet: 5,
            drop_probability: 0.25,
            attach_probability: 0.1,
            max_degree: 4,
            positive_base_nodes: 5,
            negative_nodes: 10,
            regular_degree: 4,
            patterns: target_patterns(),
            max_attempts: 10_000,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let probs = [self.drop_probability, self.attach_probability];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::DimensionMismatch(
                "probabilities must lie in [0, 1]".into(),
            ));
        }
        if self.alphabet == 0 {
            return Err(Error::LabelOutOfAlphabet {
                label: 1,
                alphabet: 0,
            });
        }
        Ok(())
    }

    /// Seed of dataset `index` (0-based) derived from the base seed.
    pub fn dataset_seed(&self, index: usize) -> u64 {
        split_seed(self.seed, index as u64)
    }
}

/// SplitMix64 step; used to derive independent seeds.
pub fn split_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Simple `degree`-regular graph by the pairing model, rejecting pairings
/// with self-loops or repeated pairs.
pub fn random_regular_graph<R: Rng>(
    n: usize,
    degree: usize,
    rng: &mut R,
) -> Result<LabeledMultigraph> {
    if !(n * degree).is_multiple_of(2) || (degree >= n && !(n == 0 || degree == 0)) {
        return Err(Error::InfeasibleDegreeSequence { nodes: n, degree });
    }
    const ATTEMPTS: usize = 100_000;
    let mut points: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    'attempt: for _ in 0..ATTEMPTS {
        // Fisher-Yates, then pair consecutive points
        for i in (1..points.len()).rev() {
            let j = rng.random_range(0..=i);
            points.swap(i, j);
        }
        let mut edges = Vec::with_capacity(points.len() / 2);
        let mut seen = std::collections::HashSet::new();
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        return LabeledMultigraph::new(n, vec![1; n], edges, 1);
    }
    Err(Error::GenerationBudgetExceeded(ATTEMPTS))
}

/// Keeps each edge independently with probability `1 - p`.
pub fn thin_edges<R: Rng>(graph: &LabeledMultigraph, p: f64, rng: &mut R) -> LabeledMultigraph {
    let mut edges = Vec::new();
    let mut orders = Vec::new();
    for (&e, &o) in graph.edges().iter().zip(graph.bond_orders()) {
        if !rng.random_bool(1.0 - p) {
            continue;
        }
        edges.push(e);
        orders.push(o);
    }
    LabeledMultigraph::with_bond_orders(
        graph.num_nodes(),
        graph.labels().to_vec(),
        edges,
        orders,
        graph.num_labels(),
    )
    .expect("subset of a valid edge set")
}

/// Disjoint union of `base` and `pattern` plus each cross pair joined
/// independently with probability `p`.
pub fn attach_subgraph<R: Rng>(
    base: &LabeledMultigraph,
    pattern: &LabeledMultigraph,
    p: f64,
    rng: &mut R,
) -> LabeledMultigraph {
    let union = base.disjoint_union(pattern).expect("both graphs are valid");
    let shift = base.num_nodes();
    let mut edges = union.edges().to_vec();
    for u in 0..base.num_nodes() {
        for v in 0..pattern.num_nodes() {
            if rng.random_bool(p) {
                edges.push((u, v + shift));
            }
        }
    }
    LabeledMultigraph::new(
        union.num_nodes(),
        union.labels().to_vec(),
        edges,
        union.num_labels(),
    )
    .expect("cross edges join valid nodes")
}

/// Indices of the patterns contained in `graph`.
pub fn contained_patterns(graph: &LabeledMultigraph, patterns: &[LabeledMultigraph]) -> Vec<usize> {
    patterns
        .iter()
        .enumerate()
        .filter(|(_, p)| contains_subgraph(graph, p))
        .map(|(k, _)| k)
        .collect()
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub task: SyntheticTask,
    pub records: Vec<DatasetRecord>,
    /// Which graphs were generated as positives (hold a target pattern).
    pub positive: Vec<bool>,
}

fn positive_graph<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> Result<LabeledMultigraph> {
    for _ in 0..spec.max_attempts {
        let base = random_regular_graph(spec.positive_base_nodes, spec.regular_degree, rng)?;
        let base = thin_edges(&base, spec.drop_probability, rng);
        let pattern = spec.patterns.choose(rng).expect("at least one pattern");
        let g = attach_subgraph(&base, pattern, spec.attach_probability, rng);
        if g.is_connected()
            && g.max_degree() <= spec.max_degree
            && contained_patterns(&g, &spec.patterns).len() == 1
        {
            return Ok(g);
        }
    }
    Err(Error::GenerationBudgetExceeded(spec.max_attempts))
}

fn negative_graph<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> Result<LabeledMultigraph> {
    for _ in 0..spec.max_attempts {
        let g = random_regular_graph(spec.negative_nodes, spec.regular_degree, rng)?;
        let g = thin_edges(&g, spec.drop_probability, rng);
        if g.is_connected()
            && g.max_degree() <= spec.max_degree
            && contained_patterns(&g, &spec.patterns).is_empty()
        {
            return Ok(g);
        }
    }
    Err(Error::GenerationBudgetExceeded(spec.max_attempts))
}

/// Generates one dataset: positives first, then negatives. Each graph has
/// its own random stream, so the result does not depend on thread count.
pub fn generate_dataset<R: Rng>(spec: &GeneratorSpec, rng: &mut R) -> Result<SyntheticDataset> {
    spec.validate()?;
    let base_seed: u64 = rng.random();
    let total = spec.positives + spec.negatives;
    let records = (0..total)
        .into_par_iter()
        .map(|index| {
            let mut graph_rng = ChaCha8Rng::seed_from_u64(base_seed);
            graph_rng.set_stream(index as u64);
            let topology = if index < spec.positives {
                positive_graph(spec, &mut graph_rng)?
            } else {
                negative_graph(spec, &mut graph_rng)?
            };
            let labels: Vec<u32> = (0..topology.num_nodes())
                .map(|_| graph_rng.random_range(1..=spec.alphabet))
                .collect();
            let graph = topology.relabeled(labels, spec.alphabet)?;
            let target = match spec.task {
                SyntheticTask::Detection => f64::from(u8::from(index < spec.positives)),
                SyntheticTask::Counting => {
                    graph.labels().iter().filter(|&&l| l == 1).count() as f64
                }
            };
            Ok(DatasetRecord { graph, target })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticDataset {
        task: spec.task,
        records,
        positive: (0..total).map(|i| i < spec.positives).collect(),
    })
}

/// Dataset `index` of `spec`, seeded from [`GeneratorSpec::dataset_seed`].
pub fn generate_indexed(spec: &GeneratorSpec, index: usize) -> Result<SyntheticDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.dataset_seed(index));
    generate_dataset(spec, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn k5_is_the_only_4_regular_graph_on_5_nodes() {
        let g = random_regular_graph(5, 4, &mut rng(0)).unwrap();
        assert_eq!(g.simple_edges().len(), 10);
        assert_eq!(g.edges().len(), 10);
    }

    #[test]
    fn ten_node_regular() {
        for seed in 0..20 {
            let g = random_regular_graph(10, 4, &mut rng(seed)).unwrap();
            assert!((0..10).all(|i| g.degree(i).unwrap() == 4));
            assert_eq!(g.edges().len(), 20);
        }
    }

    #[test]
    fn infeasible_sequences() {
        assert!(matches!(
            random_regular_graph(5, 3, &mut rng(0)),
            Err(Error::InfeasibleDegreeSequence { .. })
        ));
        assert!(matches!(
            random_regular_graph(4, 4, &mut rng(0)),
            Err(Error::InfeasibleDegreeSequence { .. })
        ));
    }

    #[test]
    fn thinning_extremes() {
        let k5 = random_regular_graph(5, 4, &mut rng(1)).unwrap();
        assert_eq!(thin_edges(&k5, 0.0, &mut rng(2)), k5);
        assert!(thin_edges(&k5, 1.0, &mut rng(2)).edges().is_empty());
    }

    #[test]
    fn thinning_frequency() {
        // Monte-Carlo oracle: kept fraction ≈ 0.75
        let k5 = random_regular_graph(5, 4, &mut rng(1)).unwrap();
        let mut r = rng(3);
        let kept: usize = (0..10_000)
            .map(|_| thin_edges(&k5, 0.25, &mut r).edges().len())
            .sum();
        let fraction = kept as f64 / (10_000.0 * 10.0);
        assert!((fraction - 0.75).abs() < 0.02, "{fraction}");
    }

    #[test]
    fn attachment_extremes() {
        let base = random_regular_graph(5, 4, &mut rng(4)).unwrap();
        let pattern = &target_patterns()[0];
        let apart = attach_subgraph(&base, pattern, 0.0, &mut rng(5));
        assert_eq!(apart.num_nodes(), 10);
        assert!(!apart.is_connected());
        let joined = attach_subgraph(&base, pattern, 1.0, &mut rng(5));
        assert_eq!(joined.edges().len(), 10 + 8 + 25);
        for u in 0..5 {
            for v in 5..10 {
                assert!(joined.neighbors(u).unwrap().contains(&v));
            }
        }
    }

    #[test]
    fn pattern_containment() {
        let p = target_patterns();
        for pa in &p {
            assert!(pa.is_connected());
            assert!(pa.max_degree() <= 4);
        }
        // the wheel and K5 minus two disjoint edges are isomorphic, and both contain the house
        assert!(contains_subgraph(&p[0], &p[2]) && contains_subgraph(&p[2], &p[0]));
        assert!(contains_subgraph(&p[0], &p[1]));
        assert!(!contains_subgraph(&p[1], &p[0]));
    }

    #[test]
    fn small_dataset_is_valid_and_reproducible() {
        let mut spec = GeneratorSpec::new(SyntheticTask::Counting, 5);
        spec.positives = 20;
        spec.negatives = 20;
        let a = generate_indexed(&spec, 0).unwrap();
        let b = generate_indexed(&spec, 0).unwrap();
        assert_eq!(a.records, b.records);
        assert_ne!(a.records, generate_indexed(&spec, 1).unwrap().records);
        for (r, &pos) in a.records.iter().zip(&a.positive) {
            assert!(r.graph.is_connected());
            assert!(r.graph.max_degree() <= 4);
            let n_ones = r.graph.labels().iter().filter(|&&l| l == 1).count() as f64;
            assert_eq!(r.target, n_ones);
            assert_eq!(
                contained_patterns(&r.graph, &spec.patterns).len(),
                usize::from(pos)
            );
        }
    }

    #[test]
    fn split_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..100).map(|i| split_seed(42, i)).collect();
        assert_eq!(s.len(), 100);
    }
}
