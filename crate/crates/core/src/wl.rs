//! One-dimensional Weisfeiler-Lehman label expansion.
//!
//! Relabeling goes through a [`LabelRegistry`], an insertion-ordered
//! injective map from [`ExtendedLabel`] to dense indices `1..=J`. Index 0
//! is never handed out and is used by embedding tables as the UNKNOWN row.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::LabeledMultigraph;

/// Reserved index for labels that were never interned.
pub const UNKNOWN: u32 = 0;

/// A `(center, neighborhood)` pair. `None` stands for the empty-set
/// argument: `(ℓ, None)` is an atom-only key, `(None, M)` a
/// neighborhood-only key. An isolated node has `Some(vec![])`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExtendedLabel {
    center: Option<u32>,
    neighborhood: Option<Vec<u32>>,
}

impl ExtendedLabel {
    pub fn new(center: Option<u32>, neighborhood: Option<Vec<u32>>) -> Self {
        let neighborhood = neighborhood.map(|mut m| {
            m.sort_unstable();
            m
        });
        Self {
            center,
            neighborhood,
        }
    }

    pub fn full(center: u32, neighborhood: Vec<u32>) -> Self {
        Self::new(Some(center), Some(neighborhood))
    }

    pub fn atom(center: u32) -> Self {
        Self::new(Some(center), None)
    }

    pub fn neighborhood_only(neighborhood: Vec<u32>) -> Self {
        Self::new(None, Some(neighborhood))
    }

    pub fn center(&self) -> Option<u32> {
        self.center
    }

    pub fn neighborhood(&self) -> Option<&[u32]> {
        self.neighborhood.as_deref()
    }
}

impl fmt::Display for ExtendedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.center {
            Some(c) => write!(f, "{c}")?,
            None => f.write_str("∅")?,
        }
        f.write_str("\t")?;
        match &self.neighborhood {
            Some(m) => {
                f.write_str("{")?;
                for (k, x) in m.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("}")
            }
            None => f.write_str("∅"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelRegistry {
    /// Entry `k` has index `k + 1`.
    table: IndexSet<ExtendedLabel>,
}

impl LabelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the existing index or appends a new one (`J + 1`).
    pub fn intern(&mut self, label: ExtendedLabel) -> u32 {
        let (slot, _) = self.table.insert_full(label);
        slot as u32 + 1
    }

    pub fn get(&self, label: &ExtendedLabel) -> Option<u32> {
        self.table.get_index_of(label).map(|slot| slot as u32 + 1)
    }

    /// Index lookup with the UNKNOWN fallback.
    pub fn index_or_unknown(&self, label: &ExtendedLabel) -> u32 {
        self.get(label).unwrap_or(UNKNOWN)
    }

    pub fn label_of(&self, index: u32) -> Option<&ExtendedLabel> {
        let slot = index.checked_sub(1)? as usize;
        self.table.get_index(slot)
    }

    /// Number of interned labels `J`.
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &ExtendedLabel)> {
        self.table.iter().zip(1..).map(|(k, v)| (v, k))
    }

    /// `index<TAB>center<TAB>multiset` lines.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (index, label) in self.iter() {
            out.push_str(&format!("{index}\t{label}\n"));
        }
        out
    }
}

/// `(ℓ_i, M_i)` with raw node labels.
pub fn extended_label(graph: &LabeledMultigraph, i: usize) -> Result<ExtendedLabel> {
    Ok(ExtendedLabel::full(
        graph.label(i)?,
        graph.neighbor_label_multiset(i)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementResult {
    /// `colors[τ][i]` is node `i`'s index after `τ` expansions.
    pub colors: Vec<Vec<u32>>,
    /// Registry size after each iteration.
    pub label_counts: Vec<usize>,
}

impl RefinementResult {
    pub fn iterations(&self) -> usize {
        self.colors.len() - 1
    }

    /// Sorted color multiset of iteration `t`, for isomorphism-invariant comparison.
    pub fn histogram(&self, t: usize) -> Vec<u32> {
        let mut h = self.colors[t].clone();
        h.sort_unstable();
        h
    }
}

fn neighbor_colors(graph: &LabeledMultigraph, colors: &[u32], i: usize) -> Vec<u32> {
    let mut m: Vec<u32> = graph
        .neighbors(i)
        .expect("node index in range")
        .iter()
        .map(|&j| colors[j])
        .collect();
    m.sort_unstable();
    m
}

/// Runs `iterations` rounds of relabeling against a shared registry.
///
/// Iteration 0 interns `(ℓ_i, ∅)`; iteration `τ+1` interns
/// `(c_τ(i), {c_τ(j) | j ∈ N_i})`.
pub fn wl_refine(
    graph: &LabeledMultigraph,
    iterations: usize,
    registry: &mut LabelRegistry,
) -> RefinementResult {
    let n = graph.num_nodes();
    let base: Vec<u32> = graph
        .labels()
        .iter()
        .map(|&l| registry.intern(ExtendedLabel::atom(l)))
        .collect();
    let mut colors = vec![base];
    let mut label_counts = vec![registry.len()];
    for _ in 0..iterations {
        let prev = colors.last().expect("at least one iteration");
        let next: Vec<u32> = (0..n)
            .map(|i| {
                let key = ExtendedLabel::full(prev[i], neighbor_colors(graph, prev, i));
                registry.intern(key)
            })
            .collect();
        colors.push(next);
        label_counts.push(registry.len());
    }
    RefinementResult {
        colors,
        label_counts,
    }
}

/// Refinement against a frozen registry; any color not interned is `None`
/// and poisons the colors derived from it.
pub fn wl_refine_frozen(
    graph: &LabeledMultigraph,
    iterations: usize,
    registry: &LabelRegistry,
) -> Vec<Vec<Option<u32>>> {
    let n = graph.num_nodes();
    let mut colors: Vec<Vec<Option<u32>>> = vec![graph
        .labels()
        .iter()
        .map(|&l| registry.get(&ExtendedLabel::atom(l)))
        .collect()];
    for _ in 0..iterations {
        let prev = colors.last().expect("at least one iteration");
        let next = (0..n)
            .map(|i| {
                let center = prev[i]?;
                let mut m = Vec::new();
                for &j in graph.neighbors(i).expect("node index in range") {
                    m.push(prev[j]?);
                }
                registry.get(&ExtendedLabel::full(center, m))
            })
            .collect();
        colors.push(next);
    }
    colors
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsomorphismVerdict {
    NotIsomorphic,
    Inconclusive,
}

/// 1-WL test: refines both graphs against one registry and compares color
/// histograms after every iteration. Stops early once the partition of
/// both graphs stops splitting.
pub fn wl_isomorphism_test(
    g1: &LabeledMultigraph,
    g2: &LabeledMultigraph,
    max_iters: usize,
) -> IsomorphismVerdict {
    if g1.num_nodes() != g2.num_nodes() {
        return IsomorphismVerdict::NotIsomorphic;
    }
    let mut registry = LabelRegistry::new();
    let mut c1: Vec<u32> = g1
        .labels()
        .iter()
        .map(|&l| registry.intern(ExtendedLabel::atom(l)))
        .collect();
    let mut c2: Vec<u32> = g2
        .labels()
        .iter()
        .map(|&l| registry.intern(ExtendedLabel::atom(l)))
        .collect();
    let histogram = |c: &[u32]| {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for &x in c {
            *counts.entry(x).or_default() += 1;
        }
        counts
    };
    let distinct = |c: &[u32]| histogram(c).len();
    if histogram(&c1) != histogram(&c2) {
        return IsomorphismVerdict::NotIsomorphic;
    }
    for _ in 0..max_iters {
        let step = |g: &LabeledMultigraph, c: &[u32], registry: &mut LabelRegistry| -> Vec<u32> {
            (0..g.num_nodes())
                .map(|i| registry.intern(ExtendedLabel::full(c[i], neighbor_colors(g, c, i))))
                .collect()
        };
        let n1 = step(g1, &c1, &mut registry);
        let n2 = step(g2, &c2, &mut registry);
        if histogram(&n1) != histogram(&n2) {
            return IsomorphismVerdict::NotIsomorphic;
        }
        let stable = distinct(&n1) == distinct(&c1) && distinct(&n2) == distinct(&c2);
        c1 = n1;
        c2 = n2;
        if stable {
            break;
        }
    }
    IsomorphismVerdict::Inconclusive
}

/// Distinct raw extended labels `(ℓ, M)` over a set of graphs, first-seen order.
pub fn distinct_extended_labels<'a, I>(graphs: I) -> LabelRegistry
where
    I: IntoIterator<Item = &'a LabeledMultigraph>,
{
    let mut registry = LabelRegistry::new();
    for g in graphs {
        for i in 0..g.num_nodes() {
            registry.intern(extended_label(g, i).expect("node index in range"));
        }
    }
    registry
}

/// Iterated label counts `J_T` for `T = 0..=iterations` over a graph set,
/// counting only labels of the given depth.
pub fn expansion_counts(graphs: &[LabeledMultigraph], iterations: usize) -> Vec<usize> {
    let mut registry = LabelRegistry::new();
    let results: Vec<RefinementResult> = graphs
        .iter()
        .map(|g| wl_refine(g, iterations, &mut registry))
        .collect();
    (0..=iterations)
        .map(|t| {
            let mut seen: Vec<u32> = results
                .iter()
                .flat_map(|r| r.colors[t].iter().copied())
                .collect();
            seen.sort_unstable();
            seen.dedup();
            seen.len()
        })
        .collect()
}
