//! Labeled undirected multigraphs.
//!
//! Node labels are dense 1-based integers drawn from an alphabet of size
//! `K`. Parallel edges are stored as given but collapse to a single
//! neighbor in every neighborhood query.

use std::collections::VecDeque;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node label, 1-based.
pub type Label = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMultigraph {
    labels: Vec<Label>,
    edges: Vec<(usize, usize)>,
    bond_orders: Vec<u8>,
    num_labels: u32,
    adjacency: Vec<Vec<usize>>,
}

impl LabeledMultigraph {
    /// Validates and builds a graph. Every edge gets bond order 1.
    pub fn new(
        num_nodes: usize,
        labels: Vec<Label>,
        edges: Vec<(usize, usize)>,
        num_labels: u32,
    ) -> Result<Self> {
        let orders = vec![1; edges.len()];
        Self::with_bond_orders(num_nodes, labels, edges, orders, num_labels)
    }

    pub fn with_bond_orders(
        num_nodes: usize,
        labels: Vec<Label>,
        edges: Vec<(usize, usize)>,
        bond_orders: Vec<u8>,
        num_labels: u32,
    ) -> Result<Self> {
        if labels.len() != num_nodes {
            return Err(Error::LabelCountMismatch {
                expected: num_nodes,
                actual: labels.len(),
            });
        }
        if bond_orders.len() != edges.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} bond orders for {} edges",
                bond_orders.len(),
                edges.len()
            )));
        }
        for &label in &labels {
            if label == 0 || label > num_labels {
                return Err(Error::LabelOutOfAlphabet {
                    label,
                    alphabet: num_labels,
                });
            }
        }
        let mut adjacency = vec![Vec::new(); num_nodes];
        for &(u, v) in &edges {
            for index in [u, v] {
                if index >= num_nodes {
                    return Err(Error::IndexOutOfRange { index, num_nodes });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            labels,
            edges,
            bond_orders,
            num_labels,
            adjacency,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.labels.len()
    }

    /// Alphabet size `K`.
    pub fn num_labels(&self) -> u32 {
        self.num_labels
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Result<Label> {
        self.check(i)?;
        Ok(self.labels[i])
    }

    /// Edge multiset in insertion order, parallel edges included.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn bond_orders(&self) -> &[u8] {
        &self.bond_orders
    }

    /// Collapsed neighbor set of node `i`, ascending.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.check(i)?;
        Ok(&self.adjacency[i])
    }

    pub fn degree(&self, i: usize) -> Result<usize> {
        Ok(self.neighbors(i)?.len())
    }

    /// Sorted labels of the collapsed neighbors of `i`.
    pub fn neighbor_label_multiset(&self, i: usize) -> Result<Vec<Label>> {
        let mut multiset: Vec<Label> = self.neighbors(i)?.iter().map(|&j| self.labels[j]).collect();
        multiset.sort_unstable();
        Ok(multiset)
    }

    /// Deduplicated undirected edges as `(u, v)` with `u < v`, sorted.
    pub fn simple_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest number of same-labeled neighbors any node has.
    pub fn label_specific_max_degree(&self) -> usize {
        let mut best = 0;
        let mut counts = vec![0usize; self.num_labels as usize + 1];
        for list in &self.adjacency {
            counts.iter_mut().for_each(|c| *c = 0);
            for &j in list {
                counts[self.labels[j] as usize] += 1;
            }
            best = best.max(counts.iter().copied().max().unwrap_or(0));
        }
        best
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_nodes();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == n
    }

    /// Copy with new labels and the same topology.
    pub fn relabeled(&self, labels: Vec<Label>, num_labels: u32) -> Result<Self> {
        Self::with_bond_orders(
            self.num_nodes(),
            labels,
            self.edges.clone(),
            self.bond_orders.clone(),
            num_labels,
        )
    }

    /// Renumbers nodes so that old node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.num_nodes();
        if perm.len() != n {
            return Err(Error::LabelCountMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        let mut labels = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            if new >= n {
                return Err(Error::IndexOutOfRange {
                    index: new,
                    num_nodes: n,
                });
            }
            labels[new] = self.labels[old];
        }
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Self::with_bond_orders(n, labels, edges, self.bond_orders.clone(), self.num_labels)
    }

    /// Disjoint union; nodes of `other` are shifted by `self.num_nodes()`.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        let shift = self.num_nodes();
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
        let mut orders = self.bond_orders.clone();
        orders.extend_from_slice(&other.bond_orders);
        Self::with_bond_orders(
            shift + other.num_nodes(),
            labels,
            edges,
            orders,
            self.num_labels.max(other.num_labels),
        )
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.num_nodes() {
            return Err(Error::IndexOutOfRange {
                index: i,
                num_nodes: self.num_nodes(),
            });
        }
        Ok(())
    }
}

/// A graph with its regression value or 0/1 class target.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub graph: LabeledMultigraph,
    pub target: f64,
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    labels: Vec<Label>,
    edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<f64>,
}

/// Serializes one record as a JSONL line (no trailing newline).
pub fn record_to_json(graph: &LabeledMultigraph, target: Option<f64>) -> String {
    let json = JsonGraph {
        labels: graph.labels.clone(),
        edges: graph.edges.iter().map(|&(u, v)| [u, v]).collect(),
        target,
    };
    serde_json::to_string(&json).expect("graph serialization cannot fail")
}

pub fn write_jsonl(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for record in records {
        writeln!(
            out,
            "{}",
            record_to_json(&record.graph, Some(record.target))
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Reads JSONL records. The alphabet size is `num_labels` when given,
/// otherwise the largest label seen in the file. Missing targets read as 0.
pub fn read_jsonl(path: &Path, num_labels: Option<u32>) -> Result<Vec<DatasetRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut raw = Vec::new();
    for (line_no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: JsonGraph = serde_json::from_str(&line).map_err(|e| Error::Parse {
            line: line_no + 1,
            message: e.to_string(),
        })?;
        raw.push(parsed);
    }
    let alphabet = num_labels.unwrap_or_else(|| {
        raw.iter()
            .flat_map(|g| g.labels.iter().copied())
            .max()
            .unwrap_or(1)
    });
    raw.into_iter()
        .map(|g| {
            let n = g.labels.len();
            let edges = g.edges.iter().map(|e| (e[0], e[1])).collect();
            Ok(DatasetRecord {
                graph: LabeledMultigraph::new(n, g.labels, edges, alphabet)?,
                target: g.target.unwrap_or(0.0),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> LabeledMultigraph {
        LabeledMultigraph::new(3, vec![1, 1, 2], vec![(0, 1), (1, 2), (0, 2)], 2).unwrap()
    }

    #[test]
    fn isolated_node() {
        let g = LabeledMultigraph::new(1, vec![1], vec![], 1).unwrap();
        assert_eq!(g.degree(0).unwrap(), 0);
        assert!(g.neighbors(0).unwrap().is_empty());
    }

    #[test]
    fn triangle_degrees_and_multisets() {
        let g = triangle();
        for i in 0..3 {
            assert_eq!(g.degree(i).unwrap(), 2);
        }
        assert_eq!(g.neighbors(0).unwrap(), &[1, 2]);
        assert_eq!(g.neighbor_label_multiset(2).unwrap(), vec![1, 1]);
        assert_eq!(g.neighbor_label_multiset(0).unwrap(), vec![1, 2]);
    }

    #[test]
    fn parallel_edges_collapse() {
        let g = LabeledMultigraph::new(2, vec![1, 1], vec![(0, 1), (0, 1)], 1).unwrap();
        assert_eq!(g.edges().len(), 2);
        assert_eq!(g.neighbors(0).unwrap(), &[1]);
        assert_eq!(g.neighbor_label_multiset(0).unwrap(), vec![1]);
    }

    #[test]
    fn path_multiset() {
        // brute force: node 1 touches nodes 0 and 2 only
        let g =
            LabeledMultigraph::new(4, vec![1, 2, 2, 1], vec![(0, 1), (1, 2), (2, 3)], 2).unwrap();
        let brute: Vec<Label> = {
            let mut v: Vec<Label> = g
                .edges()
                .iter()
                .filter_map(|&(a, b)| match (a, b) {
                    (1, x) | (x, 1) => Some(g.labels()[x]),
                    _ => None,
                })
                .collect();
            v.sort();
            v
        };
        assert_eq!(brute, vec![1, 2]);
        assert_eq!(g.neighbor_label_multiset(1).unwrap(), brute);
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            LabeledMultigraph::new(2, vec![1, 1], vec![(0, 2)], 1),
            Err(Error::IndexOutOfRange { index: 2, .. })
        ));
        assert!(matches!(
            LabeledMultigraph::new(2, vec![1, 1], vec![(1, 1)], 1),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            LabeledMultigraph::new(2, vec![1, 3], vec![], 2),
            Err(Error::LabelOutOfAlphabet { label: 3, .. })
        ));
        assert!(matches!(
            LabeledMultigraph::new(2, vec![0, 1], vec![], 2),
            Err(Error::LabelOutOfAlphabet { label: 0, .. })
        ));
        assert!(matches!(
            triangle().neighbors(3),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn permutation_moves_labels() {
        let g = triangle();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[1, 2, 1]);
        assert_eq!(p.neighbor_label_multiset(1).unwrap(), vec![1, 1]);
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.jsonl");
        let records = vec![
            DatasetRecord {
                graph: triangle(),
                target: 1.0,
            },
            DatasetRecord {
                graph: LabeledMultigraph::new(1, vec![2], vec![], 2).unwrap(),
                target: 0.0,
            },
        ];
        write_jsonl(&path, &records).unwrap();
        assert_eq!(read_jsonl(&path, None).unwrap(), records);
        let line = record_to_json(&records[0].graph, Some(1.0));
        assert_eq!(
            line,
            r#"{"labels":[1,1,2],"edges":[[0,1],[1,2],[0,2]],"target":1.0}"#
        );
    }
}
