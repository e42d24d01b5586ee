//! Label-blind, non-induced subgraph containment by backtracking.

use crate::graph::LabeledMultigraph;

struct Search<'a> {
    host: &'a [Vec<usize>],
    pattern: &'a [Vec<usize>],
    order: Vec<usize>,
    mapping: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl Search<'_> {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let p = self.order[depth];
        let need = self.pattern[p].len();
        // pattern neighbors that are already placed must map to host neighbors
        let anchor = self.pattern[p].iter().find_map(|&q| self.mapping[q]);
        let candidates: Vec<usize> = match anchor {
            Some(h) => self.host[h].clone(),
            None => (0..self.host.len()).collect(),
        };
        for h in candidates {
            if self.used[h] || self.host[h].len() < need {
                continue;
            }
            let consistent = self.pattern[p].iter().all(|&q| match self.mapping[q] {
                Some(hq) => self.host[h].binary_search(&hq).is_ok(),
                None => true,
            });
            if !consistent {
                continue;
            }
            self.mapping[p] = Some(h);
            self.used[h] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.mapping[p] = None;
            self.used[h] = false;
        }
        false
    }
}

fn adjacency(graph: &LabeledMultigraph) -> Vec<Vec<usize>> {
    (0..graph.num_nodes())
        .map(|i| graph.neighbors(i).expect("in range").to_vec())
        .collect()
}

/// Pattern nodes in connected-first order: highest degree first, then
/// repeatedly the unplaced node with most placed neighbors.
fn search_order(pattern: &[Vec<usize>]) -> Vec<usize> {
    let n = pattern.len();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let next = (0..n)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let links = pattern[v].iter().filter(|&&u| placed[u]).count();
                (links, pattern[v].len(), std::cmp::Reverse(v))
            })
            .expect("unplaced node exists");
        placed[next] = true;
        order.push(next);
    }
    order
}

/// Whether `pattern` maps injectively into `graph` with every pattern edge
/// landing on a graph edge. Labels and extra graph edges are ignored.
pub fn contains_subgraph(graph: &LabeledMultigraph, pattern: &LabeledMultigraph) -> bool {
    if pattern.num_nodes() > graph.num_nodes() {
        return false;
    }
    if pattern.simple_edges().len() > graph.simple_edges().len() {
        return false;
    }
    let host = adjacency(graph);
    let pat = adjacency(pattern);
    let mut search = Search {
        host: &host,
        pattern: &pat,
        order: search_order(&pat),
        mapping: vec![None; pat.len()],
        used: vec![false; host.len()],
    };
    search.extend(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unlabeled(n: usize, edges: Vec<(usize, usize)>) -> LabeledMultigraph {
        LabeledMultigraph::new(n, vec![1; n], edges, 1).unwrap()
    }

    fn complete(n: usize) -> LabeledMultigraph {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        unlabeled(n, edges)
    }

    fn cycle(n: usize) -> LabeledMultigraph {
        unlabeled(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
    }

    /// Exhaustive oracle over all injective maps.
    fn brute_force(graph: &LabeledMultigraph, pattern: &LabeledMultigraph) -> bool {
        fn go(g: &LabeledMultigraph, p: &LabeledMultigraph, map: &mut Vec<usize>) -> bool {
            if map.len() == p.num_nodes() {
                return p
                    .simple_edges()
                    .iter()
                    .all(|&(a, b)| g.neighbors(map[a]).unwrap().contains(&map[b]));
            }
            for h in 0..g.num_nodes() {
                if !map.contains(&h) {
                    map.push(h);
                    if go(g, p, map) {
                        return true;
                    }
                    map.pop();
                }
            }
            false
        }
        pattern.num_nodes() <= graph.num_nodes() && go(graph, pattern, &mut Vec::new())
    }

    #[test]
    fn examples() {
        let tri = cycle(3);
        let path3 = unlabeled(3, vec![(0, 1), (1, 2)]);
        assert!(contains_subgraph(&tri, &path3));
        assert!(!contains_subgraph(&tri, &cycle(4)));
        assert!(brute_force(&complete(5), &cycle(5)));
        assert!(contains_subgraph(&complete(5), &cycle(5)));
        assert!(!contains_subgraph(&cycle(5), &tri));
    }

    #[test]
    fn labels_are_ignored() {
        let host =
            LabeledMultigraph::new(3, vec![1, 2, 3], vec![(0, 1), (1, 2), (2, 0)], 3).unwrap();
        assert!(contains_subgraph(&host, &cycle(3)));
    }

    #[test]
    fn agrees_with_brute_force() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let patterns = [
            cycle(4),
            complete(4),
            unlabeled(4, vec![(0, 1), (0, 2), (0, 3)]),
            cycle(5),
        ];
        for _ in 0..200 {
            let n = rng.random_range(4..8);
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(0.45) {
                        edges.push((i, j));
                    }
                }
            }
            let g = unlabeled(n, edges);
            for p in &patterns {
                assert_eq!(contains_subgraph(&g, p), brute_force(&g, p));
            }
        }
    }
}
