//! Capacity of sum readouts over WL embeddings and single ReLU layers.
//!
//! A node with label `k` whose neighbors carry label counts
//! `m = (m_1, .., m_K)` sits on the lattice `{0..M}^K`. WL embedding gives
//! every `(k, m)` its own vector, so the readout span has dimension at most
//! `K (M + 1)^K`. A single label-specific ReLU layer reaches the same
//! dimension with the base-`(M + 1)` counting construction implemented here.

use ndarray::{Array1, Array2};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{Label, LabeledMultigraph};
use crate::wl::distinct_extended_labels;

/// Largest lattice accepted by the enumeration routines.
pub const MAX_LATTICE_POINTS: u128 = 1_000_000;

/// Number of lattice points `(M + 1)^K`, guarded by [`MAX_LATTICE_POINTS`].
pub fn lattice_size(labels: usize, max_degree: usize) -> Result<usize> {
    let base = max_degree as u128 + 1;
    let mut size: u128 = 1;
    for _ in 0..labels {
        size = size.saturating_mul(base);
        if size > MAX_LATTICE_POINTS {
            return Err(Error::SizeOverflow(size));
        }
    }
    Ok(size as usize)
}

/// `K (M + 1)^K`.
pub fn capacity_bound(labels: usize, max_degree: usize) -> Result<usize> {
    Ok(labels * lattice_size(labels, max_degree)?)
}

/// Neighbor-label multiplicities of one node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticePoint {
    pub counts: Vec<usize>,
}

impl LatticePoint {
    /// Position in base-`(M + 1)` counting order, first coordinate most significant.
    pub fn rank_in(&self, max_degree: usize) -> usize {
        self.counts
            .iter()
            .fold(0, |acc, &c| acc * (max_degree + 1) + c)
    }
}

/// Every point of `{0..M}^K` in base-`(M + 1)` counting order.
pub fn enumerate_lattice(labels: usize, max_degree: usize) -> Result<Vec<LatticePoint>> {
    let size = lattice_size(labels, max_degree)?;
    let base = max_degree + 1;
    Ok((0..size)
        .map(|mut n| {
            let mut counts = vec![0; labels];
            for slot in counts.iter_mut().rev() {
                *slot = n % base;
                n /= base;
            }
            LatticePoint { counts }
        })
        .collect())
}

/// Pointwise nonlinearity of a [`LabelSpecificLayer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
        }
    }
}

/// One message-passing layer with parameters chosen by node labels:
/// `h_i = σ(U[ℓ_i] x_i + W[ℓ_i] Σ_j V[ℓ_i][ℓ_j] x_j)`.
///
/// Label `k` (1-based in graphs) uses index `k - 1` of every table.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelSpecificLayer {
    /// `K × d` atomic embeddings, one row per label.
    pub embeddings: Array2<f64>,
    /// `U_k`, each `d₁ × d`.
    pub self_weights: Vec<Array2<f64>>,
    /// `V_kl`, each `d × d`, indexed `[k][l]`.
    pub neighbor_weights: Vec<Vec<Array2<f64>>>,
    /// `W_k`, each `d₁ × d`.
    pub aggregate_weights: Vec<Array2<f64>>,
    pub activation: Activation,
}

impl LabelSpecificLayer {
    /// Parameters drawn uniformly from `[-1, 1)`.
    pub fn random<R: Rng + ?Sized>(
        labels: usize,
        dim: usize,
        width: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let mut draw = |rows: usize, cols: usize| {
            Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
        };
        let embeddings = draw(labels, dim);
        let self_weights = (0..labels).map(|_| draw(width, dim)).collect();
        let neighbor_weights = (0..labels)
            .map(|_| (0..labels).map(|_| draw(dim, dim)).collect())
            .collect();
        let aggregate_weights = (0..labels).map(|_| draw(width, dim)).collect();
        Self {
            embeddings,
            self_weights,
            neighbor_weights,
            aggregate_weights,
            activation,
        }
    }

    pub fn num_labels(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.ncols()
    }

    pub fn width(&self) -> usize {
        self.self_weights.first().map_or(0, |u| u.nrows())
    }

    fn validate(&self) -> Result<()> {
        let (k, d, d1) = (self.num_labels(), self.dim(), self.width());
        let bad = self.self_weights.len() != k
            || self.aggregate_weights.len() != k
            || self.neighbor_weights.len() != k
            || self.self_weights.iter().any(|u| u.dim() != (d1, d))
            || self.aggregate_weights.iter().any(|w| w.dim() != (d1, d))
            || self
                .neighbor_weights
                .iter()
                .any(|row| row.len() != k || row.iter().any(|v| v.dim() != (d, d)));
        if bad {
            return Err(Error::DimensionMismatch(format!(
                "label-specific layer with K={k}, d={d}, d1={d1} has inconsistent tables"
            )));
        }
        Ok(())
    }
}

/// Sum over nodes of the label-specific layer output.
pub fn single_layer_readout(
    graph: &LabeledMultigraph,
    layer: &LabelSpecificLayer,
) -> Result<Array1<f64>> {
    layer.validate()?;
    let k = layer.num_labels();
    if graph.num_labels() as usize > k {
        return Err(Error::DimensionMismatch(format!(
            "graph uses {} labels, layer has {k}",
            graph.num_labels()
        )));
    }
    let slot = |label: Label| label as usize - 1;
    let mut total = Array1::zeros(layer.width());
    for i in 0..graph.num_nodes() {
        let own = slot(graph.label(i)?);
        let mut message = Array1::zeros(layer.dim());
        for &j in graph.neighbors(i)? {
            let other = slot(graph.label(j)?);
            message += &layer.neighbor_weights[own][other].dot(&layer.embeddings.row(other));
        }
        let pre = layer.self_weights[own].dot(&layer.embeddings.row(own))
            + layer.aggregate_weights[own].dot(&message);
        total += &pre.mapv(|x| layer.activation.apply(x));
    }
    Ok(total)
}

/// ReLU layer whose outputs over the lattice form a triangular matrix.
///
/// Each label owns a block of `(M + 1)^K + 1` output units. Every unit in
/// a block reads `⟨w, m⟩` with `w = ((M+1)^{K-1}, .., M + 1, 1)` and
/// subtracts its bias, which runs from `(M + 1)^K - 1` down to `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReluConstruction {
    pub labels: usize,
    pub max_degree: usize,
    pub alpha: f64,
    /// Digit weights `w`, length `K`.
    pub digit_weights: Array1<f64>,
    /// Per-block bias `b`, length `(M + 1)^K + 1`.
    pub bias: Array1<f64>,
}

/// Builds the counting construction for `K` labels and multiplicities up to `M`.
pub fn relu_construction(labels: usize, max_degree: usize, alpha: f64) -> Result<ReluConstruction> {
    let n = lattice_size(labels, max_degree)?;
    let base = (max_degree + 1) as f64;
    let digit_weights = Array1::from_iter((0..labels).rev().map(|p| base.powi(p as i32)));
    let bias = Array1::from_iter((0..=n).map(|j| n as f64 - 1.0 - j as f64));
    Ok(ReluConstruction {
        labels,
        max_degree,
        alpha,
        digit_weights,
        bias,
    })
}

impl ReluConstruction {
    pub fn lattice_size(&self) -> usize {
        self.bias.len() - 1
    }

    /// Units per label block.
    pub fn block_width(&self) -> usize {
        self.bias.len()
    }

    /// Single-block weight matrix: `(M + 1)^K + 1` identical rows `w`.
    pub fn weight_matrix(&self) -> Array2<f64> {
        let mut w = Array2::zeros((self.block_width(), self.labels));
        for mut row in w.rows_mut() {
            row.assign(&self.digit_weights);
        }
        w
    }

    /// `α σ(W m - b)` for one lattice point.
    pub fn unit_response(&self, point: &LatticePoint) -> Array1<f64> {
        let value: f64 = point
            .counts
            .iter()
            .zip(&self.digit_weights)
            .map(|(&c, &w)| c as f64 * w)
            .sum();
        self.bias.mapv(|b| self.alpha * (value - b).max(0.0))
    }

    /// Lattice responses of one block, rows in counting order.
    pub fn block(&self) -> Result<Array2<f64>> {
        let points = enumerate_lattice(self.labels, self.max_degree)?;
        let mut h = Array2::zeros((points.len(), self.block_width()));
        for (mut row, p) in h.rows_mut().into_iter().zip(&points) {
            row.assign(&self.unit_response(p));
        }
        Ok(h)
    }

    /// Block-diagonal response matrix over all `(k, m)` pairs.
    pub fn response_matrix(&self) -> Result<Array2<f64>> {
        let block = self.block()?;
        let (r, c) = block.dim();
        let mut h = Array2::zeros((r * self.labels, c * self.labels));
        for k in 0..self.labels {
            h.slice_mut(ndarray::s![k * r..(k + 1) * r, k * c..(k + 1) * c])
                .assign(&block);
        }
        Ok(h)
    }

    /// Parameters realizing the construction as a [`LabelSpecificLayer`]:
    /// `x_k = α e_k`, `V_kl = I`, and label `k` writes only into block `k`.
    pub fn layer(&self) -> LabelSpecificLayer {
        let k = self.labels;
        let c = self.block_width();
        let width = k * c;
        let mut embeddings = Array2::zeros((k, k));
        for i in 0..k {
            embeddings[[i, i]] = self.alpha;
        }
        let identity = Array2::eye(k);
        let mut self_weights = Vec::with_capacity(k);
        let mut aggregate_weights = Vec::with_capacity(k);
        for label in 0..k {
            let mut u = Array2::zeros((width, k));
            let mut w = Array2::zeros((width, k));
            for j in 0..c {
                u[[label * c + j, label]] = -self.bias[j];
                w.row_mut(label * c + j).assign(&self.digit_weights);
            }
            self_weights.push(u);
            aggregate_weights.push(w);
        }
        LabelSpecificLayer {
            embeddings,
            self_weights,
            neighbor_weights: vec![vec![identity; k]; k],
            aggregate_weights,
            activation: Activation::Relu,
        }
    }
}

/// Reverses the column order, which turns a construction block into a
/// lower-triangular matrix.
pub fn triangular_order(block: &Array2<f64>) -> Array2<f64> {
    let mut out = block.clone();
    out.invert_axis(ndarray::Axis(1));
    out
}

/// Zero above the diagonal and nonzero on it.
pub fn is_lower_triangular(h: &Array2<f64>) -> bool {
    h.indexed_iter().all(|((r, c), &v)| match c.cmp(&r) {
        std::cmp::Ordering::Greater => v == 0.0,
        std::cmp::Ordering::Equal => v != 0.0,
        std::cmp::Ordering::Less => true,
    })
}

/// Numerical rank by Gaussian elimination with full pivoting; pivots at
/// or below `1e-9 · ‖A‖_F` count as zero.
pub fn matrix_rank(a: &Array2<f64>) -> usize {
    let mut m = a.clone();
    let (rows, cols) = m.dim();
    let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
    let tol = 1e-9 * norm;
    let mut rank = 0;
    let mut col_order: Vec<usize> = (0..cols).collect();
    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0f64);
        for r in rank..rows {
            for c in rank..cols {
                let v = m[[r, col_order[c]]].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= tol {
            break;
        }
        let (pr, pc, _) = best;
        if pr != rank {
            for c in 0..cols {
                m.swap([pr, c], [rank, c]);
            }
        }
        col_order.swap(pc, rank);
        let pivot_col = col_order[rank];
        let pivot = m[[rank, pivot_col]];
        for r in rank + 1..rows {
            let factor = m[[r, pivot_col]] / pivot;
            if factor != 0.0 {
                for c in 0..cols {
                    let delta = factor * m[[rank, c]];
                    m[[r, c]] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Response matrix and its rank for the construction with `(K, M, α)`.
pub fn construction_rank(
    labels: usize,
    max_degree: usize,
    alpha: f64,
) -> Result<(Array2<f64>, usize)> {
    let h = relu_construction(labels, max_degree, alpha)?.response_matrix()?;
    let rank = matrix_rank(&h);
    Ok((h, rank))
}

/// Rank of the WL-embedding readouts of `graphs` when every extended label
/// `(ℓ, M)` gets its own standard basis vector in `R^dim`.
pub fn wle_max_dimensionality(graphs: &[LabeledMultigraph], dim: usize) -> Result<usize> {
    let registry = distinct_extended_labels(graphs);
    if dim < registry.len() {
        return Err(Error::DimensionTooSmall {
            dim,
            needed: registry.len(),
        });
    }
    let mut readouts = Array2::zeros((graphs.len(), dim));
    for (g, graph) in graphs.iter().enumerate() {
        for i in 0..graph.num_nodes() {
            let key = crate::wl::extended_label(graph, i)?;
            let index = registry.get(&key).expect("interned above") as usize - 1;
            readouts[[g, index]] += 1.0;
        }
    }
    Ok(matrix_rank(&readouts))
}

/// Largest label count and label-specific degree across a graph set.
pub fn observed_bounds(graphs: &[LabeledMultigraph]) -> (usize, usize) {
    let labels = graphs
        .iter()
        .map(|g| g.num_labels() as usize)
        .max()
        .unwrap_or(0);
    let degree = graphs
        .iter()
        .map(LabeledMultigraph::label_specific_max_degree)
        .max()
        .unwrap_or(0);
    (labels, degree)
}

/// One star per `(k, m)`: a center labeled `k` with `m_l` leaves labeled `l`.
/// Includes the single isolated node for `m = 0`.
pub fn lattice_star_graphs(labels: usize, max_degree: usize) -> Result<Vec<LabeledMultigraph>> {
    let points = enumerate_lattice(labels, max_degree)?;
    let mut graphs = Vec::with_capacity(labels * points.len());
    for center in 1..=labels as Label {
        for p in &points {
            let mut node_labels = vec![center];
            for (l, &count) in p.counts.iter().enumerate() {
                node_labels.extend(std::iter::repeat_n(l as Label + 1, count));
            }
            let edges = (1..node_labels.len()).map(|leaf| (0, leaf)).collect();
            graphs.push(LabeledMultigraph::new(
                node_labels.len(),
                node_labels,
                edges,
                labels as u32,
            )?);
        }
    }
    Ok(graphs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormRow {
    pub max_degree: usize,
    /// Exact `‖b‖₂` of one construction block.
    pub bias_norm: f64,
    /// `‖b‖₂ / M^{3K/2}`.
    pub ratio: f64,
}

/// Bias norm of the construction for each `M`, with its scaled ratio.
pub fn norm_profile(labels: usize, degrees: &[usize]) -> Result<Vec<NormRow>> {
    degrees
        .iter()
        .map(|&m| {
            let n = lattice_size(labels, m)? as f64;
            // Σ_{i=-1}^{n-1} i² = 1 + (n-1) n (2n-1) / 6
            let sum_sq = 1.0 + (n - 1.0) * n * (2.0 * n - 1.0) / 6.0;
            let bias_norm = sum_sq.sqrt();
            let ratio = bias_norm / (m as f64).powf(1.5 * labels as f64);
            Ok(NormRow {
                max_degree: m,
                bias_norm,
                ratio,
            })
        })
        .collect()
}

/// One line of the theorem verification table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremRow {
    pub labels: usize,
    pub max_degree: usize,
    pub bound: usize,
    pub rank: usize,
    pub bias_norm: f64,
    pub ratio: f64,
}

impl TheoremRow {
    pub fn passed(&self) -> bool {
        self.rank == self.bound
    }

    pub fn csv_header() -> &'static str {
        "K,M,bound,rank,result,bias_norm,ratio"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.labels,
            self.max_degree,
            self.bound,
            self.rank,
            if self.passed() { "pass" } else { "fail" },
            self.bias_norm,
            self.ratio
        )
    }
}

/// Rank and norm of the construction over `K ∈ 1..=kmax`, `M ∈ 1..=mmax`,
/// skipping cells whose lattice exceeds `max_points`.
pub fn verify_theorem(kmax: usize, mmax: usize, max_points: usize) -> Result<Vec<TheoremRow>> {
    let cells: Vec<(usize, usize)> = (1..=kmax)
        .flat_map(|k| (1..=mmax).map(move |m| (k, m)))
        .filter(|&(k, m)| lattice_size(k, m).is_ok_and(|n| n <= max_points))
        .collect();
    cells
        .into_par_iter()
        .map(|(k, m)| {
            let (_, rank) = construction_rank(k, m, 1.0)?;
            let norm = norm_profile(k, &[m])?[0];
            Ok(TheoremRow {
                labels: k,
                max_degree: m,
                bound: capacity_bound(k, m)?,
                rank,
                bias_norm: norm.bias_norm,
                ratio: norm.ratio,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::SeedableRng;

    fn graph(labels: Vec<u32>, edges: Vec<(usize, usize)>, k: u32) -> LabeledMultigraph {
        LabeledMultigraph::new(labels.len(), labels, edges, k).unwrap()
    }

    #[test]
    fn lattice_examples() {
        let pts = |k, m| -> Vec<Vec<usize>> {
            enumerate_lattice(k, m)
                .unwrap()
                .into_iter()
                .map(|p| p.counts)
                .collect()
        };
        assert_eq!(pts(1, 2), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(
            pts(2, 1),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );

        // counting oracle: nested loops in lexicographic order
        let mut expect = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    expect.push(vec![a, b, c]);
                }
            }
        }
        assert_eq!(pts(3, 2), expect);
        for (i, p) in enumerate_lattice(3, 2).unwrap().iter().enumerate() {
            assert_eq!(p.rank_in(2), i);
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(
            enumerate_lattice(7, 9),
            Err(Error::SizeOverflow(_))
        ));
        assert!(matches!(
            relu_construction(21, 1, 1.0),
            Err(Error::SizeOverflow(_))
        ));
        assert!(matches!(
            norm_profile(3, &[200]),
            Err(Error::SizeOverflow(_))
        ));
        assert_eq!(lattice_size(6, 9).unwrap(), 1_000_000);
    }

    #[test]
    fn construction_closed_forms() {
        let c = relu_construction(1, 2, 1.0).unwrap();
        assert_eq!(c.digit_weights, array![1.0]);
        assert_eq!(c.bias, array![2.0, 1.0, 0.0, -1.0]);
        assert_eq!(c.weight_matrix(), Array2::<f64>::ones((4, 1)));

        let c = relu_construction(2, 1, 1.0).unwrap();
        assert_eq!(c.digit_weights, array![2.0, 1.0]);

        let scaled = relu_construction(2, 1, 3.5).unwrap();
        assert_eq!(scaled.weight_matrix(), c.weight_matrix());
        assert_eq!(scaled.block().unwrap(), c.block().unwrap() * 3.5);
    }

    #[test]
    fn construction_rank_examples() {
        let (h, rank) = construction_rank(1, 2, 1.0).unwrap();
        assert_eq!(
            h,
            array![
                [0.0, 0.0, 0.0, 1.0],
                [0.0, 0.0, 1.0, 2.0],
                [0.0, 1.0, 2.0, 3.0]
            ]
        );
        assert_eq!(rank, 3);
        assert_eq!(construction_rank(2, 1, 1.0).unwrap().1, 8);
        assert_eq!(construction_rank(1, 0, 1.0).unwrap().1, 1);
    }

    #[test]
    fn blocks_are_triangular() {
        for (k, m) in [(1, 1), (1, 3), (2, 2), (3, 1), (2, 3)] {
            let block = relu_construction(k, m, 0.5).unwrap().block().unwrap();
            assert!(
                is_lower_triangular(&triangular_order(&block)),
                "K={k} M={m}"
            );
        }
        assert!(!is_lower_triangular(&array![[1.0, 1.0], [0.0, 1.0]]));
        assert!(!is_lower_triangular(&array![[0.0, 0.0], [1.0, 1.0]]));
    }

    #[test]
    fn rank_of_known_matrices() {
        assert_eq!(matrix_rank(&Array2::zeros((3, 4))), 0);
        assert_eq!(matrix_rank(&Array2::eye(5)), 5);
        assert_eq!(matrix_rank(&array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]), 1);
        assert_eq!(
            matrix_rank(&array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]),
            2
        );
        assert_eq!(matrix_rank(&array![[1e-2, 0.0], [0.0, 1e6]]), 2);
        assert_eq!(matrix_rank(&array![[1e-4, 0.0], [0.0, 1e6]]), 1);
    }

    #[test]
    fn wle_examples() {
        let single = graph(vec![1], vec![], 1);
        assert_eq!(
            wle_max_dimensionality(std::slice::from_ref(&single), 1).unwrap(),
            1
        );

        let path = graph(vec![1, 1], vec![(0, 1)], 1);
        let set = [single.clone(), path];
        assert_eq!(wle_max_dimensionality(&set, 2).unwrap(), 2);
        assert_eq!(capacity_bound(1, 1).unwrap(), 2);
        assert!(matches!(
            wle_max_dimensionality(&set, 1),
            Err(Error::DimensionTooSmall { dim: 1, needed: 2 })
        ));
    }

    #[test]
    fn stars_reach_the_bound_for_one_label() {
        for m in 0..5 {
            let stars = lattice_star_graphs(1, m).unwrap();
            let needed = distinct_extended_labels(&stars).len();
            assert_eq!(wle_max_dimensionality(&stars, needed).unwrap(), m + 1);
        }
    }

    #[test]
    fn edge_counts_between_labels_cap_the_rank() {
        // each k-l edge is seen once from each side, so readouts satisfy
        // K(K-1)/2 linear identities
        for (k, m) in [(2, 1), (2, 2), (3, 1)] {
            let stars = lattice_star_graphs(k, m).unwrap();
            let needed = distinct_extended_labels(&stars).len();
            let rank = wle_max_dimensionality(&stars, needed).unwrap();
            assert_eq!(rank, capacity_bound(k, m).unwrap() - k * (k - 1) / 2);
        }
    }

    #[test]
    fn norm_examples() {
        let rows = norm_profile(1, &[2]).unwrap();
        assert!((rows[0].bias_norm - 6f64.sqrt()).abs() < 1e-12);
        for m in 1..20 {
            // direct sum of squares over the bias entries
            let b = relu_construction(1, m, 1.0).unwrap().bias;
            let direct = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm_profile(1, &[m]).unwrap()[0].bias_norm - direct).abs() < 1e-9);
        }
        for k in 1..=2 {
            let ratios: Vec<f64> = norm_profile(k, &[2, 4, 8, 16, 32])
                .unwrap()
                .iter()
                .map(|r| r.ratio)
                .collect();
            assert!(ratios.windows(2).all(|w| w[1] <= w[0]));
            assert!(ratios.iter().all(|&r| r > 0.0));
        }
    }

    #[test]
    fn single_node_identity_layer() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut layer = LabelSpecificLayer::random(2, 3, 4, Activation::Identity, &mut rng);
        for row in layer.neighbor_weights.iter_mut() {
            for v in row.iter_mut() {
                v.fill(0.0);
            }
        }
        let g = graph(vec![2], vec![], 2);
        let expect = layer.self_weights[1].dot(&layer.embeddings.row(1));
        assert_eq!(single_layer_readout(&g, &layer).unwrap(), expect);
    }

    #[test]
    fn construction_layer_reproduces_rows() {
        let c = relu_construction(1, 2, 1.0).unwrap();
        let layer = c.layer();
        let block = c.block().unwrap();
        // five isolated nodes: five copies of the m = 0 row
        let isolated = graph(vec![1; 5], vec![], 1);
        assert_eq!(
            single_layer_readout(&isolated, &layer).unwrap(),
            &block.row(0) * 5.0
        );
        // a 6-cycle: every node has two label-1 neighbors
        let cycle = graph(vec![1; 6], (0..6).map(|i| (i, (i + 1) % 6)).collect(), 1);
        assert_eq!(
            single_layer_readout(&cycle, &layer).unwrap(),
            &block.row(2) * 6.0
        );

        let c = relu_construction(2, 2, 0.7).unwrap();
        let layer = c.layer();
        let h = c.response_matrix().unwrap();
        let star = graph(vec![2, 1, 2, 2], vec![(0, 1), (0, 2), (0, 3)], 2);
        // center: label 2, m = (1, 2); leaves: label 1 or 2 with m = (0, 1)
        let n = c.lattice_size();
        let row = |k: usize, m: &[usize]| {
            h.row((k - 1) * n + LatticePoint { counts: m.to_vec() }.rank_in(2))
                .to_owned()
        };
        let expect = row(2, &[1, 2]) + row(1, &[0, 1]) + row(2, &[0, 1]) * 2.0;
        let got = single_layer_readout(&star, &layer).unwrap();
        assert!(got.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn construction_readouts_match_wle_rank() {
        for (k, m) in [(1, 3), (2, 1), (2, 2)] {
            let stars = lattice_star_graphs(k, m).unwrap();
            let layer = relu_construction(k, m, 1.0).unwrap().layer();
            let rows: Vec<Array1<f64>> = stars
                .iter()
                .map(|g| single_layer_readout(g, &layer).unwrap())
                .collect();
            let mut mat = Array2::zeros((rows.len(), layer.width()));
            for (mut r, v) in mat.rows_mut().into_iter().zip(&rows) {
                r.assign(v);
            }
            let needed = distinct_extended_labels(&stars).len();
            assert_eq!(
                matrix_rank(&mat),
                wle_max_dimensionality(&stars, needed).unwrap()
            );
        }
    }

    #[test]
    fn isomorphic_graphs_share_readouts() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let layer = LabelSpecificLayer::random(3, 4, 6, Activation::Relu, &mut rng);
        let g = graph(
            vec![1, 2, 3, 1],
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)],
            3,
        );
        let h = g.permuted(&[2, 0, 3, 1]).unwrap();
        let (a, b) = (
            single_layer_readout(&g, &layer).unwrap(),
            single_layer_readout(&h, &layer).unwrap(),
        );
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn inconsistent_layer_rejected() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let mut layer = LabelSpecificLayer::random(2, 3, 4, Activation::Relu, &mut rng);
        layer.aggregate_weights[1] = Array2::zeros((4, 2));
        let g = graph(vec![1], vec![], 2);
        assert!(matches!(
            single_layer_readout(&g, &layer),
            Err(Error::DimensionMismatch(_))
        ));
        let small = LabelSpecificLayer::random(1, 3, 4, Activation::Relu, &mut rng);
        assert!(matches!(
            single_layer_readout(&g, &small),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn grid_rows() {
        let rows = verify_theorem(3, 3, 256).unwrap();
        assert_eq!(rows.len(), 9);
        assert!(rows.iter().all(TheoremRow::passed));
        assert_eq!(rows[0].to_csv().split(',').nth(4), Some("pass"));
    }
}
