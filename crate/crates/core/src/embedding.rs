//! Node embeddings: atomic, naive WL, concatenated WL (C-WL) and gated WL (G-WL).
//!
//! A [`Featurizer`] turns graphs into per-node row indices of one or two
//! embedding tables. Row 0 of every table is the UNKNOWN row used for keys
//! that were not seen when the featurizer was fitted.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{ParamId, ParamStore, SparseMatrix, Tape, Var};
use crate::error::{Error, Result};
use crate::graph::LabeledMultigraph;
use crate::wl::{wl_refine, wl_refine_frozen, ExtendedLabel, LabelRegistry, UNKNOWN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EmbeddingKind {
    Atomic,
    NaiveWl,
    Cwl,
    Gwl,
}

impl EmbeddingKind {
    pub const ALL: [EmbeddingKind; 4] = [Self::Atomic, Self::NaiveWl, Self::Cwl, Self::Gwl];

    pub fn name(self) -> &'static str {
        match self {
            Self::Atomic => "atomic",
            Self::NaiveWl => "wl",
            Self::Cwl => "cwl",
            Self::Gwl => "gwl",
        }
    }

    /// Whether the embedding uses separate atom-side and neighborhood-side tables.
    pub fn is_split(self) -> bool {
        matches!(self, Self::Cwl | Self::Gwl)
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "atomic" => Ok(Self::Atomic),
            "wl" | "naive" | "naive-wl" => Ok(Self::NaiveWl),
            "cwl" | "c-wl" => Ok(Self::Cwl),
            "gwl" | "g-wl" => Ok(Self::Gwl),
            other => Err(format!("unknown embedding `{other}` (atomic|wl|cwl|gwl)")),
        }
    }
}

/// A graph reduced to what the network consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedGraph {
    pub num_nodes: usize,
    /// Row of the primary (or atom-side) table for each node.
    pub primary: Vec<usize>,
    /// Row of the neighborhood-side table for C-WL / G-WL.
    pub secondary: Option<Vec<usize>>,
    /// Self-loop augmented, symmetrically normalized adjacency.
    pub propagation: SparseMatrix,
}

/// `Â = D̃^{-1/2} (A + I) D̃^{-1/2}` over collapsed neighborhoods.
pub fn normalized_adjacency(graph: &LabeledMultigraph) -> SparseMatrix {
    let n = graph.num_nodes();
    let scale: Vec<f64> = (0..n)
        .map(|i| 1.0 / ((graph.degree(i).expect("in range") + 1) as f64).sqrt())
        .collect();
    let mut entries = Vec::with_capacity(n + 2 * graph.edges().len());
    for i in 0..n {
        entries.push((i, i, scale[i] * scale[i]));
        for &j in graph.neighbors(i).expect("in range") {
            entries.push((i, j, scale[i] * scale[j]));
        }
    }
    SparseMatrix {
        rows: n,
        cols: n,
        entries,
    }
}

/// Maps graphs to embedding-table rows for one embedding variant.
///
/// With `iterations = T ≥ 2` the naive WL key of node `i` is
/// `(c_{T-1}(i), {c_{T-1}(j)})` over refined colors, and the
/// neighborhood side of C-WL / G-WL uses the same multiset; the atom side
/// always keys on the original label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurizer {
    kind: EmbeddingKind,
    iterations: usize,
    colors: LabelRegistry,
    primary: LabelRegistry,
    secondary: LabelRegistry,
}

enum Colors {
    Raw,
    Refined(Vec<Option<u32>>),
}

impl Featurizer {
    /// Interns every key occurring in `graphs`.
    pub fn fit<'a, I>(kind: EmbeddingKind, iterations: usize, graphs: I) -> Self
    where
        I: IntoIterator<Item = &'a LabeledMultigraph>,
    {
        let iterations = iterations.max(1);
        let mut this = Self {
            kind,
            iterations,
            colors: LabelRegistry::new(),
            primary: LabelRegistry::new(),
            secondary: LabelRegistry::new(),
        };
        for graph in graphs {
            if iterations >= 2 && kind != EmbeddingKind::Atomic {
                wl_refine(graph, iterations - 1, &mut this.colors);
            }
            let colors = this.colors_for(graph);
            for i in 0..graph.num_nodes() {
                let (p, s) = this.keys(graph, &colors, i);
                if let Some(p) = p {
                    this.primary.intern(p);
                }
                if let Some(Some(s)) = s {
                    this.secondary.intern(s);
                }
            }
        }
        this
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Vocabulary of the primary (atom-side for C-WL / G-WL) table.
    pub fn primary_vocab(&self) -> &LabelRegistry {
        &self.primary
    }

    pub fn secondary_vocab(&self) -> &LabelRegistry {
        &self.secondary
    }

    /// Rows in the primary table, UNKNOWN included.
    pub fn primary_rows(&self) -> usize {
        self.primary.len() + 1
    }

    pub fn secondary_rows(&self) -> usize {
        self.secondary.len() + 1
    }

    fn colors_for(&self, graph: &LabeledMultigraph) -> Colors {
        if self.iterations >= 2 && self.kind != EmbeddingKind::Atomic {
            let mut all = wl_refine_frozen(graph, self.iterations - 1, &self.colors);
            Colors::Refined(all.pop().expect("nonempty"))
        } else {
            Colors::Raw
        }
    }

    /// Keys of node `i`. `None` marks a key built from an unknown color.
    #[allow(clippy::type_complexity)]
    fn keys(
        &self,
        graph: &LabeledMultigraph,
        colors: &Colors,
        i: usize,
    ) -> (Option<ExtendedLabel>, Option<Option<ExtendedLabel>>) {
        let label = graph.labels()[i];
        let neighborhood: Option<(Option<u32>, Vec<u32>)> = match colors {
            Colors::Raw => Some((
                Some(label),
                graph.neighbor_label_multiset(i).expect("in range"),
            )),
            Colors::Refined(c) => (|| {
                let mut m = Vec::new();
                for &j in graph.neighbors(i).ok()? {
                    m.push(c[j]?);
                }
                Some((c[i], m))
            })(),
        };
        match self.kind {
            EmbeddingKind::Atomic => (Some(ExtendedLabel::atom(label)), None),
            EmbeddingKind::NaiveWl => {
                let key =
                    neighborhood.and_then(|(center, m)| Some(ExtendedLabel::full(center?, m)));
                (key, None)
            }
            EmbeddingKind::Cwl | EmbeddingKind::Gwl => (
                Some(ExtendedLabel::atom(label)),
                Some(neighborhood.map(|(_, m)| ExtendedLabel::neighborhood_only(m))),
            ),
        }
    }

    /// Row indices for every node; unseen keys map to the UNKNOWN row.
    pub fn encode(&self, graph: &LabeledMultigraph) -> EncodedGraph {
        let colors = self.colors_for(graph);
        let n = graph.num_nodes();
        let mut primary = Vec::with_capacity(n);
        let mut secondary = self.kind.is_split().then(|| Vec::with_capacity(n));
        for i in 0..n {
            let (p, s) = self.keys(graph, &colors, i);
            primary.push(p.map_or(UNKNOWN, |k| self.primary.index_or_unknown(&k)) as usize);
            if let (Some(out), Some(s)) = (secondary.as_mut(), s) {
                out.push(s.map_or(UNKNOWN, |k| self.secondary.index_or_unknown(&k)) as usize);
            }
        }
        EncodedGraph {
            num_nodes: n,
            primary,
            secondary,
            propagation: normalized_adjacency(graph),
        }
    }
}

/// Several encoded graphs glued into one disjoint union.
#[derive(Debug, Clone)]
pub struct EncodedBatch {
    pub num_graphs: usize,
    pub primary: Arc<[usize]>,
    pub secondary: Option<Arc<[usize]>>,
    pub propagation: Arc<SparseMatrix>,
    /// Graph index of every node.
    pub segments: Arc<[usize]>,
}

impl EncodedBatch {
    pub fn new<'a, I>(graphs: I) -> Self
    where
        I: IntoIterator<Item = &'a EncodedGraph>,
    {
        let mut primary = Vec::new();
        let mut secondary: Option<Vec<usize>> = None;
        let mut entries = Vec::new();
        let mut segments = Vec::new();
        let mut offset = 0;
        let mut num_graphs = 0;
        for (g_index, g) in graphs.into_iter().enumerate() {
            primary.extend_from_slice(&g.primary);
            if let Some(s) = &g.secondary {
                secondary.get_or_insert_with(Vec::new).extend_from_slice(s);
            }
            entries.extend(
                g.propagation
                    .entries
                    .iter()
                    .map(|&(i, j, c)| (i + offset, j + offset, c)),
            );
            segments.extend(std::iter::repeat_n(g_index, g.num_nodes));
            offset += g.num_nodes;
            num_graphs += 1;
        }
        Self {
            num_graphs,
            primary: primary.into(),
            secondary: secondary.map(Into::into),
            propagation: Arc::new(SparseMatrix {
                rows: offset,
                cols: offset,
                entries,
            }),
            segments: segments.into(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.primary.len()
    }
}

/// Parameter handles of an embedding inside a [`ParamStore`].
///
/// Mixing and gate matrices are stored in row-vector orientation
/// (`input × output`), i.e. transposed relative to `x = W z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingParams {
    Atomic {
        table: ParamId,
    },
    NaiveWl {
        table: ParamId,
    },
    Cwl {
        atom_table: ParamId,
        neighborhood_table: ParamId,
        mix: ParamId,
    },
    Gwl {
        atom_table: ParamId,
        neighborhood_table: ParamId,
        gate_atom: ParamId,
        gate_neighborhood: ParamId,
    },
}

/// Zero-mean uniform rows with half-width `1/sqrt(width)`; row 0 (UNKNOWN) is zero.
pub fn init_table<R: Rng>(rows: usize, width: usize, rng: &mut R) -> Array2<f64> {
    let scale = 1.0 / (width as f64).sqrt();
    let mut table = Array2::from_shape_fn((rows, width), |_| rng.random_range(-scale..scale));
    table.row_mut(UNKNOWN as usize).fill(0.0);
    table
}

fn init_dense<R: Rng>(fan_in: usize, fan_out: usize, rng: &mut R) -> Array2<f64> {
    let scale = 1.0 / (fan_in as f64).sqrt();
    Array2::from_shape_fn((fan_in, fan_out), |_| rng.random_range(-scale..scale))
}

impl EmbeddingParams {
    /// Allocates and initializes the tables for `featurizer`.
    /// `dims = (d1, d2)` is only used by C-WL.
    pub fn init<R: Rng>(
        featurizer: &Featurizer,
        dim: usize,
        dims: (usize, usize),
        store: &mut ParamStore,
        rng: &mut R,
    ) -> Self {
        let p_rows = featurizer.primary_rows();
        let s_rows = featurizer.secondary_rows();
        match featurizer.kind() {
            EmbeddingKind::Atomic => Self::Atomic {
                table: store.add("embedding.table", init_table(p_rows, dim, rng)),
            },
            EmbeddingKind::NaiveWl => Self::NaiveWl {
                table: store.add("embedding.table", init_table(p_rows, dim, rng)),
            },
            EmbeddingKind::Cwl => {
                let (d1, d2) = dims;
                let atom_table = store.add("embedding.atom", init_table(p_rows, d1, rng));
                let neighborhood_table =
                    store.add("embedding.neighborhood", init_table(s_rows, d2, rng));
                let mix = store.add("embedding.mix", init_dense(d1 + d2, dim, rng));
                Self::Cwl {
                    atom_table,
                    neighborhood_table,
                    mix,
                }
            }
            EmbeddingKind::Gwl => {
                let atom_table = store.add("embedding.atom", init_table(p_rows, dim, rng));
                let neighborhood_table =
                    store.add("embedding.neighborhood", init_table(s_rows, dim, rng));
                let gate_atom = store.add("embedding.gate_atom", init_table_like(dim, rng));
                let gate_neighborhood =
                    store.add("embedding.gate_neighborhood", init_table_like(dim, rng));
                Self::Gwl {
                    atom_table,
                    neighborhood_table,
                    gate_atom,
                    gate_neighborhood,
                }
            }
        }
    }

    pub fn kind(&self) -> EmbeddingKind {
        match self {
            Self::Atomic { .. } => EmbeddingKind::Atomic,
            Self::NaiveWl { .. } => EmbeddingKind::NaiveWl,
            Self::Cwl { .. } => EmbeddingKind::Cwl,
            Self::Gwl { .. } => EmbeddingKind::Gwl,
        }
    }

    /// Node-feature matrix `|V| × d` for a batch.
    pub fn forward(
        &self,
        tape: &mut Tape,
        store: &ParamStore,
        batch: &EncodedBatch,
    ) -> Result<Var> {
        let secondary = || {
            batch
                .secondary
                .clone()
                .ok_or_else(|| Error::DimensionMismatch("batch lacks neighborhood rows".into()))
        };
        match *self {
            Self::Atomic { table } | Self::NaiveWl { table } => {
                let t = tape.param(store, table);
                tape.gather(t, batch.primary.clone())
            }
            Self::Cwl {
                atom_table,
                neighborhood_table,
                mix,
            } => {
                let ta = tape.param(store, atom_table);
                let tn = tape.param(store, neighborhood_table);
                let w = tape.param(store, mix);
                let z_atom = tape.gather(ta, batch.primary.clone())?;
                let z_nb = tape.gather(tn, secondary()?)?;
                let z = tape.concat_cols(z_atom, z_nb)?;
                tape.matmul(z, w)
            }
            Self::Gwl {
                atom_table,
                neighborhood_table,
                gate_atom,
                gate_neighborhood,
            } => {
                let ta = tape.param(store, atom_table);
                let tn = tape.param(store, neighborhood_table);
                let w1 = tape.param(store, gate_atom);
                let w2 = tape.param(store, gate_neighborhood);
                let z_atom = tape.gather(ta, batch.primary.clone())?;
                let z_nb = tape.gather(tn, secondary()?)?;
                gated_mix(tape, z_atom, z_nb, w1, w2)
            }
        }
    }
}

fn init_table_like<R: Rng>(dim: usize, rng: &mut R) -> Array2<f64> {
    let scale = 1.0 / (dim as f64).sqrt();
    Array2::from_shape_fn((dim, dim), |_| rng.random_range(-scale..scale))
}

/// `(1 - G) ⊙ z_ℓ + G ⊙ z_M` with `G = σ(z_ℓ W₁ᵀ + z_M W₂ᵀ)`, row-wise.
/// `w1`, `w2` hold the transposed gate matrices.
pub fn gated_mix(tape: &mut Tape, z_atom: Var, z_nb: Var, w1: Var, w2: Var) -> Result<Var> {
    let a = tape.matmul(z_atom, w1)?;
    let b = tape.matmul(z_nb, w2)?;
    let pre = tape.add(a, b)?;
    let gate = tape.sigmoid(pre);
    let keep = tape.one_minus(gate);
    let left = tape.mul(keep, z_atom)?;
    let right = tape.mul(gate, z_nb)?;
    tape.add(left, right)
}

/// Trainable lookup table, `(J + 1) × d` with row 0 = UNKNOWN.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub rows: Array2<f64>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.rows.ncols()
    }
}

/// C-WL parameters in the `x = W · [z_ℓ; z_M]` orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct CwlParams {
    pub atom_table: EmbeddingTable,
    pub neighborhood_table: EmbeddingTable,
    /// `d × (d1 + d2)`.
    pub mix: Array2<f64>,
}

/// G-WL parameters; gates are `d × d` in the `W z` orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct GwlParams {
    pub atom_table: EmbeddingTable,
    pub neighborhood_table: EmbeddingTable,
    pub gate_atom: Array2<f64>,
    pub gate_neighborhood: Array2<f64>,
}

fn evaluate(
    featurizer: &Featurizer,
    graph: &LabeledMultigraph,
    build: impl FnOnce(&mut Tape, &EncodedBatch) -> Result<Var>,
) -> Result<Array2<f64>> {
    let encoded = featurizer.encode(graph);
    let batch = EncodedBatch::new([&encoded]);
    let mut tape = Tape::new();
    let out = build(&mut tape, &batch)?;
    Ok(tape.value(out).clone())
}

fn check_rows(table: &EmbeddingTable, needed: usize, what: &str) -> Result<()> {
    if table.rows.nrows() < needed {
        return Err(Error::DimensionMismatch(format!(
            "{what} table has {} rows, vocabulary needs {needed}",
            table.rows.nrows()
        )));
    }
    Ok(())
}

/// Row `i` is `θ_{ℓ_i}`. Every label must already be interned.
pub fn atomic_embed(
    table: &EmbeddingTable,
    featurizer: &Featurizer,
    graph: &LabeledMultigraph,
) -> Result<Array2<f64>> {
    if featurizer.kind() != EmbeddingKind::Atomic {
        return Err(Error::WrongEmbeddingVariant {
            expected: "atomic",
            actual: featurizer.kind().name(),
        });
    }
    check_rows(table, featurizer.primary_rows(), "atomic")?;
    if let Some(&label) = graph.labels().iter().find(|&&l| {
        featurizer
            .primary_vocab()
            .get(&ExtendedLabel::atom(l))
            .is_none()
    }) {
        return Err(Error::UninternedLabel(label.to_string()));
    }
    evaluate(featurizer, graph, |tape, batch| {
        let t = tape.leaf(table.rows.clone());
        tape.gather(t, batch.primary.clone())
    })
}

/// Row `i` is `θ_{t(ℓ_i, M_i)}`, or the UNKNOWN row for unseen extended labels.
pub fn naive_wl_embed(
    table: &EmbeddingTable,
    featurizer: &Featurizer,
    graph: &LabeledMultigraph,
) -> Result<Array2<f64>> {
    if featurizer.kind() != EmbeddingKind::NaiveWl {
        return Err(Error::WrongEmbeddingVariant {
            expected: "wl",
            actual: featurizer.kind().name(),
        });
    }
    check_rows(table, featurizer.primary_rows(), "wl")?;
    evaluate(featurizer, graph, |tape, batch| {
        let t = tape.leaf(table.rows.clone());
        tape.gather(t, batch.primary.clone())
    })
}

/// Row `i` is `W · concat(z_{i,ℓ}, z_{i,M})`.
pub fn cwl_embed(
    params: &CwlParams,
    featurizer: &Featurizer,
    graph: &LabeledMultigraph,
) -> Result<Array2<f64>> {
    if featurizer.kind() != EmbeddingKind::Cwl {
        return Err(Error::WrongEmbeddingVariant {
            expected: "cwl",
            actual: featurizer.kind().name(),
        });
    }
    check_rows(&params.atom_table, featurizer.primary_rows(), "atom")?;
    check_rows(
        &params.neighborhood_table,
        featurizer.secondary_rows(),
        "neighborhood",
    )?;
    let width = params.atom_table.dim() + params.neighborhood_table.dim();
    if params.mix.ncols() != width {
        return Err(Error::DimensionMismatch(format!(
            "mixing matrix has {} columns, concatenation has {width}",
            params.mix.ncols()
        )));
    }
    let mut store = ParamStore::new();
    let ids = EmbeddingParams::Cwl {
        atom_table: store.add("a", params.atom_table.rows.clone()),
        neighborhood_table: store.add("n", params.neighborhood_table.rows.clone()),
        mix: store.add("w", params.mix.t().to_owned()),
    };
    evaluate(featurizer, graph, |tape, batch| {
        ids.forward(tape, &store, batch)
    })
}

/// Row `i` is `(1 - G_i) ⊙ z_{i,ℓ} + G_i ⊙ z_{i,M}`.
pub fn gwl_embed(
    params: &GwlParams,
    featurizer: &Featurizer,
    graph: &LabeledMultigraph,
) -> Result<Array2<f64>> {
    if featurizer.kind() != EmbeddingKind::Gwl {
        return Err(Error::WrongEmbeddingVariant {
            expected: "gwl",
            actual: featurizer.kind().name(),
        });
    }
    check_rows(&params.atom_table, featurizer.primary_rows(), "atom")?;
    check_rows(
        &params.neighborhood_table,
        featurizer.secondary_rows(),
        "neighborhood",
    )?;
    let d = params.atom_table.dim();
    if params.neighborhood_table.dim() != d
        || params.gate_atom.dim() != (d, d)
        || params.gate_neighborhood.dim() != (d, d)
    {
        return Err(Error::DimensionMismatch(format!(
            "G-WL needs shared width {d} and {d}x{d} gates"
        )));
    }
    let mut store = ParamStore::new();
    let ids = EmbeddingParams::Gwl {
        atom_table: store.add("a", params.atom_table.rows.clone()),
        neighborhood_table: store.add("n", params.neighborhood_table.rows.clone()),
        gate_atom: store.add("w1", params.gate_atom.t().to_owned()),
        gate_neighborhood: store.add("w2", params.gate_neighborhood.t().to_owned()),
    };
    evaluate(featurizer, graph, |tape, batch| {
        ids.forward(tape, &store, batch)
    })
}
