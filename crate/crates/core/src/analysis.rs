//! Evaluation metrics and post-hoc inspection of trained models.

use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{EmbeddingKind, EmbeddingParams, EncodedGraph};
use crate::error::{Error, Result};
use crate::graph::DatasetRecord;
use crate::nn::{Model, Task};

/// Mean absolute error.
pub fn mae(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch(predictions.len(), targets.len()));
    }
    if predictions.is_empty() {
        return Err(Error::Empty);
    }
    let total: f64 = predictions
        .iter()
        .zip(targets)
        .map(|(p, t)| (p - t).abs())
        .sum();
    Ok(total / predictions.len() as f64)
}

/// Area under the ROC curve as the Mann-Whitney statistic: the fraction
/// of (positive, negative) pairs ranked correctly, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch(scores.len(), labels.len()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // midranks over tied groups, 1-based
    let mut rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        let tied_positives = order[start..end].iter().filter(|&&i| labels[i]).count();
        rank_sum += midrank * tied_positives as f64;
        start = end;
    }
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

/// Per-run values of one metric with their mean and sample standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub task: Task,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl Metrics {
    pub fn from_values(task: Task, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Ok(Self {
            task,
            values,
            mean,
            std,
        })
    }

    /// `"MAE"` for regression, `"ROC-AUC"` for classification.
    pub fn name(&self) -> &'static str {
        metric_name(self.task)
    }
}

pub fn metric_name(task: Task) -> &'static str {
    match task {
        Task::Regression => "MAE",
        Task::Classification => "ROC-AUC",
    }
}

/// Task metric of `model` on pre-encoded graphs: MAE or ROC-AUC.
pub fn evaluate_encoded(model: &Model, graphs: &[EncodedGraph], targets: &[f64]) -> Result<f64> {
    if graphs.len() != targets.len() {
        return Err(Error::LengthMismatch(graphs.len(), targets.len()));
    }
    let scores: Vec<f64> = model
        .predict_encoded(graphs)?
        .iter()
        .map(|p| p.score())
        .collect();
    match model.spec.task {
        Task::Regression => mae(&scores, targets),
        Task::Classification => {
            let labels: Vec<bool> = targets.iter().map(|&t| t == 1.0).collect();
            roc_auc(&scores, &labels)
        }
    }
}

pub fn evaluate(model: &Model, records: &[DatasetRecord]) -> Result<f64> {
    let encoded: Vec<EncodedGraph> = records.iter().map(|r| model.encode(&r.graph)).collect();
    let targets: Vec<f64> = records.iter().map(|r| r.target).collect();
    evaluate_encoded(model, &encoded, &targets)
}

/// Which side of a C-WL key the shuffle replaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShuffleMode {
    /// The node's own label.
    Atom,
    /// The node's neighbor-label multiset.
    Neighborhood,
}

impl fmt::Display for ShuffleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShuffleMode::Atom => "atom",
            ShuffleMode::Neighborhood => "nl",
        })
    }
}

impl FromStr for ShuffleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "atom" => Ok(ShuffleMode::Atom),
            "nl" | "neighborhood" => Ok(ShuffleMode::Neighborhood),
            other => Err(format!(
                "unknown shuffle mode `{other}` (expected atom or nl)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShuffleReport {
    pub mode: ShuffleMode,
    pub baseline: f64,
    pub shuffled: f64,
}

impl ShuffleReport {
    /// `shuffled - baseline`.
    pub fn delta(&self) -> f64 {
        self.shuffled - self.baseline
    }
}

/// Draws an interned index in `1..=vocab` other than `current`.
fn replacement<R: Rng + ?Sized>(vocab: usize, current: usize, rng: &mut R) -> Result<usize> {
    let excluded = usize::from((1..=vocab).contains(&current));
    let pool = vocab - excluded;
    if pool == 0 {
        return Err(Error::DegenerateShufflePool);
    }
    let mut pick = rng.random_range(1..=pool);
    if excluded == 1 && pick >= current {
        pick += 1;
    }
    Ok(pick)
}

/// Replaces one uniformly chosen node per graph with a different interned
/// entry on the chosen side, then re-evaluates the task metric.
///
/// Only C-WL models have separate atom and neighborhood keys.
pub fn shuffle_importance<R: Rng + ?Sized>(
    model: &Model,
    test: &[DatasetRecord],
    mode: ShuffleMode,
    rng: &mut R,
) -> Result<ShuffleReport> {
    let kind = model.spec.embedding;
    if kind != EmbeddingKind::Cwl {
        return Err(Error::WrongEmbeddingVariant {
            expected: EmbeddingKind::Cwl.name(),
            actual: kind.name(),
        });
    }
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let encoded: Vec<EncodedGraph> = test.iter().map(|r| model.encode(&r.graph)).collect();
    let targets: Vec<f64> = test.iter().map(|r| r.target).collect();
    let baseline = evaluate_encoded(model, &encoded, &targets)?;

    let vocab = match mode {
        ShuffleMode::Atom => model.featurizer.primary_vocab().len(),
        ShuffleMode::Neighborhood => model.featurizer.secondary_vocab().len(),
    };
    let mut shuffled = encoded;
    for g in &mut shuffled {
        if g.num_nodes == 0 {
            return Err(Error::EmptyGraph);
        }
        let node = rng.random_range(0..g.num_nodes);
        let slot = match mode {
            ShuffleMode::Atom => &mut g.primary[node],
            ShuffleMode::Neighborhood => {
                &mut g.secondary.as_mut().expect("C-WL encodes both sides")[node]
            }
        };
        *slot = replacement(vocab, *slot, rng)?;
    }
    let shuffled = evaluate_encoded(model, &shuffled, &targets)?;
    Ok(ShuffleReport {
        mode,
        baseline,
        shuffled,
    })
}

/// Magnitudes of a C-WL mixing matrix after removing the scale of each
/// embedding table.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightReport {
    /// `d × (d₁ + d₂)`; the first `d₁` columns act on the atom side.
    pub magnitudes: Array2<f64>,
    pub atom_dim: usize,
    /// Mean entry over the atom-side columns.
    pub atom_mean: f64,
    /// Mean entry over the neighborhood-side columns.
    pub neighborhood_mean: f64,
}

impl WeightReport {
    /// Comma-separated rows of the magnitude matrix.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.magnitudes.rows() {
            let cells: Vec<String> = row.iter().map(f64::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Mean Euclidean norm of the interned rows (UNKNOWN row 0 excluded).
fn mean_row_norm(table: &Array2<f64>) -> f64 {
    let rows = table.slice(s![1.., ..]);
    if rows.nrows() == 0 {
        return 0.0;
    }
    rows.axis_iter(Axis(0))
        .map(|r| r.dot(&r).sqrt())
        .sum::<f64>()
        / rows.nrows() as f64
}

/// `|W|` with the atom-side columns scaled by the mean atom-row norm and
/// the neighborhood-side columns by the mean neighborhood-row norm.
///
/// `mix` is `d × (d₁ + d₂)` acting on `[z_atom; z_neighborhood]`.
pub fn weight_magnitudes(
    mix: &Array2<f64>,
    atom_table: &Array2<f64>,
    neighborhood_table: &Array2<f64>,
) -> Result<WeightReport> {
    let d1 = atom_table.ncols();
    let d2 = neighborhood_table.ncols();
    if mix.ncols() != d1 + d2 {
        return Err(Error::DimensionMismatch(format!(
            "mixing matrix has {} columns, tables have {d1} + {d2}",
            mix.ncols()
        )));
    }
    let (atom_scale, nb_scale) = (mean_row_norm(atom_table), mean_row_norm(neighborhood_table));
    let mut magnitudes = mix.mapv(f64::abs);
    magnitudes
        .slice_mut(s![.., ..d1])
        .mapv_inplace(|v| v * atom_scale);
    magnitudes
        .slice_mut(s![.., d1..])
        .mapv_inplace(|v| v * nb_scale);
    let mean = |cols: ndarray::ArrayView2<f64>| {
        if cols.is_empty() {
            0.0
        } else {
            cols.sum() / cols.len() as f64
        }
    };
    Ok(WeightReport {
        atom_mean: mean(magnitudes.slice(s![.., ..d1])),
        neighborhood_mean: mean(magnitudes.slice(s![.., d1..])),
        magnitudes,
        atom_dim: d1,
    })
}

/// [`weight_magnitudes`] for the mixing matrix of a trained C-WL model.
pub fn cwl_weight_magnitudes(model: &Model) -> Result<WeightReport> {
    match model.embedding {
        EmbeddingParams::Cwl {
            atom_table,
            neighborhood_table,
            mix,
        } => {
            // stored as (d1 + d2) × d
            let w = model.store.get(mix).t().to_owned();
            weight_magnitudes(
                &w,
                model.store.get(atom_table),
                model.store.get(neighborhood_table),
            )
        }
        other => Err(Error::WrongEmbeddingVariant {
            expected: EmbeddingKind::Cwl.name(),
            actual: other.kind().name(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledMultigraph;
    use crate::nn::ModelSpec;
    use ndarray::array;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Direct pairwise count.
    fn auc_oracle(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    pairs += 1.0;
                    wins += match scores[i].partial_cmp(&scores[j]).unwrap() {
                        std::cmp::Ordering::Greater => 1.0,
                        std::cmp::Ordering::Equal => 0.5,
                        std::cmp::Ordering::Less => 0.0,
                    };
                }
            }
        }
        wins / pairs
    }

    #[test]
    fn mae_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0], &[3.0]).unwrap(), 3.0);
        assert!((mae(&[1.0, 2.0, 4.0], &[2.0, 2.0, 1.0]).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            mae(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch(1, 2))
        ));
        assert!(matches!(mae(&[], &[]), Err(Error::Empty)));
    }

    #[test]
    fn auc_examples() {
        assert_eq!(roc_auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(
            roc_auc(&[0.3; 4], &[true, false, true, false]).unwrap(),
            0.5
        );
        assert_eq!(
            roc_auc(&[0.8, 0.6, 0.4], &[true, false, true]).unwrap(),
            0.5
        );
        assert!(matches!(
            roc_auc(&[0.1, 0.2], &[true, true]),
            Err(Error::SingleClass)
        ));
        assert!(matches!(roc_auc(&[0.1], &[false]), Err(Error::SingleClass)));
    }

    fn scored_labels() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec((0i32..12).prop_map(|v| v as f64 / 4.0), n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise_count((scores, labels) in scored_labels()) {
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let fast = roc_auc(&scores, &labels).unwrap();
            prop_assert!((fast - auc_oracle(&scores, &labels)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&fast));
        }

        #[test]
        fn auc_invariant_under_increasing_maps((scores, labels) in scored_labels()) {
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            let mapped: Vec<f64> = scores.iter().map(|s| (3.0 * s).exp() - 7.0).collect();
            prop_assert_eq!(roc_auc(&scores, &labels).unwrap(), roc_auc(&mapped, &labels).unwrap());
        }

        #[test]
        fn negated_scores_flip_auc(
            labels in prop::collection::vec(any::<bool>(), 2..30),
            seed in any::<u64>(),
        ) {
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            // distinct scores: a shuffled range
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut scores: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
            rand::seq::SliceRandom::shuffle(scores.as_mut_slice(), &mut rng);
            let neg: Vec<f64> = scores.iter().map(|s| -s).collect();
            let a = roc_auc(&scores, &labels).unwrap();
            prop_assert!((roc_auc(&neg, &labels).unwrap() - (1.0 - a)).abs() < 1e-12);
        }

        #[test]
        fn mae_is_symmetric(pairs in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..30)) {
            let (p, t): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let a = mae(&p, &t).unwrap();
            prop_assert_eq!(a, mae(&t, &p).unwrap());
            prop_assert!(a >= 0.0);
        }
    }

    #[test]
    fn metrics_summary() {
        let m = Metrics::from_values(Task::Regression, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m.mean, 2.0);
        assert_eq!(m.std, 1.0);
        let single = Metrics::from_values(Task::Classification, vec![0.7]).unwrap();
        assert_eq!(single.std, 0.0);
        assert_eq!(single.name(), "ROC-AUC");
        assert!(matches!(
            Metrics::from_values(Task::Regression, vec![]),
            Err(Error::Empty)
        ));
    }

    #[test]
    fn replacement_pool() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            replacement(1, 1, &mut rng),
            Err(Error::DegenerateShufflePool)
        ));
        assert!(matches!(
            replacement(0, 0, &mut rng),
            Err(Error::DegenerateShufflePool)
        ));
        assert_eq!(replacement(1, 0, &mut rng).unwrap(), 1);
        let mut seen = [0usize; 5];
        for _ in 0..2000 {
            let r = replacement(4, 2, &mut rng).unwrap();
            seen[r] += 1;
        }
        assert_eq!(seen[0], 0);
        assert_eq!(seen[2], 0);
        assert!(seen[1] > 500 && seen[3] > 500 && seen[4] > 500);
    }

    #[test]
    fn weight_report_examples() {
        let atom = array![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let nb = array![[0.0, 0.0], [0.6, 0.8]];
        let zero = weight_magnitudes(&Array2::zeros((2, 4)), &atom, &nb).unwrap();
        assert_eq!(zero.magnitudes, Array2::<f64>::zeros((2, 4)));
        assert_eq!((zero.atom_mean, zero.neighborhood_mean), (0.0, 0.0));

        // W = [I | 0] with unit-norm rows
        let w = array![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]];
        let r = weight_magnitudes(&w, &atom, &nb).unwrap();
        assert_eq!(r.magnitudes, w);
        assert_eq!(r.atom_mean, 0.5);
        assert_eq!(r.neighborhood_mean, 0.0);

        let scaled = weight_magnitudes(&-w, &(atom * 2.0), &nb).unwrap();
        assert_eq!(scaled.atom_mean, 1.0);
        assert!(matches!(
            weight_magnitudes(&Array2::zeros((2, 3)), &array![[0.0, 0.0]], &nb),
            Err(Error::DimensionMismatch(_))
        ));
    }

    fn tiny_records() -> Vec<DatasetRecord> {
        let g = |labels: Vec<u32>, edges: Vec<(usize, usize)>, t: f64| DatasetRecord {
            graph: LabeledMultigraph::new(labels.len(), labels, edges, 3).unwrap(),
            target: t,
        };
        vec![
            g(vec![1, 2, 3], vec![(0, 1), (1, 2)], 1.0),
            g(vec![1, 1, 2], vec![(0, 1), (0, 2)], 0.0),
            g(vec![3, 3], vec![(0, 1)], 1.0),
            g(vec![2, 1, 1, 3], vec![(0, 1), (1, 2), (2, 3)], 0.0),
        ]
    }

    #[test]
    fn shuffle_requires_cwl_and_keeps_model() {
        let data = tiny_records();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let atomic = Model::init(
            ModelSpec::new(EmbeddingKind::Atomic, 1, 4, Task::Classification),
            data.iter().map(|r| &r.graph),
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            shuffle_importance(&atomic, &data, ShuffleMode::Atom, &mut rng),
            Err(Error::WrongEmbeddingVariant {
                expected: "cwl",
                actual: "atomic"
            })
        ));
        assert!(matches!(
            cwl_weight_magnitudes(&atomic),
            Err(Error::WrongEmbeddingVariant { .. })
        ));

        let model = Model::init(
            ModelSpec::new(EmbeddingKind::Cwl, 1, 4, Task::Classification),
            data.iter().map(|r| &r.graph),
            &mut rng,
        )
        .unwrap();
        let before = model.clone();
        for mode in [ShuffleMode::Atom, ShuffleMode::Neighborhood] {
            let report = shuffle_importance(&model, &data, mode, &mut rng).unwrap();
            assert_eq!(report.baseline, evaluate(&model, &data).unwrap());
            assert!((0.0..=1.0).contains(&report.shuffled));
        }
        assert_eq!(model, before);
        let report = cwl_weight_magnitudes(&model).unwrap();
        assert_eq!(report.magnitudes.dim(), (4, 8));
        assert!(report.magnitudes.iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn shuffle_with_single_label_vocabulary() {
        let g = LabeledMultigraph::new(2, vec![1, 1], vec![(0, 1)], 1).unwrap();
        let data = vec![
            DatasetRecord {
                graph: g.clone(),
                target: 0.0,
            },
            DatasetRecord {
                graph: g,
                target: 1.0,
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let model = Model::init(
            ModelSpec::new(EmbeddingKind::Cwl, 0, 2, Task::Classification),
            data.iter().map(|r| &r.graph),
            &mut rng,
        )
        .unwrap();
        assert!(matches!(
            shuffle_importance(&model, &data, ShuffleMode::Atom, &mut rng),
            Err(Error::DegenerateShufflePool)
        ));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("atom".parse::<ShuffleMode>().unwrap(), ShuffleMode::Atom);
        assert_eq!(
            "NL".parse::<ShuffleMode>().unwrap(),
            ShuffleMode::Neighborhood
        );
        assert!("x".parse::<ShuffleMode>().is_err());
        assert_eq!(ShuffleMode::Neighborhood.to_string(), "nl");
    }
}
