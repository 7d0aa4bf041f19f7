//! Random forest over shapelet-transform features.
//!
//! Each tree is grown on a bootstrap resample with its own ChaCha stream
//! derived from `(seed, tree index)`, so the forest is identical whether
//! trees are grown on one thread or many. A prediction is the unweighted
//! mean of the per-tree leaf class distributions.

mod metrics;
mod tree;

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::series::ClassLabel;
use crate::transform::TransformMatrix;

pub use metrics::{evaluate, ClassMetrics, ConfusionMatrix, Evaluation, ProbabilityBands};
pub use tree::{DecisionTree, Node};

use tree::{GrowParams, TrainingData};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Defaults to `ceil(sqrt(k))`.
    pub features_per_split: Option<usize>,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 500,
            features_per_split: None,
            max_depth: None,
            min_samples_leaf: 1,
            bootstrap: true,
            seed: 0,
        }
    }
}

/// [`ForestConfig`] with `features_per_split` resolved against the data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedForestConfig {
    pub n_trees: usize,
    pub features_per_split: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub bootstrap: bool,
    pub seed: u64,
}

impl ForestConfig {
    pub fn resolve(&self, n_features: usize) -> Result<ResolvedForestConfig> {
        if self.n_trees == 0 {
            return Err(Error::invalid("n_trees must be at least 1"));
        }
        if n_features == 0 {
            return Err(Error::invalid("cannot train on a matrix with no feature columns"));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::invalid("min_samples_leaf must be at least 1"));
        }
        let features_per_split = self
            .features_per_split
            .unwrap_or_else(|| libm::ceil(libm::sqrt(n_features as f64)) as usize);
        if !(1..=n_features).contains(&features_per_split) {
            return Err(Error::invalid(alloc::format!(
                "features_per_split must be in [1, {n_features}], got {features_per_split}"
            )));
        }
        Ok(ResolvedForestConfig {
            n_trees: self.n_trees,
            features_per_split,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
            bootstrap: self.bootstrap,
            seed: self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestModel {
    pub config: ResolvedForestConfig,
    /// Sorted; leaf count vectors are indexed by position in this list.
    pub classes: Vec<ClassLabel>,
    /// Column ids of the training matrix.
    pub feature_ids: Vec<String>,
    /// Fingerprint of the shapelet set that produced the features, when known.
    pub shapelet_fingerprint: Option<String>,
    /// Out-of-bag accuracy; `None` without bootstrap or when no row was ever out of bag.
    pub oob_accuracy: Option<f64>,
    pub trees: Vec<DecisionTree>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: ClassLabel,
    /// One entry per model class, summing to 1.
    pub probabilities: BTreeMap<ClassLabel, f64>,
}

impl Prediction {
    pub fn probability(&self, label: &ClassLabel) -> f64 {
        self.probabilities.get(label).copied().unwrap_or(0.0)
    }

    /// Probability of the predicted label.
    pub fn confidence(&self) -> f64 {
        self.probability(&self.label)
    }
}

/// Trains a forest on a labelled transform matrix.
pub fn train(features: &TransformMatrix, cfg: &ForestConfig) -> Result<ForestModel> {
    let labels = features
        .labels()
        .ok_or_else(|| Error::invalid("training requires a labelled matrix"))?;
    let n = features.rows();
    if n < 2 {
        return Err(Error::invalid(alloc::format!("training needs at least 2 rows, got {n}")));
    }
    let mut classes: Vec<ClassLabel> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::invalid("training needs at least 2 classes"));
    }
    let cfg = cfg.resolve(features.cols())?;
    let class_idx: Vec<usize> = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label collected above"))
        .collect();
    let values: Vec<f64> = features.iter_rows().flatten().copied().collect();
    let data = TrainingData {
        values: &values,
        cols: features.cols(),
        classes: &class_idx,
    };
    let params = GrowParams {
        n_classes: classes.len(),
        features_per_split: cfg.features_per_split,
        max_depth: cfg.max_depth,
        min_samples_leaf: cfg.min_samples_leaf,
    };

    let grown = par::map_range(cfg.n_trees, |t| {
        let mut rng = tree_rng(cfg.seed, t);
        let samples: Vec<usize> = if cfg.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let mut in_bag = vec![false; n];
        for &s in &samples {
            in_bag[s] = true;
        }
        (DecisionTree::grow(&data, samples, &params, &mut rng), in_bag)
    });

    let oob_accuracy = if cfg.bootstrap {
        oob_accuracy(&grown, features, &class_idx, classes.len())
    } else {
        None
    };
    Ok(ForestModel {
        config: cfg,
        classes,
        feature_ids: features.shapelet_ids().to_vec(),
        shapelet_fingerprint: None,
        oob_accuracy,
        trees: grown.into_iter().map(|(t, _)| t).collect(),
    })
}

fn tree_rng(seed: u64, tree: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tree as u64);
    rng
}

fn oob_accuracy(
    grown: &[(DecisionTree, Vec<bool>)],
    features: &TransformMatrix,
    class_idx: &[usize],
    n_classes: usize,
) -> Option<f64> {
    let mut scored = 0usize;
    let mut correct = 0usize;
    let mut probs = vec![0.0; n_classes];
    for (i, row) in features.iter_rows().enumerate() {
        probs.iter_mut().for_each(|p| *p = 0.0);
        let mut voters = 0;
        for (tree, in_bag) in grown {
            if !in_bag[i] {
                accumulate_leaf(tree.leaf_counts(row), &mut probs);
                voters += 1;
            }
        }
        if voters > 0 {
            scored += 1;
            if argmax(&probs) == class_idx[i] {
                correct += 1;
            }
        }
    }
    (scored > 0).then(|| correct as f64 / scored as f64)
}

fn accumulate_leaf(counts: &[u32], probs: &mut [f64]) {
    let total: u32 = counts.iter().sum();
    let total = f64::from(total);
    for (p, &c) in probs.iter_mut().zip(counts) {
        *p += f64::from(c) / total;
    }
}

/// First index of the maximum.
fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

impl ForestModel {
    pub fn n_features(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn predict(&self, row: &[f64]) -> Result<Prediction> {
        if row.len() != self.n_features() {
            return Err(Error::invalid(alloc::format!(
                "row has {} features, model expects {}",
                row.len(),
                self.n_features()
            )));
        }
        let mut probs = vec![0.0; self.classes.len()];
        for tree in &self.trees {
            accumulate_leaf(tree.leaf_counts(row), &mut probs);
        }
        let n = self.trees.len() as f64;
        probs.iter_mut().for_each(|p| *p /= n);
        let best = argmax(&probs);
        Ok(Prediction {
            label: self.classes[best].clone(),
            probabilities: self.classes.iter().cloned().zip(probs).collect(),
        })
    }

    /// Predicts every row; the matrix columns must match the training columns.
    pub fn predict_matrix(&self, features: &TransformMatrix) -> Result<Vec<Prediction>> {
        if features.shapelet_ids() != self.feature_ids.as_slice() {
            return Err(Error::invalid(
                "feature columns differ from the columns the model was trained on",
            ));
        }
        par::map_range(features.rows(), |i| self.predict(features.row(i)))
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use rand_distr::{Distribution, Uniform};

    fn l(s: &str) -> ClassLabel {
        ClassLabel::new(s).unwrap()
    }

    fn matrix(rows: Vec<Vec<f64>>, labels: &[&str]) -> TransformMatrix {
        let cols = rows.first().map_or(0, Vec::len);
        TransformMatrix::new(
            rows,
            Some(labels.iter().map(|s| l(s)).collect()),
            (0..cols).map(|j| j.to_string()).collect(),
        )
        .unwrap()
    }

    fn xor(n: usize, seed: u64) -> TransformMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let (a, b): (f64, f64) = (u.sample(&mut rng), u.sample(&mut rng));
            labels.push(if (a > 0.5) ^ (b > 0.5) { "A" } else { "B" });
            rows.push(vec![a, b]);
        }
        matrix(rows, &labels)
    }

    #[test]
    fn separable_feature_is_learned_perfectly() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![if i < 10 { 0.05 * i as f64 } else { 2.1 + 0.1 * i as f64 }])
            .collect();
        let labels: Vec<&str> = (0..20).map(|i| if i < 10 { "A" } else { "B" }).collect();
        let m = matrix(rows, &labels);
        let model = train(&m, &ForestConfig { n_trees: 50, ..Default::default() }).unwrap();
        for (i, row) in m.iter_rows().enumerate() {
            let p = model.predict(row).unwrap();
            assert_eq!(p.label.as_str(), labels[i]);
            assert_eq!(p.confidence(), 1.0);
        }
    }

    #[test]
    fn conflicting_duplicates_give_label_mix() {
        let m = matrix(vec![vec![1.0]; 4], &["A", "B", "B", "B"]);
        let cfg = ForestConfig { n_trees: 1, bootstrap: false, ..Default::default() };
        let model = train(&m, &cfg).unwrap();
        let p = model.predict(&[1.0]).unwrap();
        assert_eq!(p.probability(&l("A")), 0.25);
        assert_eq!(p.probability(&l("B")), 0.75);
        assert_eq!(p.label, l("B"));
    }

    #[test]
    fn one_tree_forest_returns_its_leaf_distribution() {
        let m = xor(60, 4);
        let model = train(&m, &ForestConfig { n_trees: 1, max_depth: Some(1), ..Default::default() }).unwrap();
        for row in m.iter_rows() {
            let counts = model.trees[0].leaf_counts(row);
            let total: u32 = counts.iter().sum();
            let p = model.predict(row).unwrap();
            for (k, c) in model.classes.iter().enumerate() {
                assert_eq!(p.probability(c), f64::from(counts[k]) / f64::from(total));
            }
        }
    }

    #[test]
    fn argmax_tie_goes_to_first_class() {
        let m = matrix(vec![vec![1.0]; 2], &["B", "A"]);
        let model = train(&m, &ForestConfig { n_trees: 1, bootstrap: false, ..Default::default() }).unwrap();
        assert_eq!(model.predict(&[1.0]).unwrap().label, l("A"));
    }

    #[test]
    fn xor_out_of_bag_accuracy() {
        for seed in 0..5 {
            let m = xor(200, 100 + seed);
            let model = train(&m, &ForestConfig { n_trees: 500, seed, ..Default::default() }).unwrap();
            let oob = model.oob_accuracy.unwrap();
            assert!(oob > 0.9, "seed {seed}: oob {oob}");
            assert_eq!(model.trees.len(), 500);
        }
    }

    #[test]
    fn training_errors() {
        let one_class = matrix(vec![vec![1.0], vec![2.0]], &["A", "A"]);
        assert!(train(&one_class, &ForestConfig::default()).is_err());
        let one_row = matrix(vec![vec![1.0]], &["A"]);
        assert!(train(&one_row, &ForestConfig::default()).is_err());
        let unlabeled = TransformMatrix::new(vec![vec![1.0], vec![2.0]], None, vec!["0".into()]).unwrap();
        assert!(train(&unlabeled, &ForestConfig::default()).is_err());
        let m = matrix(vec![vec![1.0], vec![2.0]], &["A", "B"]);
        assert!(train(&m, &ForestConfig { n_trees: 0, ..Default::default() }).is_err());
        assert!(train(&m, &ForestConfig { features_per_split: Some(2), ..Default::default() }).is_err());
    }

    #[test]
    fn predict_checks_width_and_columns() {
        let m = xor(30, 1);
        let model = train(&m, &ForestConfig { n_trees: 5, ..Default::default() }).unwrap();
        assert!(model.predict(&[0.1]).is_err());
        let renamed = TransformMatrix::new(
            m.iter_rows().map(<[f64]>::to_vec).collect(),
            None,
            vec!["x".into(), "y".into()],
        )
        .unwrap();
        assert!(model.predict_matrix(&renamed).is_err());
    }

    #[test]
    fn training_is_deterministic_per_seed() {
        let m = xor(80, 9);
        let cfg = ForestConfig { n_trees: 40, seed: 5, ..Default::default() };
        assert_eq!(train(&m, &cfg).unwrap(), train(&m, &cfg).unwrap());
        let other = train(&m, &ForestConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(train(&m, &cfg).unwrap().trees, other.trees);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let m = xor(100, 2);
        let model = train(&m, &ForestConfig { n_trees: 37, ..Default::default() }).unwrap();
        for row in m.iter_rows() {
            let p = model.predict(row).unwrap();
            let sum: f64 = p.probabilities.values().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            let max = p.probabilities.values().copied().fold(0.0, f64::max);
            assert_eq!(p.confidence(), max);
        }
    }

    #[test]
    fn more_trees_do_not_increase_probability_variance() {
        let m = xor(120, 11);
        let probe = [0.45, 0.55];
        let variance = |n_trees: usize| {
            let ps: Vec<f64> = (0..20)
                .map(|seed| {
                    let model = train(&m, &ForestConfig { n_trees, seed, ..Default::default() }).unwrap();
                    model.predict(&probe).unwrap().probability(&l("A"))
                })
                .collect();
            let mean = ps.iter().sum::<f64>() / ps.len() as f64;
            ps.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>() / ps.len() as f64
        };
        let sizes = [1usize, 10, 100, 500];
        let vars: Vec<f64> = sizes.iter().map(|&n| variance(n)).collect();
        for w in vars.windows(2) {
            assert!(w[1] <= w[0] * 1.1 + 1e-12, "{vars:?}");
        }
    }
}
