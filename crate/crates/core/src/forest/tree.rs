//! Axis-aligned CART classification tree grown with the Gini criterion.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Tree node; children are indices into [`DecisionTree::nodes`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    /// Rows with `row[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class counts of the training rows that reached this leaf.
    Leaf { counts: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Root is `nodes[0]`.
    pub nodes: Vec<Node>,
}

pub(crate) struct GrowParams {
    pub n_classes: usize,
    pub features_per_split: usize,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
}

/// Row-major feature matrix with class indices.
pub(crate) struct TrainingData<'a> {
    pub values: &'a [f64],
    pub cols: usize,
    pub classes: &'a [usize],
}

impl TrainingData<'_> {
    fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }
}

impl DecisionTree {
    pub fn leaf_counts(&self, row: &[f64]) -> &[u32] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            deepest = deepest.max(d);
            if let Node::Split { left, right, .. } = self.nodes[at] {
                stack.push((left, d + 1));
                stack.push((right, d + 1));
            }
        }
        deepest
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Grows a tree on `samples` (row indices, repeats allowed).
    pub(crate) fn grow<R: Rng>(
        data: &TrainingData<'_>,
        mut samples: Vec<usize>,
        params: &GrowParams,
        rng: &mut R,
    ) -> Self {
        let mut nodes = vec![Node::Leaf { counts: Vec::new() }];
        // (node index, sample range, depth)
        let mut work = vec![(0usize, 0usize, samples.len(), 0usize)];
        let mut features: Vec<usize> = (0..data.cols).collect();
        while let Some((at, start, end, depth)) = work.pop() {
            let slice = &mut samples[start..end];
            let counts = class_counts(data, slice, params.n_classes);
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_capped = params.max_depth.is_some_and(|d| depth >= d);
            let too_small = slice.len() < 2 * params.min_samples_leaf;
            let split = if pure || depth_capped || too_small {
                None
            } else {
                features.shuffle(rng);
                find_split(data, slice, &features, &counts, params)
            };
            match split {
                None => nodes[at] = Node::Leaf { counts },
                Some((feature, threshold)) => {
                    let n_left = partition(slice, |r| data.get(r, feature) <= threshold);
                    let left = nodes.len();
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    nodes.push(Node::Leaf { counts: Vec::new() });
                    nodes[at] = Node::Split {
                        feature,
                        threshold,
                        left,
                        right: left + 1,
                    };
                    work.push((left + 1, start + n_left, end, depth + 1));
                    work.push((left, start, start + n_left, depth + 1));
                }
            }
        }
        Self { nodes }
    }
}

fn class_counts(data: &TrainingData<'_>, rows: &[usize], n_classes: usize) -> Vec<u32> {
    let mut counts = vec![0u32; n_classes];
    for &r in rows {
        counts[data.classes[r]] += 1;
    }
    counts
}

/// Stable partition; returns the number of rows satisfying `pred`.
fn partition(rows: &mut [usize], pred: impl Fn(usize) -> bool) -> usize {
    let (mut yes, mut no): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| pred(r));
    let n = yes.len();
    yes.append(&mut no);
    rows.copy_from_slice(&yes);
    n
}

/// Best Gini split over the first `features_per_split` non-constant features
/// in `order`. Returns `(feature, threshold)`.
fn find_split(
    data: &TrainingData<'_>,
    rows: &[usize],
    order: &[usize],
    counts: &[u32],
    params: &GrowParams,
) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut best: Option<(f64, usize, f64)> = None;
    let mut visited = 0;
    let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0u32; params.n_classes];
    for &feature in order {
        if visited == params.features_per_split {
            break;
        }
        column.clear();
        column.extend(rows.iter().map(|&r| (data.get(r, feature), data.classes[r])));
        column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if column[0].0 == column[n - 1].0 {
            continue;
        }
        visited += 1;
        left.iter_mut().for_each(|c| *c = 0);
        for i in 1..n {
            left[column[i - 1].1] += 1;
            let (lo, hi) = (column[i - 1].0, column[i].0);
            if lo >= hi || i < params.min_samples_leaf || n - i < params.min_samples_leaf {
                continue;
            }
            let score = purity(&left, i) + purity_complement(counts, &left, n - i);
            if best.is_none_or(|(s, _, _)| score > s) {
                best = Some((score, feature, threshold_between(lo, hi)));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

/// `sum(c^2) / n`; maximizing the sum over both sides minimizes weighted Gini.
fn purity(counts: &[u32], n: usize) -> f64 {
    let s: f64 = counts.iter().map(|&c| f64::from(c) * f64::from(c)).sum();
    s / n as f64
}

fn purity_complement(total: &[u32], left: &[u32], n: usize) -> f64 {
    let s: f64 = total
        .iter()
        .zip(left)
        .map(|(&t, &l)| {
            let c = f64::from(t - l);
            c * c
        })
        .sum();
    s / n as f64
}

/// A threshold `t` with `lo <= t < hi`, so `x <= t` separates the two.
fn threshold_between(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid < hi {
        mid
    } else {
        lo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n_features: usize) -> GrowParams {
        GrowParams {
            n_classes: 2,
            features_per_split: n_features,
            max_depth: None,
            min_samples_leaf: 1,
        }
    }

    #[test]
    fn single_split_separates_two_groups() {
        let values = [0.1, 0.5, 0.9, 2.5, 3.0, 4.0];
        let classes = [0, 0, 0, 1, 1, 1];
        let data = TrainingData { values: &values, cols: 1, classes: &classes };
        let tree = DecisionTree::grow(&data, (0..6).collect(), &params(1), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(tree.nodes.len(), 3);
        let Node::Split { threshold, .. } = tree.nodes[0] else { panic!() };
        assert!((threshold - 1.7).abs() < 1e-12);
        assert_eq!(tree.leaf_counts(&[0.0]), &[3, 0]);
        assert_eq!(tree.leaf_counts(&[9.0]), &[0, 3]);
    }

    #[test]
    fn identical_rows_with_mixed_labels_form_one_leaf() {
        let values = [1.0, 1.0, 1.0, 1.0];
        let classes = [0, 1, 1, 1];
        let data = TrainingData { values: &values, cols: 1, classes: &classes };
        let tree = DecisionTree::grow(&data, (0..4).collect(), &params(1), &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(tree.nodes, vec![Node::Leaf { counts: vec![1, 3] }]);
    }

    #[test]
    fn depth_and_leaf_size_limits() {
        let values: Vec<f64> = (0..16).map(f64::from).collect();
        let classes: Vec<usize> = (0..16).map(|i| i % 2).collect();
        let data = TrainingData { values: &values, cols: 1, classes: &classes };
        let mut p = params(1);
        p.max_depth = Some(2);
        let tree = DecisionTree::grow(&data, (0..16).collect(), &p, &mut ChaCha8Rng::seed_from_u64(3));
        assert!(tree.depth() <= 2);

        let mut p = params(1);
        p.min_samples_leaf = 4;
        let tree = DecisionTree::grow(&data, (0..16).collect(), &p, &mut ChaCha8Rng::seed_from_u64(3));
        for node in &tree.nodes {
            if let Node::Leaf { counts } = node {
                assert!(counts.iter().sum::<u32>() >= 4);
            }
        }
    }

    #[test]
    fn threshold_between_adjacent_floats() {
        let lo = 3.0f64;
        let hi = f64::from_bits(lo.to_bits() + 1);
        let t = threshold_between(lo, hi);
        assert!(lo <= t && t < hi);
    }
}
