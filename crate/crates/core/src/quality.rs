//! Orderlines, entropy, information gain and best-split search.
//!
//! Entropy uses base-2 logarithms, so the information gain of a binary
//! problem lies in `[0, 1]`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::ClassLabel;

pub type ClassCounts = BTreeMap<ClassLabel, usize>;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderlineEntry {
    pub distance: f64,
    pub label: ClassLabel,
    /// Position of the scored series in the dataset.
    pub index: usize,
}

/// `(distance, label)` pairs sorted by distance, ties by label then index.
#[derive(Debug, Clone, PartialEq)]
pub struct Orderline {
    entries: Vec<OrderlineEntry>,
}

impl Orderline {
    /// Builds an orderline; the position of each pair becomes its index.
    pub fn new(pairs: impl IntoIterator<Item = (f64, ClassLabel)>) -> Result<Self> {
        let mut entries = Vec::new();
        for (index, (distance, label)) in pairs.into_iter().enumerate() {
            if !(distance.is_finite() && distance >= 0.0) {
                return Err(Error::invalid(alloc::format!(
                    "orderline distance must be finite and non-negative, got {distance}"
                )));
            }
            entries.push(OrderlineEntry {
                distance,
                label,
                index,
            });
        }
        entries.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.label.cmp(&b.label))
                .then(a.index.cmp(&b.index))
        });
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[OrderlineEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn class_counts(&self) -> ClassCounts {
        count_labels(self.entries.iter().map(|e| &e.label))
    }

    /// Information gain of sending every entry with `distance < threshold` left.
    pub fn information_gain_at(&self, threshold: f64) -> Result<f64> {
        let left = count_labels(
            self.entries
                .iter()
                .filter(|e| e.distance < threshold)
                .map(|e| &e.label),
        );
        information_gain(&self.class_counts(), &left)
    }
}

fn count_labels<'a>(labels: impl Iterator<Item = &'a ClassLabel>) -> ClassCounts {
    let mut counts = ClassCounts::new();
    for l in labels {
        *counts.entry(l.clone()).or_insert(0) += 1;
    }
    counts
}

/// Quality of the best threshold split of an orderline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitAssessment {
    pub information_gain: f64,
    /// Entries with `distance < split_threshold` form the near side.
    pub split_threshold: f64,
    /// Gap between the two distances straddling the threshold.
    pub margin: f64,
}

/// Shannon entropy (base 2) of a class distribution.
pub fn entropy(counts: &ClassCounts) -> Result<f64> {
    let values: Vec<usize> = counts.values().copied().collect();
    if values.iter().sum::<usize>() == 0 {
        return Err(Error::invalid("entropy of an empty class distribution"));
    }
    Ok(entropy_of(&values))
}

/// Entropy gained by splitting `total` into `left` and its complement.
pub fn information_gain(total: &ClassCounts, left: &ClassCounts) -> Result<f64> {
    let mut total_v = Vec::with_capacity(total.len());
    let mut left_v = Vec::with_capacity(total.len());
    for (label, &t) in total {
        let l = left.get(label).copied().unwrap_or(0);
        if l > t {
            return Err(Error::invalid(alloc::format!(
                "left count {l} for class `{label}` exceeds total {t}"
            )));
        }
        total_v.push(t);
        left_v.push(l);
    }
    if let Some(label) = left.keys().find(|k| !total.contains_key(*k)) {
        if left[label] > 0 {
            return Err(Error::invalid(alloc::format!(
                "class `{label}` appears on the left but not in the total"
            )));
        }
    }
    if total_v.iter().sum::<usize>() == 0 {
        return Err(Error::invalid("information gain of an empty class distribution"));
    }
    Ok(information_gain_of(&total_v, &left_v))
}

/// Highest-gain split over every boundary between consecutive distinct
/// distances. Ties prefer the larger margin, then the smaller threshold.
///
/// Orderlines with a single class, or with all distances equal, score zero.
pub fn best_split(orderline: &Orderline) -> Result<SplitAssessment> {
    if orderline.len() < 2 {
        return Err(Error::invalid("best split needs an orderline of at least two entries"));
    }
    let classes: Vec<&ClassLabel> = {
        let mut c: Vec<&ClassLabel> = orderline.entries.iter().map(|e| &e.label).collect();
        c.sort();
        c.dedup();
        c
    };
    let indexed: Vec<(f64, usize)> = orderline
        .entries
        .iter()
        .map(|e| {
            let class = classes.binary_search(&&e.label).expect("label collected above");
            (e.distance, class)
        })
        .collect();
    Ok(best_split_sorted(&indexed, classes.len()).assessment)
}

pub(crate) struct SplitSearch {
    pub assessment: SplitAssessment,
    /// Class counts strictly below the threshold.
    pub left: Vec<usize>,
}

/// Best split of `(distance, class index)` pairs already sorted by distance.
pub(crate) fn best_split_sorted(sorted: &[(f64, usize)], n_classes: usize) -> SplitSearch {
    let mut total = vec![0usize; n_classes];
    for &(_, c) in sorted {
        total[c] += 1;
    }
    let degenerate = SplitSearch {
        assessment: SplitAssessment {
            information_gain: 0.0,
            split_threshold: sorted.last().map_or(0.0, |e| e.0),
            margin: 0.0,
        },
        left: vec![0; n_classes],
    };
    if total.iter().filter(|&&c| c > 0).count() < 2 {
        return degenerate;
    }

    let mut left = vec![0usize; n_classes];
    let mut best: Option<SplitSearch> = None;
    for i in 1..sorted.len() {
        left[sorted[i - 1].1] += 1;
        let (lo, hi) = (sorted[i - 1].0, sorted[i].0);
        if lo >= hi {
            continue;
        }
        let candidate = SplitAssessment {
            information_gain: information_gain_of(&total, &left),
            split_threshold: midpoint(lo, hi),
            margin: hi - lo,
        };
        let better = match &best {
            None => true,
            Some(b) => compare_splits(&candidate, &b.assessment) == Ordering::Greater,
        };
        if better {
            best = Some(SplitSearch {
                assessment: candidate,
                left: left.clone(),
            });
        }
    }
    best.unwrap_or(degenerate)
}

/// `Greater` means `a` is the preferred split.
pub(crate) fn compare_splits(a: &SplitAssessment, b: &SplitAssessment) -> Ordering {
    a.information_gain
        .total_cmp(&b.information_gain)
        .then(a.margin.total_cmp(&b.margin))
        .then(b.split_threshold.total_cmp(&a.split_threshold))
}

/// A threshold `t` with `lo < t <= hi`, so `d < t` separates the two.
fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid > lo {
        mid
    } else {
        hi
    }
}

/// Terms are summed in ascending count order, so the result does not depend
/// on class order and mirrored splits score bit-identically.
pub(crate) fn entropy_of(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let mut stack = [0usize; 8];
    let mut heap = Vec::new();
    let nonzero: &mut [usize] = if counts.len() <= stack.len() {
        let mut k = 0;
        for &c in counts.iter().filter(|&&c| c > 0) {
            stack[k] = c;
            k += 1;
        }
        &mut stack[..k]
    } else {
        heap.extend(counts.iter().copied().filter(|&c| c > 0));
        &mut heap[..]
    };
    nonzero.sort_unstable();
    let n = n as f64;
    let mut h = 0.0;
    for &c in nonzero.iter() {
        let p = c as f64 / n;
        h -= p * libm::log2(p);
    }
    h
}

pub(crate) fn information_gain_of(total: &[usize], left: &[usize]) -> f64 {
    let n: usize = total.iter().sum();
    let n_left: usize = left.iter().sum();
    let right: Vec<usize> = total.iter().zip(left).map(|(t, l)| t - l).collect();
    let n = n as f64;
    let w_left = n_left as f64 / n;
    let w_right = (n - n_left as f64) / n;
    let ig = entropy_of(total) - (w_left * entropy_of(left) + w_right * entropy_of(&right));
    ig.max(0.0)
}
