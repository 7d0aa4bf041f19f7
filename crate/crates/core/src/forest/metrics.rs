use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ForestModel, Prediction};
use crate::error::{Error, Result};
use crate::series::ClassLabel;
use crate::transform::TransformMatrix;

pub const N_BANDS: usize = 10;

/// Counts indexed `[actual][predicted]` over `classes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<ClassLabel>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<ClassLabel>) -> Self {
        let k = classes.len();
        Self { classes, counts: vec![vec![0; k]; k] }
    }

    pub fn from_counts(classes: Vec<ClassLabel>, counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if counts.len() != k || counts.iter().any(|r| r.len() != k) {
            return Err(Error::invalid("confusion counts must be a square matrix over the classes"));
        }
        Ok(Self { classes, counts })
    }

    fn index(&self, label: &ClassLabel) -> Option<usize> {
        self.classes.iter().position(|c| c == label)
    }

    pub fn record(&mut self, actual: &ClassLabel, predicted: &ClassLabel) -> Result<()> {
        let a = self.index(actual);
        let p = self.index(predicted);
        match (a, p) {
            (Some(a), Some(p)) => {
                self.counts[a][p] += 1;
                Ok(())
            }
            _ => Err(Error::invalid(alloc::format!(
                "label {actual} or {predicted} is not one of the matrix classes"
            ))),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..self.classes.len()).map(|i| self.counts[i][i]).sum()
    }

    /// `None` for an empty matrix.
    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        (total > 0).then(|| self.correct() as f64 / total as f64)
    }

    /// TP / (TP + FP); `None` when the class was never predicted.
    pub fn precision(&self, class: usize) -> Option<f64> {
        let tp = self.counts[class][class];
        let predicted: u64 = self.counts.iter().map(|r| r[class]).sum();
        (predicted > 0).then(|| tp as f64 / predicted as f64)
    }

    /// TP / (TP + FN); `None` when the class never occurs.
    pub fn recall(&self, class: usize) -> Option<f64> {
        let tp = self.counts[class][class];
        let actual: u64 = self.counts[class].iter().sum();
        (actual > 0).then(|| tp as f64 / actual as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub support: u64,
}

/// Histogram of predicted-label probabilities in ten bands `[0, 0.1)`, ..., `[0.9, 1.0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityBands {
    pub all: Vec<u64>,
    pub correct: Vec<u64>,
    /// Share of correct predictions with probability at least 0.9.
    pub correct_at_least_0_9: Option<f64>,
}

impl ProbabilityBands {
    pub fn band(p: f64) -> usize {
        ((p * N_BANDS as f64) as usize).min(N_BANDS - 1)
    }

    pub fn from_predictions<'a>(
        items: impl IntoIterator<Item = (&'a Prediction, &'a ClassLabel)>,
    ) -> Self {
        let mut all = vec![0; N_BANDS];
        let mut correct = vec![0; N_BANDS];
        let mut high = 0u64;
        for (p, actual) in items {
            let conf = p.confidence();
            let b = Self::band(conf);
            all[b] += 1;
            if &p.label == actual {
                correct[b] += 1;
                if conf >= 0.9 {
                    high += 1;
                }
            }
        }
        let n_correct: u64 = correct.iter().sum();
        let correct_at_least_0_9 = (n_correct > 0).then(|| high as f64 / n_correct as f64);
        Self { all, correct, correct_at_least_0_9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: Option<f64>,
    pub per_class: BTreeMap<ClassLabel, ClassMetrics>,
    pub confusion: ConfusionMatrix,
    pub probability_bands: ProbabilityBands,
}

impl Evaluation {
    pub fn from_confusion(confusion: ConfusionMatrix, bands: ProbabilityBands) -> Self {
        let per_class = confusion
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let m = ClassMetrics {
                    precision: confusion.precision(i),
                    recall: confusion.recall(i),
                    support: confusion.counts[i].iter().sum(),
                };
                (c.clone(), m)
            })
            .collect();
        Self {
            accuracy: confusion.accuracy(),
            per_class,
            confusion,
            probability_bands: bands,
        }
    }
}

/// Scores `model` on a labelled matrix. Labels unseen in training get their own row and column.
pub fn evaluate(model: &ForestModel, features: &TransformMatrix) -> Result<Evaluation> {
    let labels = features
        .labels()
        .ok_or_else(|| Error::invalid("evaluation requires a labelled matrix"))?;
    let predictions = model.predict_matrix(features)?;
    let mut classes = model.classes.clone();
    classes.extend(labels.iter().cloned());
    classes.sort();
    classes.dedup();
    let mut confusion = ConfusionMatrix::new(classes);
    for (p, actual) in predictions.iter().zip(labels) {
        confusion.record(actual, &p.label)?;
    }
    let bands = ProbabilityBands::from_predictions(predictions.iter().zip(labels));
    Ok(Evaluation::from_confusion(confusion, bands))
}
