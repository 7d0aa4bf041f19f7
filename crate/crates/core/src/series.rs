//! Time series, class labels, labelled datasets and z-normalization.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationIssue, ValidationReport};

/// Population standard deviation at or below which a sequence is treated as flat.
pub const STD_EPSILON: f64 = 1e-8;

/// Ordered, finite, non-empty samples with an id and optional sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    id: String,
    values: Vec<f64>,
    sample_rate_hz: Option<f64>,
}

impl TimeSeries {
    pub fn new(id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let id = id.into();
        if values.is_empty() {
            return Err(Error::invalid(alloc::format!("series `{id}` is empty")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(alloc::format!(
                "series `{id}` has a non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            id,
            values,
            sample_rate_hz: None,
        })
    }

    pub fn with_sample_rate(mut self, hz: f64) -> Result<Self> {
        if !(hz.is_finite() && hz > 0.0) {
            return Err(Error::invalid(alloc::format!(
                "sample rate must be positive and finite, got {hz}"
            )));
        }
        self.sample_rate_hz = Some(hz);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sample_rate_hz(&self) -> Option<f64> {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always `false`; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Builds a new series from this one's output, with an explicit id and rate.
    pub(crate) fn derive(&self, id: String, values: Vec<f64>, sample_rate_hz: Option<f64>) -> Self {
        Self {
            id,
            values,
            sample_rate_hz,
        }
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Class label; compared by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ClassLabel(String);

impl ClassLabel {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::invalid("class label must be non-empty"));
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ClassLabel {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ClassLabel> for String {
    fn from(label: ClassLabel) -> Self {
        label.0
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub series: TimeSeries,
    pub label: ClassLabel,
}

/// Collection of labelled series; series may have unequal lengths.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    entries: Vec<LabeledSeries>,
}

impl LabeledDataset {
    pub fn new(entries: Vec<LabeledSeries>) -> Self {
        Self { entries }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (TimeSeries, ClassLabel)>) -> Self {
        Self {
            entries: pairs
                .into_iter()
                .map(|(series, label)| LabeledSeries { series, label })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[LabeledSeries] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<LabeledSeries> {
        self.entries
    }

    pub fn push(&mut self, series: TimeSeries, label: ClassLabel) {
        self.entries.push(LabeledSeries { series, label });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn series(&self) -> impl Iterator<Item = &TimeSeries> {
        self.entries.iter().map(|e| &e.series)
    }

    pub fn labels(&self) -> impl Iterator<Item = &ClassLabel> {
        self.entries.iter().map(|e| &e.label)
    }

    /// Distinct labels in sorted order.
    pub fn classes(&self) -> Vec<ClassLabel> {
        let set: BTreeSet<&ClassLabel> = self.labels().collect();
        set.into_iter().cloned().collect()
    }

    pub fn min_len(&self) -> Option<usize> {
        self.series().map(TimeSeries::len).min()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationPolicy {
    #[default]
    ZNormalize,
    None,
}

/// Mean and population standard deviation of a non-empty slice.
///
/// Shared by [`znormalize`] and the distance kernel so that both normalize a
/// window to bit-identical values.
#[inline]
pub(crate) fn mean_std(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Shift to mean 0 and scale to population standard deviation 1.
///
/// Flat input (σ ≤ [`STD_EPSILON`]) maps to all zeros.
pub fn znormalize(x: &[f64]) -> Result<Vec<f64>> {
    if x.is_empty() {
        return Err(Error::invalid("cannot normalize an empty sequence"));
    }
    let (mean, std) = mean_std(x);
    if std > STD_EPSILON {
        Ok(x.iter().map(|&v| (v - mean) / std).collect())
    } else {
        Ok(alloc::vec![0.0; x.len()])
    }
}

pub(crate) fn normalize_with(x: &[f64], policy: NormalizationPolicy) -> Result<Vec<f64>> {
    match policy {
        NormalizationPolicy::ZNormalize => znormalize(x),
        NormalizationPolicy::None => Ok(x.to_vec()),
    }
}

/// Checks a dataset before discovery or training.
///
/// Fails when fewer than two classes are present, when any series is empty
/// or shorter than `min_len`, or when two series share an id.
pub fn validate_dataset(data: &LabeledDataset, min_len: usize) -> Result<()> {
    let mut report = ValidationReport::default();
    let classes = data.classes().len();
    if classes < 2 {
        report.issues.push(ValidationIssue::SingleClass { classes });
    }
    let mut seen = BTreeSet::new();
    for s in data.series() {
        if s.is_empty() {
            report.issues.push(ValidationIssue::EmptySeries {
                series_id: s.id().to_string(),
            });
        } else if s.len() < min_len {
            report.issues.push(ValidationIssue::TooShort {
                series_id: s.id().to_string(),
                len: s.len(),
                min_len,
            });
        }
        if !seen.insert(s.id()) {
            report.issues.push(ValidationIssue::DuplicateId {
                series_id: s.id().to_string(),
            });
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(Error::Validation(report))
    }
}
