//! Shapelet transform: each series becomes the vector of its minimum
//! distances to the discovered shapelets.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::discovery::ShapeletSet;
use crate::error::{Error, Result};
use crate::par;
use crate::series::{ClassLabel, LabeledDataset, TimeSeries};

/// Row-major `rows x cols` matrix of non-negative distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    labels: Option<Vec<ClassLabel>>,
    shapelet_ids: Vec<String>,
}

impl TransformMatrix {
    pub fn new(
        rows: Vec<Vec<f64>>,
        labels: Option<Vec<ClassLabel>>,
        shapelet_ids: Vec<String>,
    ) -> Result<Self> {
        let cols = shapelet_ids.len();
        let n = rows.len();
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::invalid(alloc::format!(
                    "{} labels for {n} rows",
                    labels.len()
                )));
            }
        }
        let mut values = Vec::with_capacity(n * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::invalid(alloc::format!(
                    "row {i} has {} values, expected {cols}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::invalid(alloc::format!(
                    "row {i} holds {v}; distances must be finite and non-negative"
                )));
            }
            values.extend(row);
        }
        Ok(Self {
            rows: n,
            cols,
            values,
            labels,
            shapelet_ids,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn labels(&self) -> Option<&[ClassLabel]> {
        self.labels.as_deref()
    }

    pub fn shapelet_ids(&self) -> &[String] {
        &self.shapelet_ids
    }
}

/// Transforms a labelled dataset; labels are carried through unchanged.
pub fn shapelet_transform(data: &LabeledDataset, shapelets: &ShapeletSet) -> Result<TransformMatrix> {
    let series: Vec<&TimeSeries> = data.series().collect();
    let rows = transform_rows(&series, shapelets)?;
    TransformMatrix::new(rows, Some(data.labels().cloned().collect()), shapelets.keys())
}

/// Transforms series that carry no labels.
pub fn transform_unlabeled(series: &[TimeSeries], shapelets: &ShapeletSet) -> Result<TransformMatrix> {
    let refs: Vec<&TimeSeries> = series.iter().collect();
    let rows = transform_rows(&refs, shapelets)?;
    TransformMatrix::new(rows, None, shapelets.keys())
}

/// Distances from one series to every shapelet, in set order.
pub fn transform_row(series: &TimeSeries, shapelets: &ShapeletSet) -> Result<Vec<f64>> {
    check_row(series, shapelets)?;
    let settings = shapelets.distance_settings();
    let mut stats_by_len: BTreeMap<usize, Option<Vec<(f64, f64)>>> = BTreeMap::new();
    Ok(shapelets
        .shapelets
        .iter()
        .map(|s| {
            let stats = stats_by_len
                .entry(s.values.len())
                .or_insert_with(|| settings.stats_for(series.values(), s.values.len()));
            settings.distance_prepared(&s.values, series.values(), stats.as_deref())
        })
        .collect())
}

fn check_row(series: &TimeSeries, shapelets: &ShapeletSet) -> Result<()> {
    for (j, s) in shapelets.shapelets.iter().enumerate() {
        if s.values.len() > series.len() || s.values.is_empty() {
            return Err(Error::ShapeletTooLong {
                series_id: series.id().into(),
                series_len: series.len(),
                shapelet_index: j,
                shapelet_len: s.values.len(),
            });
        }
    }
    Ok(())
}

fn transform_rows(series: &[&TimeSeries], shapelets: &ShapeletSet) -> Result<Vec<Vec<f64>>> {
    for s in series {
        check_row(s, shapelets)?;
    }
    par::map_range(series.len(), |i| transform_row(series[i], shapelets))
        .into_iter()
        .collect()
}
