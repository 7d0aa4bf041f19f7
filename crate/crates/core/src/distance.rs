//! Squared Euclidean distance and the sliding-window minimum distance kernel.
//!
//! The kernel z-normalizes every window of the series (when the policy asks
//! for it) and accumulates squared differences left to right, abandoning a
//! window as soon as its partial sum exceeds the best complete window seen so
//! far. Partial sums of non-negative terms never decrease, so abandonment
//! cannot change the minimum, and because a window is normalized with the
//! same arithmetic as [`znormalize`](crate::series::znormalize) the result is
//! bit-identical to a naive full scan.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{mean_std, NormalizationPolicy, TimeSeries, STD_EPSILON};

/// A contiguous slice `[offset, offset + values.len())` of a source series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subsequence<'a> {
    pub source_id: &'a str,
    pub offset: usize,
    pub values: &'a [f64],
}

impl Subsequence<'_> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn end(&self) -> usize {
        self.offset + self.values.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestMatch {
    pub distance: f64,
    pub offset: usize,
}

/// How shapelet-to-series distances are computed; persisted with every
/// shapelet set so the transform always matches discovery.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistanceSettings {
    pub normalization: NormalizationPolicy,
    /// Divide the minimum by the shapelet length.
    pub length_normalize: bool,
}

impl Default for DistanceSettings {
    fn default() -> Self {
        Self {
            normalization: NormalizationPolicy::ZNormalize,
            length_normalize: true,
        }
    }
}

impl DistanceSettings {
    pub fn distance(&self, shapelet: &[f64], series: &[f64]) -> Result<f64> {
        check_lengths(shapelet.len(), series.len())?;
        let stats = self.stats_for(series, shapelet.len());
        Ok(self.distance_prepared(shapelet, series, stats.as_deref()))
    }

    pub(crate) fn stats_for(&self, series: &[f64], len: usize) -> Option<Vec<(f64, f64)>> {
        match self.normalization {
            NormalizationPolicy::ZNormalize => Some(window_stats(series, len)),
            NormalizationPolicy::None => None,
        }
    }

    /// Distance with precomputed window statistics; lengths already checked.
    pub(crate) fn distance_prepared(
        &self,
        shapelet: &[f64],
        series: &[f64],
        stats: Option<&[(f64, f64)]>,
    ) -> f64 {
        let best = scan_min(shapelet, series, stats, f64::INFINITY)
            .expect("an unbounded scan always completes at least one window");
        if self.length_normalize {
            best.distance / shapelet.len() as f64
        } else {
            best.distance
        }
    }
}

/// Squared Euclidean distance between two equal-length sequences.
pub fn dist(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::invalid(alloc::format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Minimum distance between `shapelet` and every window of `series`.
///
/// `shapelet` must already be normalized according to `policy`. Ties resolve
/// to the smallest offset.
pub fn min_subsequence_distance(
    shapelet: &[f64],
    series: &TimeSeries,
    policy: NormalizationPolicy,
) -> Result<BestMatch> {
    Ok(min_subsequence_distance_bounded(shapelet, series, policy, f64::INFINITY)?
        .expect("an unbounded scan always completes at least one window"))
}

/// As [`min_subsequence_distance`], but windows whose partial sum exceeds
/// `best_so_far` are abandoned from the start.
///
/// Returns the exact minimum when it is `<= best_so_far`, otherwise `None`.
pub fn min_subsequence_distance_bounded(
    shapelet: &[f64],
    series: &TimeSeries,
    policy: NormalizationPolicy,
    best_so_far: f64,
) -> Result<Option<BestMatch>> {
    check_lengths(shapelet.len(), series.len())?;
    let values = series.values();
    let stats = match policy {
        NormalizationPolicy::ZNormalize => Some(window_stats(values, shapelet.len())),
        NormalizationPolicy::None => None,
    };
    Ok(scan_min(shapelet, values, stats.as_deref(), best_so_far))
}

/// [`min_subsequence_distance`] divided by the shapelet length.
pub fn length_normalized_min_distance(
    shapelet: &[f64],
    series: &TimeSeries,
    policy: NormalizationPolicy,
) -> Result<f64> {
    let best = min_subsequence_distance(shapelet, series, policy)?;
    Ok(best.distance / shapelet.len() as f64)
}

fn check_lengths(shapelet_len: usize, series_len: usize) -> Result<()> {
    if shapelet_len == 0 {
        return Err(Error::invalid("shapelet is empty"));
    }
    if shapelet_len > series_len {
        return Err(Error::invalid(alloc::format!(
            "shapelet length {shapelet_len} exceeds series length {series_len}"
        )));
    }
    Ok(())
}

/// `(mean, population std)` of every window of length `len`.
pub(crate) fn window_stats(series: &[f64], len: usize) -> Vec<(f64, f64)> {
    series.windows(len).map(mean_std).collect()
}

/// Early-abandoning scan. `stats` is `Some` for z-normalized windows.
pub(crate) fn scan_min(
    query: &[f64],
    series: &[f64],
    stats: Option<&[(f64, f64)]>,
    bound: f64,
) -> Option<BestMatch> {
    let len = query.len();
    let mut found: Option<BestMatch> = None;
    let mut best = bound;
    for (offset, window) in series.windows(len).enumerate() {
        let acc = match stats {
            Some(stats) => {
                let (mean, std) = stats[offset];
                if std > STD_EPSILON {
                    accumulate(query, window.iter().map(|&v| (v - mean) / std), best)
                } else {
                    accumulate(query, core::iter::repeat(0.0), best)
                }
            }
            None => accumulate(query, window.iter().copied(), best),
        };
        let Some(acc) = acc else { continue };
        let better = match found {
            None => true,
            Some(ref current) => acc < current.distance,
        };
        if better {
            found = Some(BestMatch {
                distance: acc,
                offset,
            });
            best = acc;
        }
    }
    found
}

/// Sum of squared differences, or `None` once the running sum exceeds `bound`.
#[inline]
fn accumulate(query: &[f64], window: impl Iterator<Item = f64>, bound: f64) -> Option<f64> {
    let mut acc = 0.0;
    for (&q, w) in query.iter().zip(window) {
        let d = q - w;
        acc += d * d;
        if acc > bound {
            return None;
        }
    }
    Some(acc)
}
