//! Signal conditioning for continuous records: band-pass filtering,
//! decimation, fixed-length windowing, RMS envelopes and zero up-crossing
//! wave extraction, plus class balancing for training sets.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{ClassLabel, LabeledDataset, LabeledSeries, TimeSeries};

/// What to do with samples left over after the last full window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrailingWindow {
    #[default]
    Drop,
    Keep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentationSpec {
    pub window_seconds: f64,
    pub sample_rate_hz: f64,
    #[serde(default)]
    pub trailing: TrailingWindow,
}

impl SegmentationSpec {
    pub fn new(window_seconds: f64, sample_rate_hz: f64, trailing: TrailingWindow) -> Result<Self> {
        let spec = Self { window_seconds, sample_rate_hz, trailing };
        spec.window_len()?;
        Ok(spec)
    }

    /// Samples per window; `window_seconds * sample_rate_hz` must be a positive integer.
    pub fn window_len(&self) -> Result<usize> {
        let (w, r) = (self.window_seconds, self.sample_rate_hz);
        if !(w.is_finite() && w > 0.0 && r.is_finite() && r > 0.0) {
            return Err(Error::invalid(format!(
                "window_seconds and sample_rate_hz must be positive, got {w} and {r}"
            )));
        }
        let n = w * r;
        let rounded = libm::round(n);
        if rounded < 1.0 || libm::fabs(n - rounded) > 1e-9 * rounded {
            return Err(Error::invalid(format!(
                "{w} s at {r} Hz is not a whole number of samples"
            )));
        }
        Ok(rounded as usize)
    }
}

/// Zero-phase band-pass: FFT, zero every bin outside `[low_hz, high_hz]`, inverse FFT.
#[cfg(feature = "std")]
pub fn bandpass(x: &TimeSeries, low_hz: f64, high_hz: f64) -> Result<TimeSeries> {
    use rustfft::num_complex::Complex;
    use rustfft::FftPlanner;

    let rate = x
        .sample_rate_hz()
        .ok_or_else(|| Error::invalid(format!("series `{}` has no sample rate", x.id())))?;
    if !(0.0 < low_hz && low_hz < high_hz && high_hz < rate / 2.0) {
        return Err(Error::invalid(format!(
            "band [{low_hz}, {high_hz}] Hz must satisfy 0 < low < high < {}",
            rate / 2.0
        )));
    }
    let m = x.len();
    let mut buf: Vec<Complex<f64>> = x.values().iter().map(|&v| Complex::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(m - k) as f64 * rate / m as f64;
        if f < low_hz || f > high_hz {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    let values = buf.iter().map(|c| c.re / m as f64).collect();
    Ok(x.derive(x.id().into(), values, Some(rate)))
}

/// Keeps samples `0, factor, 2 * factor, ...`; no anti-alias filtering.
pub fn decimate(x: &TimeSeries, factor: usize) -> Result<TimeSeries> {
    if factor == 0 {
        return Err(Error::invalid("decimation factor must be at least 1"));
    }
    let values = x.values().iter().step_by(factor).copied().collect();
    let rate = x.sample_rate_hz().map(|r| r / factor as f64);
    Ok(x.derive(x.id().into(), values, rate))
}

/// Splits into consecutive non-overlapping windows with ids `<parent>#<index>`.
///
/// A series with a sample rate different from the spec's is rejected. With
/// [`TrailingWindow::Drop`] a series shorter than one window yields nothing.
pub fn segment(x: &TimeSeries, spec: &SegmentationSpec) -> Result<Vec<TimeSeries>> {
    let w = spec.window_len()?;
    if let Some(rate) = x.sample_rate_hz() {
        if rate != spec.sample_rate_hz {
            return Err(Error::invalid(format!(
                "series `{}` is sampled at {rate} Hz, segmentation expects {} Hz",
                x.id(),
                spec.sample_rate_hz
            )));
        }
    }
    Ok(x.values()
        .chunks(w)
        .filter(|c| c.len() == w || spec.trailing == TrailingWindow::Keep)
        .enumerate()
        .map(|(i, c)| x.derive(format!("{}#{i}", x.id()), c.to_vec(), Some(spec.sample_rate_hz)))
        .collect())
}

/// Upper and lower RMS envelopes over a centred window truncated at the edges.
///
/// The window at `i` covers `[i - (window - 1) / 2, i + window / 2]`.
pub fn rms_envelope(x: &TimeSeries, window: usize) -> Result<(TimeSeries, TimeSeries)> {
    let m = x.len();
    if window == 0 || window > m {
        return Err(Error::invalid(format!(
            "envelope window must be in [1, {m}], got {window}"
        )));
    }
    let v = x.values();
    let upper: Vec<f64> = (0..m)
        .map(|i| {
            let lo = i.saturating_sub((window - 1) / 2);
            let hi = (i + window / 2).min(m - 1);
            let sum: f64 = v[lo..=hi].iter().map(|s| s * s).sum();
            libm::sqrt(sum / (hi - lo + 1) as f64)
        })
        .collect();
    let lower = upper.iter().map(|u| -u).collect();
    let rate = x.sample_rate_hz();
    Ok((
        x.derive(x.id().into(), upper, rate),
        x.derive(x.id().into(), lower, rate),
    ))
}

/// Waves between consecutive zero up-crossings, with ids `<parent>#<index>`.
///
/// An up-crossing is an `i` with `x[i] < 0 <= x[i + 1]`; each wave starts at
/// `i + 1`. Samples before the first and after the last crossing are dropped.
pub fn zero_upcross_waves(x: &TimeSeries) -> Vec<TimeSeries> {
    let v = x.values();
    let starts: Vec<usize> = v
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] < 0.0 && w[1] >= 0.0)
        .map(|(i, _)| i + 1)
        .collect();
    starts
        .windows(2)
        .enumerate()
        .map(|(k, s)| {
            x.derive(format!("{}#{k}", x.id()), v[s[0]..s[1]].to_vec(), x.sample_rate_hz())
        })
        .collect()
}

/// Randomly subsamples every class down to the minority-class count.
///
/// Kept series stay in their original order.
pub fn balance_by_downsampling(data: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let mut by_class: BTreeMap<&ClassLabel, Vec<usize>> = BTreeMap::new();
    for (i, label) in data.labels().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    if by_class.len() < 2 {
        return Err(Error::invalid("balancing needs at least 2 classes"));
    }
    let target = by_class.values().map(Vec::len).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = alloc::vec![false; data.len()];
    for members in by_class.values() {
        for j in rand::seq::index::sample(&mut rng, members.len(), target) {
            keep[members[j]] = true;
        }
    }
    let entries: Vec<LabeledSeries> = data
        .entries()
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect();
    Ok(LabeledDataset::new(entries))
}
