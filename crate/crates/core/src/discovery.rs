//! Shapelet discovery: exhaustive (optionally strided) search over every
//! subsequence of every training series.
//!
//! For each source series, every candidate is z-normalized, scored by the
//! best information-gain split of its orderline, and dropped if it falls
//! below the quality threshold. Survivors are ranked, overlapping candidates
//! from the same series are pruned greedily, and the rest are merged into a
//! running set holding at most `r / numC` shapelets per class.
//!
//! Ranking uses a strict total order (IG desc, margin desc, length asc,
//! source id, offset), so the result does not depend on dataset order or on
//! how work is scheduled across threads.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::distance::{DistanceSettings, Subsequence};
use crate::error::{Error, Result};
use crate::par;
use crate::quality::{best_split_sorted, SplitAssessment};
use crate::series::{
    normalize_with, validate_dataset, ClassLabel, LabeledDataset, NormalizationPolicy, TimeSeries,
};

/// Shortest subsequence considered meaningful.
pub const MIN_SHAPELET_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscoveryConfig {
    pub min_len: usize,
    /// Defaults to the length of the shortest series.
    pub max_len: Option<usize>,
    /// Maximum number of shapelets kept; defaults to 10 x dataset size.
    pub r: Option<usize>,
    pub quality_threshold: f64,
    pub length_step: usize,
    pub position_stride: usize,
    pub normalization: NormalizationPolicy,
    pub length_normalize: bool,
    /// Echoed into artifacts; the exhaustive search itself draws no random numbers.
    pub seed: u64,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            min_len: MIN_SHAPELET_LEN,
            max_len: None,
            r: None,
            quality_threshold: 0.05,
            length_step: 1,
            position_stride: 1,
            normalization: NormalizationPolicy::ZNormalize,
            length_normalize: true,
            seed: 0,
        }
    }
}

/// A [`DiscoveryConfig`] with every default filled in against a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolvedDiscoveryConfig {
    pub min_len: usize,
    pub max_len: usize,
    pub r: usize,
    pub num_classes: usize,
    pub per_class_cap: usize,
    pub quality_threshold: f64,
    pub length_step: usize,
    pub position_stride: usize,
    pub distance: DistanceSettings,
    pub seed: u64,
}

impl DiscoveryConfig {
    pub fn resolve(&self, data: &LabeledDataset) -> Result<ResolvedDiscoveryConfig> {
        if self.min_len < MIN_SHAPELET_LEN {
            return Err(Error::invalid(alloc::format!(
                "min_len must be at least {MIN_SHAPELET_LEN}, got {}",
                self.min_len
            )));
        }
        validate_dataset(data, self.min_len)?;
        let shortest = data.min_len().expect("validated dataset is non-empty");
        let max_len = self.max_len.unwrap_or(shortest);
        if max_len < self.min_len || max_len > shortest {
            return Err(Error::invalid(alloc::format!(
                "need min_len <= max_len <= shortest series ({} <= {max_len} <= {shortest})",
                self.min_len
            )));
        }
        if self.length_step == 0 || self.position_stride == 0 {
            return Err(Error::invalid("length_step and position_stride must be at least 1"));
        }
        if !self.quality_threshold.is_finite() {
            return Err(Error::invalid("quality_threshold must be finite"));
        }
        let num_classes = data.classes().len();
        let r = self.r.unwrap_or(10 * data.len());
        if r < num_classes {
            return Err(Error::invalid(alloc::format!(
                "r = {r} is smaller than the number of classes ({num_classes})"
            )));
        }
        Ok(ResolvedDiscoveryConfig {
            min_len: self.min_len,
            max_len,
            r,
            num_classes,
            per_class_cap: r / num_classes,
            quality_threshold: self.quality_threshold,
            length_step: self.length_step,
            position_stride: self.position_stride,
            distance: DistanceSettings {
                normalization: self.normalization,
                length_normalize: self.length_normalize,
            },
            seed: self.seed,
        })
    }
}

impl ResolvedDiscoveryConfig {
    pub fn lengths(&self) -> impl Iterator<Item = usize> {
        (self.min_len..=self.max_len).step_by(self.length_step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Shapelet {
    /// Candidate values after normalization.
    pub values: Vec<f64>,
    pub source_id: String,
    pub offset: usize,
    pub length: usize,
    pub ig: f64,
    pub split_threshold: f64,
    pub margin: f64,
    /// Majority class on the near side of the split.
    pub class_label: ClassLabel,
}

impl Shapelet {
    /// Provenance key, `<source>@<offset>+<length>`.
    pub fn key(&self) -> String {
        alloc::format!("{}@{}+{}", self.source_id, self.offset, self.length)
    }

    pub fn end(&self) -> usize {
        self.offset + self.length
    }

    /// Same source series and intersecting index ranges.
    pub fn is_self_similar(&self, other: &Shapelet) -> bool {
        self.source_id == other.source_id && self.offset < other.end() && other.offset < self.end()
    }

    pub fn assessment(&self) -> SplitAssessment {
        SplitAssessment {
            information_gain: self.ig,
            split_threshold: self.split_threshold,
            margin: self.margin,
        }
    }
}

/// Total ranking order; `Less` means `a` ranks first.
pub fn cmp_quality(a: &Shapelet, b: &Shapelet) -> Ordering {
    b.ig.total_cmp(&a.ig)
        .then(b.margin.total_cmp(&a.margin))
        .then(a.length.cmp(&b.length))
        .then_with(|| a.source_id.cmp(&b.source_id))
        .then(a.offset.cmp(&b.offset))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeletSet {
    pub config: ResolvedDiscoveryConfig,
    /// Sorted by [`cmp_quality`].
    pub shapelets: Vec<Shapelet>,
}

impl ShapeletSet {
    pub fn len(&self) -> usize {
        self.shapelets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapelets.is_empty()
    }

    pub fn keys(&self) -> Vec<String> {
        self.shapelets.iter().map(Shapelet::key).collect()
    }

    pub fn distance_settings(&self) -> DistanceSettings {
        self.config.distance
    }
}

/// Every subsequence of `ts` with length in `min_len, min_len + step, ..,
/// <= max_len` and offset in `0, stride, ..`, shortest lengths first.
///
/// `max_len` defaults to the series length; a zero step or stride counts as 1.
pub fn generate_candidates<'a>(
    ts: &'a TimeSeries,
    cfg: &DiscoveryConfig,
) -> impl Iterator<Item = Subsequence<'a>> + 'a {
    let m = ts.len();
    let max_len = cfg.max_len.unwrap_or(m).min(m);
    candidates(
        ts,
        cfg.min_len.max(1),
        max_len,
        cfg.length_step.max(1),
        cfg.position_stride.max(1),
    )
}

fn candidates(
    ts: &TimeSeries,
    min_len: usize,
    max_len: usize,
    step: usize,
    stride: usize,
) -> impl Iterator<Item = Subsequence<'_>> {
    let values = ts.values();
    let id = ts.id();
    (min_len..=max_len).step_by(step).flat_map(move |len| {
        let last = values.len().saturating_sub(len);
        (0..=last)
            .step_by(stride)
            .filter(move |_| len <= values.len())
            .map(move |offset| Subsequence {
                source_id: id,
                offset,
                values: &values[offset..offset + len],
            })
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateQuality {
    pub assessment: SplitAssessment,
    pub class_label: ClassLabel,
}

/// Scores one candidate against every series of `data`, its own included.
pub fn evaluate_candidate(
    candidate: &Subsequence<'_>,
    data: &LabeledDataset,
    cfg: &ResolvedDiscoveryConfig,
) -> Result<CandidateQuality> {
    let ctx = Context::new(data);
    let len = candidate.len();
    if let Some(s) = data.series().find(|s| s.len() < len) {
        return Err(Error::invalid(alloc::format!(
            "candidate of length {len} is longer than series `{}` ({})",
            s.id(),
            s.len()
        )));
    }
    let stats = ctx.window_stats(&cfg.distance, len);
    let query = normalize_with(candidate.values, cfg.distance.normalization)?;
    let (assessment, class) = ctx.score(&query, &stats, &cfg.distance);
    Ok(CandidateQuality {
        assessment,
        class_label: ctx.classes[class].clone(),
    })
}

/// Greedily keeps shapelets (in the given order) that are not self-similar
/// to an already kept one.
pub fn remove_self_similar(shapelets: Vec<Shapelet>) -> Vec<Shapelet> {
    // kept intervals per source, start -> end; kept intervals are disjoint
    let mut kept_ranges: BTreeMap<String, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut kept = Vec::new();
    for s in shapelets {
        let ranges = kept_ranges.entry(s.source_id.clone()).or_default();
        let overlaps = ranges
            .range(..s.end())
            .next_back()
            .is_some_and(|(_, &end)| end > s.offset);
        if !overlaps {
            ranges.insert(s.offset, s.end());
            kept.push(s);
        }
    }
    kept
}

/// Runs the full discovery search.
pub fn discover(data: &LabeledDataset, cfg: &DiscoveryConfig) -> Result<ShapeletSet> {
    let cfg = cfg.resolve(data)?;
    let ctx = Context::new(data);
    let lengths: Vec<usize> = cfg.lengths().collect();

    let mut top: Vec<Vec<Shapelet>> = vec![Vec::new(); ctx.classes.len()];
    let mut evaluated: u64 = 0;
    let mut best_ig = 0.0f64;

    for source in data.series() {
        let mut found: Vec<Shapelet> = Vec::new();
        for &len in &lengths {
            let stats = ctx.window_stats(&cfg.distance, len);
            let offsets: Vec<usize> = (0..=source.len() - len).step_by(cfg.position_stride).collect();
            let scored = par::map_range(offsets.len(), |k| {
                let offset = offsets[k];
                let window = &source.values()[offset..offset + len];
                let query = normalize_with(window, cfg.distance.normalization)
                    .expect("window is non-empty and finite");
                let (assessment, class) = ctx.score(&query, &stats, &cfg.distance);
                (query, offset, assessment, class)
            });
            evaluated += scored.len() as u64;
            for (values, offset, a, class) in scored {
                best_ig = best_ig.max(a.information_gain);
                if a.information_gain >= cfg.quality_threshold {
                    found.push(Shapelet {
                        values,
                        source_id: source.id().into(),
                        offset,
                        length: len,
                        ig: a.information_gain,
                        split_threshold: a.split_threshold,
                        margin: a.margin,
                        class_label: ctx.classes[class].clone(),
                    });
                }
            }
        }
        found.sort_by(cmp_quality);
        for s in remove_self_similar(found) {
            let class = ctx.class_index(&s.class_label);
            top[class].push(s);
        }
        for bucket in &mut top {
            bucket.sort_by(cmp_quality);
            bucket.truncate(cfg.per_class_cap);
        }
    }

    let mut shapelets: Vec<Shapelet> = top.into_iter().flatten().collect();
    if shapelets.is_empty() {
        return Err(Error::EmptyResult {
            candidates_evaluated: evaluated,
            best_ig,
            quality_threshold: cfg.quality_threshold,
        });
    }
    shapelets.sort_by(cmp_quality);
    Ok(ShapeletSet {
        config: cfg,
        shapelets,
    })
}

/// Dataset view with labels mapped to indices into the sorted class list.
struct Context<'a> {
    data: &'a LabeledDataset,
    classes: Vec<ClassLabel>,
    class_of: Vec<usize>,
}

impl<'a> Context<'a> {
    fn new(data: &'a LabeledDataset) -> Self {
        let classes = data.classes();
        let class_of = data
            .labels()
            .map(|l| classes.binary_search(l).expect("label is in class list"))
            .collect();
        Self {
            data,
            classes,
            class_of,
        }
    }

    fn class_index(&self, label: &ClassLabel) -> usize {
        self.classes.binary_search(label).expect("label is in class list")
    }

    fn window_stats(&self, settings: &DistanceSettings, len: usize) -> Vec<Option<Vec<(f64, f64)>>> {
        let series: Vec<&TimeSeries> = self.data.series().collect();
        par::map_range(series.len(), |i| settings.stats_for(series[i].values(), len))
    }

    /// Best split of the candidate's orderline and the near-side class.
    fn score(
        &self,
        query: &[f64],
        stats: &[Option<Vec<(f64, f64)>>],
        settings: &DistanceSettings,
    ) -> (SplitAssessment, usize) {
        let mut orderline: Vec<(f64, usize)> = self
            .data
            .series()
            .zip(stats)
            .zip(&self.class_of)
            .map(|((s, st), &c)| (settings.distance_prepared(query, s.values(), st.as_deref()), c))
            .collect();
        orderline.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let search = best_split_sorted(&orderline, self.classes.len());
        let near = if search.left.iter().any(|&c| c > 0) {
            search.left
        } else {
            let mut all = vec![0; self.classes.len()];
            for &(_, c) in &orderline {
                all[c] += 1;
            }
            all
        };
        (search.assessment, majority(&near))
    }
}

/// Index of the largest count; ties go to the lowest index.
fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
