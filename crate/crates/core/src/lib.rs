//! Shapelet discovery, the shapelet transform, and random-forest
//! classification of time series.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`discovery::discover`] searches every subsequence of a labelled
//!    training set for discriminative shapes, scoring each candidate by the
//!    information gain of the best distance threshold on its orderline.
//! 2. [`transform::shapelet_transform`] maps any set of series into an
//!    `n x k` matrix of minimum distances to the `k` discovered shapelets.
//! 3. [`forest::train`] grows a random forest over that matrix.
//! 4. [`forest::ForestModel::predict`] returns a label together with the
//!    mean class-probability estimate across all trees.
//!
//! [`preprocess`] holds the signal-conditioning steps used to turn
//! continuous sensor streams into fixed-length series (band-pass,
//! decimation, windowing, RMS envelopes, zero up-crossing waves).
//!
//! The crate is `no_std` + `alloc`. The `std` feature adds the FFT band-pass
//! filter and the `parallel` feature evaluates candidates, rows and trees on
//! the rayon thread pool. Results never depend on the number of threads.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(any(feature = "std", test))]
extern crate std;

pub mod discovery;
pub mod distance;
pub mod error;
pub mod forest;
pub mod preprocess;
pub mod quality;
pub mod series;
pub mod transform;

mod par;


pub use distance::{BestMatch, DistanceSettings};
pub use discovery::{discover, DiscoveryConfig, ResolvedDiscoveryConfig, Shapelet, ShapeletSet};
pub use transform::{shapelet_transform, TransformMatrix};
pub use error::{Error, Result, ValidationReport};
pub use forest::{evaluate, train, Evaluation, ForestConfig, ForestModel, Prediction};

pub use quality::{Orderline, SplitAssessment};
pub use series::{ClassLabel, LabeledDataset, LabeledSeries, NormalizationPolicy, TimeSeries};

