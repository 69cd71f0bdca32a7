//! Leadership inference from multivariate movement time series.
//!
//! Pairwise following is measured with banded multidimensional DTW over
//! sliding windows. The resulting network sequence marks coordination
//! events, and entities are ranked within each event by PageRank and by
//! velocity and position convex-hull indicators.

pub mod classify;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod netinfer;
pub mod pipeline;
pub mod ranking;
pub mod simulate;
pub mod timeseries;

pub use classify::{Forest, ForestConfig, Label, LabeledSample};
pub use error::{Error, ErrorClass, Result};
pub use io::{ingest_csv, IngestOptions};
pub use netinfer::{CoordinationEvent, Edge, FollowingNetworkSequence, ThresholdPolicy};
pub use pipeline::{analyse, Analysis, PipelineConfig};
pub use ranking::{FeatureVector, Measure, PageRankConfig, RankOrder};
pub use simulate::{simulate, Model, SimConfig, Trial};
pub use timeseries::{Dataset, FollowScores, WarpingPath, WindowSpec};
