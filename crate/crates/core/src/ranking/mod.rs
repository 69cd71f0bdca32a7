//! Leadership ranking: PageRank on following networks and convex-hull indicators.

pub mod hull;
pub mod indicators;
pub mod leadership;
pub mod pagerank;
pub mod rank;

pub use hull::{convex_hull_2d, Hull, Point};
pub use indicators::{pch_indicator, pch_indicators_at, position_hull, vch_indicator, vch_indicators_at, SPEED_RTOL};
pub use leadership::{
    argmax_support, corr_cross, feature_vector, EventRanking, FeatureVector, LeadershipContext, Measure,
    MeasureRankings,
};
pub use pagerank::{pagerank, PageRank, PageRankConfig};
pub use rank::{aggregate_mean_rank, kendall_tau, kendall_tau_b, rank_order, AggregatedRank, RankOrder};
