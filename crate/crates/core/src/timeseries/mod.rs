//! Dataset model, sliding windows, banded DTW and the signed follow score.

mod dataset;
mod dtw;
mod scores;
mod window;

pub use dataset::{velocity_matrix, Dataset};
pub use dtw::{dtw_d, signed_path_score, Alignment, DtwBuffer, WarpingPath};
pub use scores::{pair_list, pairwise_follow_scores, pairwise_follow_scores_sequential, FollowScores};
pub use window::{window_interval, WindowSpec};
