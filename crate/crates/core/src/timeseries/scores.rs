use rayon::prelude::*;

use super::dataset::Dataset;
use super::dtw::{signed_path_score, DtwBuffer};
use super::window::WindowSpec;
use crate::error::Result;

/// Signed follow scores for every window and unordered entity pair.
///
/// `get(k, a, b)` is positive when `a` follows `b` in window `k`. Only one
/// alignment is computed per pair, so `get(k, a, b) == -get(k, b, a)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowScores {
    n: usize,
    windows: usize,
    pairs: Vec<(usize, usize)>,
    // window-major: values[k * pairs.len() + p] = score of pairs[p] = (a, b), a < b
    values: Vec<f64>,
}

impl FollowScores {
    /// Builds a grid from per-window score rows over the canonical pair order.
    pub fn from_rows(n: usize, rows: Vec<Vec<f64>>) -> Self {
        let pairs = pair_list(n);
        let windows = rows.len();
        let mut values = Vec::with_capacity(windows * pairs.len());
        for row in rows {
            assert_eq!(row.len(), pairs.len(), "row length must be n(n-1)/2");
            values.extend(row);
        }
        FollowScores {
            n,
            windows,
            pairs,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn window_count(&self) -> usize {
        self.windows
    }

    /// Unordered pairs `(a, b)` with `a < b`, in storage order.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Scores of window `k`, aligned with [`pairs`](Self::pairs); each is `s_ab`.
    pub fn window(&self, k: usize) -> &[f64] {
        let p = self.pairs.len();
        &self.values[k * p..(k + 1) * p]
    }

    /// `s_ab(k)`: positive when `a` follows `b`.
    pub fn get(&self, k: usize, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
        sign * self.window(k)[pair_index(self.n, lo, hi)]
    }
}

/// All unordered pairs `(a, b)`, `a < b`, in lexicographic order.
pub fn pair_list(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect()
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    // offset of row a in the upper triangle, then column
    a * (2 * n - a - 1) / 2 + (b - a - 1)
}

/// Follow score of `follower` over `leader` on one window: aligns the
/// leader's subsequence against the follower's, so a positive score means
/// the follower lags.
fn window_pair_score(
    dataset: &Dataset,
    start: usize,
    spec: &WindowSpec,
    follower: usize,
    leader: usize,
    buffer: &mut DtwBuffer,
) -> Result<f64> {
    let end = start + spec.omega;
    let m = dataset.dims();
    let lead: Vec<&[f64]> = (0..m).map(|d| &dataset.series(leader, d)[start..end]).collect();
    let follow: Vec<&[f64]> = (0..m)
        .map(|d| &dataset.series(follower, d)[start..end])
        .collect();
    let alignment = buffer.align(&lead, &follow, spec.beta)?;
    Ok(signed_path_score(&alignment.path))
}

fn window_row(dataset: &Dataset, spec: &WindowSpec, k: usize, pairs: &[(usize, usize)], buffer: &mut DtwBuffer) -> Result<Vec<f64>> {
    let start = k * spec.delta;
    pairs
        .iter()
        .map(|&(a, b)| window_pair_score(dataset, start, spec, a, b, buffer))
        .collect()
}

/// Follow scores for every window and pair, computed in parallel.
///
/// The result is bit-identical to [`pairwise_follow_scores_sequential`].
pub fn pairwise_follow_scores(dataset: &Dataset, spec: &WindowSpec) -> Result<FollowScores> {
    spec.validate()?;
    let n = dataset.n();
    let pairs = pair_list(n);
    let windows = spec.window_count(dataset.len());
    let rows: Vec<Vec<f64>> = (0..windows)
        .into_par_iter()
        .map_init(DtwBuffer::new, |buffer, k| {
            window_row(dataset, spec, k, &pairs, buffer)
        })
        .collect::<Result<_>>()?;
    Ok(FollowScores::from_rows(n, rows))
}

/// Single-threaded variant of [`pairwise_follow_scores`].
pub fn pairwise_follow_scores_sequential(
    dataset: &Dataset,
    spec: &WindowSpec,
) -> Result<FollowScores> {
    spec.validate()?;
    let n = dataset.n();
    let pairs = pair_list(n);
    let windows = spec.window_count(dataset.len());
    let mut buffer = DtwBuffer::new();
    let rows = (0..windows)
        .map(|k| window_row(dataset, spec, k, &pairs, &mut buffer))
        .collect::<Result<_>>()?;
    Ok(FollowScores::from_rows(n, rows))
}
