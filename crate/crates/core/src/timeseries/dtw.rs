//! Banded multidimensional dynamic time warping.
//!
//! Cells are compared with the Euclidean distance over all dimensions
//! (the "dependent" multidimensional variant). Steps are the symmetric
//! `(1,0)`, `(0,1)`, `(1,1)` pattern with unweighted cell costs and a
//! Sakoe-Chiba band `|j - i| <= beta`.

use crate::error::{Error, Result};

/// Monotone, contiguous sequence of `(i, j)` index pairs from `(0, 0)` to `(L-1, L-1)`.
///
/// `i` indexes the first series passed to [`dtw_d`], `j` the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath {
    pairs: Vec<(usize, usize)>,
}

impl WarpingPath {
    /// Wraps raw pairs, checking the path shape and band.
    pub fn new(pairs: Vec<(usize, usize)>, beta: usize) -> Result<Self> {
        let path = WarpingPath { pairs };
        path.check(beta)?;
        Ok(path)
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The same alignment seen from the other series.
    pub fn transposed(&self) -> WarpingPath {
        WarpingPath {
            pairs: self.pairs.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }

    /// Verifies start, end, step shape and band containment.
    pub fn check(&self, beta: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(format!("warping path: {msg}")));
        let Some(&first) = self.pairs.first() else {
            return bad("empty".into());
        };
        let last = *self.pairs.last().unwrap();
        if first != (0, 0) {
            return bad(format!("starts at {first:?}"));
        }
        if last.0 != last.1 {
            return bad(format!("ends off the diagonal at {last:?}"));
        }
        for w in self.pairs.windows(2) {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            if !matches!((di, dj), (1, 0) | (0, 1) | (1, 1)) {
                return bad(format!("illegal step {:?} -> {:?}", w[0], w[1]));
            }
        }
        if let Some(p) = self.pairs.iter().find(|(i, j)| i.abs_diff(*j) > beta) {
            return bad(format!("pair {p:?} outside band {beta}"));
        }
        Ok(())
    }
}

/// Optimal banded alignment of two equal-length subsequences.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub cost: f64,
    pub path: WarpingPath,
}

/// Reusable cumulative-cost buffer, so repeated alignments do not reallocate.
#[derive(Debug, Default, Clone)]
pub struct DtwBuffer {
    acc: Vec<f64>,
}

impl DtwBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Aligns `first` against `second`, each given as `m` dimension slices of equal length.
    pub fn align(&mut self, first: &[&[f64]], second: &[&[f64]], beta: usize) -> Result<Alignment> {
        let len = check_inputs(first, second, beta)?;
        self.fill(first, second, beta, len);
        let path = self.backtrack(len);
        debug_assert!(path.check(beta).is_ok());
        Ok(Alignment {
            cost: self.acc[len * len - 1],
            path,
        })
    }

    /// Cost only; skips path recovery.
    pub fn cost(&mut self, first: &[&[f64]], second: &[&[f64]], beta: usize) -> Result<f64> {
        let len = check_inputs(first, second, beta)?;
        self.fill(first, second, beta, len);
        Ok(self.acc[len * len - 1])
    }

    fn fill(&mut self, first: &[&[f64]], second: &[&[f64]], beta: usize, len: usize) {
        self.acc.clear();
        self.acc.resize(len * len, f64::INFINITY);
        let acc = &mut self.acc;
        for i in 0..len {
            let lo = i.saturating_sub(beta);
            let hi = (i + beta).min(len - 1);
            for j in lo..=hi {
                let cell = cell_distance(first, second, i, j);
                let best = if i == 0 && j == 0 {
                    0.0
                } else {
                    let diag = if i > 0 && j > 0 {
                        acc[(i - 1) * len + j - 1]
                    } else {
                        f64::INFINITY
                    };
                    let vert = if i > 0 { acc[(i - 1) * len + j] } else { f64::INFINITY };
                    let horiz = if j > 0 { acc[i * len + j - 1] } else { f64::INFINITY };
                    diag.min(vert).min(horiz)
                };
                acc[i * len + j] = best + cell;
            }
        }
    }

    // Ties prefer diagonal, then vertical (i - 1), then horizontal (j - 1).
    fn backtrack(&self, len: usize) -> WarpingPath {
        let acc = &self.acc;
        let (mut i, mut j) = (len - 1, len - 1);
        let mut pairs = Vec::with_capacity(2 * len);
        pairs.push((i, j));
        while (i, j) != (0, 0) {
            let diag = if i > 0 && j > 0 {
                acc[(i - 1) * len + j - 1]
            } else {
                f64::INFINITY
            };
            let vert = if i > 0 { acc[(i - 1) * len + j] } else { f64::INFINITY };
            let horiz = if j > 0 { acc[i * len + j - 1] } else { f64::INFINITY };
            if i > 0 && j > 0 && diag <= vert && diag <= horiz {
                i -= 1;
                j -= 1;
            } else if i > 0 && vert <= horiz {
                i -= 1;
            } else {
                j -= 1;
            }
            pairs.push((i, j));
        }
        pairs.reverse();
        WarpingPath { pairs }
    }
}

fn check_inputs(first: &[&[f64]], second: &[&[f64]], beta: usize) -> Result<usize> {
    if first.len() != second.len() || first.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "dimension mismatch: {} vs {}",
            first.len(),
            second.len()
        )));
    }
    let len = first[0].len();
    for s in first.iter().chain(second) {
        if s.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: s.len(),
            });
        }
    }
    if len < 2 {
        return Err(Error::TooShort(len));
    }
    if beta < 1 {
        return Err(Error::InvalidParameter("beta must be >= 1".into()));
    }
    Ok(len)
}

#[inline]
fn cell_distance(first: &[&[f64]], second: &[&[f64]], i: usize, j: usize) -> f64 {
    first
        .iter()
        .zip(second)
        .map(|(a, b)| {
            let d = a[i] - b[j];
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Banded DTW between two `m x L` subsequences.
pub fn dtw_d(first: &[&[f64]], second: &[&[f64]], beta: usize) -> Result<Alignment> {
    DtwBuffer::new().align(first, second, beta)
}

/// Mean of `sign(j - i)` over the path, in `[-1, 1]`.
///
/// Positive when the second series lags the first, i.e. the second follows
/// the first; negative when the first follows the second.
pub fn signed_path_score(path: &WarpingPath) -> f64 {
    let total: i64 = path
        .pairs()
        .iter()
        .map(|&(i, j)| (j as i64 - i as i64).signum())
        .sum();
    total as f64 / path.len() as f64
}
