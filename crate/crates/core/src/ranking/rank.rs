use crate::error::{Error, Result};

/// Entities ordered best first, with tie-aware positions.
///
/// `order` is a strict permutation (exact ties broken by ascending entity
/// index). `ranks[e]` is entity `e`'s 1-based position; entities tied on the
/// underlying score share the mean of the positions they occupy.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOrder {
    order: Vec<usize>,
    ranks: Vec<f64>,
}

impl RankOrder {
    /// An order in which every entity ties.
    pub fn all_tied(n: usize) -> Self {
        let mid = (n as f64 + 1.0) / 2.0;
        RankOrder {
            order: (0..n).collect(),
            ranks: vec![mid; n],
        }
    }

    /// A strict order with no ties, given best first.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut ranks = vec![0.0; n];
        for (pos, &e) in order.iter().enumerate() {
            if e >= n || ranks[e] != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{order:?} is not a permutation"
                )));
            }
            ranks[e] = (pos + 1) as f64;
        }
        Ok(RankOrder { order, ranks })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Entities best first.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Tie-aware 1-based position of every entity.
    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn first(&self) -> usize {
        self.order[0]
    }

    /// The entity alone at 1-based `position`, or `None` when that slot is shared.
    pub fn unique_at(&self, position: usize) -> Option<usize> {
        let e = *self.order.get(position.checked_sub(1)?)?;
        (self.ranks[e] == position as f64).then_some(e)
    }

    /// Reverses the order; tie groups stay tied.
    pub fn reversed(&self) -> RankOrder {
        let n = self.len() as f64;
        RankOrder {
            order: self.order.iter().rev().copied().collect(),
            ranks: self.ranks.iter().map(|r| n + 1.0 - r).collect(),
        }
    }
}

/// Ranks entities by descending score.
pub fn rank_order(scores: &[f64]) -> RankOrder {
    rank_by(scores, |a, b| b.total_cmp(&a))
}

fn rank_by(keys: &[f64], cmp: impl Fn(f64, f64) -> std::cmp::Ordering) -> RankOrder {
    let n = keys.len();
    let mut order: Vec<usize> = (0..n).collect();
    // sort_by is stable, so equal keys keep ascending entity order
    order.sort_by(|&a, &b| cmp(keys[a], keys[b]));
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && keys[order[end]] == keys[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let shared = (start + 1 + end) as f64 / 2.0;
        for &e in &order[start..end] {
            ranks[e] = shared;
        }
        start = end;
    }
    RankOrder { order, ranks }
}

/// Mean position of every entity across several orders, re-ranked ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedRank {
    pub order: RankOrder,
    pub mean_rank: Vec<f64>,
}

/// Averages each entity's tie-aware position and ranks by that mean, lowest first.
pub fn aggregate_mean_rank(orders: &[RankOrder]) -> Result<AggregatedRank> {
    let Some(first) = orders.first() else {
        return Err(Error::InvalidParameter("no rank orders to aggregate".into()));
    };
    let n = first.len();
    if orders.iter().any(|o| o.len() != n) {
        return Err(Error::InvalidParameter(
            "rank orders over different entity sets".into(),
        ));
    }
    let mut mean_rank = vec![0.0; n];
    for o in orders {
        for (acc, r) in mean_rank.iter_mut().zip(o.ranks()) {
            *acc += r;
        }
    }
    let count = orders.len() as f64;
    mean_rank.iter_mut().for_each(|m| *m /= count);
    Ok(AggregatedRank {
        order: rank_by(&mean_rank, |a, b| a.total_cmp(&b)),
        mean_rank,
    })
}

/// Kendall's tau-b between two rankings of the same entities.
pub fn kendall_tau(a: &RankOrder, b: &RankOrder) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter(format!(
            "rankings of {} and {} entities",
            a.len(),
            b.len()
        )));
    }
    Ok(kendall_tau_b(a.ranks(), b.ranks()))
}

/// Tie-corrected Kendall correlation of two paired samples in `O(n log n)`.
///
/// When both samples are entirely tied the rankings carry identical (empty)
/// order information and the result is 1; when only one is, it is 0.
pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let pairs = |t: u64| t * t.saturating_sub(1) / 2;
    let total = pairs(n as u64);

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(y[i].total_cmp(&y[j])));

    // ties in x, and joint ties in (x, y)
    let (mut tied_x, mut tied_xy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for k in 1..=n {
        let same_x = k < n && x[idx[k]] == x[idx[k - 1]];
        let same_xy = same_x && y[idx[k]] == y[idx[k - 1]];
        if same_x {
            run_x += 1;
        } else {
            tied_x += pairs(run_x);
            run_x = 1;
        }
        if same_xy {
            run_xy += 1;
        } else {
            tied_xy += pairs(run_xy);
            run_xy = 1;
        }
    }

    let swaps = merge_sort_count(&mut idx, y);

    let mut tied_y = 0u64;
    let mut run_y = 1u64;
    for k in 1..=n {
        if k < n && y[idx[k]] == y[idx[k - 1]] {
            run_y += 1;
        } else {
            tied_y += pairs(run_y);
            run_y = 1;
        }
    }

    let untied_x = total - tied_x;
    let untied_y = total - tied_y;
    if untied_x == 0 || untied_y == 0 {
        return if untied_x == untied_y { 1.0 } else { 0.0 };
    }
    let score = total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    (score / ((untied_x as f64) * (untied_y as f64)).sqrt()).clamp(-1.0, 1.0)
}

/// Stable merge sort of `idx` by `key`, returning the number of inversions.
fn merge_sort_count(idx: &mut [usize], key: &[f64]) -> u64 {
    let n = idx.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_sort_count(&mut idx[..mid], key) + merge_sort_count(&mut idx[mid..], key);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if key[idx[j]] < key[idx[i]] {
            merged.push(idx[j]);
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            merged.push(idx[i]);
            i += 1;
        }
    }
    merged.extend_from_slice(&idx[i..mid]);
    merged.extend_from_slice(&idx[j..n]);
    idx.copy_from_slice(&merged);
    swaps
}
