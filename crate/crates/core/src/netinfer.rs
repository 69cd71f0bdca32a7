//! Following networks, network density and coordination event detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeseries::FollowScores;

/// Directed edge `follower -> leader` with weight `|s|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub follower: usize,
    pub leader: usize,
    pub weight: f64,
}

/// One directed, weighted graph per window.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowingNetworkSequence {
    n: usize,
    windows: Vec<Vec<Edge>>,
}

impl FollowingNetworkSequence {
    pub fn new(n: usize, windows: Vec<Vec<Edge>>) -> Self {
        FollowingNetworkSequence { n, windows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn edges(&self, k: usize) -> &[Edge] {
        &self.windows[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Edge]> {
        self.windows.iter().map(Vec::as_slice)
    }

    pub fn density(&self, k: usize) -> f64 {
        density(self.n, self.windows[k].len())
    }

    pub fn density_series(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.density(k)).collect()
    }

    /// Collapses all windows into one graph, summing the weight of each directed edge.
    pub fn aggregate(&self) -> Vec<Edge> {
        let mut weights = vec![0.0; self.n * self.n];
        for edges in &self.windows {
            for e in edges {
                weights[e.follower * self.n + e.leader] += e.weight;
            }
        }
        let mut out = Vec::new();
        for follower in 0..self.n {
            for leader in 0..self.n {
                let weight = weights[follower * self.n + leader];
                if weight > 0.0 {
                    out.push(Edge {
                        follower,
                        leader,
                        weight,
                    });
                }
            }
        }
        out
    }
}

/// Turns follow scores into directed edges, keeping pairs with `|s| > epsilon`.
pub fn infer_network(scores: &FollowScores, epsilon: f64) -> Result<FollowingNetworkSequence> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    let windows = (0..scores.window_count())
        .map(|k| {
            scores
                .pairs()
                .iter()
                .zip(scores.window(k))
                .filter(|(_, s)| s.abs() > epsilon)
                .map(|(&(a, b), &s)| {
                    // s > 0: a follows b
                    let (follower, leader) = if s > 0.0 { (a, b) } else { (b, a) };
                    Edge {
                        follower,
                        leader,
                        weight: s.abs(),
                    }
                })
                .collect()
        })
        .collect();
    Ok(FollowingNetworkSequence::new(scores.n(), windows))
}

/// `2|E| / (n (n - 1))`.
pub fn density(n: usize, edge_count: usize) -> f64 {
    assert!(n >= 2, "density needs n >= 2");
    2.0 * edge_count as f64 / (n * (n - 1)) as f64
}

/// How the coordination threshold is derived from the density distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ThresholdPolicy {
    #[default]
    Mean,
    Median,
    /// Nearest-rank percentile, `p` in `[0, 100]`.
    Percentile(f64),
}

impl TryFrom<String> for ThresholdPolicy {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ThresholdPolicy> for String {
    fn from(p: ThresholdPolicy) -> String {
        p.to_string()
    }
}

impl std::str::FromStr for ThresholdPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mean" => Ok(ThresholdPolicy::Mean),
            "median" => Ok(ThresholdPolicy::Median),
            other => {
                let p = other
                    .strip_prefix("percentile")
                    .or_else(|| other.strip_prefix('p'))
                    .map(|rest| rest.trim_start_matches([':', '=', ' ']))
                    .and_then(|rest| rest.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Config(format!(
                            "threshold policy `{s}`: expected mean, median or percentile:<p>"
                        ))
                    })?;
                if !(0.0..=100.0).contains(&p) {
                    return Err(Error::Config(format!("percentile {p} outside [0, 100]")));
                }
                Ok(ThresholdPolicy::Percentile(p))
            }
        }
    }
}

impl std::fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ThresholdPolicy::Mean => write!(f, "mean"),
            ThresholdPolicy::Median => write!(f, "median"),
            ThresholdPolicy::Percentile(p) => write!(f, "percentile:{p}"),
        }
    }
}

/// Scalar threshold `lambda` from a density series.
pub fn resolve_threshold(density: &[f64], policy: ThresholdPolicy) -> Result<f64> {
    if density.is_empty() {
        return Err(Error::InvalidParameter("empty density series".into()));
    }
    let mut sorted = density.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Ok(match policy {
        ThresholdPolicy::Mean => density.iter().sum::<f64>() / n as f64,
        ThresholdPolicy::Median => {
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            }
        }
        ThresholdPolicy::Percentile(p) => {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::InvalidParameter(format!(
                    "percentile {p} outside [0, 100]"
                )));
            }
            let rank = ((p / 100.0) * n as f64).ceil() as usize;
            sorted[rank.clamp(1, n) - 1]
        }
    })
}

/// A pre-coordination interval `[pre_start, coord_start)` followed by a
/// coordination interval `[coord_start, coord_end]`, in window indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoordinationEvent {
    pub pre_start: usize,
    pub coord_start: usize,
    pub coord_end: usize,
}

impl CoordinationEvent {
    /// Windows whose graphs describe the run-up to coordination. When the
    /// density jumps straight into coordination the first coordinated window
    /// stands in.
    pub fn pre_windows(&self) -> std::ops::Range<usize> {
        if self.pre_start < self.coord_start {
            self.pre_start..self.coord_start
        } else {
            self.coord_start..self.coord_start + 1
        }
    }

    pub fn coordinated_windows(&self) -> usize {
        self.coord_end - self.coord_start + 1
    }
}

/// Walks left from `coord_start` while density is strictly increasing.
///
/// Stops at the first `k` with `d[k] - d[k-1] <= 0`, at 0, or at `floor`.
pub fn backtrack_pre_start(density: &[f64], coord_start: usize, floor: usize) -> usize {
    let mut k = coord_start.min(density.len().saturating_sub(1));
    while k > floor && density[k] - density[k - 1] > 0.0 {
        k -= 1;
    }
    k
}

/// Segments a density series into coordination events.
///
/// Maximal runs with `d > lambda` are coordination intervals. Runs separated
/// by at most `merge_gap` windows are merged left to right. Each event's
/// pre-coordination start is then found by backtracking, never reaching into
/// the previous event.
pub fn detect_events(density: &[f64], lambda: f64, merge_gap: usize) -> Result<Vec<CoordinationEvent>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be in [0, 1], got {lambda}"
        )));
    }
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut k = 0;
    while k < density.len() {
        if density[k] > lambda {
            let start = k;
            while k + 1 < density.len() && density[k + 1] > lambda {
                k += 1;
            }
            match runs.last_mut() {
                Some(last) if start - last.1 - 1 <= merge_gap => last.1 = k,
                _ => runs.push((start, k)),
            }
        }
        k += 1;
    }

    let mut events = Vec::with_capacity(runs.len());
    let mut floor = 0;
    for (start, end) in runs {
        let pre_start = backtrack_pre_start(density, start, floor);
        events.push(CoordinationEvent {
            pre_start,
            coord_start: start,
            coord_end: end,
        });
        floor = end + 1;
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edges_follow_score_sign() {
        // pairs for n=3: (0,1), (0,2), (1,2)
        let scores = FollowScores::from_rows(3, vec![vec![0.0, 0.0, 0.0], vec![-0.4, 0.05, 0.7]]);
        let net = infer_network(&scores, 0.1).unwrap();
        assert!(net.edges(0).is_empty());
        assert_eq!(
            net.edges(1),
            &[
                Edge { follower: 1, leader: 0, weight: 0.4 },
                Edge { follower: 1, leader: 2, weight: 0.7 },
            ]
        );
        let all = infer_network(&scores, 0.0).unwrap();
        assert_eq!(all.edges(1).len(), 3);
        assert!(infer_network(&scores, -1.0).is_err());
    }

    #[test]
    fn density_formula() {
        assert_eq!(density(4, 6), 1.0);
        assert_eq!(density(4, 3), 0.5);
        assert_eq!(density(4, 0), 0.0);
    }

    #[test]
    fn thresholds() {
        assert_eq!(resolve_threshold(&[0.0, 0.0, 1.0, 1.0], ThresholdPolicy::Mean).unwrap(), 0.5);
        assert_eq!(resolve_threshold(&[0.1, 0.9, 0.2], ThresholdPolicy::Median).unwrap(), 0.2);
        assert_eq!(resolve_threshold(&[0.3, 0.1], ThresholdPolicy::Percentile(0.0)).unwrap(), 0.1);
        assert_eq!(resolve_threshold(&[0.3, 0.1], ThresholdPolicy::Percentile(100.0)).unwrap(), 0.3);
        assert!(resolve_threshold(&[], ThresholdPolicy::Mean).is_err());
    }

    #[test]
    fn policy_parsing() {
        assert_eq!("mean".parse::<ThresholdPolicy>().unwrap(), ThresholdPolicy::Mean);
        assert_eq!("Median".parse::<ThresholdPolicy>().unwrap(), ThresholdPolicy::Median);
        assert_eq!(
            "percentile:75".parse::<ThresholdPolicy>().unwrap(),
            ThresholdPolicy::Percentile(75.0)
        );
        assert_eq!("p99".parse::<ThresholdPolicy>().unwrap(), ThresholdPolicy::Percentile(99.0));
        assert!("percentile:120".parse::<ThresholdPolicy>().is_err());
        assert!("mode".parse::<ThresholdPolicy>().is_err());
    }

    #[test]
    fn single_event_with_ramp() {
        let d = [0.0, 0.0, 0.2, 0.5, 0.9, 0.9, 0.3];
        let events = detect_events(&d, 0.6, 1).unwrap();
        assert_eq!(
            events,
            vec![CoordinationEvent { pre_start: 1, coord_start: 4, coord_end: 5 }]
        );
        assert_eq!(events[0].pre_windows(), 1..4);
    }

    #[test]
    fn flat_density_has_no_events() {
        assert!(detect_events(&[0.0; 12], 0.0, 2).unwrap().is_empty());
        assert!(detect_events(&[0.4; 12], 0.4, 2).unwrap().is_empty());
        assert!(detect_events(&[0.5], 1.5, 0).is_err());
    }

    #[test]
    fn nearby_runs_merge() {
        let mut d = vec![0.0; 12];
        for k in [4, 5, 8, 9] {
            d[k] = 0.9;
        }
        let merged = detect_events(&d, 0.5, 3).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!((merged[0].coord_start, merged[0].coord_end), (4, 9));
        let split = detect_events(&d, 0.5, 1).unwrap();
        assert_eq!(split.len(), 2);
        assert_eq!((split[1].pre_start, split[1].coord_start), (7, 8));
    }

    #[test]
    fn backtracking_rules() {
        let d = [0.0, 0.0, 0.2, 0.5, 0.9, 0.9];
        assert_eq!(backtrack_pre_start(&d, 4, 0), 1);
        let rising: Vec<f64> = (0..8).map(|k| k as f64 / 10.0).collect();
        assert_eq!(backtrack_pre_start(&rising, 6, 0), 0);
        assert_eq!(backtrack_pre_start(&[0.3; 6], 4, 0), 4);
        assert_eq!(backtrack_pre_start(&rising, 6, 3), 3);
    }

    #[test]
    fn pre_start_never_reaches_previous_event() {
        // second run's ramp would reach back into the first event
        let d = [0.0, 0.9, 0.1, 0.2, 0.3, 0.9];
        let events = detect_events(&d, 0.5, 0).unwrap();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0], CoordinationEvent { pre_start: 0, coord_start: 1, coord_end: 1 });
        assert_eq!(events[1].pre_start, 2);
    }

    #[test]
    fn aggregate_sums_weights() {
        let e = |f, l, w| Edge { follower: f, leader: l, weight: w };
        let net = FollowingNetworkSequence::new(3, vec![vec![e(0, 1, 0.5)], vec![e(0, 1, 0.25), e(2, 1, 1.0)]]);
        assert_eq!(net.aggregate(), vec![e(0, 1, 0.75), e(2, 1, 1.0)]);
        assert_eq!(net.density_series(), vec![1.0 / 3.0, 2.0 / 3.0]);
    }
}
