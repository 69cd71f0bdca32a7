//! Oracles, input strategies and checks shared by the property suites and the
//! acceptance run.
#![allow(dead_code)]

use follownet::netinfer::{detect_events, infer_network, resolve_threshold, CoordinationEvent, Edge, ThresholdPolicy};
use follownet::ranking::hull::cross;
use follownet::ranking::{convex_hull_2d, kendall_tau, pagerank, rank_order, Hull, PageRankConfig, Point};
use follownet::timeseries::{dtw_d, pairwise_follow_scores, signed_path_score, FollowScores, WindowSpec};
use follownet::Dataset;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

/// Runs `check` on `cases` inputs drawn from `strategy`; deterministic per name.
pub fn run<S: Strategy>(cases: u32, strategy: S, check: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config.clone(), proptest::test_runner::TestRng::deterministic_rng(config.rng_algorithm));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

pub fn cell(first: &[Vec<f64>], second: &[Vec<f64>], i: usize, j: usize) -> f64 {
    first
        .iter()
        .zip(second)
        .map(|(a, b)| (a[i] - b[j]) * (a[i] - b[j]))
        .sum::<f64>()
        .sqrt()
}

/// Minimum cost over every banded monotone path, by exhaustive enumeration.
pub fn brute_force_dtw(first: &[Vec<f64>], second: &[Vec<f64>], beta: usize) -> f64 {
    fn walk(f: &[Vec<f64>], s: &[Vec<f64>], beta: usize, i: usize, j: usize, cost: f64, best: &mut f64) {
        let last = f[0].len() - 1;
        if (i, j) == (last, last) {
            *best = best.min(cost);
            return;
        }
        for (di, dj) in [(1, 1), (1, 0), (0, 1)] {
            let (ni, nj) = (i + di, j + dj);
            if ni <= last && nj <= last && ni.abs_diff(nj) <= beta {
                walk(f, s, beta, ni, nj, cost + cell(f, s, ni, nj), best);
            }
        }
    }
    let mut best = f64::INFINITY;
    walk(first, second, beta, 0, 0, cell(first, second, 0, 0), &mut best);
    best
}

pub fn path_cost(first: &[Vec<f64>], second: &[Vec<f64>], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(i, j)| cell(first, second, i, j)).fold(0.0, |acc, c| acc + c)
}

pub fn value() -> impl Strategy<Value = f64> {
    prop_oneof![(-3i32..=3).prop_map(f64::from), -5.0..5.0f64]
}

pub fn series_pair() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>, usize)> {
    (2usize..=8, 1usize..=3).prop_flat_map(|(len, m)| {
        let rows = move || prop::collection::vec(prop::collection::vec(value(), len), m);
        (rows(), rows(), 1..=len)
    })
}


/// Vertices of the hull of `points`: endpoints of every directed pair with
/// all points to its left or on the segment between them.
pub fn brute_force_hull(points: &[Point]) -> Vec<Point> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() == 1 {
        return pts;
    }
    let within = |a: Point, b: Point, c: Point| {
        c[0] >= a[0].min(b[0]) && c[0] <= a[0].max(b[0]) && c[1] >= a[1].min(b[1]) && c[1] <= a[1].max(b[1])
    };
    let mut out = Vec::new();
    for &a in &pts {
        for &b in &pts {
            if a == b {
                continue;
            }
            let edge = pts.iter().all(|&c| {
                let side = cross(a, b, c);
                side > 0.0 || (side == 0.0 && within(a, b, c))
            });
            if edge {
                out.push(a);
                out.push(b);
            }
        }
    }
    out.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    out.dedup();
    out
}

pub fn point_set() -> impl Strategy<Value = Vec<Point>> {
    let grid = (0i32..6, 0i32..6).prop_map(|(x, y)| [f64::from(x), f64::from(y)]);
    let real = (-10.0..10.0f64, -10.0..10.0f64).prop_map(|(x, y)| [x, y]);
    prop_oneof![
        prop::collection::vec(grid, 1..=14),
        prop::collection::vec(real, 1..=14),
    ]
}


/// Tau-b by enumerating every pair.
pub fn tau_by_pairs(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as u64;
    let sign = |a: f64, b: f64| (a > b) as i8 - (a < b) as i8;
    let (mut concordant, mut discordant, mut tied_x, mut tied_y) = (0i64, 0i64, 0u64, 0u64);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let (sx, sy) = (sign(x[i], x[j]), sign(y[i], y[j]));
            tied_x += u64::from(sx == 0);
            tied_y += u64::from(sy == 0);
            match sx * sy {
                1 => concordant += 1,
                -1 => discordant += 1,
                _ => {}
            }
        }
    }
    let total = n * n.saturating_sub(1) / 2;
    let (ux, uy) = (total - tied_x, total - tied_y);
    if ux == 0 || uy == 0 {
        return if ux == uy { 1.0 } else { 0.0 };
    }
    (concordant - discordant) as f64 / ((ux as f64) * (uy as f64)).sqrt()
}

pub fn score_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=12).prop_flat_map(|n| {
        let scores = prop::collection::vec((0i32..5).prop_map(f64::from), n);
        (scores.clone(), scores)
    })
}


pub fn graph() -> impl Strategy<Value = (usize, Vec<Edge>)> {
    (1usize..=15).prop_flat_map(|n| {
        let edge = (0..n, 0..n, 0.1..5.0f64).prop_map(|(follower, leader, weight)| Edge { follower, leader, weight });
        (Just(n), prop::collection::vec(edge, 0..40))
    })
}


pub fn score_grid() -> impl Strategy<Value = (FollowScores, f64)> {
    (2usize..=8, 1usize..=20).prop_flat_map(|(n, windows)| {
        let pairs = n * (n - 1) / 2;
        let score = prop_oneof![Just(0.0), -1.0..=1.0f64];
        let rows = prop::collection::vec(prop::collection::vec(score, pairs), windows);
        (rows.prop_map(move |r| FollowScores::from_rows(n, r)), 0.0..0.5f64)
    })
}

pub fn policy() -> impl Strategy<Value = ThresholdPolicy> {
    prop_oneof![
        Just(ThresholdPolicy::Mean),
        Just(ThresholdPolicy::Median),
        (0.0..=100.0f64).prop_map(ThresholdPolicy::Percentile),
    ]
}

pub fn well_formed(events: &[CoordinationEvent], density: &[f64], lambda: f64, merge_gap: usize) -> Result<(), TestCaseError> {
    for (x, e) in events.iter().enumerate() {
        prop_assert!(e.pre_start <= e.coord_start && e.coord_start <= e.coord_end);
        prop_assert!(e.coord_end < density.len());
        prop_assert!(density[e.coord_start] > lambda && density[e.coord_end] > lambda);
        for k in e.pre_start + 1..=e.coord_start {
            prop_assert!(density[k] > density[k - 1]);
        }
        if x > 0 {
            let prev = events[x - 1];
            prop_assert!(prev.coord_end < e.pre_start);
            prop_assert!(e.coord_start - prev.coord_end - 1 > merge_gap);
        }
    }
    for (k, &d) in density.iter().enumerate() {
        if d > lambda {
            prop_assert!(events.iter().any(|e| (e.coord_start..=e.coord_end).contains(&k)));
        }
    }
    Ok(())
}


/// Straightforward scan: collect runs above `lambda`, merge close ones, then
/// extend each run left over strictly rising density.
pub fn reference_events(density: &[f64], lambda: f64, merge_gap: usize) -> Vec<CoordinationEvent> {
    let above: Vec<bool> = density.iter().map(|&d| d > lambda).collect();
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for k in 0..density.len() {
        if !above[k] {
            continue;
        }
        if k > 0 && above[k - 1] {
            runs.last_mut().unwrap().1 = k;
        } else {
            runs.push((k, k));
        }
    }
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(last) if run.0 - last.1 - 1 <= merge_gap => last.1 = run.1,
            _ => merged.push(run),
        }
    }
    let mut events = Vec::new();
    let mut floor = 0;
    for (start, end) in merged {
        let mut pre_start = start;
        for k in (floor + 1..=start).rev() {
            if density[k] > density[k - 1] {
                pre_start = k - 1;
            } else {
                break;
            }
        }
        events.push(CoordinationEvent { pre_start, coord_start: start, coord_end: end });
        floor = end + 1;
    }
    events
}


pub fn small_dataset() -> impl Strategy<Value = Dataset> {
    (2usize..=5, 1usize..=2, 12usize..=30).prop_flat_map(|(n, m, t)| {
        let walk = prop::collection::vec(-1.0..1.0f64, t).prop_map(|steps| {
            steps
                .iter()
                .scan(0.0, |acc, s| {
                    *acc += s;
                    Some(*acc)
                })
                .collect::<Vec<f64>>()
        });
        prop::collection::vec(prop::collection::vec(walk, m), n).prop_map(move |series| {
            let ids = (0..n).map(|e| format!("e{e}")).collect();
            Dataset::from_series(ids, series).unwrap()
        })
    })
}


pub const DTW_CASES: u32 = 1000;
pub const HULL_CASES: u32 = 1000;
pub const KENDALL_CASES: u32 = 1000;
pub const PAGERANK_CASES: u32 = 500;
pub const DENSITY_CASES: u32 = 10_000;
pub const SCAN_CASES: u32 = 2000;
pub const ANTISYMMETRY_CASES: u32 = 200;

pub fn check_dtw((first, second, beta): (Vec<Vec<f64>>, Vec<Vec<f64>>, usize)) -> Result<(), TestCaseError> {
    let a: Vec<&[f64]> = first.iter().map(Vec::as_slice).collect();
    let b: Vec<&[f64]> = second.iter().map(Vec::as_slice).collect();
    let got = dtw_d(&a, &b, beta).unwrap();
    prop_assert_eq!(got.cost, brute_force_dtw(&first, &second, beta));

    let pairs = got.path.pairs();
    let last = first[0].len() - 1;
    prop_assert_eq!(pairs[0], (0, 0));
    prop_assert_eq!(*pairs.last().unwrap(), (last, last));
    prop_assert!(got.path.check(beta).is_ok());
    prop_assert_eq!(path_cost(&first, &second, pairs), got.cost);
    Ok(())
}

pub fn check_hull(points: Vec<Point>) -> Result<(), TestCaseError> {
    let hull = convex_hull_2d(&points);
    let mut got = hull.vertices();
    got.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    prop_assert_eq!(got, brute_force_hull(&points));
    if let Hull::Polygon(v) = &hull {
        for k in 0..v.len() {
            prop_assert!(cross(v[k], v[(k + 1) % v.len()], v[(k + 2) % v.len()]) > 0.0);
        }
    }
    for &p in &points {
        prop_assert!(hull.contains(p));
    }
    Ok(())
}

pub fn check_kendall((x, y): (Vec<f64>, Vec<f64>)) -> Result<(), TestCaseError> {
    let (a, b) = (rank_order(&x), rank_order(&y));
    prop_assert_eq!(kendall_tau(&a, &b).unwrap(), tau_by_pairs(a.ranks(), b.ranks()));
    Ok(())
}

pub fn check_pagerank_sum((n, edges): (usize, Vec<Edge>)) -> Result<(), TestCaseError> {
    let pr = pagerank(n, &edges, &PageRankConfig::default()).unwrap();
    prop_assert!((pr.scores.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    prop_assert!(pr.scores.iter().all(|&s| s > 0.0));
    Ok(())
}

pub fn uniform_case() -> impl Strategy<Value = (usize, std::collections::BTreeSet<usize>, f64)> {
    (2usize..=15, prop::collection::btree_set(1usize..8, 0..4), 0.1..5.0f64)
}

pub fn check_pagerank_uniform((n, offsets, weight): (usize, std::collections::BTreeSet<usize>, f64)) -> Result<(), TestCaseError> {
    let config = PageRankConfig::default();
    let empty = pagerank(n, &[], &config).unwrap();
    for s in &empty.scores {
        prop_assert!((s - 1.0 / n as f64).abs() <= 1e-12);
    }
    // circulant graph: every node links both ways at each offset
    let mut edges = Vec::new();
    for i in 0..n {
        for &o in offsets.iter().filter(|&&o| o % n != 0) {
            edges.push(Edge { follower: i, leader: (i + o) % n, weight });
            edges.push(Edge { follower: i, leader: (i + n - o % n) % n, weight });
        }
    }
    let pr = pagerank(n, &edges, &config).unwrap();
    for s in &pr.scores {
        prop_assert!((s - 1.0 / n as f64).abs() <= 1e-9);
    }
    Ok(())
}

pub fn density_case() -> impl Strategy<Value = ((FollowScores, f64), ThresholdPolicy, usize)> {
    (score_grid(), policy(), 0usize..4)
}

pub fn check_density(((scores, epsilon), policy, merge_gap): ((FollowScores, f64), ThresholdPolicy, usize)) -> Result<(), TestCaseError> {
    let networks = infer_network(&scores, epsilon).unwrap();
    let density = networks.density_series();
    prop_assert!(density.iter().all(|d| (0.0..=1.0).contains(d)));
    let lambda = resolve_threshold(&density, policy).unwrap();
    let events = detect_events(&density, lambda, merge_gap).unwrap();
    well_formed(&events, &density, lambda, merge_gap)
}

pub fn scan_case() -> impl Strategy<Value = (Vec<f64>, f64, usize)> {
    let level = || (0u8..=10).prop_map(|v| f64::from(v) / 10.0);
    (prop::collection::vec(level(), 1..=20), level(), 0usize..5)
}

pub fn check_scan((density, lambda, merge_gap): (Vec<f64>, f64, usize)) -> Result<(), TestCaseError> {
    prop_assert_eq!(detect_events(&density, lambda, merge_gap).unwrap(), reference_events(&density, lambda, merge_gap));
    Ok(())
}

pub fn antisymmetry_case() -> impl Strategy<Value = (Dataset, usize, usize, usize)> {
    (small_dataset(), 4usize..=10, 1usize..=4, 1usize..=4)
}

pub fn check_antisymmetry((data, omega, delta, beta): (Dataset, usize, usize, usize)) -> Result<(), TestCaseError> {
    let spec = WindowSpec::new(omega, delta, beta).unwrap();
    let scores = pairwise_follow_scores(&data, &spec).unwrap();
    for k in 0..scores.window_count() {
        for a in 0..data.n() {
            prop_assert_eq!(scores.get(k, a, a), 0.0);
            for b in 0..data.n() {
                prop_assert_eq!(scores.get(k, a, b), -scores.get(k, b, a));
            }
        }
        // recompute one pair per window: the follower is the second series
        let (start, end) = (k * delta, k * delta + omega);
        let lead: Vec<&[f64]> = (0..data.dims()).map(|d| &data.series(1, d)[start..end]).collect();
        let follow: Vec<&[f64]> = (0..data.dims()).map(|d| &data.series(0, d)[start..end]).collect();
        let path = dtw_d(&lead, &follow, beta).unwrap().path;
        prop_assert_eq!(scores.get(k, 0, 1), signed_path_score(&path));
    }
    Ok(())
}
