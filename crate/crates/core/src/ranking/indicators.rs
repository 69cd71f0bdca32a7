//! Velocity and position convex-hull indicators.

use super::hull::{convex_hull_2d, Hull, Point};
use crate::timeseries::Dataset;

/// Relative slack for speed comparisons, so rounding in computed speeds does
/// not count as leaving the range.
pub const SPEED_RTOL: f64 = 1e-9;

/// `+1` when entity `i`'s speed at step `j` exceeds every speed at `j - 1`
/// (its own included), `-1` when it is below all of them, else `0`. Speeds
/// within [`SPEED_RTOL`] of a bound count as inside.
///
/// `speeds` is the `n x (t - 1)` matrix from
/// [`velocity_matrix`](crate::timeseries::velocity_matrix).
pub fn vch_indicator(speeds: &[Vec<f64>], i: usize, j: usize) -> i8 {
    assert!(j >= 1, "velocity indicator needs a previous step");
    let prev = speeds.iter().map(|row| row[j - 1]);
    let max = prev.clone().fold(f64::NEG_INFINITY, f64::max);
    let min = prev.fold(f64::INFINITY, f64::min);
    let v = speeds[i][j];
    if v > max * (1.0 + SPEED_RTOL) {
        1
    } else if v < min * (1.0 - SPEED_RTOL) {
        -1
    } else {
        0
    }
}

/// Velocity indicators of every entity at step `j`.
pub fn vch_indicators_at(speeds: &[Vec<f64>], j: usize) -> Vec<i8> {
    (0..speeds.len()).map(|i| vch_indicator(speeds, i, j)).collect()
}

/// Hull of all entity positions at `step`; requires `m == 2`.
pub fn position_hull(dataset: &Dataset, step: usize) -> Hull {
    let points: Vec<Point> = (0..dataset.n()).map(|e| dataset.point(e, step)).collect();
    convex_hull_2d(&points)
}

/// Heading of every entity from `j - 1` to `j`, and their sum.
fn headings(dataset: &Dataset, j: usize) -> (Vec<Point>, Point) {
    let own: Vec<Point> = (0..dataset.n())
        .map(|e| {
            let (a, b) = (dataset.point(e, j - 1), dataset.point(e, j));
            [b[0] - a[0], b[1] - a[1]]
        })
        .collect();
    let total = own
        .iter()
        .fold([0.0, 0.0], |acc, h| [acc[0] + h[0], acc[1] + h[1]]);
    (own, total)
}

fn pch_from(hull: &Hull, position: Point, heading: Point, group: Point) -> i8 {
    if hull.contains(position) {
        return 0;
    }
    let zero = |v: Point| v[0] == 0.0 && v[1] == 0.0;
    if zero(heading) || zero(group) {
        return 0;
    }
    // angle <= 90 degrees iff the dot product is non-negative
    if heading[0] * group[0] + heading[1] * group[1] >= 0.0 {
        1
    } else {
        -1
    }
}

/// `+1` when entity `i` at step `j` lies outside `hull` (the hull of all
/// positions at `j - 1`) and heads within 90 degrees of the group heading,
/// `-1` when outside and heading away, `0` when inside, on the boundary, or
/// when either heading is zero.
pub fn pch_indicator(dataset: &Dataset, hull: &Hull, i: usize, j: usize) -> i8 {
    assert!(j >= 1, "position indicator needs a previous step");
    let (own, group) = headings(dataset, j);
    pch_from(hull, dataset.point(i, j), own[i], group)
}

/// Position indicators of every entity at step `j`.
pub fn pch_indicators_at(dataset: &Dataset, j: usize) -> Vec<i8> {
    assert!(j >= 1, "position indicator needs a previous step");
    let hull = position_hull(dataset, j - 1);
    let (own, group) = headings(dataset, j);
    (0..dataset.n())
        .map(|i| pch_from(&hull, dataset.point(i, j), own[i], group))
        .collect()
}
