//! Planar convex hulls and inclusive containment.

pub type Point = [f64; 2];

/// Twice the signed area of `(o, a, b)`; positive for a counterclockwise turn.
#[inline]
pub fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull of a planar point set.
#[derive(Debug, Clone, PartialEq)]
pub enum Hull {
    Point(Point),
    Segment(Point, Point),
    /// Counterclockwise vertices, no three collinear.
    Polygon(Vec<Point>),
}

impl Hull {
    pub fn vertices(&self) -> Vec<Point> {
        match self {
            Hull::Point(p) => vec![*p],
            Hull::Segment(a, b) => vec![*a, *b],
            Hull::Polygon(v) => v.clone(),
        }
    }

    /// True when `p` lies inside or on the boundary.
    pub fn contains(&self, p: Point) -> bool {
        match self {
            Hull::Point(q) => *q == p,
            Hull::Segment(a, b) => on_segment(*a, *b, p),
            Hull::Polygon(v) => (0..v.len()).all(|k| cross(v[k], v[(k + 1) % v.len()], p) >= 0.0),
        }
    }
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    cross(a, b, p) == 0.0
        && p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

/// Andrew's monotone chain.
///
/// # Panics
/// On an empty input.
pub fn convex_hull_2d(points: &[Point]) -> Hull {
    assert!(!points.is_empty(), "convex hull of no points");
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() == 1 {
        return Hull::Point(pts[0]);
    }

    let mut lower: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);

    if lower.len() == 2 {
        Hull::Segment(lower[0], lower[1])
    } else {
        Hull::Polygon(lower)
    }
}
