//! Fixtures shared by the benchmarks in `benches/`.

use follownet::netinfer::Edge;
use follownet::{simulate, Dataset, Model, SimConfig};

/// A dictatorship trial with `n` individuals and `events` events.
pub fn dm_dataset(n: usize, events: usize) -> Dataset {
    let config = SimConfig {
        model: Model::Dm,
        n,
        events,
        seed: 7,
        ..SimConfig::default()
    };
    simulate(&config).expect("valid config").dataset
}

/// Every ordered pair `(a, b)` with `a != b` and `(a + b) % 3 != 0`, weighted
/// by `1 + a`.
pub fn dense_edges(n: usize) -> Vec<Edge> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && (a + b) % 3 != 0 {
                edges.push(Edge {
                    follower: a,
                    leader: b,
                    weight: 1.0 + a as f64,
                });
            }
        }
    }
    edges
}
