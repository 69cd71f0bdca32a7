use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netinfer::Edge;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        PageRankConfig {
            damping: 0.85,
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping must be in (0, 1), got {}",
                self.damping
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// False when `max_iter` was reached first; `scores` is then the last iterate.
    pub converged: bool,
}

/// Weighted PageRank by power iteration.
///
/// Each node spreads its mass over its out-edges in proportion to edge
/// weight; nodes without out-edges spread uniformly. Teleportation is uniform.
pub fn pagerank(n: usize, edges: &[Edge], config: &PageRankConfig) -> Result<PageRank> {
    config.validate()?;
    if n == 0 {
        return Ok(PageRank {
            scores: Vec::new(),
            iterations: 0,
            converged: true,
        });
    }
    let mut out_weight = vec![0.0; n];
    for e in edges {
        if e.follower >= n || e.leader >= n {
            return Err(Error::InvalidParameter(format!(
                "edge {}->{} outside {n} nodes",
                e.follower, e.leader
            )));
        }
        out_weight[e.follower] += e.weight;
    }

    let nf = n as f64;
    let d = config.damping;
    let mut scores = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        let dangling: f64 = scores
            .iter()
            .zip(&out_weight)
            .filter(|(_, &w)| w == 0.0)
            .map(|(s, _)| s)
            .sum();
        next.fill((1.0 - d) / nf + d * dangling / nf);
        for e in edges {
            next[e.leader] += d * scores[e.follower] * e.weight / out_weight[e.follower];
        }
        let change: f64 = scores.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut scores, &mut next);
        if change < config.tol {
            converged = true;
            break;
        }
    }
    let total: f64 = scores.iter().sum();
    scores.iter_mut().for_each(|s| *s /= total);
    Ok(PageRank {
        scores,
        iterations,
        converged,
    })
}
