use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{plurality, Label, LabeledSample};
use crate::error::{Error, Result};

pub const FOREST_FORMAT_VERSION: u32 = 1;
const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Features tried per split; `None` means `ceil(sqrt(d))`.
    pub max_features: Option<usize>,
    /// Nodes with fewer samples become leaves.
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_features: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf {
        label: Label,
    },
    /// Samples with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes stored flat; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> Label {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { label } => return label,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[feature] <= threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub format_version: u32,
    pub n_features: usize,
    pub max_features: usize,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Votes per label, in [`Label::ALL`] order.
    pub fn votes(&self, x: &[f64]) -> [usize; 4] {
        assert_eq!(x.len(), self.n_features, "feature count mismatch");
        let mut counts = [0; 4];
        for t in &self.trees {
            counts[t.predict(x).index()] += 1;
        }
        counts
    }

    /// Majority vote; ties go to the earliest label in [`Label::ALL`].
    pub fn predict(&self, x: &[f64]) -> Label {
        plurality(&self.votes(x))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let forest: Forest = serde_json::from_str(text)?;
        if forest.format_version != FOREST_FORMAT_VERSION {
            return Err(Error::Classifier(format!(
                "unsupported model format_version {}",
                forest.format_version
            )));
        }
        Ok(forest)
    }
}

fn check_samples(samples: &[LabeledSample]) -> Result<usize> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Classifier(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let d = samples[0].features.len();
    if d == 0 {
        return Err(Error::Classifier("samples have no features".into()));
    }
    for s in samples {
        if s.features.len() != d {
            return Err(Error::Classifier(format!(
                "sample {} has {} features, expected {d}",
                s.id,
                s.features.len()
            )));
        }
        if s.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Classifier(format!("sample {} has a non-finite feature", s.id)));
        }
    }
    let first = samples[0].label;
    if samples.iter().all(|s| s.label == first) {
        return Err(Error::Classifier(format!("only one class present ({first})")));
    }
    Ok(d)
}

/// Trains a random forest: bootstrap resamples, random feature subsets per
/// split, Gini impurity, midpoint thresholds.
pub fn train(samples: &[LabeledSample], config: &ForestConfig) -> Result<Forest> {
    let d = check_samples(samples)?;
    if config.n_trees == 0 {
        return Err(Error::Classifier("n_trees must be >= 1".into()));
    }
    let max_features = config
        .max_features
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize);
    if max_features == 0 || max_features > d {
        return Err(Error::Classifier(format!(
            "max_features must be in [1, {d}], got {max_features}"
        )));
    }

    let mut sorted: Vec<&LabeledSample> = samples.iter().collect();
    sorted.sort_by_key(|s| s.id);
    if sorted.windows(2).any(|w| w[0].id == w[1].id) {
        return Err(Error::Classifier("sample ids must be unique".into()));
    }
    let x: Vec<&[f64]> = sorted.iter().map(|s| s.features.as_slice()).collect();
    let y: Vec<Label> = sorted.iter().map(|s| s.label).collect();

    let trees = (0..config.n_trees as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(t);
            let boot: Vec<usize> = (0..x.len()).map(|_| rng.random_range(0..x.len())).collect();
            let mut builder = Builder {
                x: &x,
                y: &y,
                max_features,
                min_split: config.min_samples_split.max(2),
                rng,
                nodes: Vec::new(),
            };
            builder.grow(boot);
            Tree { nodes: builder.nodes }
        })
        .collect();

    Ok(Forest {
        format_version: FOREST_FORMAT_VERSION,
        n_features: d,
        max_features,
        seed: config.seed,
        trees,
    })
}

struct Builder<'a> {
    x: &'a [&'a [f64]],
    y: &'a [Label],
    max_features: usize,
    min_split: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

fn gini(counts: &[usize; 4], total: usize) -> f64 {
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

impl Builder<'_> {
    fn counts(&self, idx: &[usize]) -> [usize; 4] {
        let mut c = [0; 4];
        for &i in idx {
            c[self.y[i].index()] += 1;
        }
        c
    }

    /// Grows the subtree for `idx` and returns its node index.
    fn grow(&mut self, idx: Vec<usize>) -> usize {
        let at = self.nodes.len();
        let counts = self.counts(&idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if pure || idx.len() < self.min_split {
            None
        } else {
            self.best_split(&idx, &counts)
        };
        let Some((feature, threshold)) = split else {
            self.nodes.push(Node::Leaf {
                label: plurality(&counts),
            });
            return at;
        };
        // placeholder, patched once the children exist
        self.nodes.push(Node::Leaf { label: Label::Dm });
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.x[i][feature] <= threshold);
        let left = self.grow(l);
        let right = self.grow(r);
        self.nodes[at] = Node::Split {
            feature,
            threshold,
            left,
            right,
        };
        at
    }

    /// Lowest weighted Gini split over a random feature subset. Falls back to
    /// the remaining features when the subset cannot separate anything.
    fn best_split(&mut self, idx: &[usize], counts: &[usize; 4]) -> Option<(usize, f64)> {
        let d = self.x[0].len();
        let order: Vec<usize> = sample(&mut self.rng, d, d).into_vec();
        let (subset, rest) = order.split_at(self.max_features);
        self.scan(idx, counts, subset)
            .or_else(|| self.scan(idx, counts, rest))
            .map(|(f, t, _)| (f, t))
    }

    fn scan(&self, idx: &[usize], counts: &[usize; 4], features: &[usize]) -> Option<(usize, f64, f64)> {
        let total = idx.len();
        let mut best: Option<(usize, f64, f64)> = None;
        let mut sorted = idx.to_vec();
        for &f in features {
            sorted.sort_by(|&a, &b| self.x[a][f].total_cmp(&self.x[b][f]));
            let mut left = [0usize; 4];
            for k in 1..total {
                left[self.y[sorted[k - 1]].index()] += 1;
                let (lo, hi) = (self.x[sorted[k - 1]][f], self.x[sorted[k]][f]);
                if lo == hi {
                    continue;
                }
                let right: [usize; 4] = std::array::from_fn(|c| counts[c] - left[c]);
                let impurity = (k as f64 * gini(&left, k) + (total - k) as f64 * gini(&right, total - k))
                    / total as f64;
                if best.is_none_or(|b| impurity < b.2) {
                    best = Some((f, lo + (hi - lo) / 2.0, impurity));
                }
            }
        }
        best
    }
}
