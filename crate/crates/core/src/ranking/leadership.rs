//! Per-event leadership rankings, support and rank-correlation features.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::indicators::{pch_indicators_at, vch_indicators_at};
use super::pagerank::{pagerank, PageRankConfig};
use super::rank::{aggregate_mean_rank, kendall_tau, rank_order, AggregatedRank, RankOrder};
use crate::error::{Error, Result};
use crate::netinfer::{CoordinationEvent, FollowingNetworkSequence};
use crate::timeseries::{velocity_matrix, Dataset, WindowSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    PageRank,
    Vch,
    Pch,
}

impl Measure {
    pub const ALL: [Measure; 3] = [Measure::PageRank, Measure::Vch, Measure::Pch];

    pub fn name(self) -> &'static str {
        match self {
            Measure::PageRank => "pagerank",
            Measure::Vch => "vch",
            Measure::Pch => "pch",
        }
    }
}

impl std::fmt::Display for Measure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Rankings of one event under one measure.
#[derive(Debug, Clone, PartialEq)]
pub struct EventRanking {
    /// One order per window (PageRank) or per time step (hull indicators).
    pub steps: Vec<RankOrder>,
    pub aggregated: AggregatedRank,
    /// Windows whose PageRank hit `max_iter` before converging.
    pub unconverged: usize,
}

impl EventRanking {
    pub fn order(&self) -> &RankOrder {
        &self.aggregated.order
    }
}

/// Everything needed to rank entities inside detected events.
pub struct LeadershipContext<'a> {
    dataset: &'a Dataset,
    window: WindowSpec,
    networks: &'a FollowingNetworkSequence,
    pagerank: PageRankConfig,
    speeds: Vec<Vec<f64>>,
}

impl<'a> LeadershipContext<'a> {
    pub fn new(
        dataset: &'a Dataset,
        window: WindowSpec,
        networks: &'a FollowingNetworkSequence,
        pagerank: PageRankConfig,
    ) -> Result<Self> {
        window.validate()?;
        pagerank.validate()?;
        if networks.n() != dataset.n() {
            return Err(Error::InvalidParameter(format!(
                "network has {} nodes, dataset {} entities",
                networks.n(),
                dataset.n()
            )));
        }
        Ok(LeadershipContext {
            dataset,
            window,
            networks,
            pagerank,
            speeds: velocity_matrix(dataset),
        })
    }

    pub fn n(&self) -> usize {
        self.dataset.n()
    }

    /// Position hulls are only defined for planar data.
    pub fn pch_available(&self) -> bool {
        self.dataset.dims() == 2
    }

    /// Time steps spanned by the event's pre-coordination windows.
    pub fn pre_steps(&self, event: &CoordinationEvent) -> Range<usize> {
        let windows = event.pre_windows();
        let steps = self.window.steps_covered(windows.start, windows.end - 1);
        steps.start.min(self.dataset.len())..steps.end.min(self.dataset.len())
    }

    fn check_event(&self, event: &CoordinationEvent) -> Result<()> {
        if !(event.pre_start <= event.coord_start
            && event.coord_start <= event.coord_end
            && event.coord_end < self.networks.len())
        {
            return Err(Error::InvalidParameter(format!(
                "event {event:?} does not fit {} windows",
                self.networks.len()
            )));
        }
        Ok(())
    }

    /// PageRank vector of every window in `windows`, plus the non-converged count.
    pub fn window_pageranks(&self, windows: Range<usize>) -> Result<(Vec<Vec<f64>>, usize)> {
        let mut unconverged = 0;
        let mut out = Vec::with_capacity(windows.len());
        for k in windows {
            let pr = pagerank(self.n(), self.networks.edges(k), &self.pagerank)?;
            unconverged += usize::from(!pr.converged);
            out.push(pr.scores);
        }
        Ok((out, unconverged))
    }

    /// Mean PageRank vector over the event's pre-coordination windows.
    pub fn mean_pagerank(&self, event: &CoordinationEvent) -> Result<Vec<f64>> {
        self.check_event(event)?;
        let (vectors, _) = self.window_pageranks(event.pre_windows())?;
        let mut mean = vec![0.0; self.n()];
        for v in &vectors {
            mean.iter_mut().zip(v).for_each(|(m, x)| *m += x);
        }
        let count = vectors.len() as f64;
        mean.iter_mut().for_each(|m| *m /= count);
        Ok(mean)
    }

    /// Per-window or per-step rank orders over the pre-coordination interval.
    pub fn step_orders(&self, measure: Measure, event: &CoordinationEvent) -> Result<(Vec<RankOrder>, usize)> {
        self.check_event(event)?;
        let to_scores = |ind: Vec<i8>| ind.into_iter().map(f64::from).collect::<Vec<_>>();
        let steps = self.pre_steps(event);
        let orders = match measure {
            Measure::PageRank => {
                let (vectors, unconverged) = self.window_pageranks(event.pre_windows())?;
                return Ok((vectors.iter().map(|v| rank_order(v)).collect(), unconverged));
            }
            Measure::Vch => {
                // speeds has t - 1 columns; the indicator at j reads columns j - 1 and j
                let last = self.speeds.first().map_or(0, Vec::len);
                (steps.start.max(1)..steps.end.min(last))
                    .map(|j| rank_order(&to_scores(vch_indicators_at(&self.speeds, j))))
                    .collect::<Vec<_>>()
            }
            Measure::Pch => {
                if !self.pch_available() {
                    return Err(Error::InvalidParameter(format!(
                        "position hull needs 2 dimensions, dataset has {}",
                        self.dataset.dims()
                    )));
                }
                (steps.start.max(1)..steps.end)
                    .map(|j| rank_order(&to_scores(pch_indicators_at(self.dataset, j))))
                    .collect()
            }
        };
        if orders.is_empty() {
            return Ok((vec![RankOrder::all_tied(self.n())], 0));
        }
        Ok((orders, 0))
    }

    /// Aggregated ranking of one event under `measure`.
    pub fn event_ranking(&self, measure: Measure, event: &CoordinationEvent) -> Result<EventRanking> {
        let (steps, unconverged) = self.step_orders(measure, event)?;
        let aggregated = aggregate_mean_rank(&steps)?;
        Ok(EventRanking {
            steps,
            aggregated,
            unconverged,
        })
    }

    /// Rankings of every event under `measure`.
    pub fn rank_events(&self, measure: Measure, events: &[CoordinationEvent]) -> Result<MeasureRankings> {
        let events = events
            .iter()
            .map(|e| self.event_ranking(measure, e))
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasureRankings { measure, events })
    }
}

/// One measure's rankings across all events of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureRankings {
    pub measure: Measure,
    pub events: Vec<EventRanking>,
}

impl MeasureRankings {
    fn require_events(&self) -> Result<()> {
        if self.events.is_empty() {
            return Err(Error::NoCoordination);
        }
        Ok(())
    }

    /// Fraction of events in which each entity is ranked first.
    pub fn support(&self) -> Result<Vec<f64>> {
        self.require_events()?;
        let n = self.events[0].order().len();
        let mut counts = vec![0usize; n];
        for e in &self.events {
            counts[e.order().first()] += 1;
        }
        Ok(normalise(counts, self.events.len()))
    }

    /// Fraction of events whose holder of 1-based `position` is each entity.
    ///
    /// An event's holder is the entity alone at `position` in at least half
    /// of its step orders; events without one count for no one.
    pub fn position_support(&self, position: usize) -> Result<Vec<f64>> {
        self.require_events()?;
        let n = self.events[0].order().len();
        let mut counts = vec![0usize; n];
        for e in &self.events {
            let mut held = vec![0usize; n];
            for step in &e.steps {
                if let Some(entity) = step.unique_at(position) {
                    held[entity] += 1;
                }
            }
            if let Some(entity) = (0..n).find(|&i| held[i] > 0 && 2 * held[i] >= e.steps.len()) {
                counts[entity] += 1;
            }
        }
        Ok(normalise(counts, self.events.len()))
    }

    /// Mean-rank aggregation over every step order of every event.
    pub fn global(&self) -> Result<AggregatedRank> {
        self.require_events()?;
        let all: Vec<RankOrder> = self
            .events
            .iter()
            .flat_map(|e| e.steps.iter().cloned())
            .collect();
        aggregate_mean_rank(&all)
    }

    /// Mean Kendall tau between the global ranking and each event's ranking.
    pub fn corr_global_local(&self) -> Result<f64> {
        let global = self.global()?;
        let mut total = 0.0;
        for e in &self.events {
            total += kendall_tau(&global.order, e.order())?;
        }
        Ok(total / self.events.len() as f64)
    }

    pub fn unconverged(&self) -> usize {
        self.events.iter().map(|e| e.unconverged).sum()
    }
}

fn normalise(counts: Vec<usize>, total: usize) -> Vec<f64> {
    counts
        .into_iter()
        .map(|c| c as f64 / total as f64)
        .collect()
}

/// Mean Kendall tau between two measures' rankings of the same events.
pub fn corr_cross(a: &MeasureRankings, b: &MeasureRankings) -> Result<f64> {
    if a.events.len() != b.events.len() {
        return Err(Error::InvalidParameter(format!(
            "{} has {} events, {} has {}",
            a.measure,
            a.events.len(),
            b.measure,
            b.events.len()
        )));
    }
    a.require_events()?;
    let mut total = 0.0;
    for (x, y) in a.events.iter().zip(&b.events) {
        total += kendall_tau(x.order(), y.order())?;
    }
    Ok(total / a.events.len() as f64)
}

/// Entity with the highest value, lowest index on ties; `None` when all are zero.
pub fn argmax_support(support: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (e, &s) in support.iter().enumerate() {
        if s > 0.0 && best.is_none_or(|b| s > support[b]) {
            best = Some(e);
        }
    }
    best
}

/// Rank-correlation features and maximum PageRank support of one dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Global vs local position hull ranking; absent unless `m == 2`.
    pub corr_p: Option<f64>,
    /// Global vs local velocity hull ranking.
    pub corr_v: f64,
    /// Position hull vs PageRank, per event; absent unless `m == 2`.
    pub corr_p_pr: Option<f64>,
    /// Velocity hull vs PageRank, per event.
    pub corr_v_pr: f64,
    pub max_support_pr: f64,
}

impl FeatureVector {
    pub const NAMES: [&'static str; 5] = ["corr_p", "corr_v", "corr_p_pr", "corr_v_pr", "max_support_pr"];

    /// Available features in [`NAMES`](Self::NAMES) order, skipping absent ones.
    pub fn values(&self) -> Vec<f64> {
        [
            self.corr_p,
            Some(self.corr_v),
            self.corr_p_pr,
            Some(self.corr_v_pr),
            Some(self.max_support_pr),
        ]
        .into_iter()
        .flatten()
        .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.corr_p.is_some() && self.corr_p_pr.is_some()
    }
}

/// Assembles the feature vector from already computed rankings.
///
/// `pch` may be `None` when position hulls are unavailable.
pub fn feature_vector(
    pagerank: &MeasureRankings,
    vch: &MeasureRankings,
    pch: Option<&MeasureRankings>,
) -> Result<FeatureVector> {
    pagerank.require_events()?;
    let max_support_pr = pagerank
        .support()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(FeatureVector {
        corr_p: pch.map(MeasureRankings::corr_global_local).transpose()?,
        corr_v: vch.corr_global_local()?,
        corr_p_pr: pch.map(|p| corr_cross(p, pagerank)).transpose()?,
        corr_v_pr: corr_cross(vch, pagerank)?,
        max_support_pr,
    })
}
