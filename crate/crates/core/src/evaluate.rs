//! Simulation-based evaluation: leader precision, hierarchy recovery, the
//! rotating-leader comparison and model classification.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{cross_validate, ClassMetrics, ForestConfig, LabeledSample};
use crate::error::{Error, Result};
use crate::pipeline::{analyse, Analysis, PipelineConfig};
use crate::ranking::{argmax_support, pagerank, LeadershipContext, Measure};
use crate::simulate::{run_trial_suite, Model, SimConfig, Trial};

/// A simulated trial together with its analysis.
#[derive(Debug, Clone)]
pub struct AnalysedTrial {
    pub trial: Trial,
    pub analysis: Analysis,
}

impl AnalysedTrial {
    /// Entity with the highest support under `measure`, if any.
    pub fn identified_leader(&self, measure: Measure) -> Option<usize> {
        argmax_support(&self.analysis.support(measure)?)
    }

    /// The leader the trial was generated with (entity 0 for the random model).
    pub fn true_leader(&self) -> usize {
        self.trial.events[0].leader
    }
}

/// Simulates `trials` trials of `sim` and analyses each of them.
pub fn analysed_suite(sim: &SimConfig, trials: usize, base_seed: u64, pipeline: &PipelineConfig) -> Result<Vec<AnalysedTrial>> {
    run_trial_suite(sim, trials, base_seed)?
        .into_par_iter()
        .map(|trial| {
            let analysis = analyse(&trial.dataset, pipeline)?;
            Ok(AnalysedTrial { trial, analysis })
        })
        .collect()
}

/// Fraction of trials whose highest-support entity is the true leader.
pub fn leader_precision(suite: &[AnalysedTrial], measure: Measure) -> f64 {
    if suite.is_empty() {
        return 0.0;
    }
    let hits = suite
        .iter()
        .filter(|t| t.identified_leader(measure) == Some(t.true_leader()))
        .count();
    hits as f64 / suite.len() as f64
}

/// Prediction for hierarchy rank `rank` (1-based): the entity holding that
/// position in the most events. Rank 1 uses plain support.
pub fn rank_prediction(trial: &AnalysedTrial, measure: Measure, rank: usize) -> Option<usize> {
    let rankings = trial.analysis.rankings(measure)?;
    let support = if rank == 1 {
        rankings.support().ok()?
    } else {
        rankings.position_support(rank).ok()?
    };
    argmax_support(&support)
}

/// Fraction of hierarchy trials whose rank-`rank` initiator is recovered.
pub fn hierarchy_precision(suite: &[AnalysedTrial], measure: Measure, rank: usize) -> f64 {
    if suite.is_empty() {
        return 0.0;
    }
    let hits = suite
        .iter()
        .filter(|t| {
            let truth = t.trial.events[0].hm_ranks.as_ref().and_then(|r| r.get(rank - 1).copied());
            truth.is_some() && rank_prediction(t, measure, rank) == truth
        })
        .count();
    hits as f64 / suite.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotatingEvent {
    pub event: usize,
    pub scheduled_leader: usize,
    /// PageRank top entity of the detected event matched to this one.
    pub pagerank_top1: Option<usize>,
    /// Max minus min of the mean per-window PageRank over the pre-interval.
    pub pagerank_spread: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotatingReport {
    pub events: Vec<RotatingEvent>,
    pub hits: usize,
    pub mean_event_spread: f64,
    /// Spread of PageRank on all windows collapsed into one graph.
    pub static_spread: f64,
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max - min
}

/// Compares per-event PageRank leaders with the schedule, and per-event
/// PageRank spread with that of the time-aggregated network.
pub fn rotating_report(item: &AnalysedTrial, pipeline: &PipelineConfig) -> Result<RotatingReport> {
    let a = &item.analysis;
    let dataset = &item.trial.dataset;
    let ctx = LeadershipContext::new(dataset, pipeline.window, &a.networks, pipeline.pagerank)?;
    let pr = a.rankings(Measure::PageRank).ok_or(Error::NoCoordination)?;

    let mut events: Vec<RotatingEvent> = item
        .trial
        .events
        .iter()
        .enumerate()
        .map(|(j, e)| RotatingEvent {
            event: j,
            scheduled_leader: e.leader,
            pagerank_top1: None,
            pagerank_spread: None,
        })
        .collect();
    for (k, detected) in a.events.iter().enumerate() {
        let steps = pipeline.window.steps_covered(detected.coord_start, detected.coord_end);
        let mid = (steps.start + steps.end) / 2;
        let Some(j) = item.trial.events.iter().position(|e| (e.start..e.end).contains(&mid)) else {
            continue;
        };
        if events[j].pagerank_top1.is_some() {
            continue;
        }
        events[j].pagerank_top1 = Some(pr.events[k].order().first());
        events[j].pagerank_spread = Some(spread(&ctx.mean_pagerank(detected)?));
    }

    let hits = events
        .iter()
        .filter(|e| e.pagerank_top1 == Some(e.scheduled_leader))
        .count();
    let spreads: Vec<f64> = events.iter().filter_map(|e| e.pagerank_spread).collect();
    let mean_event_spread = if spreads.is_empty() {
        0.0
    } else {
        spreads.iter().sum::<f64>() / spreads.len() as f64
    };
    let aggregate = pagerank(dataset.n(), &a.networks.aggregate(), &pipeline.pagerank)?;
    Ok(RotatingReport {
        events,
        hits,
        mean_event_spread,
        static_spread: spread(&aggregate.scores),
    })
}

/// Labeled feature vectors of analysed trials; trials without events or
/// with incomplete features are skipped. Ids are `id_base + index`.
pub fn labeled_samples(suite: &[AnalysedTrial], id_base: u64) -> Vec<LabeledSample> {
    suite
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let f = t.analysis.features?;
            f.is_complete().then(|| LabeledSample {
                id: id_base + i as u64,
                features: f.values(),
                label: t.trial.config.model.label(),
            })
        })
        .collect()
}

/// Settings for [`evaluate_tables`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateConfig {
    /// Shape of every simulated trial; `model` and `seed` are overridden.
    pub sim: SimConfig,
    /// Trials per model for the precision and hierarchy tables.
    pub trials: usize,
    /// Trials per label for classification; LT trials are split over `lt_settings`.
    pub class_trials: usize,
    pub lt_settings: Vec<(usize, f64)>,
    pub rotating_events: usize,
    pub base_seed: u64,
    pub folds: usize,
    pub forest: ForestConfig,
    pub pipeline: PipelineConfig,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        EvaluateConfig {
            sim: SimConfig::default(),
            trials: 20,
            class_trials: 50,
            lt_settings: vec![(3, 0.25), (5, 0.25), (10, 0.75)],
            rotating_events: 20,
            base_seed: 1,
            folds: 10,
            forest: ForestConfig::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionRow {
    pub model: String,
    pub measure: Measure,
    pub precision: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyRow {
    pub rank: usize,
    pub measure: Measure,
    pub precision: f64,
    pub trials: usize,
}

#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub precision: Vec<PrecisionRow>,
    pub hierarchy: Vec<HierarchyRow>,
    pub rotating: RotatingReport,
    pub classification: Vec<ClassMetrics>,
    /// Trials left out of classification for lack of detected events.
    pub skipped_trials: usize,
}

/// Models of the precision table, in row order.
pub fn precision_models(lt_settings: &[(usize, f64)]) -> Vec<Model> {
    let mut models = vec![Model::Dm, Model::Hm];
    models.extend(lt_settings.iter().map(|&(kappa, rho)| Model::Lt { kappa, rho }));
    models.push(Model::Random);
    models
}

/// Seed block of the `index`-th model so suites never share trial seeds.
pub fn model_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(1_000_000 * index as u64)
}

/// Regenerates every table from simulation.
pub fn evaluate_tables(config: &EvaluateConfig) -> Result<EvaluationReport> {
    if config.trials == 0 || config.class_trials == 0 || config.lt_settings.is_empty() {
        return Err(Error::Config("trial counts and lt_settings must be non-empty".into()));
    }
    let pipeline = &config.pipeline;
    let models = precision_models(&config.lt_settings);
    let lt_count = config.lt_settings.len();
    let mut suites = Vec::with_capacity(models.len());
    for (i, &model) in models.iter().enumerate() {
        let count = match model {
            // the pooled LT label needs class_trials over all settings
            Model::Lt { .. } => config.trials.max(config.class_trials.div_ceil(lt_count)),
            _ => config.trials.max(config.class_trials),
        };
        let sim = SimConfig { model, ..config.sim.clone() };
        suites.push(analysed_suite(&sim, count, model_seed(config.base_seed, i), pipeline)?);
    }

    let mut precision = Vec::new();
    for (model, suite) in models.iter().zip(&suites) {
        for measure in Measure::ALL {
            let used = &suite[..config.trials];
            precision.push(PrecisionRow {
                model: model.to_string(),
                measure,
                precision: leader_precision(used, measure),
                trials: used.len(),
            });
        }
    }

    let hm = &suites[1][..config.trials];
    let mut hierarchy = Vec::new();
    for rank in 1..=4 {
        for measure in Measure::ALL {
            hierarchy.push(HierarchyRow {
                rank,
                measure,
                precision: hierarchy_precision(hm, measure, rank),
                trials: hm.len(),
            });
        }
    }

    let rotating_sim = SimConfig {
        model: Model::RotatingDm,
        events: config.rotating_events,
        ..config.sim.clone()
    };
    let rotating_trial = analysed_suite(&rotating_sim, 1, model_seed(config.base_seed, models.len()), pipeline)?
        .pop()
        .expect("one trial");
    let rotating = rotating_report(&rotating_trial, pipeline)?;

    let (samples, skipped) = classification_samples(&models, &suites, config.class_trials);
    let classification = cross_validate(&samples, config.folds, &config.forest)?.metrics;

    Ok(EvaluationReport {
        precision,
        hierarchy,
        rotating,
        classification,
        skipped_trials: skipped,
    })
}

/// `per_label` samples per label, taking LT trials round-robin over settings.
pub fn classification_samples(models: &[Model], suites: &[Vec<AnalysedTrial>], per_label: usize) -> (Vec<LabeledSample>, usize) {
    let mut samples = Vec::new();
    let mut skipped = 0;
    let lt: Vec<usize> = (0..models.len()).filter(|&i| matches!(models[i], Model::Lt { .. })).collect();
    for (i, model) in models.iter().enumerate() {
        let take = match model {
            Model::Lt { .. } => {
                let slot = lt.iter().position(|&j| j == i).expect("lt model");
                per_label / lt.len() + usize::from(slot < per_label % lt.len())
            }
            _ => per_label,
        };
        let used = &suites[i][..take.min(suites[i].len())];
        let got = labeled_samples(used, (i as u64) * 1_000_000);
        skipped += used.len() - got.len();
        samples.extend(got);
    }
    (samples, skipped)
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

impl EvaluationReport {
    pub fn write_precision<W: Write>(&self, out: W) -> Result<()> {
        write_rows(
            out,
            &["model", "measure", "precision", "trials"],
            self.precision.iter().map(|r| {
                vec![r.model.clone(), r.measure.to_string(), r.precision.to_string(), r.trials.to_string()]
            }),
        )
    }

    pub fn write_hierarchy<W: Write>(&self, out: W) -> Result<()> {
        write_rows(
            out,
            &["rank", "measure", "precision", "trials"],
            self.hierarchy.iter().map(|r| {
                vec![r.rank.to_string(), r.measure.to_string(), r.precision.to_string(), r.trials.to_string()]
            }),
        )
    }

    pub fn write_rotating<W: Write>(&self, out: W) -> Result<()> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        write_rows(
            out,
            &["event_id", "scheduled_leader", "pagerank_top1", "pagerank_spread"],
            self.rotating.events.iter().map(|e| {
                vec![
                    e.event.to_string(),
                    e.scheduled_leader.to_string(),
                    opt(e.pagerank_top1.map(|v| v.to_string())),
                    opt(e.pagerank_spread.map(|v| v.to_string())),
                ]
            }),
        )
    }

    pub fn write_rotating_summary<W: Write>(&self, out: W) -> Result<()> {
        let r = &self.rotating;
        write_rows(
            out,
            &["metric", "value"],
            [
                ("events", r.events.len().to_string()),
                ("hits", r.hits.to_string()),
                ("mean_event_spread", r.mean_event_spread.to_string()),
                ("static_spread", r.static_spread.to_string()),
            ]
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v]),
        )
    }

    pub fn write_classification<W: Write>(&self, out: W) -> Result<()> {
        crate::classify::write_report_csv(&self.classification, out)
    }
}
