use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::forest::{train, ForestConfig};
use super::{Label, LabeledSample};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: Label,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    /// Number of samples whose true label is `class`.
    pub support: usize,
}

/// Per-class precision, recall and F-score for every label.
///
/// Precision is 0 for a class that is never predicted; F is 0 when `P + R = 0`.
pub fn metrics(truth: &[Label], predicted: &[Label]) -> Vec<ClassMetrics> {
    assert_eq!(truth.len(), predicted.len());
    Label::ALL
        .into_iter()
        .map(|class| {
            let tp = truth.iter().zip(predicted).filter(|(t, p)| **t == class && **p == class).count();
            let actual = truth.iter().filter(|&&t| t == class).count();
            let called = predicted.iter().filter(|&&p| p == class).count();
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            let (precision, recall) = (ratio(tp, called), ratio(tp, actual));
            let f_score = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class,
                precision,
                recall,
                f_score,
                support: actual,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: usize,
    pub metrics: Vec<ClassMetrics>,
    /// `(sample id, true label, held-out prediction)`, sorted by id.
    pub predictions: Vec<(u64, Label, Label)>,
}

impl CvReport {
    pub fn class(&self, label: Label) -> &ClassMetrics {
        &self.metrics[label.index()]
    }
}

/// Stratified k-fold cross validation with metrics pooled over all held-out
/// predictions. Fold `f` trains with seed `config.seed + f`.
pub fn cross_validate(samples: &[LabeledSample], folds: usize, config: &ForestConfig) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::Classifier(format!("need at least 2 folds, got {folds}")));
    }
    let mut by_id: Vec<&LabeledSample> = samples.iter().collect();
    by_id.sort_by_key(|s| s.id);

    let mut fold_of = vec![0usize; by_id.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut next = 0;
    for class in Label::ALL {
        let mut members: Vec<usize> = (0..by_id.len()).filter(|&i| by_id[i].label == class).collect();
        if members.is_empty() {
            continue;
        }
        if members.len() < folds {
            return Err(Error::Classifier(format!(
                "class {class} has {} samples, fewer than {folds} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            fold_of[i] = next % folds;
            next += 1;
        }
    }

    let mut predictions = Vec::with_capacity(by_id.len());
    for f in 0..folds {
        let train_set: Vec<LabeledSample> = (0..by_id.len())
            .filter(|&i| fold_of[i] != f)
            .map(|i| by_id[i].clone())
            .collect();
        let forest = train(
            &train_set,
            &ForestConfig {
                seed: config.seed.wrapping_add(f as u64),
                ..*config
            },
        )?;
        for i in (0..by_id.len()).filter(|&i| fold_of[i] == f) {
            let s = by_id[i];
            predictions.push((s.id, s.label, forest.predict(&s.features)));
        }
    }
    predictions.sort_by_key(|p| p.0);
    let truth: Vec<Label> = predictions.iter().map(|p| p.1).collect();
    let predicted: Vec<Label> = predictions.iter().map(|p| p.2).collect();
    Ok(CvReport {
        folds,
        metrics: metrics(&truth, &predicted),
        predictions,
    })
}

/// Writes `class,precision,recall,f_score` rows in label order.
pub fn write_report_csv<W: Write>(report: &[ClassMetrics], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["class", "precision", "recall", "f_score"])?;
    for m in report {
        w.write_record([
            m.class.name().to_string(),
            m.precision.to_string(),
            m.recall.to_string(),
            m.f_score.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
