//! Leadership-model classification with a bagged decision-tree ensemble.

mod cv;
mod forest;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use cv::{cross_validate, metrics, write_report_csv, ClassMetrics, CvReport};
pub use forest::{train, Forest, ForestConfig, Node, Tree, FOREST_FORMAT_VERSION};

/// Leadership model classes, in vote tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "DM")]
    Dm,
    #[serde(rename = "HM")]
    Hm,
    #[serde(rename = "LT")]
    Lt,
    Random,
}

impl Label {
    pub const ALL: [Label; 4] = [Label::Dm, Label::Hm, Label::Lt, Label::Random];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Dm => "DM",
            Label::Hm => "HM",
            Label::Lt => "LT",
            Label::Random => "Random",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Label::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Classifier(format!("unknown label `{s}`")))
    }
}

/// One training example. `id` keys the bootstrap, so sample order is irrelevant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: u64,
    pub features: Vec<f64>,
    pub label: Label,
}

/// Most frequent label; ties go to the earliest in [`Label::ALL`].
pub(crate) fn plurality(counts: &[usize; 4]) -> Label {
    let mut best = 0;
    for k in 1..4 {
        if counts[k] > counts[best] {
            best = k;
        }
    }
    Label::ALL[best]
}
