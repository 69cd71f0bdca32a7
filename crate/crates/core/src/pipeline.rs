//! End-to-end analysis: scores, networks, events, rankings and features.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::IngestOptions;
use crate::netinfer::{detect_events, infer_network, resolve_threshold, CoordinationEvent, FollowingNetworkSequence, ThresholdPolicy};
use crate::ranking::{feature_vector, FeatureVector, LeadershipContext, Measure, MeasureRankings, PageRankConfig};
use crate::timeseries::{pairwise_follow_scores, Dataset, FollowScores, WindowSpec};

pub const OUTPUT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureToggles {
    pub pagerank: bool,
    pub vch: bool,
    pub pch: bool,
}

impl Default for MeasureToggles {
    fn default() -> Self {
        MeasureToggles {
            pagerank: true,
            vch: true,
            pch: true,
        }
    }
}

impl MeasureToggles {
    pub fn enabled(&self, measure: Measure) -> bool {
        match measure {
            Measure::PageRank => self.pagerank,
            Measure::Vch => self.vch,
            Measure::Pch => self.pch,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub window: WindowSpec,
    /// Minimum `|s|` for an edge.
    pub epsilon: f64,
    pub lambda: ThresholdPolicy,
    /// Windows between coordination runs that still merge them; defaults to
    /// `ceil(beta / delta)`.
    pub merge_gap: Option<usize>,
    pub pagerank: PageRankConfig,
    pub measures: MeasureToggles,
    pub seed: u64,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub ingest: IngestOptions,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: WindowSpec::default(),
            epsilon: 0.0,
            lambda: ThresholdPolicy::Mean,
            merge_gap: None,
            pagerank: PageRankConfig::default(),
            measures: MeasureToggles::default(),
            seed: 0,
            input: None,
            output: None,
            ingest: IngestOptions::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn merge_gap(&self) -> usize {
        self.merge_gap.unwrap_or_else(|| self.window.beta_in_windows())
    }

    pub fn validate(&self) -> Result<()> {
        self.window.validate()?;
        self.pagerank.validate()?;
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        Ok(())
    }
}

/// Everything computed for one dataset.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub scores: FollowScores,
    pub networks: FollowingNetworkSequence,
    pub density: Vec<f64>,
    pub lambda: f64,
    pub merge_gap: usize,
    pub events: Vec<CoordinationEvent>,
    /// Rankings of every enabled and available measure, in [`Measure::ALL`] order.
    pub rankings: Vec<MeasureRankings>,
    pub pch_available: bool,
    /// Present when events were found and PageRank and VCH are enabled.
    pub features: Option<FeatureVector>,
}

impl Analysis {
    pub fn rankings(&self, measure: Measure) -> Option<&MeasureRankings> {
        self.rankings.iter().find(|r| r.measure == measure)
    }

    pub fn has_coordination(&self) -> bool {
        !self.events.is_empty()
    }

    /// Support of `measure` per entity, when that measure was ranked.
    pub fn support(&self, measure: Measure) -> Option<Vec<f64>> {
        self.rankings(measure).and_then(|r| r.support().ok())
    }
}

/// Runs score, network, density, events, rankings and features in order.
///
/// A dataset without coordination is not an error here: `events` is empty and
/// no rankings or features are produced.
pub fn analyse(dataset: &Dataset, config: &PipelineConfig) -> Result<Analysis> {
    config.validate()?;
    if config.window.window_count(dataset.len()) == 0 {
        return Err(Error::InvalidWindow(format!(
            "omega {} exceeds series length {}",
            config.window.omega,
            dataset.len()
        )));
    }
    let scores = pairwise_follow_scores(dataset, &config.window)?;
    let networks = infer_network(&scores, config.epsilon)?;
    let density = networks.density_series();
    let lambda = resolve_threshold(&density, config.lambda)?;
    let merge_gap = config.merge_gap();
    let events = detect_events(&density, lambda, merge_gap)?;

    let pch_available = dataset.dims() == 2;
    let mut rankings = Vec::new();
    if !events.is_empty() {
        let ctx = LeadershipContext::new(dataset, config.window, &networks, config.pagerank)?;
        for measure in Measure::ALL {
            if !config.measures.enabled(measure) || (measure == Measure::Pch && !pch_available) {
                continue;
            }
            rankings.push(ctx.rank_events(measure, &events)?);
        }
    }
    let find = |m: Measure| rankings.iter().find(|r| r.measure == m);
    let features = match (find(Measure::PageRank), find(Measure::Vch)) {
        (Some(pr), Some(vch)) => Some(feature_vector(pr, vch, find(Measure::Pch))?),
        _ => None,
    };
    Ok(Analysis {
        scores,
        networks,
        density,
        lambda,
        merge_gap,
        events,
        rankings,
        pch_available,
        features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventsFile {
    pub format_version: u32,
    pub lambda: f64,
    pub merge_gap: usize,
    pub events: Vec<CoordinationEvent>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notice: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturesFile {
    pub format_version: u32,
    pub corr_p: Option<f64>,
    pub corr_v: f64,
    pub corr_p_pr: Option<f64>,
    pub corr_v_pr: f64,
    pub max_support_pr: f64,
    pub pch_available: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub notice: Option<String>,
}

impl FeaturesFile {
    pub fn features(&self) -> FeatureVector {
        FeatureVector {
            corr_p: self.corr_p,
            corr_v: self.corr_v,
            corr_p_pr: self.corr_p_pr,
            corr_v_pr: self.corr_v_pr,
            max_support_pr: self.max_support_pr,
        }
    }
}

const NO_COORDINATION: &str = "no coordination events detected; rankings, support and features were skipped";

fn csv_string(write: impl FnOnce(&mut csv::Writer<Vec<u8>>) -> Result<()>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    write(&mut w)?;
    let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Rendered output files, in the order they are written.
pub fn render_outputs(dataset: &Dataset, analysis: &Analysis) -> Result<Vec<(&'static str, String)>> {
    let mut files = Vec::new();
    files.push((
        "density.csv",
        csv_string(|w| {
            w.write_record(["window_index", "density"])?;
            for (k, d) in analysis.density.iter().enumerate() {
                w.write_record([k.to_string(), d.to_string()])?;
            }
            Ok(())
        })?,
    ));
    let events = EventsFile {
        format_version: OUTPUT_FORMAT_VERSION,
        lambda: analysis.lambda,
        merge_gap: analysis.merge_gap,
        events: analysis.events.clone(),
        notice: (!analysis.has_coordination()).then(|| NO_COORDINATION.to_string()),
    };
    files.push(("events.json", serde_json::to_string_pretty(&events)? + "\n"));
    if !analysis.has_coordination() {
        return Ok(files);
    }

    let ids = dataset.entity_ids();
    files.push((
        "rankings.csv",
        csv_string(|w| {
            w.write_record(["event_id", "measure", "rank", "entity_id", "mean_rank"])?;
            for r in &analysis.rankings {
                for (event_id, e) in r.events.iter().enumerate() {
                    for (pos, &entity) in e.order().order().iter().enumerate() {
                        w.write_record([
                            event_id.to_string(),
                            r.measure.name().to_string(),
                            (pos + 1).to_string(),
                            ids[entity].clone(),
                            e.aggregated.mean_rank[entity].to_string(),
                        ])?;
                    }
                }
            }
            Ok(())
        })?,
    ));

    let support: Vec<Option<Vec<f64>>> = Measure::ALL.iter().map(|&m| analysis.support(m)).collect();
    files.push((
        "support.csv",
        csv_string(|w| {
            w.write_record(["entity_id", "pagerank", "vch", "pch"])?;
            for (e, id) in ids.iter().enumerate() {
                let mut row = vec![id.clone()];
                row.extend(support.iter().map(|s| s.as_ref().map_or(String::new(), |v| v[e].to_string())));
                w.write_record(&row)?;
            }
            Ok(())
        })?,
    ));

    if let Some(f) = analysis.features {
        let file = FeaturesFile {
            format_version: OUTPUT_FORMAT_VERSION,
            corr_p: f.corr_p,
            corr_v: f.corr_v,
            corr_p_pr: f.corr_p_pr,
            corr_v_pr: f.corr_v_pr,
            max_support_pr: f.max_support_pr,
            pch_available: f.corr_p.is_some(),
            notice: (!analysis.pch_available)
                .then(|| format!("position hull needs 2 dimensions; data has {}", dataset.dims())),
        };
        files.push(("features.json", serde_json::to_string_pretty(&file)? + "\n"));
    }
    Ok(files)
}

/// Writes the rendered outputs into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, dataset: &Dataset, analysis: &Analysis) -> Result<Vec<PathBuf>> {
    let files = render_outputs(dataset, analysis)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
