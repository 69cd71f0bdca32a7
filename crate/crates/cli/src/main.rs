//! `follownet` command line front end.
//!
//! Exit codes: 0 ok, 2 ingestion error, 3 config error, 4 no coordination
//! found, 5 internal error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use follownet::classify::{cross_validate, train, write_report_csv, Forest, ForestConfig, Label, LabeledSample};
use follownet::evaluate::{evaluate_tables, EvaluateConfig};
use follownet::io::save_dataset_csv;
use follownet::pipeline::write_outputs;
use follownet::{analyse, ingest_csv, Error, ErrorClass, Model, PipelineConfig, Result, SimConfig, ThresholdPolicy};
use serde::{Deserialize, Serialize};

const OUTPUT_ENV: &str = "FOLLOWNET_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "follownet", version, about = "Leadership inference from movement time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trial: dataset.csv and truth.json
    Simulate(SimulateArgs),
    /// Detect coordination events and rank leaders in a dataset
    Infer(InferArgs),
    /// Reproduce the evaluation tables from simulation
    Evaluate(EvaluateArgs),
    /// Train, apply or cross-validate the model classifier
    Classify(ClassifyArgs),
    /// Extract classification features from one or more datasets
    Features(FeaturesArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML file with simulation settings
    #[arg(long)]
    config: Option<PathBuf>,
    /// dm, hm, random, rotating_dm or lt:<kappa>:<rho>
    #[arg(long)]
    model: Option<Model>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    events: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUTPUT_ENV)]
    output: Option<PathBuf>,
}

/// Pipeline settings shared by `infer` and `features`; flags override the file.
#[derive(Args)]
struct PipelineArgs {
    /// TOML file whose keys are the pipeline config fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    omega: Option<usize>,
    #[arg(long)]
    delta: Option<usize>,
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// mean, median or percentile:<p>
    #[arg(long)]
    lambda: Option<ThresholdPolicy>,
    #[arg(long)]
    merge_gap: Option<usize>,
    #[arg(long)]
    damping: Option<f64>,
    /// Read the wide single-dimension layout
    #[arg(long)]
    wide: bool,
    /// Interpolate interior gaps of up to this many steps
    #[arg(long)]
    max_gap: Option<usize>,
    #[arg(long)]
    no_pagerank: bool,
    #[arg(long)]
    no_vch: bool,
    #[arg(long)]
    no_pch: bool,
}

#[derive(Args)]
struct InferArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, env = OUTPUT_ENV)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// TOML file with evaluation settings
    #[arg(long)]
    config: Option<PathBuf>,
    /// Trials per model for the precision and hierarchy tables
    #[arg(long)]
    trials: Option<usize>,
    /// Trials per label for classification
    #[arg(long)]
    class_trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = OUTPUT_ENV)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FeaturesArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Label attached to every record, for training sets
    #[arg(long)]
    label: Option<Label>,
    /// Write records here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(subcommand)]
    action: ClassifyAction,
}

#[derive(Subcommand)]
enum ClassifyAction {
    /// Fit a forest on labeled feature records
    Train {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        forest: PathBuf,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Label feature records with a trained forest
    Predict {
        #[arg(long)]
        forest: PathBuf,
        #[arg(long)]
        samples: PathBuf,
    },
    /// Stratified k-fold cross validation on labeled feature records
    Cv {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long, default_value_t = 10)]
        folds: usize,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, env = OUTPUT_ENV)]
        output: Option<PathBuf>,
    },
}

/// One dataset's feature vector, as written by `features`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureRecord {
    source: String,
    features: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Ingestion => 2,
        ErrorClass::Config => 3,
        ErrorClass::NoCoordination => 4,
        ErrorClass::Internal => 5,
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Infer(args) => infer(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Classify(args) => classify(args.action),
        Command::Features(args) => features(args),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn read_config(path: &Path) -> Result<String> {
    read_text(path).map_err(|e| Error::Config(e.to_string()))
}

fn write_file(path: &Path, body: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    fs::write(path, body).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn output_dir(flag: Option<PathBuf>, configured: Option<PathBuf>) -> PathBuf {
    flag.or(configured).unwrap_or_else(|| PathBuf::from("follownet-out"))
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = match &args.config {
        Some(path) => toml::from_str(&read_config(path)?).map_err(|e| Error::Config(e.to_string()))?,
        None => SimConfig::default(),
    };
    if let Some(model) = args.model {
        config.model = model;
    }
    if let Some(n) = args.n {
        config.n = n;
    }
    if let Some(events) = args.events {
        config.events = events;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let trial = follownet::simulate(&config)?;
    let dir = output_dir(args.output, None);
    fs::create_dir_all(&dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    save_dataset_csv(&trial.dataset, &dir.join("dataset.csv"))?;
    let truth = serde_json::to_string_pretty(&trial.truth())? + "\n";
    write_file(&dir.join("truth.json"), truth.as_bytes())?;
    println!("{}", dir.display());
    Ok(())
}

fn pipeline_config(args: &PipelineArgs) -> Result<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_toml(&read_config(path)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = args.omega {
        config.window.omega = v;
    }
    if let Some(v) = args.delta {
        config.window.delta = v;
    }
    if let Some(v) = args.beta {
        config.window.beta = v;
    }
    if let Some(v) = args.epsilon {
        config.epsilon = v;
    }
    if let Some(v) = args.lambda {
        config.lambda = v;
    }
    if let Some(v) = args.merge_gap {
        config.merge_gap = Some(v);
    }
    if let Some(v) = args.damping {
        config.pagerank.damping = v;
    }
    if args.wide {
        config.ingest.wide = true;
    }
    if let Some(v) = args.max_gap {
        config.ingest.max_gap = v;
    }
    config.measures.pagerank &= !args.no_pagerank;
    config.measures.vch &= !args.no_vch;
    config.measures.pch &= !args.no_pch;
    config.validate()?;
    Ok(config)
}

fn infer(args: InferArgs) -> Result<()> {
    let config = pipeline_config(&args.pipeline)?;
    let input = args
        .input
        .or_else(|| config.input.clone())
        .ok_or_else(|| Error::Config("no input file given".into()))?;
    let dataset = ingest_csv(&input, config.ingest)?;
    let analysis = analyse(&dataset, &config)?;
    let dir = output_dir(args.output, config.output.clone());
    for path in write_outputs(&dir, &dataset, &analysis)? {
        println!("{}", path.display());
    }
    if !analysis.has_coordination() {
        return Err(Error::NoCoordination);
    }
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut config: EvaluateConfig = match &args.config {
        Some(path) => toml::from_str(&read_config(path)?).map_err(|e| Error::Config(e.to_string()))?,
        None => EvaluateConfig::default(),
    };
    if let Some(v) = args.trials {
        config.trials = v;
    }
    if let Some(v) = args.class_trials {
        config.class_trials = v;
    }
    if let Some(v) = args.seed {
        config.base_seed = v;
    }
    let dir = output_dir(args.output, config.pipeline.output.clone());
    let report = evaluate_tables(&config)?;

    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    report.write_precision(&mut buf)?;
    files.push(("precision.csv", std::mem::take(&mut buf)));
    report.write_hierarchy(&mut buf)?;
    files.push(("hierarchy.csv", std::mem::take(&mut buf)));
    report.write_rotating(&mut buf)?;
    files.push(("rotating.csv", std::mem::take(&mut buf)));
    report.write_rotating_summary(&mut buf)?;
    files.push(("rotating_summary.csv", std::mem::take(&mut buf)));
    report.write_classification(&mut buf)?;
    files.push(("classification.csv", buf));
    for (name, body) in files {
        let path = dir.join(name);
        write_file(&path, &body)?;
        println!("{}", path.display());
    }
    if report.skipped_trials > 0 {
        eprintln!("note: {} trials without events left out of classification", report.skipped_trials);
    }
    Ok(())
}

fn features(args: FeaturesArgs) -> Result<()> {
    let config = pipeline_config(&args.pipeline)?;
    let mut records = Vec::with_capacity(args.inputs.len());
    for input in &args.inputs {
        let dataset = ingest_csv(input, config.ingest)?;
        let analysis = analyse(&dataset, &config)?;
        if !analysis.has_coordination() {
            return Err(Error::NoCoordination);
        }
        let f = analysis
            .features
            .ok_or_else(|| Error::Config("features need both pagerank and vch enabled".into()))?;
        records.push(FeatureRecord {
            source: input.display().to_string(),
            features: f.values(),
            label: args.label,
        });
    }
    let body = serde_json::to_string_pretty(&records)? + "\n";
    match args.out {
        Some(path) => write_file(&path, body.as_bytes()),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| Error::Io {
                path: PathBuf::from("<stdout>"),
                source: e,
            }),
    }
}

fn read_records(path: &Path) -> Result<Vec<FeatureRecord>> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line() as u64,
        message: format!("{}: {e}", path.display()),
    })
}

/// Labeled samples keyed by record position.
fn labeled(records: Vec<FeatureRecord>) -> Result<Vec<LabeledSample>> {
    records
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let label = r
                .label
                .ok_or_else(|| Error::Config(format!("record `{}` has no label", r.source)))?;
            Ok(LabeledSample {
                id: i as u64,
                features: r.features,
                label,
            })
        })
        .collect()
}

fn classify(action: ClassifyAction) -> Result<()> {
    match action {
        ClassifyAction::Train {
            samples,
            forest,
            trees,
            seed,
        } => {
            let samples = labeled(read_records(&samples)?)?;
            let config = ForestConfig {
                n_trees: trees,
                seed,
                ..ForestConfig::default()
            };
            let model = train(&samples, &config)?;
            write_file(&forest, (model.to_json()? + "\n").as_bytes())
        }
        ClassifyAction::Predict { forest, samples } => {
            let model = Forest::from_json(&read_text(&forest)?)?;
            let mut out = csv_writer();
            out.write_record(["source", "label"])?;
            for r in read_records(&samples)? {
                out.write_record([r.source.as_str(), model.predict(&r.features).name()])?;
            }
            out.flush().map_err(csv::Error::from)?;
            Ok(())
        }
        ClassifyAction::Cv {
            samples,
            folds,
            trees,
            seed,
            output,
        } => {
            let samples = labeled(read_records(&samples)?)?;
            let config = ForestConfig {
                n_trees: trees,
                seed,
                ..ForestConfig::default()
            };
            let report = cross_validate(&samples, folds, &config)?;
            let mut body = Vec::new();
            write_report_csv(&report.metrics, &mut body)?;
            match output {
                Some(dir) => {
                    let path = dir.join("classification.csv");
                    write_file(&path, &body)?;
                    println!("{}", path.display());
                    Ok(())
                }
                None => std::io::stdout().write_all(&body).map_err(|e| Error::Io {
                    path: PathBuf::from("<stdout>"),
                    source: e,
                }),
            }
        }
    }
}

fn csv_writer() -> csv::Writer<std::io::Stdout> {
    csv::Writer::from_writer(std::io::stdout())
}
