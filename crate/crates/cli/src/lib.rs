//! The `docsearch` command line: corpus generation, decoding, strategy
//! comparison and evaluation.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data or precondition
//! errors.

mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use docsearch::corpus::{generate_synthetic_corpus, write_corpus, GeneratorConfig};
use docsearch::metrics::{F1Report, DEFAULT_MIN_SUPPORT};
use docsearch::report::{
    compute_metrics, DocumentReport, Metric, MetricsReport, RunParams, RunReport,
};
use docsearch::strategies::{predicted_document_cost, DEFAULT_CONTEXT_BEAM};
use docsearch::{
    decode_document, load_corpus, BeamParams, Document, StrategyId, SyntheticModel, WorldSpec,
};

pub use output::{percent, render_table, write_atomic};

/// A bad command line discovered after parsing; exits with 1.
#[derive(Debug)]
pub struct Usage(pub String);

/// Inputs that are well-formed but unusable; exits with 2.
#[derive(Debug)]
pub struct Precondition(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Precondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}
impl std::error::Error for Precondition {}

#[derive(Debug, Parser)]
#[command(
    name = "docsearch",
    version,
    about = "Document-level translation decoding strategies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with references and annotations.
    Generate(GenerateArgs),
    /// Decode a corpus with one strategy and write a run report.
    Decode(DecodeArgs),
    /// Decode with several strategies and tabulate their metrics.
    Compare(CompareArgs),
    /// Recompute metrics from a stored run report.
    Evaluate(EvaluateArgs),
    /// Print the built-in world specification.
    World(WorldArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// World specification (JSON); the built-in world if omitted.
    #[arg(long)]
    pub world: Option<PathBuf>,
    /// Override the world's smoothing mass.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Context window size W, in sentences.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    /// Token-level beam size B.
    #[arg(long, default_value_t = 12)]
    pub beam: usize,
    /// Number of context streams h for doc-trans-beam.
    #[arg(long, default_value_t = DEFAULT_CONTEXT_BEAM)]
    pub context_beam: usize,
    /// Maximum hypothesis length, end token included.
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Rank finished hypotheses by raw log-probability.
    #[arg(long)]
    pub no_length_norm: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Comma-separated metrics.
    #[arg(long, value_delimiter = ',', value_parser = PossibleValuesParser::new(["ppl", "bleu", "gender", "formality", "contrastive"]))]
    pub metrics: Vec<String>,
    /// Minimum class support for the macro F1 average.
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    pub min_support: u64,
}

impl MetricArgs {
    fn selected(&self, default_all: bool) -> Vec<Metric> {
        let mut metrics: Vec<Metric> = self.metrics.iter().map(|m| m.parse().unwrap()).collect();
        if metrics.is_empty() && default_all {
            metrics = Metric::ALL.to_vec();
        }
        metrics.sort();
        metrics.dedup();
        metrics
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub docs: usize,
    #[arg(long, default_value_t = 6)]
    pub sentences: usize,
    #[arg(long, default_value_t = 6)]
    pub length: usize,
    /// Window the pronoun antecedents must fit in.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_parser = strategy_names())]
    pub strategy: String,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Also compute these metrics into the report.
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Comma-separated strategies; all of them if omitted.
    #[arg(long = "strategy", value_delimiter = ',', value_parser = strategy_names())]
    pub strategies: Vec<String>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON output; printed after the table if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub report: PathBuf,
    /// World specification (JSON); the built-in world if omitted. The
    /// smoothing mass comes from the report.
    #[arg(long)]
    pub world: Option<PathBuf>,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct WorldArgs {
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub force: bool,
}

fn strategy_names() -> PossibleValuesParser {
    PossibleValuesParser::new(StrategyId::all(1).map(|s| s.name()))
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Errors go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                1
            } else {
                2
            }
        }
    }
}

pub fn execute(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Decode(a) => cmd_decode(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::World(a) => {
            let mut world = WorldSpec::default_world();
            if let Some(eps) = a.epsilon {
                world = world.with_epsilon(eps);
                world.validate()?;
            }
            let text = world.to_json_pretty() + "\n";
            output::emit(a.out.as_deref(), text.as_bytes(), a.force)
        }
    }
}

pub fn load_world(path: Option<&Path>, epsilon: Option<f64>) -> Result<WorldSpec> {
    let mut world = match path {
        Some(p) => WorldSpec::load(p).with_context(|| format!("loading world {}", p.display()))?,
        None => WorldSpec::default_world(),
    };
    if let Some(eps) = epsilon {
        world = world.with_epsilon(eps);
        world.validate()?;
    }
    Ok(world)
}

fn load_docs(path: &Path) -> Result<Vec<Document>> {
    load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    let world = load_world(a.model.world.as_deref(), a.model.epsilon)?;
    let config = GeneratorConfig {
        n_docs: a.docs,
        sentences_per_doc: a.sentences,
        sentence_len: a.length,
        window: a.window,
    };
    let docs = generate_synthetic_corpus(&world, a.seed, &config)?;
    let mut buf = Vec::new();
    write_corpus(&mut buf, &docs)?;
    write_atomic(&a.out, &buf, a.force)
}

/// Settings shared by every strategy of a run.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub window: usize,
    pub beam: BeamParams,
    pub context_beam: usize,
    pub jobs: usize,
    pub seed: Option<u64>,
}

impl RunSettings {
    fn from_args(s: &SearchArgs, seed: Option<u64>) -> Result<Self> {
        let mut beam = BeamParams::new(s.beam).with_length_norm(!s.no_length_norm);
        beam.max_len = s.max_len;
        if let Err(e) = beam.validate() {
            bail!(Usage(e.to_string()));
        }
        if s.window == 0 {
            bail!(Usage("--window must be at least 1".into()));
        }
        if s.context_beam == 0 {
            bail!(Usage("--context-beam must be at least 1".into()));
        }
        Ok(Self {
            window: s.window,
            beam,
            context_beam: s.context_beam,
            jobs: s.jobs,
            seed,
        })
    }
}

/// Decodes every document with `strategy`, in parallel across documents;
/// the report keeps corpus order.
pub fn decode_corpus(
    model: &SyntheticModel,
    corpus: &[Document],
    strategy: StrategyId,
    settings: &RunSettings,
) -> Result<RunReport> {
    let start = Instant::now();
    let pool = thread_pool(settings.jobs)?;
    let documents = pool.install(|| {
        corpus
            .par_iter()
            .map(|doc| {
                decode_document(strategy, model, doc, settings.window, &settings.beam)
                    .map(|r| DocumentReport::new(doc.doc_id.clone(), &r))
            })
            .collect::<docsearch::Result<Vec<_>>>()
    })?;
    let params = RunParams {
        strategy: strategy.name().to_owned(),
        window: settings.window,
        beam_size: settings.beam.beam_size,
        context_beam: match strategy {
            StrategyId::DocTransBeam { context_beam } => Some(context_beam),
            _ => None,
        },
        max_len: settings.beam.max_len,
        length_norm: settings.beam.length_norm,
        epsilon: model.epsilon(),
        seed: settings.seed,
    };
    Ok(RunReport::new(
        params,
        documents,
        start.elapsed().as_secs_f64(),
    ))
}

/// Metrics of a stored report against `corpus`.
pub fn evaluate_report(
    model: &SyntheticModel,
    corpus: &[Document],
    report: &RunReport,
    metrics: &[Metric],
    min_support: u64,
) -> Result<MetricsReport> {
    report.check_alignment(corpus)?;
    let strategy = report.params.strategy_id()?;
    Ok(compute_metrics(
        model,
        model.spec(),
        corpus,
        &report.translations(),
        strategy,
        report.params.window,
        min_support,
        metrics,
    )?)
}

pub fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let settings = RunSettings::from_args(&a.search, a.seed)?;
    let strategy = StrategyId::parse(&a.strategy, settings.context_beam)?;
    let world = load_world(a.model.world.as_deref(), a.model.epsilon)?;
    let model = SyntheticModel::new(world)?;
    let corpus = load_docs(&a.corpus)?;
    let mut report = decode_corpus(&model, &corpus, strategy, &settings)?;
    let metrics = a.metrics.selected(false);
    if !metrics.is_empty() {
        report.metrics = Some(evaluate_report(
            &model,
            &corpus,
            &report,
            &metrics,
            a.metrics.min_support,
        )?);
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    output::emit(a.out.as_deref(), text.as_bytes(), a.force)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareSettings {
    pub window: usize,
    pub beam_size: usize,
    pub context_beam: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
    pub length_norm: bool,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub metrics: Vec<Metric>,
    pub min_support: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub strategy: String,
    pub forward_passes: u64,
    /// Cost model prediction from the source lengths; exact for the
    /// synthetic model.
    pub predicted_forward_passes: u64,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub settings: CompareSettings,
    pub rows: Vec<CompareRow>,
    pub wall_time_secs: f64,
}

/// Strategies in table order, without duplicates.
pub fn table_order(mut strategies: Vec<StrategyId>) -> Vec<StrategyId> {
    strategies.sort_by_key(|s| s.order());
    strategies.dedup_by_key(|s| s.order());
    strategies
}

pub fn compare(
    model: &SyntheticModel,
    corpus: &[Document],
    strategies: &[StrategyId],
    settings: &RunSettings,
    metrics: &[Metric],
    min_support: u64,
) -> Result<CompareReport> {
    let start = Instant::now();
    let mut rows = Vec::new();
    for &strategy in &table_order(strategies.to_vec()) {
        let report = decode_corpus(model, corpus, strategy, settings)?;
        let metrics = evaluate_report(model, corpus, &report, metrics, min_support)?;
        let predicted = corpus
            .iter()
            .map(|d| {
                let lengths: Vec<usize> = d.sentences.iter().map(|s| s.src.len()).collect();
                predicted_document_cost(
                    strategy,
                    &lengths,
                    settings.window,
                    settings.beam.beam_size,
                )
            })
            .sum();
        rows.push(CompareRow {
            strategy: strategy.name().to_owned(),
            forward_passes: report.forward_passes,
            predicted_forward_passes: predicted,
            metrics,
        });
    }
    Ok(CompareReport {
        settings: CompareSettings {
            window: settings.window,
            beam_size: settings.beam.beam_size,
            context_beam: settings.context_beam,
            max_len: settings.beam.max_len,
            length_norm: settings.beam.length_norm,
            epsilon: model.epsilon(),
            seed: settings.seed,
            metrics: metrics.to_vec(),
            min_support,
        },
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

/// Aligned text table of a comparison; F1, BLEU and accuracy in percent.
/// Macro F1 shows `n/a` when no class reaches the support threshold.
pub fn compare_table(report: &CompareReport) -> String {
    let header = [
        "strategy",
        "passes",
        "ppl",
        "ref-ppl",
        "bleu",
        "gender-f1",
        "gender-macro",
        "formality-f1",
        "formality-macro",
        "contrastive",
    ];
    let dash = || "-".to_owned();
    let macro_f1 = |f: &F1Report| {
        if f.macro_classes.is_empty() {
            "n/a".to_owned()
        } else {
            percent(f.macro_f1)
        }
    };
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let m = &r.metrics;
            vec![
                r.strategy.clone(),
                r.forward_passes.to_string(),
                m.perplexity
                    .as_ref()
                    .map_or_else(dash, |p| format!("{:.3}", p.hypotheses)),
                m.perplexity
                    .as_ref()
                    .map_or_else(dash, |p| format!("{:.3}", p.references)),
                m.bleu.map_or_else(dash, percent),
                m.gender.as_ref().map_or_else(dash, |f| percent(f.micro_f1)),
                m.gender.as_ref().map_or_else(dash, macro_f1),
                m.formality
                    .as_ref()
                    .map_or_else(dash, |f| percent(f.micro_f1)),
                m.formality.as_ref().map_or_else(dash, macro_f1),
                m.contrastive.map_or_else(dash, percent),
            ]
        })
        .collect();
    render_table(&header, &rows)
}

pub fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let settings = RunSettings::from_args(&a.search, a.seed)?;
    let strategies: Vec<StrategyId> = if a.strategies.is_empty() {
        StrategyId::all(settings.context_beam).to_vec()
    } else {
        a.strategies
            .iter()
            .map(|s| StrategyId::parse(s, settings.context_beam))
            .collect::<docsearch::Result<_>>()?
    };
    let world = load_world(a.model.world.as_deref(), a.model.epsilon)?;
    let model = SyntheticModel::new(world)?;
    let corpus = load_docs(&a.corpus)?;
    let report = compare(
        &model,
        &corpus,
        &strategies,
        &settings,
        &a.metrics.selected(true),
        a.metrics.min_support,
    )?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    print!("{}", compare_table(&report));
    match &a.out {
        Some(path) => write_atomic(path, json.as_bytes(), a.force),
        None => output::emit(None, json.as_bytes(), false),
    }
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<()> {
    let corpus = load_docs(&a.corpus)?;
    let text = std::fs::read_to_string(&a.report)
        .with_context(|| format!("reading report {}", a.report.display()))?;
    let report: RunReport = serde_json::from_str(&text)
        .with_context(|| format!("parsing report {}", a.report.display()))?;
    let world = load_world(a.world.as_deref(), Some(report.params.epsilon))?;
    let model = SyntheticModel::new(world)?;
    let metrics = evaluate_report(
        &model,
        &corpus,
        &report,
        &a.metrics.selected(true),
        a.metrics.min_support,
    )?;
    let json = serde_json::to_string_pretty(&metrics)? + "\n";
    output::emit(a.out.as_deref(), json.as_bytes(), a.force)
}
