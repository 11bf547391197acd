//! Command-line surface shared by the `mtsce` binary and the tests.
//!
//! Settings come from an optional TOML file first, then flags. Exit codes:
//! 0 on success, 2 when no nearest unlike neighbor exists, 1 otherwise.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classifier::{serve, CentroidClassifier, Classifier, ExternalClassifier};
use crate::distance::DistanceKind;
use crate::engine::{explain, explain_batch, BatchOutcome, EngineConfig, WindowPlacement};
use crate::error::{Error, Result};
use crate::ingest::{parse_csv, parse_ts, parse_weights};
use crate::metrics::{MetricsSummary, YnnMode};
use crate::moea::ObjectiveMode;
use crate::nun::find_nun;
use crate::report::{
    metrics_from_reports, metrics_json, sha256_hex, ClassifierSpec, DatasetEntry, MetricsScope, ReportFile,
    RunManifest, Timestamps,
};
use crate::series::LabeledDataset;

/// The α grid of the sensitivity sweep.
pub const ALPHA_GRID: [f64; 7] = [0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0];
/// The θ grid of the sensitivity sweep.
pub const THETA_GRID: [f64; 5] = [0.55, 0.65, 0.75, 0.85, 0.95];

#[derive(Debug, Parser)]
#[command(name = "mtsce", version, about = "Counterfactual explanations for multivariate time series classifiers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explain one test instance; writes report.json and best_ce.csv.
    Explain(ExplainArgs),
    /// Explain every test instance and summarize the metrics.
    Benchmark(BenchmarkArgs),
    /// Recompute metrics from saved reports.
    Metrics(MetricsArgs),
    /// Print the nearest unlike neighbor of one test instance.
    Nun(NunArgs),
    /// Answer the line-delimited JSON classifier protocol on stdin/stdout
    /// with a centroid model.
    ServeCentroid(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Centroid,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Alpha,
    Theta,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Reference (training) set, `.ts` or `.csv`.
    #[arg(long)]
    pub train: PathBuf,
    /// Instances to explain, `.ts` or `.csv`.
    #[arg(long)]
    pub test: PathBuf,
    /// Per-time-step feature weights of the reference instances.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Channel count, required for `.csv` inputs.
    #[arg(long)]
    pub channels: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SearchArgs {
    /// TOML file with default settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub pop_size: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Crossover probability.
    #[arg(long)]
    pub pc: Option<f64>,
    /// Per-bit mutation probability; defaults to 1 / (k * d).
    #[arg(long)]
    pub pm: Option<f64>,
    /// Das-Dennis partitions.
    #[arg(long)]
    pub partitions: Option<usize>,
    /// l1, l2 or dtw.
    #[arg(long)]
    pub distance: Option<DistanceKind>,
    /// co_pr, co_sp, sp_pr or co_sp_pr.
    #[arg(long)]
    pub objectives: Option<ObjectiveMode>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Ignore feature weights even when given.
    #[arg(long)]
    pub no_weights: bool,
    /// center, start or best_of_three; used without weights.
    #[arg(long)]
    pub window_placement: Option<WindowPlacement>,
    #[arg(long, value_enum)]
    pub classifier: Option<ClassifierKind>,
    /// Shell command speaking the classifier protocol.
    #[arg(long)]
    pub external_cmd: Option<String>,
    /// Softmax temperature of the centroid classifier.
    #[arg(long)]
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MetricArgs {
    /// prose or literal.
    #[arg(long)]
    pub ynn_mode: Option<YnnMode>,
    /// all or best.
    #[arg(long)]
    pub scope: Option<MetricsScope>,
}

#[derive(Debug, Clone, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Position of the query in the test set.
    #[arg(long, default_value_t = 0, conflicts_with = "query_id")]
    pub index: usize,
    #[arg(long)]
    pub query_id: Option<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub sweep: Option<SweepParam>,
    /// Maximum number of concurrent explanations.
    #[arg(long)]
    pub parallel: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    /// A report file, a directory of reports, or a benchmark output
    /// directory.
    #[arg(long)]
    pub reports: PathBuf,
    /// Override the training set path recorded in the manifest.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Override the test set path recorded in the manifest.
    #[arg(long)]
    pub test: Option<PathBuf>,
    #[arg(long)]
    pub channels: Option<usize>,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Also write the summary here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct NunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub channels: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub theta: Option<f64>,
    pub alpha: Option<f64>,
    pub pop_size: Option<usize>,
    pub generations: Option<usize>,
    pub pc: Option<f64>,
    pub pm: Option<f64>,
    pub partitions: Option<usize>,
    pub distance: Option<DistanceKind>,
    pub objectives: Option<ObjectiveMode>,
    pub seed: Option<u64>,
    pub use_weights: Option<bool>,
    pub window_placement: Option<WindowPlacement>,
    pub classifier: Option<ClassifierKind>,
    pub external_cmd: Option<String>,
    pub temperature: Option<f64>,
    pub ynn_mode: Option<YnnMode>,
    pub scope: Option<MetricsScope>,
    pub parallel: Option<usize>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_text(path)?).map_err(|e| e.in_file(path.display().to_string()))
    }
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub engine: EngineConfig,
    pub classifier: ClassifierSpec,
    pub ynn_mode: Option<YnnMode>,
    pub scope: Option<MetricsScope>,
    pub parallel: Option<usize>,
}

/// Merge `file` and the flags, flags winning.
pub fn resolve(search: &SearchArgs, metrics: &MetricArgs, parallel: Option<usize>, file: &FileConfig) -> Result<Settings> {
    let d = EngineConfig::default();
    let engine = EngineConfig {
        theta: search.theta.or(file.theta).unwrap_or(d.theta),
        alpha: search.alpha.or(file.alpha).unwrap_or(d.alpha),
        pop_size: search.pop_size.or(file.pop_size).unwrap_or(d.pop_size),
        generations: search.generations.or(file.generations).unwrap_or(d.generations),
        crossover_prob: search.pc.or(file.pc).unwrap_or(d.crossover_prob),
        mutation_prob: search.pm.or(file.pm),
        partitions: search.partitions.or(file.partitions).unwrap_or(d.partitions),
        distance: search.distance.or(file.distance).unwrap_or(d.distance),
        objective_mode: search.objectives.or(file.objectives).unwrap_or(d.objective_mode),
        seed: search.seed.or(file.seed).unwrap_or(d.seed),
        use_weights: !search.no_weights && file.use_weights.unwrap_or(true),
        window_placement: search.window_placement.or(file.window_placement).unwrap_or(d.window_placement),
    };
    engine.validate()?;
    let kind = search.classifier.or(file.classifier).unwrap_or(ClassifierKind::Centroid);
    let classifier = match kind {
        ClassifierKind::Centroid => {
            let temperature = search.temperature.or(file.temperature).unwrap_or(1.0);
            if !(temperature.is_finite() && temperature > 0.0) {
                return Err(Error::invalid(format!("temperature must be positive, got {temperature}")));
            }
            ClassifierSpec::Centroid { temperature }
        }
        ClassifierKind::External => {
            let command = search
                .external_cmd
                .clone()
                .or_else(|| file.external_cmd.clone())
                .ok_or_else(|| Error::invalid("--classifier external needs --external-cmd"))?;
            ClassifierSpec::External { command }
        }
    };
    Ok(Settings {
        engine,
        classifier,
        ynn_mode: metrics.ynn_mode.or(file.ynn_mode),
        scope: metrics.scope.or(file.scope),
        parallel: parallel.or(file.parallel),
    })
}

fn load_settings(search: &SearchArgs, metrics: &MetricArgs, parallel: Option<usize>) -> Result<Settings> {
    let file = match &search.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    resolve(search, metrics, parallel, &file)
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::from(e).in_file(path.display().to_string()))
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_bytes(path)?)
        .map_err(|_| Error::invalid("file is not valid UTF-8").in_file(path.display().to_string()))
}

fn csv_length(text: &str, d: usize) -> Result<usize> {
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .ok_or_else(|| Error::invalid("no data rows"))?;
    let values = first.split(',').count().saturating_sub(2);
    if d == 0 || values == 0 || values % d != 0 {
        return Err(Error::invalid(format!("{values} values per row do not split into {d} channels")));
    }
    Ok(values / d)
}

/// Load a dataset and the SHA-256 of its bytes. The format follows the
/// extension: `.csv` needs `channels`, anything else is read as `.ts`.
pub fn load_dataset(path: &Path, channels: Option<usize>) -> Result<(LabeledDataset, String)> {
    let bytes = read_bytes(path)?;
    let sha = sha256_hex(&bytes);
    let name = path.display().to_string();
    let text = String::from_utf8(bytes).map_err(|_| Error::invalid("file is not valid UTF-8").in_file(&name))?;
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let ds = if is_csv {
        let d = channels.ok_or_else(|| Error::invalid("CSV input needs --channels").in_file(&name))?;
        let t = csv_length(&text, d).map_err(|e| e.in_file(&name))?;
        parse_csv(&text, t, d)
    } else {
        parse_ts(&text)
    }
    .map_err(|e| e.in_file(&name))?;
    Ok((ds, sha))
}

/// Training set, test set and dataset entries for the manifest.
pub struct LoadedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    pub entries: Vec<DatasetEntry>,
}

fn entry(role: &str, path: &Path, sha256: String) -> DatasetEntry {
    DatasetEntry { role: role.to_string(), path: path.display().to_string(), sha256 }
}

pub fn load_data(args: &DataArgs) -> Result<LoadedData> {
    let (mut train, train_sha) = load_dataset(&args.train, args.channels)?;
    let (test, test_sha) = load_dataset(&args.test, args.channels)?;
    if train.shape() != test.shape() {
        return Err(Error::shape(format!(
            "train shape {:?} differs from test shape {:?}",
            train.shape(),
            test.shape()
        )));
    }
    let mut entries = vec![entry("train", &args.train, train_sha), entry("test", &args.test, test_sha)];
    if let Some(path) = &args.weights {
        let text = read_text(path)?;
        let t = train.shape().map_or(0, |s| s.0);
        let weights = parse_weights(&text, t).map_err(|e| e.in_file(path.display().to_string()))?;
        train = train.with_weights(weights)?;
        entries.push(entry("weights", path, sha256_hex(text.as_bytes())));
    }
    Ok(LoadedData { train, test, entries })
}

/// Build the classifier described by `spec`.
pub fn build_classifier(spec: &ClassifierSpec, train: &LabeledDataset) -> Result<Box<dyn Classifier>> {
    Ok(match spec {
        ClassifierSpec::Centroid { temperature } => Box::new(CentroidClassifier::fit(train, *temperature)?),
        ClassifierSpec::External { command } => Box::new(ExternalClassifier::spawn(command, train.n_classes())?),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::from(e).in_file(dir.display().to_string()))?;
    }
    fs::write(path, contents).map_err(|e| Error::from(e).in_file(path.display().to_string()))
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

/// Series as CSV: a `step,c0,c1,...` header then one row per time step.
pub fn series_csv(rows: &[Vec<f64>]) -> String {
    let d = rows.first().map_or(0, Vec::len);
    let mut out = String::from("step");
    for ch in 0..d {
        let _ = write!(out, ",c{ch}");
    }
    out.push('\n');
    for (s, row) in rows.iter().enumerate() {
        let _ = write!(out, "{s}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Explain one query. The query at test position `i` runs with seed
/// `seed + i`, so its report matches the benchmark's report for it.
pub fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let settings = load_settings(&args.search, &MetricArgs::default(), None)?;
    let data = load_data(&args.data)?;
    let index = match &args.query_id {
        Some(id) => data
            .test
            .instances()
            .iter()
            .position(|x| x.id() == id)
            .ok_or_else(|| Error::invalid(format!("no test instance with id {id:?}")))?,
        None => args.index,
    };
    let query = data
        .test
        .instances()
        .get(index)
        .ok_or_else(|| Error::invalid(format!("index {index} out of range for {} test instances", data.test.len())))?;
    let model = build_classifier(&settings.classifier, &data.train)?;
    let cfg = EngineConfig { seed: settings.engine.seed.wrapping_add(index as u64), ..settings.engine.clone() };
    let report = explain(&*model, query, &data.train, &cfg)?;
    let manifest = RunManifest::new(
        settings.engine,
        settings.classifier,
        data.entries,
        YnnMode::default(),
        MetricsScope::default(),
    );
    let file = ReportFile::from_report(&report, manifest);
    write_file(&args.out.join("report.json"), &file.to_json()?)?;
    match report.best() {
        Some(best) => {
            write_file(&args.out.join("best_ce.csv"), &series_csv(&best.instance.rows()))?;
            println!(
                "{}: {} counterfactuals, best m1 = {:.4}, m2 = {:.4}",
                report.query_id,
                report.ces.len(),
                best.m1,
                best.m2
            );
        }
        None => println!("{}: no counterfactual found", report.query_id),
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct QueryLog {
    query_id: String,
    wall_time_ms: f64,
    calls: Option<u64>,
}

#[derive(Debug, Serialize)]
struct RunLog {
    manifest: RunManifest,
    queries: Vec<QueryLog>,
}

fn run_batch(
    model: &dyn Classifier,
    data: &LoadedData,
    config: &EngineConfig,
    parallel: Option<usize>,
) -> Result<Vec<BatchOutcome>> {
    match parallel {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(e.to_string()))?
            .install(|| explain_batch(model, &data.test, &data.train, config)),
        None => explain_batch(model, &data.test, &data.train, config),
    }
}

/// Write one report per query plus `metrics.json` into `dir` and return
/// the summary.
fn write_setting(
    dir: &Path,
    model: &dyn Classifier,
    data: &LoadedData,
    outcomes: &[BatchOutcome],
    manifest: &RunManifest,
) -> Result<MetricsSummary> {
    let reports: Vec<ReportFile> = outcomes
        .iter()
        .map(|o| ReportFile::from_outcome(o, manifest.clone()))
        .collect();
    for (i, r) in reports.iter().enumerate() {
        write_file(&dir.join("reports").join(format!("{i:04}.json")), &r.to_json()?)?;
    }
    let summary = metrics_from_reports(model, &reports, &data.test, &data.train, manifest.scope, manifest.ynn_mode)?;
    write_file(&dir.join("metrics.json"), &metrics_json(&summary)?)?;
    Ok(summary)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const SWEEP_HEADER: &str = "param,value,cov,val,spa,conf,ynn,l1,l2,dtw,n_instances,n_ces";

fn sweep_row(param: &str, value: f64, m: &MetricsSummary) -> String {
    format!(
        "{param},{value},{},{},{},{},{},{},{},{},{},{}\n",
        m.cov,
        fmt_opt(m.val),
        fmt_opt(m.spa),
        fmt_opt(m.conf),
        fmt_opt(m.ynn),
        fmt_opt(m.l1),
        fmt_opt(m.l2),
        fmt_opt(m.dtw),
        m.n_instances,
        m.n_ces
    )
}

/// Explain the whole test set. Without `--sweep`, writes `reports/`,
/// `metrics.json` and `manifest.json` into `--out`. With a sweep, each
/// setting gets its own `<param>_<value>/` directory and `sweep.csv`
/// collects one row per setting. An α sweep reuses one search and only
/// reselects the best counterfactual.
pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let started = now_ms();
    let settings = load_settings(&args.search, &args.metrics, args.parallel)?;
    let data = load_data(&args.data)?;
    let model = build_classifier(&settings.classifier, &data.train)?;
    let ynn_mode = settings.ynn_mode.unwrap_or_default();
    let manifest_for = |config: &EngineConfig, scope: MetricsScope| {
        RunManifest::new(config.clone(), settings.classifier.clone(), data.entries.clone(), ynn_mode, scope)
    };

    let (outcomes, manifest) = match args.sweep {
        None => {
            let scope = settings.scope.unwrap_or(MetricsScope::All);
            let outcomes = run_batch(&*model, &data, &settings.engine, settings.parallel)?;
            let manifest = manifest_for(&settings.engine, scope);
            let summary = write_setting(&args.out, &*model, &data, &outcomes, &manifest)?;
            print!("{}", metrics_json(&summary)?);
            (outcomes, manifest)
        }
        Some(param) => {
            let scope = settings.scope.unwrap_or(MetricsScope::Best);
            let mut csv = format!("{SWEEP_HEADER}\n");
            let mut last = None;
            match param {
                SweepParam::Alpha => {
                    let outcomes = run_batch(&*model, &data, &settings.engine, settings.parallel)?;
                    for alpha in ALPHA_GRID {
                        let config = EngineConfig { alpha, ..settings.engine.clone() };
                        let reselected = outcomes
                            .iter()
                            .map(|o| match o {
                                BatchOutcome::Explained(r) => r.with_alpha(alpha).map(BatchOutcome::Explained),
                                failed => Ok(failed.clone()),
                            })
                            .collect::<Result<Vec<_>>>()?;
                        let manifest = manifest_for(&config, scope);
                        let dir = args.out.join(format!("alpha_{alpha}"));
                        let summary = write_setting(&dir, &*model, &data, &reselected, &manifest)?;
                        csv.push_str(&sweep_row("alpha", alpha, &summary));
                        last = Some((reselected, manifest));
                    }
                }
                SweepParam::Theta => {
                    for theta in THETA_GRID {
                        let config = EngineConfig { theta, ..settings.engine.clone() };
                        let outcomes = run_batch(&*model, &data, &config, settings.parallel)?;
                        let manifest = manifest_for(&config, scope);
                        let dir = args.out.join(format!("theta_{theta}"));
                        let summary = write_setting(&dir, &*model, &data, &outcomes, &manifest)?;
                        csv.push_str(&sweep_row("theta", theta, &summary));
                        last = Some((outcomes, manifest));
                    }
                }
            }
            write_file(&args.out.join("sweep.csv"), &csv)?;
            print!("{csv}");
            last.expect("sweep grids are non-empty")
        }
    };

    let mut manifest = manifest;
    manifest.timestamps = Some(Timestamps { started_ms: started, finished_ms: now_ms() });
    let log = RunLog {
        manifest,
        queries: outcomes
            .iter()
            .map(|o| QueryLog {
                query_id: o.query_id().to_string(),
                wall_time_ms: o.report().map_or(0.0, |r| r.wall_time.as_secs_f64() * 1e3),
                calls: o.report().map(|r| r.call_counts.total()),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&log)?;
    text.push('\n');
    write_file(&args.out.join("manifest.json"), &text)
}

/// Report files under `path`: the file itself, the JSON files of a
/// directory in name order, or those of its `reports/` subdirectory.
pub fn collect_report_paths(path: &Path) -> Result<Vec<PathBuf>> {
    let meta = fs::metadata(path).map_err(|e| Error::from(e).in_file(path.display().to_string()))?;
    if meta.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let nested = path.join("reports");
    let dir = if nested.is_dir() { nested } else { path.to_path_buf() };
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| Error::from(e).in_file(dir.display().to_string()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::invalid(format!("no reports in {}", dir.display())));
    }
    Ok(paths)
}

fn load_checked(role: &str, manifest: &RunManifest, flag: Option<&PathBuf>, channels: Option<usize>) -> Result<LabeledDataset> {
    let recorded = manifest.dataset(role);
    let path = match (flag, recorded) {
        (Some(p), _) => p.clone(),
        (None, Some(e)) => PathBuf::from(&e.path),
        (None, None) => return Err(Error::invalid(format!("the manifest has no {role} dataset; pass --{role}"))),
    };
    let (ds, sha) = load_dataset(&path, channels)?;
    if let Some(e) = recorded {
        if e.sha256 != sha {
            return Err(Error::invalid(format!("{} does not match the {role} checksum in the manifest", path.display())));
        }
    }
    Ok(ds)
}

/// Recompute the metrics summary of saved reports.
pub fn recompute_metrics(args: &MetricsArgs) -> Result<MetricsSummary> {
    let paths = collect_report_paths(&args.reports)?;
    let reports = paths
        .iter()
        .map(|p| ReportFile::from_json(&read_text(p)?).map_err(|e| e.in_file(p.display().to_string())))
        .collect::<Result<Vec<_>>>()?;
    let manifest = &reports[0].manifest;
    if reports.iter().any(|r| &r.manifest != manifest) {
        return Err(Error::invalid("reports come from different runs"));
    }
    let train = load_checked("train", manifest, args.train.as_ref(), args.channels)?;
    let test = load_checked("test", manifest, args.test.as_ref(), args.channels)?;
    let model = build_classifier(&manifest.classifier, &train)?;
    let scope = args.metrics.scope.unwrap_or(manifest.scope);
    let ynn_mode = args.metrics.ynn_mode.unwrap_or(manifest.ynn_mode);
    metrics_from_reports(&*model, &reports, &test, &train, scope, ynn_mode)
}

pub fn cmd_metrics(args: &MetricsArgs) -> Result<()> {
    let summary = recompute_metrics(args)?;
    let text = metrics_json(&summary)?;
    if let Some(out) = &args.out {
        write_file(out, &text)?;
    }
    print!("{text}");
    Ok(())
}

#[derive(Debug, Serialize)]
struct NunReport<'a> {
    query_id: &'a str,
    query_class: usize,
    nun_id: &'a str,
    nun_index: usize,
    target_class: usize,
    confidence: f64,
    distance: f64,
}

pub fn cmd_nun(args: &NunArgs) -> Result<()> {
    let settings = load_settings(&args.search, &MetricArgs::default(), None)?;
    let data = load_data(&args.data)?;
    let query = data
        .test
        .instances()
        .get(args.index)
        .ok_or_else(|| Error::invalid(format!("index {} out of range", args.index)))?;
    let model = build_classifier(&settings.classifier, &data.train)?;
    let nun = find_nun(&*model, query, &data.train, settings.engine.theta, settings.engine.distance)?
        .ok_or(Error::NoUnlikeNeighbor)?;
    let out = NunReport {
        query_id: query.id(),
        query_class: model.predict(query)?,
        nun_id: nun.nun.id(),
        nun_index: nun.nun_index,
        target_class: nun.target_class,
        confidence: nun.confidence,
        distance: nun.distance,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

pub fn cmd_serve_centroid(args: &ServeArgs) -> Result<()> {
    let (train, _) = load_dataset(&args.train, args.channels)?;
    let model = CentroidClassifier::fit(&train, args.temperature)?;
    serve(&model, io::stdin().lock(), io::stdout().lock())
}

/// Exit status for an error.
pub fn exit_code(error: &Error) -> u8 {
    match error.root() {
        Error::NoUnlikeNeighbor => 2,
        _ => 1,
    }
}

/// Run a parsed command line and return the process exit status.
pub fn run(cli: &Cli) -> u8 {
    let result = match &cli.command {
        Command::Explain(a) => cmd_explain(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Nun(a) => cmd_nun(a),
        Command::ServeCentroid(a) => cmd_serve_centroid(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
