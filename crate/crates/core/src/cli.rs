//! Command-line front end for the `kwb` binary.
//!
//! Exit codes: 0 success, 2 input error, 3 not found, 4 environment error
//! (unreadable store, port in use, I/O failure writing output).

use std::fmt::Write as _;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{ConfigError, ThresholdConfig};
use crate::ink::{parse_ink, InkError};
use crate::report::{assess_with_store, AssessError, AssessmentReport};
use crate::scoring::MetricId;
use crate::service::{AppState, Persistence};
use crate::store::{preprocess_templates, StoreError, TemplateStore};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NOT_FOUND: u8 = 3;
pub const EXIT_ENVIRONMENT: u8 = 4;

#[derive(Debug, Parser)]
#[command(name = "kwb", version, about = "Character-writing assessment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normalize raw expert ink into a template store.
    Preprocess(PreprocessArgs),
    /// Assess one ink file against the store.
    Assess(AssessArgs),
    /// Assess every ink file in a directory and write a CSV.
    Batch(BatchArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Directory of raw expert ink files (*.json).
    #[arg(long)]
    pub raw: PathBuf,
    /// Lesson catalog.
    #[arg(long)]
    pub catalog: PathBuf,
    /// Output store directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Threshold config supplying the resample count and square size.
    #[arg(long, env = "KWB_THRESHOLDS")]
    pub thresholds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssessArgs {
    #[arg(long, env = "KWB_STORE")]
    pub store: PathBuf,
    /// Student ink file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, env = "KWB_THRESHOLDS")]
    pub thresholds: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long, conflicts_with = "table")]
    pub json: bool,
    /// Print a metric table (default).
    #[arg(long)]
    pub table: bool,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    #[arg(long, env = "KWB_STORE")]
    pub store: PathBuf,
    /// Directory of student ink files (*.json).
    #[arg(long)]
    pub inputs: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, env = "KWB_THRESHOLDS")]
    pub thresholds: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "KWB_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "KWB_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "KWB_STORE")]
    pub store: PathBuf,
    #[arg(long, env = "KWB_THRESHOLDS")]
    pub thresholds: Option<PathBuf>,
    /// Directory for JSON-lines records of submissions and sessions.
    #[arg(long, env = "KWB_PERSIST")]
    pub persist: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn new(code: u8, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        let code = match &e {
            e if e.is_not_found() => EXIT_NOT_FOUND,
            StoreError::Io { .. } => EXIT_ENVIRONMENT,
            _ => EXIT_INPUT,
        };
        CliError::new(code, e.to_string())
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::new(EXIT_INPUT, e.to_string())
    }
}

impl From<AssessError> for CliError {
    fn from(e: AssessError) -> Self {
        let code = if e.is_not_found() { EXIT_NOT_FOUND } else { EXIT_INPUT };
        CliError::new(code, e.to_string())
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Preprocess(args) => preprocess(args),
        Command::Assess(args) => assess(args),
        Command::Batch(args) => batch(args),
        Command::Serve(args) => serve(args),
    }
}

fn load_config(path: Option<&Path>) -> Result<ThresholdConfig, CliError> {
    match path {
        Some(p) => Ok(ThresholdConfig::load(p)?),
        None => Ok(ThresholdConfig::default()),
    }
}

fn load_store(dir: &Path) -> Result<TemplateStore, CliError> {
    TemplateStore::load(dir).map_err(|e| match e {
        StoreError::Io { .. } => CliError::new(EXIT_ENVIRONMENT, format!("cannot open store: {e}")),
        other => CliError::new(EXIT_ENVIRONMENT, format!("invalid store: {other}")),
    })
}

fn read_ink(path: &Path) -> Result<crate::ink::Sketch, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    parse_ink(&text).map_err(|e| ink_error(path, &e))
}

fn ink_error(path: &Path, e: &InkError) -> CliError {
    CliError::new(EXIT_INPUT, format!("{}: {e}", path.display()))
}

fn preprocess(args: PreprocessArgs) -> Result<(), CliError> {
    let cfg = load_config(args.thresholds.as_deref())?;
    if !args.catalog.is_file() {
        return Err(CliError::new(
            EXIT_INPUT,
            format!("catalog not found: {}", args.catalog.display()),
        ));
    }
    let summary = preprocess_templates(&args.raw, &args.catalog, &args.out, cfg.resample_n, cfg.scale_size)
        .map_err(|e| match e {
            StoreError::Io { .. } => CliError::new(EXIT_ENVIRONMENT, e.to_string()),
            other => CliError::new(EXIT_INPUT, other.to_string()),
        })?;
    let mut out = String::new();
    for (label, strokes, file) in &summary.templates {
        let _ = writeln!(out, "{label}\t{strokes} strokes\t{file}");
    }
    for orphan in &summary.orphans {
        let _ = writeln!(out, "warning: `{orphan}` has raw ink but is not in the catalog");
    }
    let _ = writeln!(
        out,
        "store {} ({} templates) written to {}",
        summary.store_version,
        summary.templates.len(),
        args.out.display()
    );
    print!("{out}");
    Ok(())
}

fn assess(args: AssessArgs) -> Result<(), CliError> {
    let cfg = load_config(args.thresholds.as_deref())?;
    let store = load_store(&args.store)?;
    let sketch = read_ink(&args.input)?;
    let report = assess_with_store(&store, &sketch, &cfg)?;
    if args.json {
        println!("{}", report.to_json());
    } else {
        print!("{}", render_table(&report));
    }
    Ok(())
}

fn star_bar(stars: u8) -> String {
    (1..=3).map(|i| if i <= stars { '★' } else { '☆' }).collect()
}

fn format_raw(raw: Option<f64>) -> String {
    match raw {
        Some(v) => format!("{v:.3}"),
        None => "-".to_string(),
    }
}

/// Plain-text table with one row per metric.
pub fn render_table(report: &AssessmentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "character {}", report.label);
    let _ = writeln!(out, "{:<18}{:<11}{:>10}  stars", "metric", "family", "raw");
    for m in &report.metrics {
        let family = serde_json::to_value(m.family)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<18}{:<11}{:>10}  {}",
            m.id.as_str(),
            family,
            format_raw(m.raw),
            star_bar(m.stars)
        );
    }
    out
}

/// CSV header: file, label, the ten raw values, then the ten star counts.
pub fn csv_header() -> Vec<String> {
    let mut h = vec!["file".to_string(), "label".to_string()];
    h.extend(MetricId::ALL.iter().map(|m| format!("{m}_raw")));
    h.extend(MetricId::ALL.iter().map(|m| format!("{m}_stars")));
    h
}

pub fn csv_row(file: &str, report: &AssessmentReport) -> Vec<String> {
    let mut row = vec![file.to_string(), report.label.clone()];
    row.extend(
        MetricId::ALL
            .iter()
            .map(|&id| report.metric(id).raw.map(|v| v.to_string()).unwrap_or_default()),
    );
    row.extend(MetricId::ALL.iter().map(|&id| report.stars(id).to_string()));
    row
}

fn batch(args: BatchArgs) -> Result<(), CliError> {
    let cfg = load_config(args.thresholds.as_deref())?;
    let store = load_store(&args.store)?;
    let mut files: Vec<PathBuf> = std::fs::read_dir(&args.inputs)
        .map_err(|e| CliError::new(EXIT_INPUT, format!("{}: {e}", args.inputs.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();

    let results: Vec<(String, Result<AssessmentReport, CliError>)> = files
        .par_iter()
        .map(|path| {
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            let result = read_ink(path).and_then(|s| {
                assess_with_store(&store, &s, &cfg)
                    .map_err(|e| {
                        let message = format!("{}: {e}", path.display());
                        CliError::new(CliError::from(e).code, message)
                    })
            });
            (name, result)
        })
        .collect();

    let io_err = |e: &dyn std::fmt::Display| CliError::new(EXIT_ENVIRONMENT, format!("{}: {e}", args.csv.display()));
    let mut writer = csv::Writer::from_path(&args.csv).map_err(|e| io_err(&e))?;
    writer.write_record(csv_header()).map_err(|e| io_err(&e))?;
    let mut failures = Vec::new();
    for (name, result) in &results {
        match result {
            Ok(report) => writer.write_record(csv_row(name, report)).map_err(|e| io_err(&e))?,
            Err(e) => failures.push(e),
        }
    }
    writer.flush().map_err(|e| io_err(&e))?;

    let stderr = std::io::stderr();
    let mut stderr = stderr.lock();
    for f in &failures {
        let _ = writeln!(stderr, "skipped {}", f.message);
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(
            EXIT_INPUT,
            format!("{} of {} files could not be assessed", failures.len(), results.len()),
        ))
    }
}

fn serve(args: ServeArgs) -> Result<(), CliError> {
    let cfg = load_config(args.thresholds.as_deref())?;
    let store = load_store(&args.store)?;
    let mut state = AppState::new(store, cfg);
    if let Some(dir) = &args.persist {
        let p = Persistence::open(dir)
            .map_err(|e| CliError::new(EXIT_ENVIRONMENT, format!("{}: {e}", dir.display())))?;
        state = state.with_persistence(p);
    }
    let ip: std::net::IpAddr = args
        .host
        .parse()
        .map_err(|e| CliError::new(EXIT_INPUT, format!("invalid host `{}`: {e}", args.host)))?;
    let addr = SocketAddr::new(ip, args.port);
    let listener = std::net::TcpListener::bind(addr)
        .map_err(|e| CliError::new(EXIT_ENVIRONMENT, format!("cannot bind {addr}: {e}")))?;
    listener
        .set_nonblocking(true)
        .map_err(|e| CliError::new(EXIT_ENVIRONMENT, e.to_string()))?;
    let bound = listener.local_addr().unwrap_or(addr);

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::new(EXIT_ENVIRONMENT, e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::from_std(listener)
            .map_err(|e| CliError::new(EXIT_ENVIRONMENT, e.to_string()))?;
        println!("kwb listening on http://{bound}");
        let _ = std::io::stdout().flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        crate::service::serve(listener, state, shutdown)
            .await
            .map_err(|e| CliError::new(EXIT_ENVIRONMENT, e.to_string()))
    })
}
