//! Command-line front end: load an experiment config, run one command, and
//! write a JSON or CSV report.
//!
//! Exit codes: 0 success, 1 mathematical negative (violation, divergence,
//! failed modulus), 2 usage or config error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub mod commands;
pub mod config;

use config::{ExperimentConfig, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable overriding the sampling seed.
pub const ENV_SEED: &str = "CONTRACTA_SEED";
/// Environment variable naming the output directory.
pub const ENV_OUT: &str = "CONTRACTA_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] contracta::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "contracta", version, about = "Contraction certificates: verify, classify, iterate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check each configured certificate on sampled pairs.
    Verify(CommonArgs),
    /// Estimate λ̂ and test every library certificate and the Meir-Keeler modulus.
    Classify(CommonArgs),
    /// Run Picard iteration from picard.x0.
    Iterate(CommonArgs),
    /// Estimate the Meir-Keeler δ for every ε in the grid.
    EstimateModulus(CommonArgs),
    /// Estimate moduli for every verified Z and weakly-type instance.
    DemoContainment(CommonArgs),
    /// Check the metric axioms on sampled triples.
    CheckMetric(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Verify(_) => "verify",
            Command::Classify(_) => "classify",
            Command::Iterate(_) => "iterate",
            Command::EstimateModulus(_) => "estimate-modulus",
            Command::DemoContainment(_) => "demo-containment",
            Command::CheckMetric(_) => "check-metric",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Verify(a)
            | Command::Classify(a)
            | Command::Iterate(a)
            | Command::EstimateModulus(a)
            | Command::DemoContainment(a)
            | Command::CheckMetric(a) => a,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Sampling seed; overrides the config.
    #[arg(long, env = ENV_SEED)]
    pub seed: Option<u64>,
    /// Report path; overrides the config and CONTRACTA_OUT.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Rows for CSV export.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io {
            path: "<csv>".into(),
            source: std::io::Error::other(e),
        };
        w.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            w.write_record(r).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| io(e.into_error().into()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Output of a command before rendering.
pub struct Outcome<R> {
    pub exit_code: i32,
    pub status: String,
    pub result: R,
    pub table: Table,
}

/// The deterministic report payload.
#[derive(Serialize)]
pub struct Report<'a, R> {
    pub schema_version: u32,
    pub command: &'a str,
    pub status: &'a str,
    pub exit_code: i32,
    pub config: &'a ExperimentConfig,
    pub result: &'a R,
}

/// Run-specific data kept out of the payload.
#[derive(Serialize)]
pub struct Metadata<'a> {
    pub schema_version: u32,
    pub report: Option<String>,
    pub generated_at_unix_ms: u128,
    pub tool_version: &'a str,
    pub threads: usize,
    /// Present for CSV reports, which cannot embed the config.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<&'a ExperimentConfig>,
}

/// Rendered report text and its exit code.
pub struct Rendered {
    pub exit_code: i32,
    pub body: String,
}

pub fn render<R: Serialize>(
    command: &str,
    cfg: &ExperimentConfig,
    outcome: &Outcome<R>,
) -> Result<Rendered, CliError> {
    let body = match cfg.output.format {
        Format::Json => {
            let report = Report {
                schema_version: config::SCHEMA_VERSION,
                command,
                status: &outcome.status,
                exit_code: outcome.exit_code,
                config: cfg,
                result: &outcome.result,
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => outcome.table.to_csv()?,
    };
    Ok(Rendered {
        exit_code: outcome.exit_code,
        body,
    })
}

/// Where the report goes: `--out`, else `CONTRACTA_OUT/<name>`, else the
/// config's `output.path`, else stdout.
pub fn output_path(args: &CommonArgs, cfg: &ExperimentConfig, command: &str, env_out: Option<OsString>) -> Option<PathBuf> {
    if let Some(p) = &args.out {
        return Some(p.clone());
    }
    let configured = cfg.output.path.as_ref().map(PathBuf::from);
    if let Some(dir) = env_out.filter(|d| !d.is_empty()) {
        let file = configured
            .as_ref()
            .and_then(|p| p.file_name().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(format!("{command}.{}", cfg.output.format.extension())));
        return Some(Path::new(&dir).join(file));
    }
    configured
}

/// Sidecar path for a report: `<report>.meta.json`.
pub fn metadata_path(report: &Path) -> PathBuf {
    let mut name = report.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

/// Load the config and apply `--seed`/`CONTRACTA_SEED` and `--format`.
pub fn load_config(args: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        path: args.config.display().to_string(),
        source,
    })?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        cfg.verification.seed = seed;
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    Ok(cfg)
}

/// Execute a parsed command, writing the report and sidecar. Returns the
/// process exit code.
pub fn execute(command: &Command) -> i32 {
    let args = command.args();
    let name = command.name();
    let result = load_config(args).and_then(|cfg| {
        let rendered = commands::run(name, &cfg)?;
        Ok((cfg, rendered))
    });
    let (cfg, rendered) = match result {
        Ok(ok) => ok,
        Err(e) => {
            eprintln!("contracta {name}: {e}");
            return EXIT_USAGE;
        }
    };
    let target = output_path(args, &cfg, name, std::env::var_os(ENV_OUT));
    let generated_at_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0);
    let meta = Metadata {
        schema_version: config::SCHEMA_VERSION,
        report: target.as_ref().map(|p| p.display().to_string()),
        generated_at_unix_ms,
        tool_version: env!("CARGO_PKG_VERSION"),
        threads: available_threads(),
        config: (cfg.output.format == Format::Csv).then_some(&cfg),
    };
    let meta_text = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    let written = match &target {
        Some(path) => write_file(path, &rendered.body).and_then(|_| write_file(&metadata_path(path), &meta_text)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(rendered.body.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    };
    if let Err(e) = written {
        eprintln!("contracta {name}: {e}");
        return EXIT_USAGE;
    }
    rendered.exit_code
}

fn available_threads() -> usize {
    std::thread::available_parallelism().map_or(1, usize::from)
}

/// Parse arguments and run. Usage errors exit 2 and `--help` exits 0.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(&cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            code
        }
    }
}
