//! `faultline` command-line front end.
//!
//! Exit status is 0 on success, 1 when the model is invalid or the evidence
//! cannot be explained, and 2 when a file cannot be read or parsed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use faultline_core::model::DEFAULT_ENUMERATION_CAP;
use faultline_core::report::render_trajectory;
use faultline_core::scenario::Scenario;
use faultline_core::{engine, DocumentError, ModelDocument, Observation, ReportBundle, SystemModel, Value};
use faultline_service::{ServiceConfig, Store};

pub const EXIT_OK: u8 = 0;
pub const EXIT_DOMAIN: u8 = 1;
pub const EXIT_IO: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "faultline",
    version,
    about = "Temporal model-based diagnosis of component systems"
)]
pub struct Cli {
    /// Refuse models whose joint has more candidates than this.
    #[arg(long, global = true, env = "FAULTLINE_MAX_CANDIDATES", default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub max_candidates: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a model file and list any violations.
    Validate { model: PathBuf },

    /// Priors at a time, the posterior given one observation, and decisions.
    Diagnose {
        model: PathBuf,
        #[arg(long)]
        time: f64,
        /// `variable=value`; repeat for each assignment.
        #[arg(long = "observe", value_name = "VAR=VALUE", value_parser = parse_assignment)]
        observe: Vec<(String, Value)>,
        /// Show only the most probable candidates.
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },

    /// Run a scenario file; one report for the start time and one per event.
    Replay {
        scenario: PathBuf,
        #[arg(long)]
        top: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },

    /// Start the HTTP service.
    Serve {
        #[arg(long, env = "FAULTLINE_HOST", default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        #[arg(long, env = "FAULTLINE_PORT", default_value_t = 8080)]
        port: u16,
        /// Persist models and session logs here.
        #[arg(long, env = "FAULTLINE_DATA_DIR")]
        data_dir: Option<PathBuf>,
    },
}

fn parse_assignment(s: &str) -> Result<(String, Value), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected VAR=VALUE, got `{s}`"))?;
    let value = value
        .trim()
        .parse::<Value>()
        .map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((name.trim().to_string(), value))
}

/// A failed command: exit status and message for stderr.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl ToString) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: message.to_string(),
        }
    }

    fn io(message: impl ToString) -> Self {
        Failure {
            code: EXIT_IO,
            message: message.to_string(),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(err: DocumentError) -> Self {
        match err {
            DocumentError::Schema(_) => Failure::domain(err),
            _ => Failure::io(err),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Failure::io(err)
    }
}

/// Parses `args` and runs the command, writing reports to `out` and
/// diagnostics to `err`. Returns the exit status.
pub fn run<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_IO;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_model(path: &PathBuf, cap: usize) -> Result<SystemModel, Failure> {
    Ok(ModelDocument::load(path)?.to_model::<f64>()?.with_enumeration_cap(cap))
}

fn emit(out: &mut dyn Write, format: Format, bundles: &[ReportBundle], single: bool) -> Result<(), Failure> {
    let text = match (format, single) {
        (Format::Text, true) => bundles[0].render_text(),
        (Format::Text, false) => render_trajectory(bundles),
        (Format::Json, true) => serde_json::to_string_pretty(&bundles[0]).map_err(Failure::io)? + "\n",
        (Format::Json, false) => serde_json::to_string_pretty(bundles).map_err(Failure::io)? + "\n",
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8, Failure> {
    let cap = cli.max_candidates;
    match &cli.command {
        Command::Validate { model } => {
            let model = load_model(model, cap)?;
            let report = model.validate();
            if report.is_valid() {
                writeln!(
                    out,
                    "valid: {} components, {} variables",
                    model.component_count(),
                    model.variables().len()
                )?;
                Ok(EXIT_OK)
            } else {
                write!(out, "{report}")?;
                Err(Failure::domain(format!("{} violation(s)", report.violations.len())))
            }
        }

        Command::Diagnose {
            model,
            time,
            observe,
            top,
            format,
        } => {
            let model = load_model(model, cap)?;
            let prior = engine::initial_belief(&model, *time).map_err(Failure::domain)?;
            let (posterior, label) = if observe.is_empty() {
                (prior.clone(), None)
            } else {
                let obs = Observation {
                    time: *time,
                    assignments: observe.iter().cloned().collect::<BTreeMap<_, _>>(),
                };
                let posterior = engine::assimilate(&model, &prior, &obs).map_err(Failure::domain)?;
                (posterior, Some(obs.to_string()))
            };
            let mut bundle = ReportBundle::new(&model, &prior, &posterior, label);
            if let Some(k) = top {
                bundle = bundle.truncate_posterior(*k);
            }
            emit(out, *format, &[bundle], true)?;
            Ok(EXIT_OK)
        }

        Command::Replay { scenario, top, format } => {
            let mut scenario = Scenario::load(scenario)?;
            scenario.model = scenario.model.with_enumeration_cap(cap);
            let trajectory = scenario.run().map_err(Failure::domain)?;
            let model = &scenario.model;
            let k = top.unwrap_or(usize::MAX);
            let mut bundles =
                vec![ReportBundle::new(model, &trajectory.initial, &trajectory.initial, None).truncate_posterior(k)];
            for step in &trajectory.steps {
                let bundle = ReportBundle::new(model, &step.prior, &step.posterior, Some(step.event.to_string()));
                bundles.push(bundle.truncate_posterior(k));
            }
            emit(out, *format, &bundles, false)?;
            Ok(EXIT_OK)
        }

        Command::Serve { host, port, data_dir } => {
            let _ = tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
                )
                .try_init();
            let config = ServiceConfig {
                data_dir: data_dir.clone(),
                enumeration_cap: cap,
                ..ServiceConfig::default()
            };
            let store = Arc::new(Store::open(config)?);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(faultline_service::serve(SocketAddr::new(*host, *port), store))?;
            Ok(EXIT_OK)
        }
    }
}
