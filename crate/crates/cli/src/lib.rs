//! `outbreak-dss` command dispatch.
//!
//! Exit codes: 0 success, 1 domain error (printed as `CODE: message` on
//! stderr), 2 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use outbreak_core::bn::{posterior, Evidence};
use outbreak_core::model::{clamped_cells, ModelConfig};
use outbreak_core::model_file::{load_model, LoadedModel};
use outbreak_core::risk::{error_rates_from_network, risk_scores, RiskParams};
use outbreak_core::scenario::{emit_report, run_builtin, ReportFormat};
use outbreak_core::Execution;
use outbreak_service::{AppState, SessionStore, DEFAULT_PORT, PORT_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "outbreak-dss", version, about = "Outbreak decision support: inference, scenarios and risk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model document; without a file, checks the built-in model.
    Validate { file: Option<PathBuf> },
    /// Posterior distribution of one or more targets.
    Infer {
        /// Observed state as `Var=State`; repeatable.
        #[arg(long = "evidence", short = 'e', value_parser = parse_assignment)]
        evidence: Vec<(String, String)>,
        #[arg(long, short = 't', required = true)]
        target: Vec<String>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Run one of the four built-in scenarios.
    Scenario {
        #[arg(long)]
        id: u32,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
        #[arg(long)]
        model: Option<PathBuf>,
        /// Evaluate rows on the calling thread only.
        #[arg(long)]
        sequential: bool,
    },
    /// Positive and negative decision risk.
    Risk {
        /// Defaults to the model's Test node.
        #[arg(long)]
        fpr: Option<f64>,
        /// Defaults to the model's Test node.
        #[arg(long)]
        fnr: Option<f64>,
        /// Impact weights `u,k,q,c`.
        #[arg(long, value_parser = parse_impacts, default_value = "4,3,2,1")]
        impacts: RiskParams,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, env = PORT_ENV, default_value_t = DEFAULT_PORT)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory holding the session log.
        #[arg(long, env = "OUTBREAK_DSS_DATA_DIR", default_value = "outbreak-dss-data")]
        data_dir: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

fn parse_assignment(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((var, state)) if !var.is_empty() && !state.is_empty() => Ok((var.to_string(), state.to_string())),
        _ => Err(format!("expected Var=State, got `{s}`")),
    }
}

fn parse_impacts(s: &str) -> Result<RiskParams, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    let [u, k, q, c] = parts[..] else {
        return Err(format!("expected four comma-separated impacts, got {}", parts.len()));
    };
    Ok(RiskParams {
        impact_u: u,
        impact_k: k,
        impact_q: q,
        impact_c: c,
    })
}

/// A failure worth exit code 1.
struct Failure {
    code: &'static str,
    message: String,
}

impl Failure {
    fn new(code: &'static str, message: impl ToString) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

macro_rules! impl_failure_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::new(e.code(), e)
            }
        }
    )*};
}

impl_failure_from!(
    outbreak_core::BnError,
    outbreak_core::model_file::ModelFileError,
    outbreak_core::scenario::ScenarioError,
    outbreak_core::risk::RiskError,
    outbreak_core::model::ModelError,
    outbreak_service::StoreError
);

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        let code = match e.kind() {
            std::io::ErrorKind::BrokenPipe => BROKEN_PIPE,
            _ => "IO_ERROR",
        };
        Failure::new(code, e)
    }
}

const BROKEN_PIPE: &str = "BROKEN_PIPE";

/// Parses `argv` (program name first), runs the command, and returns the exit code.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let sink: &mut dyn Write = if informational { out } else { err };
            let _ = write!(sink, "{}", e.render());
            return if informational { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match run(cli.command, out) {
        Ok(()) => EXIT_OK,
        // The reader went away (`| head`); nothing left to report to.
        Err(f) if f.code == BROKEN_PIPE => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{}: {}", f.code, f.message);
            EXIT_DOMAIN
        }
    }
}

fn model(path: Option<&Path>) -> Result<LoadedModel, Failure> {
    match path {
        Some(p) => Ok(load_model(p)?),
        None => Ok(LoadedModel::roosevelt()),
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let loaded = model(file.as_deref())?;
            let net = &loaded.network;
            writeln!(out, "ok: {} variables, {} CPTs", net.len(), net.cpts().len())?;
            if file.is_none() {
                let clamped = clamped_cells(&ModelConfig::default())?;
                writeln!(out, "HasCovid cells clamped to 1: {}", clamped.len())?;
                for c in clamped {
                    writeln!(
                        out,
                        "  InfectionRate={} PreventionIndex={:.1} Vulnerable={} raw={:.4}",
                        c.infection_rate,
                        c.prevention_index,
                        if c.vulnerable { "Yes" } else { "No" },
                        c.raw
                    )?;
                }
            }
        }
        Command::Infer { evidence, target, model: path } => {
            let loaded = model(path.as_deref())?;
            let mut ev = Evidence::new();
            for (var, state) in evidence {
                if let Some(prev) = ev.get(&var) {
                    if prev != state {
                        return Err(Failure::new(
                            "CONFLICTING_EVIDENCE",
                            format!("`{var}` given as both `{prev}` and `{state}`"),
                        ));
                    }
                }
                ev.set(var, state);
            }
            loaded.network.validate_evidence(&ev)?;
            for t in &target {
                let p = posterior(&loaded.network, &ev, t)?;
                writeln!(out, "{t}")?;
                let width = p.states().iter().map(String::len).max().unwrap_or(0);
                for (state, prob) in p.iter() {
                    writeln!(out, "  {state:<width$}  {prob:.6}  {:>6.2}%", prob * 100.0)?;
                }
            }
        }
        Command::Scenario {
            id,
            format,
            model: path,
            sequential,
        } => {
            let loaded = model(path.as_deref())?;
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            let result = run_builtin(id, &loaded.network, exec)?;
            out.write_all(emit_report(&result, format).as_bytes())?;
        }
        Command::Risk {
            fpr,
            fnr,
            impacts,
            model: path,
        } => {
            let (fpr, fnr) = match (fpr, fnr) {
                (Some(a), Some(b)) => (a, b),
                (a, b) => {
                    let rates = error_rates_from_network(&model(path.as_deref())?.network)?;
                    (a.unwrap_or(rates.fpr), b.unwrap_or(rates.fnr))
                }
            };
            let scores = risk_scores(fpr, fnr, &impacts)?;
            writeln!(out, "risk_p={:.4} risk_n={:.4}", scores.risk_p, scores.risk_n)?;
        }
        Command::Serve {
            port,
            host,
            data_dir,
            model: path,
        } => {
            let sessions = SessionStore::open(&data_dir)?;
            let state = match path {
                Some(p) => AppState::new(load_model(&p)?, sessions),
                None => AppState::roosevelt(sessions),
            };
            let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(SocketAddr::new(host, port)).await?;
                writeln!(out, "listening on http://{}", listener.local_addr()?)?;
                out.flush()?;
                outbreak_service::serve(listener, state).await
            })?;
        }
    }
    Ok(())
}
