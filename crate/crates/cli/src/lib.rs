//! Batch experiment runner for the `instrument-autonomy` library.
//!
//! A run resolves a JSON config against an experiment kind, executes it, and writes
//! CSV tables, plot series and a `report.json` into the output directory. Everything
//! written is a pure function of the resolved config, so reruns are byte-identical at
//! any thread count.

pub mod config;
pub mod experiments;
pub mod plot;
pub mod report;
pub mod table;

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub use config::{ExperimentConfig, ExperimentKind, StateSpec};
pub use plot::{emit_plot_data, Series};
pub use report::{Check, OutputFile, Provenance, Relation, VerificationReport};

pub const THREADS_ENV: &str = "INSTRUMENT_AUTONOMY_THREADS";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("spec: {0}")]
    Spec(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error(transparent)]
    Core(#[from] instrument_autonomy::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for everything else. A completed run
    /// with failing checks exits 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Spec(_) => 2,
            _ => 3,
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Output directory: the flag wins over the config's `output`, then `./out`.
pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Worker count from the flag, else from `INSTRUMENT_AUTONOMY_THREADS`; `None` leaves
/// the choice to rayon.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                CliError::Usage(format!(
                    "{THREADS_ENV} must be a positive integer, got '{v}'"
                ))
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Usage("thread count must be > 0".into()));
    }
    Ok(n)
}

/// Runs `f` on a dedicated pool of `threads` workers.
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> Result<R, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Executes a resolved config and writes every output into `dir`.
pub fn run(cfg: &ExperimentConfig, dir: &Path) -> Result<VerificationReport, CliError> {
    cfg.validate()?;
    let kind = cfg.kind()?;
    let outcome = experiments::run_experiment(cfg)?;
    std::fs::create_dir_all(dir)?;

    let provenance = Provenance {
        seed: cfg.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: cfg.hash(),
    };
    let mut report = VerificationReport::new(kind.name().to_string(), outcome.checks, provenance);
    for table in &outcome.tables {
        let bytes = table.write(dir)?;
        report.outputs.push(OutputFile {
            file: table.file_name(),
            sha256: sha256_hex(&bytes),
        });
    }
    let series = cfg.plot_series.clone().unwrap_or_default();
    let plots = emit_plot_data(&report, cfg, &series, dir)?;
    report.outputs.extend(plots);

    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    std::fs::write(dir.join(REPORT_FILE), json)?;
    Ok(report)
}
