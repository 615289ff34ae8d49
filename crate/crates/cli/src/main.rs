use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use instrument_autonomy_cli::{
    output_dir, run, thread_count, with_threads, CliError, ExperimentConfig, ExperimentKind,
};

#[derive(Parser)]
#[command(
    name = "instrument-autonomy",
    version,
    about = "Photodetection and heterodyne instrument experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-count statistics against the Born rule
    PhotodetectEnsemble(Flags),
    /// Heterodyne record statistics and covariance cooling
    HeterodyneEnsemble(Flags),
    /// Evolution equations of both Kraus-operator distributions
    EvolveKod(Flags),
    /// Operator identities of both instruments
    VerifyIdentities(Flags),
    /// Convergence of the POVM elements to projectors
    PovmConvergence(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON config; unknown keys are rejected
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: config `output`, else ./out)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: $INSTRUMENT_AUTONOMY_THREADS, else all cores)
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(kind: ExperimentKind, flags: Flags) -> Result<bool, CliError> {
    let mut cfg = match &flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = flags.seed {
        cfg.seed = seed;
    }
    let cfg = cfg.resolve(kind)?;
    let dir = output_dir(flags.out.as_deref(), &cfg);
    let threads = thread_count(flags.threads)?;
    let report = with_threads(threads, || run(&cfg, &dir))??;
    for c in &report.checks {
        let measured = c
            .measured
            .map(|m| format!("{m:e}"))
            .unwrap_or_else(|| "n/a".into());
        let status = if c.pass { "pass" } else { "FAIL" };
        println!(
            "{status:4}  {:40} {measured:>12}  (threshold {:e})",
            c.name, c.threshold
        );
        if let Some(e) = &c.error {
            println!("      {e}");
        }
    }
    println!(
        "{}: {} ({})",
        report.experiment,
        if report.pass { "pass" } else { "FAIL" },
        dir.display()
    );
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::PhotodetectEnsemble(f) => (ExperimentKind::PhotodetectEnsemble, f),
        Command::HeterodyneEnsemble(f) => (ExperimentKind::HeterodyneEnsemble, f),
        Command::EvolveKod(f) => (ExperimentKind::EvolveKod, f),
        Command::VerifyIdentities(f) => (ExperimentKind::VerifyIdentities, f),
        Command::PovmConvergence(f) => (ExperimentKind::PovmConvergence, f),
    };
    match execute(kind, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
