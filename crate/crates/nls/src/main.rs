use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use nls::config::ConfigError;
use nls::{load_config, run, Command, Exit, RunOptions};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Assemble the form and export it as Matrix Market.
    Assemble,
    /// Smallest eigenpairs of the assembled form.
    Eigs,
    /// Generator-ratio certificate, optionally with the Hardy check.
    Ratio,
    /// Scaling functional S(l).
    Sss,
    /// Constructive super Poincaré profile.
    Poincare,
    /// Compactness dichotomy sweep over box sizes.
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Assemble => Command::Assemble,
            Cmd::Eigs => Command::Eigs,
            Cmd::Ratio => Command::Ratio,
            Cmd::Sss => Command::Sss,
            Cmd::Poincare => Command::Poincare,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

/// Non-local Dirichlet forms with unbounded weights: discretization, spectra, compactness diagnostics.
#[derive(Debug, Parser)]
#[command(name = "nls", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output root; otherwise NLS_OUT, the config's output.root, then ./out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            match &e {
                ConfigError::Validation(issues) => {
                    eprintln!("error: {} validation error(s)", issues.len());
                    for i in issues {
                        eprintln!("  {i}");
                    }
                }
                _ => eprintln!("error: {e}"),
            }
            let code = match e {
                ConfigError::Io { .. } => Exit::Internal,
                _ => Exit::Validation,
            };
            return ExitCode::from(code.code() as u8);
        }
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(Exit::Validation.code() as u8);
    }
    let out_root =
        cli.out.or_else(|| std::env::var_os("NLS_OUT").map(PathBuf::from)).or_else(|| cfg.output.root.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let opts = RunOptions { out_root, workers: cli.workers };
    match run(cli.command.into(), &cfg, &opts) {
        Ok(o) => {
            let report = o.dir.join("report.json");
            if let Some(e) = &o.record.error {
                eprintln!("error: {e}");
            }
            println!("{}", report.display());
            ExitCode::from(o.exit.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(Exit::Internal.code() as u8)
        }
    }
}
