//! `lpr`: command-line front end for the LPR workbench.

mod commands;
mod manifest;
mod params;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use commands::Outputs;
use manifest::{RunManifest, MANIFEST_FILE};
use params::{BuildProfileArgs, CompareGhlsArgs, CurvesArgs, GenTraceArgs, Resolved, SimulateArgs};

/// Bad input from the command line or a config file.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(name = "lpr", version, about = "Location profile routing workbench")]
struct Cli {
    /// Directory for outputs and manifest.json.
    #[arg(long, global = true, env = "LPR_OUT_DIR", default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for simulations; 0 uses every core.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the analytic curves as CSV.
    Curves(CurvesArgs),
    /// Generate synthetic observation traces.
    GenTrace(GenTraceArgs),
    /// Build binary location profiles from a trace CSV.
    BuildProfile(BuildProfileArgs),
    /// Run a MANET scenario.
    Simulate(SimulateArgs),
    /// Sweep the update ratio and compare LPR against GHLS.
    CompareGhls(CompareGhlsArgs),
    /// Re-run the parameters recorded in a manifest.
    Replay {
        /// manifest.json of an earlier run, or its directory.
        manifest: PathBuf,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Curves(_) => "curves",
            Command::GenTrace(_) => "gen-trace",
            Command::BuildProfile(_) => "build-profile",
            Command::Simulate(_) => "simulate",
            Command::CompareGhls(_) => "compare-ghls",
            Command::Replay { .. } => "replay",
        }
    }

    fn resolve(&self) -> Result<Resolved> {
        Ok(match self {
            Command::Curves(a) => Resolved::Curves(a.clone()),
            Command::GenTrace(a) => Resolved::GenTrace(a.clone()),
            Command::BuildProfile(a) => Resolved::BuildProfile(a.clone()),
            Command::Simulate(a) => commands::resolve_simulate(a)?,
            Command::CompareGhls(a) => commands::resolve_compare(a)?,
            Command::Replay { manifest } => {
                let path = if manifest.is_dir() {
                    manifest.join(MANIFEST_FILE)
                } else {
                    manifest.clone()
                };
                let recorded =
                    RunManifest::read(&path).map_err(|e| UsageError(format!("{e:#}")))?;
                recorded.params.ok_or_else(|| {
                    UsageError(format!(
                        "{} records no parameters to replay",
                        path.display()
                    ))
                })?
            }
        })
    }
}

fn run(cli: &Cli, out_dir: &Path) -> Result<()> {
    let mut manifest = RunManifest::unresolved(cli.command.name());
    let result = cli.command.resolve().and_then(|resolved| {
        manifest = RunManifest::new(resolved.clone());
        commands::execute(&resolved, &mut Outputs::new(out_dir, &mut manifest))
    });
    if let Err(e) = &result {
        manifest.fail(e);
    }
    let path = manifest.write(out_dir)?;
    log::info!("wrote {}", path.display());
    result
}

fn is_usage(err: &anyhow::Error) -> bool {
    use lpr_core::Error as E;
    err.chain().any(|cause| {
        cause.is::<UsageError>()
            || matches!(
                cause.downcast_ref::<E>(),
                Some(
                    E::Domain(..)
                        | E::InvalidArgument { .. }
                        | E::Config { .. }
                        | E::Toml(..)
                        | E::Parse { .. }
                        | E::Trace(..)
                        | E::StaleVersion { .. }
                )
            )
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let setup = (|| -> Result<()> {
        if cli.jobs != 1 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(cli.jobs)
                .build_global()
                .context("starting worker pool")?;
        }
        fs::create_dir_all(&cli.out_dir)
            .with_context(|| format!("creating {}", cli.out_dir.display()))
    })();
    match setup.and_then(|_| run(&cli, &cli.out_dir)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
