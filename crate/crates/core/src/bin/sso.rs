use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use sso_core::cli_io::{parse_config, run_subcommand, write_tables, Format, Subcommand};
use sso_core::Error;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    GsSweep,
    Spectrum,
    States,
    Powerlaw,
    Wkb,
    Period,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::GsSweep => Subcommand::GsSweep,
            Command::Spectrum => Subcommand::Spectrum,
            Command::States => Subcommand::States,
            Command::Powerlaw => Subcommand::Powerlaw,
            Command::Wkb => Subcommand::Wkb,
            Command::Period => Subcommand::Period,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

/// Spectra, eigenstates and semiclassical estimates of superexponential and
/// power-law oscillators.
#[derive(Debug, Parser)]
#[command(name = "sso", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
    /// Overrides `potential.alpha`; a configured sweep collapses to this value.
    #[arg(long)]
    alpha: Option<f64>,
    /// Overrides `solver.k_states`.
    #[arg(long)]
    k: Option<usize>,
}

fn run(cli: Cli) -> Result<Vec<PathBuf>, Error> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::from(e).annotate(format!("reading {}", cli.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if let Some(alpha) = cli.alpha {
        cfg.potential = cfg.potential.with_alpha(alpha);
        cfg.potential.validate()?;
        if !cfg.analysis.sweep.is_empty() {
            cfg.analysis.sweep = vec![alpha];
        }
    }
    if let Some(k) = cli.k {
        if k == 0 {
            return Err(Error::Config("--k must be at least 1".into()));
        }
        cfg.solver.k_states = k;
    }
    if let Some(dir) = cli.out {
        cfg.output.directory = dir;
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            OutFormat::Csv => Format::Csv,
            OutFormat::Json => Format::Json,
        };
    }
    let tables = run_subcommand(&cfg, cli.command.into())?;
    write_tables(&cfg.output.directory, &tables, cfg.output.format, cfg.output.precision)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sso: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
