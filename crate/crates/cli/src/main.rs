//! `squidsim` command-line driver.
//!
//! Exit codes: 0 success, 2 configuration/validation failure, 3 numerical
//! failure (partial results flagged in the manifest).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Map;
use squidsim::model::{derive_params, PhysicalConstants};

use commands::CommandOutcome;
use config::{parse_config, parse_config_str, RunConfig};

#[derive(Parser)]
#[command(
    name = "squidsim",
    version,
    about = "Flux/coupling spectroscopy and open-system dynamics of a SQUID coupled to an Ohmic bath"
)]
struct Cli {
    /// JSON run configuration; omitted fields use the reference-device defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for grid sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Working basis dimension (overrides space.dim).
    #[arg(long, global = true)]
    dim: Option<usize>,

    /// Deterministic mode: omit timestamps from the manifest so repeated
    /// runs are byte-identical.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Lowest-k energy levels over the (phi, g) grid.
    Spectrum,
    /// Ground-state energy for all eight correction-term combinations.
    Spiderweb,
    /// Ground-state magnetic susceptibility over the (phi, g) grid.
    Susceptibility,
    /// Completed coefficient matrices and extracted Lindblad operators.
    Lindblads,
    /// Density-matrix evolution under both master-equation forms.
    Evolve,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Spiderweb => "spiderweb",
            Command::Susceptibility => "susceptibility",
            Command::Lindblads => "lindblads",
            Command::Evolve => "evolve",
        }
    }
}

fn now_utc() -> String {
    chrono::Utc::now().to_rfc3339()
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("squidsim: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }

    let mut cfg: RunConfig = match &cli.config {
        Some(path) => match parse_config(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("squidsim: {e}");
                return ExitCode::from(2);
            }
        },
        None => parse_config_str("{}").expect("default config is valid"),
    };
    if let Some(out) = &cli.out {
        cfg.output.directory = out.clone();
    }
    if let Some(dim) = cli.dim {
        match squidsim::operators::FockSpace::new(dim, cfg.space.pad) {
            Ok(space) => cfg.space = space,
            Err(e) => {
                eprintln!("squidsim: --dim: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let params = match derive_params(&cfg.device, &PhysicalConstants::default()) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("squidsim: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.output.directory) {
        eprintln!(
            "squidsim: cannot create output directory {}: {e}",
            cfg.output.directory.display()
        );
        return ExitCode::from(2);
    }

    let started = now_utc();
    let result = match cli.command {
        Command::Spectrum => commands::cmd_spectrum(&cfg),
        Command::Spiderweb => commands::cmd_spiderweb(&cfg),
        Command::Susceptibility => commands::cmd_susceptibility(&cfg),
        Command::Lindblads => commands::cmd_lindblads(&cfg),
        Command::Evolve => commands::cmd_evolve(&cfg),
    };
    let finished = now_utc();
    let timestamps = (!cli.seedless).then_some((started, finished));

    let (outcome, status, code) = match result {
        Ok(outcome) => {
            let partial = outcome.partial;
            (
                outcome,
                "ok".to_string(),
                if partial { 3 } else { 0 },
            )
        }
        Err(e) => {
            eprintln!("squidsim: numerical failure: {e}");
            (
                CommandOutcome::default(),
                format!("error: {e}"),
                3,
            )
        }
    };
    for w in &outcome.warnings {
        eprintln!("squidsim: warning: {w}");
    }

    let manifest_notes: Map<_, _> = outcome.notes.clone();
    match manifest::write_manifest(
        &cfg,
        Some(&params),
        cli.command.name(),
        &status,
        outcome.partial,
        &outcome.warnings,
        manifest_notes,
        &outcome.files,
        timestamps,
    ) {
        Ok(path) => {
            if code == 0 {
                println!("squidsim: wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("squidsim: cannot write manifest: {e}");
            return ExitCode::from(3);
        }
    }
    ExitCode::from(code)
}
