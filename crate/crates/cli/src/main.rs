use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pathwit::experiments::{self, Config, Grid, Table};
use pathwit::Error;

/// Optical-path entanglement witnesses: sweeps, headline numbers and verdicts.
#[derive(Parser)]
#[command(name = "pathwit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Margin against the splitting ratio.
    BsSweep(Common),
    /// Margin against the total transmission.
    LossSweep(Common),
    /// W-state margins against the number of paths.
    NScaling(Common),
    /// Ideal and lossy three-path predictions.
    Tripartite(Common),
    /// Verdict from a counts file.
    Verdict {
        /// Counts file (`key = value` lines).
        counts: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Sweep grid `lo:hi:step`.
    #[arg(long)]
    grid: Option<String>,
}

impl Common {
    fn config(&self) -> Result<Config, Error> {
        let mut cfg = match &self.config {
            Some(p) => Config::load(p).map_err(|e| match e {
                Error::Io(io) => Error::Config(format!("{}: {io}", p.display())),
                e => e,
            })?,
            None => Config::default(),
        };
        if let Some(a) = self.alpha {
            cfg.set("alpha", a.to_string());
        }
        if let Some(g) = &self.grid {
            Grid::parse(g)?;
            cfg.set("grid", g.clone());
        }
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_table(table: &Table, out: Option<&Path>) -> Result<(), Error> {
    emit(&table.to_csv(), out)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::BsSweep(c) => emit_table(&experiments::run_bs_sweep(&c.config()?)?, c.out.as_deref()),
        Command::LossSweep(c) => {
            let table = experiments::run_loss_sweep(&c.config()?)?;
            match experiments::zero_crossing(&table) {
                Some(x) => eprintln!("margin crosses zero at eta_total = {x:.4}"),
                None => eprintln!("margin does not change sign on this grid"),
            }
            emit_table(&table, c.out.as_deref())
        }
        Command::NScaling(c) => emit_table(&experiments::run_n_scaling(&c.config()?)?, c.out.as_deref()),
        Command::Tripartite(c) => {
            let report = experiments::run_tripartite(&c.config()?)?;
            eprintln!("{report}");
            emit_table(&report.table(), c.out.as_deref())
        }
        Command::Verdict { counts, out } => {
            let text = std::fs::read_to_string(&counts)
                .map_err(|e| Error::InvalidData(format!("{}: {e}", counts.display())))?;
            let report = experiments::run_verdict(&text)?;
            emit(&format!("{report}\n"), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
