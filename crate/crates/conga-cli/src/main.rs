use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conga_cli::{convergence_sweep, load_config, run_case, CliError, RunConfig, CASES};

#[derive(Parser)]
#[command(name = "conga", version, about = "Run broken-FEEC test cases and export their data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one case.
    Run(RunArgs),
    /// Run one case for several cell counts and report observed orders.
    Sweep {
        #[command(flatten)]
        args: RunArgs,
        /// Cell counts, overriding `sweep_cells`.
        #[arg(long, value_delimiter = ',')]
        cells: Option<Vec<usize>>,
    },
    /// List the registered cases.
    ListCases,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value`, applied after the configuration file. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig, CliError> {
        let mut cfg = load_config(self.config.as_deref(), &self.overrides)?;
        if self.out.is_some() {
            cfg.output = self.out.clone();
        }
        Ok(cfg)
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ListCases => {
            for c in CASES {
                println!("{:<30} {}", c.name, c.description);
            }
        }
        Command::Run(args) => {
            let cfg = args.load()?;
            let r = run_case(&cfg)?;
            println!("{}: wrote {} files to {}", cfg.case, r.files.len(), r.dir.display());
            if let Some(e) = r.error {
                println!("error {e:.6e}");
            }
        }
        Command::Sweep { args, cells } => {
            let cfg = args.load()?;
            let cells = cells.unwrap_or_else(|| cfg.sweep_cells.clone());
            let (report, _) = convergence_sweep(&cfg, &cells)?;
            println!("{:>6} {:>8} {:>14} {:>8}", "cells", "dofs", "error", "order");
            for r in &report.rows {
                let order = r.order.map_or("N/A".to_string(), |o| format!("{o:.3}"));
                let flag = if r.stalled { "  (error did not decrease)" } else { "" };
                println!("{:>6} {:>8} {:>14.6e} {:>8}{flag}", r.cells, r.dofs, r.error, order);
            }
            if report.stalled() {
                eprintln!("warning: the error did not decrease under refinement");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
