//! Experiment runner for compression-channel sweeps and invariant suites.

pub mod channels;
pub mod config;
pub mod error;
pub mod sweep;
pub mod table;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use lcc_core::exec::ExecMode;
use lcc_core::models::family_catalog;
use lcc_core::suites::Suite;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::table::{Metadata, ResultTable};

#[derive(Debug, Parser)]
#[command(name = "lcc", version, about = "Lossless compression channel experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep a model and channels, writing a CSV table.
    Run(Common),
    /// Run the randomized invariant suites and check POVM documents.
    Verify {
        #[command(flatten)]
        common: Common,
        /// POVM document to check; repeatable.
        #[arg(long = "input")]
        inputs: Vec<PathBuf>,
        /// Trials per suite.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// List models, channels and suites.
    Catalog,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for parallel evaluation.
    #[arg(long)]
    pub threads: Option<usize>,
}

impl Common {
    fn load(&self, required: bool) -> CliResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None if required => return Err(CliError::Config("--config is required".into())),
            None => ExperimentConfig::from_json("{}")?,
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }

    fn mode(&self) -> CliResult<ExecMode> {
        match self.threads {
            Some(0) => Err(CliError::Config("--threads must be positive".into())),
            Some(1) => Ok(ExecMode::Sequential),
            Some(n) => {
                #[cfg(feature = "parallel")]
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
                #[cfg(not(feature = "parallel"))]
                let _ = n;
                Ok(ExecMode::Parallel)
            }
            None => Ok(ExecMode::Parallel),
        }
    }

    fn emit(&self, command: &str, config: &ExperimentConfig, table: &ResultTable) -> CliResult<()> {
        let meta = Metadata::new(command, config.digest(), config.seed, table);
        match &self.out {
            Some(path) => {
                let file = std::fs::File::create(path)
                    .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
                table.write(&meta, std::io::BufWriter::new(file))
            }
            None => table.write(&meta, std::io::stdout().lock()),
        }
    }
}

/// Run a parsed command and return the process exit status.
pub fn execute(cli: Cli) -> i32 {
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("lcc: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::Run(common) => {
            let config = common.load(true)?;
            let table = sweep::run(&config, common.mode()?)?;
            common.emit("run", &config, &table)?;
            let flagged = table.flagged();
            if flagged > 0 {
                eprintln!("lcc: {flagged} of {} rows flagged", table.rows.len());
                return Ok(1);
            }
            Ok(0)
        }
        Command::Verify { common, inputs, trials } => {
            let mut config = common.load(false)?;
            config.verify.get_or_insert_with(Default::default).inputs.extend(inputs);
            let outcome = verify::verify(&config, trials, common.mode()?)?;
            for s in &outcome.suites {
                eprintln!(
                    "{:<20} {:>5} trials {:>7} checks  max residual/tol {:.3e}  {}",
                    s.name,
                    s.trials,
                    s.checks,
                    s.max_residual,
                    if s.passed() { "PASS" } else { "FAIL" }
                );
            }
            for i in &outcome.inputs {
                match &i.failure {
                    None => eprintln!("{}  PASS", i.path.display()),
                    Some(f) => eprintln!("{}  FAIL: {f}", i.path.display()),
                }
            }
            common.emit("verify", &config, &outcome.table())?;
            Ok(if outcome.passed() { 0 } else { 1 })
        }
        Command::Catalog => {
            print_catalog(std::io::stdout().lock())?;
            Ok(0)
        }
    }
}

fn print_catalog<W: Write>(mut out: W) -> CliResult<()> {
    writeln!(out, "models:")?;
    for m in family_catalog() {
        let params: Vec<String> = m.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "  {:<20} {}  [{}]", m.name, m.description, params.join(", "))?;
    }
    writeln!(out, "channels:")?;
    for c in channels::channel_catalog() {
        let mut params: Vec<String> = c.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        params.extend(c.optional.iter().map(|k| format!("{k}?")));
        if c.needs_file {
            params.push("file".into());
        }
        writeln!(out, "  {:<20} {}  [{}]", c.name, c.description, params.join(", "))?;
    }
    writeln!(out, "suites:")?;
    for s in Suite::ALL {
        writeln!(out, "  {:<20} {} trials", s.name(), s.default_trials())?;
    }
    Ok(())
}
