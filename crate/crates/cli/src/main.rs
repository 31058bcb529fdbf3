//! `emofed`: data preparation, synthetic corpora, centralized and federated
//! training runs, and pivoted result tables.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emofed::corpus::NormalizeMode;
use emofed::ErrorKind;

#[derive(Debug, Parser)]
#[command(name = "emofed", version, about = "Federated emoji-category classification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ConfigArgs {
    /// JSON experiment configuration; omitted fields take defaults.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override a config field, e.g. `--set fed.rounds=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    fn all_overrides(&self) -> Vec<String> {
        let mut out = self.overrides.clone();
        if let Some(seed) = self.seed {
            out.push(format!("seed={seed}"));
        }
        out
    }

    pub fn resolve(&self) -> emofed::Result<config::ExperimentConfig> {
        config::ExperimentConfig::resolve(self.config.as_deref(), &self.all_overrides())
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic long-tailed corpus of examples.
    Synth {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output example JSONL.
        #[arg(long, short)]
        out: PathBuf,
        /// Class-distribution summary (default: next to the output).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Turn raw tweet JSONL into one labeled example per emoji.
    Prep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Emoji category table CSV (default: bundled table).
        #[arg(long)]
        table: Option<PathBuf>,
        /// Overrides `normalize_mode`.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Count summary (default: next to the output).
        #[arg(long)]
        counts: Option<PathBuf>,
    },
    /// Split examples 80/10/10 into train/validation/test.
    Split {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train the centralized reference model under each balancing mode.
    Central {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the federated grid.
    Fed {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Client-training threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render Markdown and CSV tables from a finished run directory.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
    },
}

#[derive(Debug, Args, Clone)]
pub struct RunArgs {
    /// Directory holding train/validation/test JSONL.
    #[arg(long)]
    pub splits: PathBuf,
    /// Output directory (default: `$EMOFED_RUNS_DIR/<command>-<config digest>`).
    #[arg(long)]
    pub run_dir: Option<PathBuf>,
    /// Root for default run directories.
    #[arg(long, env = "EMOFED_RUNS_DIR", default_value = "runs")]
    pub runs_root: PathBuf,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Tokens,
    Plain,
}

impl From<ModeArg> for NormalizeMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Tokens => NormalizeMode::Tokens,
            ModeArg::Plain => NormalizeMode::Plain,
        }
    }
}

fn run(cli: Cli) -> emofed::Result<()> {
    match cli.command {
        Command::Synth { cfg, out, summary } => commands::synth(&cfg.resolve()?, &out, summary.as_deref()),
        Command::Prep {
            cfg,
            input,
            out,
            table,
            mode,
            counts,
        } => {
            let mut c = cfg.resolve()?;
            if let Some(m) = mode {
                c.normalize_mode = m.into();
            }
            commands::prep(&c, &input, &out, table.as_deref(), counts.as_deref())
        }
        Command::Split { cfg, input, out_dir } => commands::split(&cfg.resolve()?, &input, &out_dir),
        Command::Central { cfg, run } => commands::central(&cfg.resolve()?, &run),
        Command::Fed { cfg, run, workers } => {
            let workers = workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
                .max(1);
            commands::fed(&cfg.resolve()?, &run, workers)
        }
        Command::Report { run_dir } => report::report(&run_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Data => 3,
                ErrorKind::Numeric => 4,
            })
        }
    }
}
