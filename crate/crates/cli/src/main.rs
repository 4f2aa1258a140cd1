//! `lz78src`: generate, score and analyse realizations of the LZ78 source.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

mod commands;
mod config;
mod curves;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lz78_source::baselines::SpaConfig;
use lz78_source::{Prior, SimplexBox, TestEvent};

use crate::commands::{DatasetArgs, ScoreArgs, StatsArgs};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(name = "lz78src", version, about = "LZ78 probability source: sampling, scoring and limit theory")]
struct Cli {
    /// Base RNG seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output path: record base, CSV/JSON file or directory, by command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a realization and write it as a `.sym` + `.json` record.
    Generate {
        #[arg(long)]
        prior: Prior,
        #[arg(long)]
        n: u64,
        /// Also write `<out>.trace.csv` with the node of each symbol.
        #[arg(long)]
        trace: bool,
    },
    /// Per-symbol log loss curve of a sequence (CSV `n,value`).
    Score {
        /// Record base path, `.sym` or `.json`.
        #[arg(long)]
        input: PathBuf,
        /// Prior of the LZ78 SPA; defaults to the record's prior.
        #[arg(long)]
        prior: Option<Prior>,
        /// Alphabet size of a bare `.sym` file.
        #[arg(long)]
        alphabet: Option<usize>,
        /// Score with a baseline: `ctw(D)`, `markov(k,γ)` or `lz78(<prior>)`.
        #[arg(long, conflicts_with_all = ["law", "prior"])]
        spa: Option<SpaConfig>,
        /// Score under a fixed Markov law (descriptor or JSON file).
        #[arg(long, conflicts_with = "prior")]
        law: Option<String>,
        /// Explicit checkpoints, comma separated.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        /// Log-spaced checkpoints per decade when none are given.
        #[arg(long, default_value_t = lz78_source::curve::POINTS_PER_DECADE)]
        per_decade: usize,
    },
    /// Run an experiment described by a TOML file into `--out` (a directory).
    Curves {
        config: PathBuf,
        /// Print the parsed configuration with defaults filled in and exit.
        #[arg(long)]
        dry_run: bool,
    },
    /// Write a train/eval corpus of fixed-length realizations.
    Dataset {
        #[arg(long)]
        prior: Prior,
        #[arg(long, default_value_t = 2048)]
        length: u64,
        #[arg(long, default_value_t = 100_000)]
        train: u64,
        #[arg(long, default_value_t = 2048)]
        eval: u64,
        /// First seed; defaults to `--seed`.
        #[arg(long)]
        seed_base: Option<u64>,
    },
    /// Theoretical limits of a prior as JSON.
    Theory {
        #[arg(long)]
        prior: Prior,
        /// Markov law for a relative-entropy limit; repeatable.
        #[arg(long)]
        law: Vec<String>,
        #[arg(long, default_value_t = lz78_source::empirical::ETA_STAR_SAMPLES)]
        mc_samples: usize,
    },
    /// Phrase statistics, μ_k and empirical measures of one realization.
    Stats {
        #[arg(long, conflicts_with = "n")]
        input: Option<PathBuf>,
        #[arg(long)]
        prior: Option<Prior>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        alphabet: Option<usize>,
        /// μ_k order; repeatable.
        #[arg(long)]
        mu: Vec<usize>,
        /// Test set for M_n and N^A; repeatable.
        #[arg(long = "box")]
        boxes: Vec<SimplexBox>,
        /// Joint event for L_n; repeatable.
        #[arg(long = "event")]
        events: Vec<TestEvent>,
        /// Include phrase lengths and N(ℓ) arrays.
        #[arg(long)]
        phrases: bool,
        #[arg(long, default_value_t = lz78_source::empirical::ETA_STAR_SAMPLES)]
        mc_samples: usize,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let workers = match cli.workers {
        Some(0) => return Err(CliError::Config("--workers must be at least 1".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Generate { prior, n, trace } => {
            let out = commands::require_out(out, "generate")?;
            commands::cmd_generate(prior, *n, cli.seed, &out, *trace, cli.force)
        }
        Command::Score {
            input,
            prior,
            alphabet,
            spa,
            law,
            checkpoints,
            per_decade,
        } => commands::cmd_score(
            &ScoreArgs {
                input,
                prior: prior.as_ref(),
                alphabet: *alphabet,
                spa: spa.as_ref(),
                law: law.as_deref(),
                checkpoints,
                per_decade: *per_decade,
            },
            out,
            cli.force,
        ),
        Command::Curves { config, dry_run } => {
            let text = std::fs::read_to_string(config).map_err(|e| CliError::io(config, e))?;
            let cfg = ExperimentConfig::from_toml(&text)?;
            cfg.validate()?;
            if *dry_run {
                print!("{}", cfg.to_toml());
                return Ok(());
            }
            let dir = out
                .map(PathBuf::from)
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| CliError::Config("curves needs --out or `output` in the config".into()))?;
            curves::run(&cfg, &dir, workers, cli.seed, cli.force)
        }
        Command::Dataset {
            prior,
            length,
            train,
            eval,
            seed_base,
        } => {
            let dir = commands::require_out(out, "dataset")?;
            let args = DatasetArgs {
                prior,
                length: *length,
                train: *train,
                eval: *eval,
                seed_base: seed_base.unwrap_or(cli.seed),
            };
            commands::cmd_dataset(&args, &dir, workers, cli.force)
        }
        Command::Theory { prior, law, mc_samples } => {
            commands::cmd_theory(prior, law, *mc_samples, cli.seed, out, cli.force)
        }
        Command::Stats {
            input,
            prior,
            n,
            alphabet,
            mu,
            boxes,
            events,
            phrases,
            mc_samples,
        } => commands::cmd_stats(
            &StatsArgs {
                input: input.as_deref(),
                prior: prior.as_ref(),
                n: *n,
                alphabet: *alphabet,
                boxes,
                events,
                mu,
                phrases: *phrases,
                mc_samples: *mc_samples,
            },
            cli.seed,
            out,
            cli.force,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
