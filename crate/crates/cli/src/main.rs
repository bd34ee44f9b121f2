use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use altqa_cli::commands::{advantages, estimate, parse, pipeline, retriever, score};
use altqa_cli::config::{require_path, RunConfig};
use altqa_cli::{exit_code, Failure};
use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

/// Multi-answer QA toolkit: scoring, @k estimation, advantage
/// normalization, answer mining and lexical retrieval.
///
/// Exit codes: 0 success, 1 other failure, 2 configuration error, 3
/// unreadable input, 4 judge transport exhausted, 130 interrupted.
#[derive(Parser, Debug)]
#[command(name = "altqa", version)]
struct Cli {
    /// TOML config file. Flags override its values.
    #[arg(long, global = true, env = "ALTQA_CONFIG")]
    config: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, short = 'j', global = true)]
    jobs: Option<usize>,

    /// More log output; repeat for more.
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score predictions against answer keys.
    Score {
        /// JSON Lines of {question_id, predictions, reference, alternatives?, format_valid?}.
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        /// Subset size for expected @k scores.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        k_prime: Option<usize>,
    },
    /// Expected precision, recall and F1 of k draws from hit lists.
    Estimate {
        /// JSON Lines of arrays of key indices or nulls.
        #[arg(long)]
        hits: PathBuf,
        /// Number of reference keys.
        #[arg(long)]
        g: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        output: PathBuf,
    },
    /// Mine alternative answers: filter, verify, group, emit.
    Pipeline {
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        trajectories: Option<PathBuf>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Use offline rule-based judges.
        #[arg(long)]
        mock: bool,
        #[arg(long)]
        eta: Option<usize>,
        /// Number of verifiers.
        #[arg(long = "verifiers")]
        k: Option<usize>,
        #[arg(long)]
        demotion_rate: Option<f64>,
        #[arg(long)]
        max_judge_failure_fraction: Option<f64>,
    },
    /// Group-normalized advantages, one reward group per line.
    Advantages {
        #[arg(long)]
        rewards: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Lexical retrieval over a chunked corpus.
    Retriever {
        #[command(subcommand)]
        command: RetrieverCommand,
    },
    /// Lint rollouts in an ingest file.
    Parse {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum RetrieverCommand {
    /// Chunk a JSON Lines corpus of {doc_id, title, text} and index it.
    Build {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        index: Option<PathBuf>,
    },
    /// Serve POST /search until interrupted.
    Serve {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        addr: Option<String>,
    },
    /// Run one query and print the passages.
    Query {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        query: String,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn configure(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.jobs.is_some() {
        cfg.jobs = cli.jobs;
    }
    match &cli.command {
        Command::Score { alpha, k, k_prime, .. } => {
            cfg.metrics.alpha = alpha.unwrap_or(cfg.metrics.alpha);
            cfg.metrics.k = k.unwrap_or(cfg.metrics.k);
            cfg.metrics.k_prime = k_prime.unwrap_or(cfg.metrics.k_prime);
        }
        Command::Estimate { k, .. } => cfg.metrics.k = k.unwrap_or(cfg.metrics.k),
        Command::Pipeline {
            mock,
            eta,
            k,
            demotion_rate,
            max_judge_failure_fraction,
            ..
        } => {
            let v = &mut cfg.verification;
            if *mock {
                v.mock = Some(true);
            }
            v.eta = eta.unwrap_or(v.eta);
            v.k = k.unwrap_or(v.k);
            v.demotion_rate = demotion_rate.unwrap_or(v.demotion_rate);
            v.max_judge_failure_fraction = max_judge_failure_fraction.unwrap_or(v.max_judge_failure_fraction);
        }
        Command::Retriever {
            command: RetrieverCommand::Query { top_k: Some(n), .. },
        } => cfg.retriever.top_k = *n,
        Command::Retriever {
            command: RetrieverCommand::Serve { addr: Some(a), .. },
        } => cfg.retriever.addr = a.clone(),
        _ => {}
    }
    // the estimate command checks k against each line instead
    if !matches!(cli.command, Command::Estimate { .. }) {
        cfg.validate()?;
    }
    Ok(cfg)
}

fn run(cli: Cli, stop: Arc<AtomicBool>) -> Result<()> {
    let cfg = configure(&cli)?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("starting worker pool")?;
    }
    match cli.command {
        Command::Score { predictions, output, .. } => score::run(&predictions, &output, &cfg.metrics).map(drop),
        Command::Estimate { hits, g, output, .. } => estimate::run(&hits, &output, g, cfg.metrics.k).map(drop),
        Command::Pipeline {
            manifest,
            trajectories,
            output_dir,
            ..
        } => {
            let inputs = pipeline::PipelineInputs {
                manifest: require_path(manifest, &cfg.paths.manifest, "manifest")?,
                trajectories: require_path(trajectories, &cfg.paths.trajectories, "trajectories")?,
                output_dir: require_path(output_dir, &cfg.paths.output_dir, "output_dir")?,
            };
            pipeline::check_output_dir(&inputs.output_dir).context(Failure::Config)?;
            pipeline::run(&cfg, &inputs, &stop).map(drop)
        }
        Command::Advantages { rewards, output } => advantages::run(&rewards, &output),
        Command::Parse { input, output } => parse::run(&input, output.as_deref()).map(drop),
        Command::Retriever { command } => match command {
            RetrieverCommand::Build { corpus, index } => retriever::build(
                &require_path(corpus, &cfg.paths.corpus, "corpus")?,
                &require_path(index, &cfg.paths.index, "index")?,
            )
            .map(drop),
            RetrieverCommand::Serve { index, .. } => retriever::serve_until(
                &require_path(index, &cfg.paths.index, "index")?,
                &cfg.retriever.addr,
                &stop,
            ),
            RetrieverCommand::Query {
                index, query, output, ..
            } => retriever::query(
                &require_path(index, &cfg.paths.index, "index")?,
                &query,
                cfg.retriever.top_k,
                output.as_deref(),
            ),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let stop = Arc::new(AtomicBool::new(false));
    let flag = Arc::clone(&stop);
    if let Err(e) = ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)) {
        log::warn!("cannot install interrupt handler: {e}");
    }

    match run(cli, stop) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
