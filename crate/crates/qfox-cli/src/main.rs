use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qfox_cli::{
    eval_pair, resolve_seed, run_experiment, CliError, ExperimentConfig, FileConfig,
    OptimizerChoice, Task,
};

#[derive(Parser)]
#[command(name = "qfox", version, about = "Q-learning hyperparameter tuning benchmarks")]
struct Cli {
    /// Cap worker parallelism (default: machine parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tune (alpha, gamma) with one optimizer (or `all`) and write artifacts.
    Tune(TuneArgs),
    /// Run several optimizers under the same budget and write a merged table.
    Compare(CompareArgs),
    /// Train once with a fixed (alpha, gamma) pair and report its rewards.
    Eval(EvalArgs),
}

#[derive(Args)]
struct ProtocolArgs {
    /// Flat key=value config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Control task: frozenlake or cartpole.
    #[arg(long)]
    task: Option<Task>,
    /// Use the slippery FrozenLake variant.
    #[arg(long)]
    slippery: bool,
    /// Population size.
    #[arg(long)]
    g: Option<usize>,
    /// Optimizer iterations (evaluation budget is g * (max_iter + 1)).
    #[arg(long)]
    max_iter: Option<usize>,
    /// Independent optimizer runs; the best run's pair is reported.
    #[arg(long)]
    n_runs: Option<usize>,
    /// Training episodes per candidate evaluation.
    #[arg(long)]
    episodes: Option<usize>,
    /// Training runs averaged per candidate evaluation.
    #[arg(long)]
    eval_repeats: Option<usize>,
    /// Master seed (falls back to the config file, then $QFOX_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for result.json, summary.csv, and curve.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// fox, pso, ga, ba, random, or all.
    #[arg(long)]
    optimizer: Option<OptimizerChoice>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    protocol: ProtocolArgs,
    /// Comma-separated optimizers to compare (default: all five).
    #[arg(long, value_delimiter = ',')]
    optimizers: Vec<OptimizerChoice>,
}

#[derive(Args)]
struct EvalArgs {
    /// Control task: frozenlake or cartpole.
    #[arg(long)]
    task: Task,
    /// Use the slippery FrozenLake variant.
    #[arg(long)]
    slippery: bool,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    gamma: f64,
    /// Training episodes before the greedy evaluation.
    #[arg(long, default_value_t = 200)]
    episodes: usize,
    /// Master seed (falls back to $QFOX_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
}

fn build_config(protocol: &ProtocolArgs, optimizers: OptimizerChoice) -> Result<ExperimentConfig, CliError> {
    let file = match &protocol.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let task = protocol
        .task
        .or(file.task)
        .ok_or_else(|| CliError::Config("missing --task (or task= in the config file)".into()))?;
    let env_seed = std::env::var("QFOX_SEED").ok();
    // Benchmark protocol defaults: 30 agents, 100 iterations, 10 runs, 200 episodes.
    Ok(ExperimentConfig {
        task,
        slippery: protocol.slippery || file.slippery.unwrap_or(false),
        optimizers: optimizers.algorithms(),
        g: protocol.g.or(file.g).unwrap_or(30),
        max_iter: protocol.max_iter.or(file.max_iter).unwrap_or(100),
        n_runs: protocol.n_runs.or(file.n_runs).unwrap_or(10),
        episodes: protocol.episodes.or(file.episodes).unwrap_or(200),
        eval_repeats: protocol.eval_repeats.or(file.eval_repeats).unwrap_or(1),
        seed: resolve_seed(protocol.seed, file.seed, env_seed.as_deref())?,
        out: protocol.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Tune(args) => {
            let choice = match (args.optimizer, args.protocol.config.as_ref()) {
                (Some(c), _) => c,
                (None, Some(path)) => FileConfig::load(path)?
                    .optimizer
                    .unwrap_or(OptimizerChoice::One(qfox_core::baselines::Algorithm::Fox)),
                (None, None) => OptimizerChoice::One(qfox_core::baselines::Algorithm::Fox),
            };
            let config = build_config(&args.protocol, choice)?;
            let rows = run_experiment(&config)?;
            print_rows(&rows);
            Ok(())
        }
        Command::Compare(args) => {
            let mut algorithms = Vec::new();
            let choices = if args.optimizers.is_empty() {
                vec![OptimizerChoice::All]
            } else {
                args.optimizers.clone()
            };
            for choice in choices {
                for a in choice.algorithms() {
                    if !algorithms.contains(&a) {
                        algorithms.push(a);
                    }
                }
            }
            let mut config = build_config(&args.protocol, OptimizerChoice::All)?;
            config.optimizers = algorithms;
            let rows = run_experiment(&config)?;
            print_rows(&rows);
            Ok(())
        }
        Command::Eval(args) => {
            let env_seed = std::env::var("QFOX_SEED").ok();
            let seed = resolve_seed(args.seed, None, env_seed.as_deref())?;
            let task_config = ExperimentConfig {
                task: args.task,
                slippery: args.slippery,
                optimizers: vec![qfox_core::baselines::Algorithm::Fox],
                g: 1,
                max_iter: 0,
                n_runs: 1,
                episodes: args.episodes,
                eval_repeats: 1,
                seed,
                out: PathBuf::from("."),
            };
            let outcome =
                eval_pair(&task_config.task_spec(), args.alpha, args.gamma, args.episodes, seed)?;
            let json = serde_json::to_string_pretty(&outcome)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
    }
}

fn print_rows(rows: &[qfox_cli::SummaryRow]) {
    println!("method,alpha,gamma,reward,time_s");
    for r in rows {
        println!(
            "{},{},{},{},{}",
            r.method,
            qfox_cli::fmt_sig(r.alpha, 6),
            qfox_cli::fmt_sig(r.gamma, 6),
            qfox_cli::fmt_sig(r.reward, 6),
            qfox_cli::fmt_sig(r.time_s, 6),
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfox: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
