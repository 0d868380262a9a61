//! Experiment configuration, execution, and reporting for the `qfox` binary.
//!
//! The binary exits 0 on success, 2 on configuration errors, and 3 on
//! runtime failures.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qfox_core::baselines::{Algorithm, OptimizerConfig};
use qfox_core::qlearn::{self, EpsilonSchedule, Hyperparams};
use qfox_core::seed::stream;
use qfox_core::tuner::{tune, TaskSpec, TuneResult, TuneSettings};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad config file, or invalid parameter values. Exit 2.
    Config(String),
    /// Failures after validation: I/O, training errors. Exit 3.
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

/// Which task to run, plus task-level switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    FrozenLake,
    CartPole,
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "frozenlake" | "frozen-lake" | "frozen_lake" => Ok(Task::FrozenLake),
            "cartpole" | "cart-pole" | "cart_pole" => Ok(Task::CartPole),
            other => Err(format!("unknown task '{other}' (expected frozenlake or cartpole)")),
        }
    }
}

/// One optimizer choice on the command line; `all` expands to the five
/// benchmarked methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerChoice {
    One(Algorithm),
    All,
}

impl FromStr for OptimizerChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            return Ok(OptimizerChoice::All);
        }
        Algorithm::from_str(s).map(OptimizerChoice::One)
    }
}

impl OptimizerChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            OptimizerChoice::One(a) => vec![a],
            OptimizerChoice::All => Algorithm::ALL.to_vec(),
        }
    }
}

/// Fully resolved experiment parameters after merging the config file,
/// command-line flags, and defaults (flags win over file values).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub slippery: bool,
    pub optimizers: Vec<Algorithm>,
    pub g: usize,
    pub max_iter: usize,
    pub n_runs: usize,
    pub episodes: usize,
    pub eval_repeats: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn task_spec(&self) -> TaskSpec {
        match self.task {
            Task::FrozenLake => {
                let mut spec = TaskSpec::frozen_lake_default();
                if let TaskSpec::FrozenLake { slippery, .. } = &mut spec {
                    *slippery = self.slippery;
                }
                spec
            }
            Task::CartPole => TaskSpec::cart_pole_default(),
        }
    }

    pub fn settings_for(&self, algorithm: Algorithm) -> TuneSettings {
        let mut settings = TuneSettings::new(OptimizerConfig::new(algorithm, self.g, self.max_iter));
        settings.n_runs = self.n_runs;
        settings.episodes = self.episodes;
        settings.eval_repeats = self.eval_repeats;
        settings
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.optimizers.is_empty() {
            return Err(CliError::Config("no optimizer selected".into()));
        }
        if self.g == 0 {
            return Err(CliError::Config("g (population size) must be >= 1".into()));
        }
        if self.n_runs == 0 {
            return Err(CliError::Config("n_runs must be >= 1".into()));
        }
        if self.episodes < 4 {
            return Err(CliError::Config("episodes must be >= 4".into()));
        }
        if self.eval_repeats == 0 {
            return Err(CliError::Config("eval_repeats must be >= 1".into()));
        }
        Ok(())
    }
}

/// Unmerged values from a flat `key = value` config file. Unknown keys are
/// rejected; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub task: Option<Task>,
    pub slippery: Option<bool>,
    pub optimizer: Option<OptimizerChoice>,
    pub g: Option<usize>,
    pub max_iter: Option<usize>,
    pub n_runs: Option<usize>,
    pub episodes: Option<usize>,
    pub eval_repeats: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut seen: HashMap<&str, ()> = HashMap::new();
        let mut cfg = FileConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Config(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if seen.insert(key_name(key)?, ()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            let bad = |e: String| CliError::Config(format!("line {}: {key}: {e}", lineno + 1));
            match key {
                "task" => cfg.task = Some(value.parse().map_err(bad)?),
                "slippery" => cfg.slippery = Some(parse_bool(value).map_err(bad)?),
                "optimizer" => cfg.optimizer = Some(value.parse().map_err(bad)?),
                "g" => cfg.g = Some(parse_num(value).map_err(bad)?),
                "max_iter" => cfg.max_iter = Some(parse_num(value).map_err(bad)?),
                "n_runs" => cfg.n_runs = Some(parse_num(value).map_err(bad)?),
                "episodes" => cfg.episodes = Some(parse_num(value).map_err(bad)?),
                "eval_repeats" => cfg.eval_repeats = Some(parse_num(value).map_err(bad)?),
                "seed" => cfg.seed = Some(parse_num(value).map_err(bad)?),
                "out" => cfg.out = Some(PathBuf::from(value)),
                _ => unreachable!("key_name vetted the key"),
            }
        }
        Ok(cfg)
    }
}

const KNOWN_KEYS: [&str; 10] = [
    "task", "slippery", "optimizer", "g", "max_iter", "n_runs", "episodes", "eval_repeats",
    "seed", "out",
];

fn key_name(key: &str) -> Result<&'static str, CliError> {
    KNOWN_KEYS
        .iter()
        .find(|k| **k == key)
        .copied()
        .ok_or_else(|| CliError::Config(format!("unknown config key '{key}'")))
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(format!("expected a boolean, got '{other}'")),
    }
}

fn parse_num<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse().map_err(|e| format!("invalid number '{value}': {e}"))
}

/// Seed precedence: command-line flag, then config file, then the
/// `QFOX_SEED` environment variable, then 0.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(s) = file {
        return Ok(s);
    }
    match env {
        Some(raw) => raw
            .trim()
            .parse()
            .map_err(|e| CliError::Config(format!("QFOX_SEED is not a valid seed: {e}"))),
        None => Ok(0),
    }
}

/// Min-max normalization onto [0, 1]; constant inputs map to all zeros.
pub fn normalize_curve(rewards: &[f64]) -> Vec<f64> {
    let min = rewards.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rewards.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max - min).is_normal() {
        return vec![0.0; rewards.len()];
    }
    rewards.iter().map(|r| (r - min) / (max - min)).collect()
}

/// Formats with `sig` significant digits (fixed notation), matching the
/// documented CSV float format.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (sig as i32 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One summary table row, mirroring the benchmark tables.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: String,
    pub alpha: f64,
    pub gamma: f64,
    pub reward: f64,
    pub time_s: f64,
}

impl SummaryRow {
    fn from_result(method: &str, result: &TuneResult) -> Self {
        SummaryRow {
            method: method.to_string(),
            alpha: result.best_hp.alpha,
            gamma: result.best_hp.gamma,
            reward: result.mean_reward_last_quarter,
            time_s: result.wall_time,
        }
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("method,alpha,gamma,reward,time_s\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.method,
            fmt_sig(row.alpha, 6),
            fmt_sig(row.gamma, 6),
            fmt_sig(row.reward, 6),
            fmt_sig(row.time_s, 6),
        ));
    }
    out
}

pub fn curve_csv(rewards: &[f64]) -> String {
    let normalized = normalize_curve(rewards);
    let mut out = String::from("episode,reward,normalized\n");
    for (i, (r, n)) in rewards.iter().zip(&normalized).enumerate() {
        out.push_str(&format!("{i},{},{}\n", fmt_sig(*r, 6), fmt_sig(*n, 6)));
    }
    out
}

/// Runs every selected optimizer, writes `result.json`, `summary.csv`, and
/// `curve.csv` into the output directory, and returns the summary rows in
/// the written (reward-descending) order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<SummaryRow>, CliError> {
    config.validate()?;
    let task = config.task_spec();
    let mut results: BTreeMap<String, TuneResult> = BTreeMap::new();
    let mut rows = Vec::new();
    for &algorithm in &config.optimizers {
        let settings = config.settings_for(algorithm);
        let result = tune(&settings, &task, config.seed)
            .map_err(|e| CliError::Runtime(format!("{} tuning failed: {e}", algorithm.name())))?;
        rows.push(SummaryRow::from_result(algorithm.name(), &result));
        results.insert(algorithm.name().to_string(), result);
    }
    // Reward-descending order, as in the benchmark tables. Stable sort keeps
    // the algorithm order on exact ties.
    rows.sort_by(|a, b| b.reward.partial_cmp(&a.reward).expect("rewards are finite"));

    fs::create_dir_all(&config.out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", config.out.display())))?;
    let json = if config.optimizers.len() == 1 {
        let only = results.values().next().expect("one result");
        serde_json::to_string_pretty(only)
    } else {
        serde_json::to_string_pretty(&results)
    }
    .map_err(|e| CliError::Runtime(format!("cannot serialize results: {e}")))?;
    write_artifact(&config.out, "result.json", &json)?;
    write_artifact(&config.out, "summary.csv", &summary_csv(&rows))?;
    let top_curve = &results[&rows[0].method].reward_curve;
    write_artifact(&config.out, "curve.csv", &curve_csv(top_curve))?;
    Ok(rows)
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

/// Trains once with a fixed pair and reports the greedy-policy reward over
/// 100 evaluation episodes alongside the training summary.
pub fn eval_pair(
    task: &TaskSpec,
    alpha: f64,
    gamma: f64,
    episodes: usize,
    seed: u64,
) -> Result<EvalOutcome, CliError> {
    let hp = Hyperparams::new(alpha, gamma).map_err(|e| CliError::Config(e.to_string()))?;
    if episodes < 4 {
        return Err(CliError::Config("episodes must be >= 4".into()));
    }
    let mut env = task
        .build_env()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut rng = stream(seed, &[0x45]);
    let (traces, q) =
        qlearn::train_with_table(env.as_mut(), hp, episodes, EpsilonSchedule::default(), &mut rng)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    let window = &traces[episodes - episodes / 4..];
    let mean_reward_last_quarter =
        window.iter().map(|t| t.total_reward).sum::<f64>() / window.len() as f64;
    let mut greedy_rng = stream(seed, &[0x46]);
    let greedy_reward = qlearn::evaluate_greedy(env.as_mut(), &q, 100, &mut greedy_rng)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(EvalOutcome { alpha, gamma, mean_reward_last_quarter, greedy_reward })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EvalOutcome {
    pub alpha: f64,
    pub gamma: f64,
    pub mean_reward_last_quarter: f64,
    pub greedy_reward: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_hand_values() {
        assert_eq!(normalize_curve(&[0.0, 5.0, 10.0]), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn normalize_constant_is_zeros() {
        assert_eq!(normalize_curve(&[3.0; 4]), vec![0.0; 4]);
    }

    #[test]
    fn normalize_idempotent_on_unit_range() {
        let data = vec![0.0, 0.25, 1.0];
        assert_eq!(normalize_curve(&data), data);
    }

    #[test]
    fn fmt_sig_six_digits() {
        assert_eq!(fmt_sig(0.123456789, 6), "0.123457");
        assert_eq!(fmt_sig(123.456789, 6), "123.457");
        assert_eq!(fmt_sig(0.5, 6), "0.500000");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(1234567.0, 6), "1234567");
    }

    #[test]
    fn config_parse_round_trip() {
        let cfg = FileConfig::parse(
            "task = cartpole\n# comment\noptimizer = pso\ng = 5\nseed = 42\nslippery = true\n",
        )
        .unwrap();
        assert_eq!(cfg.task, Some(Task::CartPole));
        assert_eq!(cfg.optimizer, Some(OptimizerChoice::One(Algorithm::Pso)));
        assert_eq!(cfg.g, Some(5));
        assert_eq!(cfg.seed, Some(42));
        assert_eq!(cfg.slippery, Some(true));
    }

    #[test]
    fn config_rejects_unknown_key() {
        let err = FileConfig::parse("tusk = frozenlake\n").unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("tusk"));
    }

    #[test]
    fn config_rejects_duplicates_and_junk() {
        assert!(FileConfig::parse("g = 1\ng = 2\n").is_err());
        assert!(FileConfig::parse("just some words\n").is_err());
        assert!(FileConfig::parse("g = banana\n").is_err());
    }

    #[test]
    fn seed_precedence() {
        assert_eq!(resolve_seed(Some(1), Some(2), Some("3")).unwrap(), 1);
        assert_eq!(resolve_seed(None, Some(2), Some("3")).unwrap(), 2);
        assert_eq!(resolve_seed(None, None, Some("3")).unwrap(), 3);
        assert_eq!(resolve_seed(None, None, None).unwrap(), 0);
        assert!(resolve_seed(None, None, Some("not a seed")).is_err());
    }

    #[test]
    fn summary_sorted_by_reward() {
        let config = ExperimentConfig {
            task: Task::FrozenLake,
            slippery: false,
            optimizers: vec![Algorithm::Fox, Algorithm::Random],
            g: 3,
            max_iter: 2,
            n_runs: 1,
            episodes: 40,
            eval_repeats: 1,
            seed: 11,
            out: std::env::temp_dir().join("qfox-cli-test-summary"),
        };
        let rows = run_experiment(&config).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].reward >= rows[1].reward);
        for name in ["result.json", "summary.csv", "curve.csv"] {
            assert!(config.out.join(name).exists(), "{name} missing");
        }
        fs::remove_dir_all(&config.out).ok();
    }

    #[test]
    fn invalid_config_detected_before_compute() {
        let config = ExperimentConfig {
            task: Task::FrozenLake,
            slippery: false,
            optimizers: vec![],
            g: 3,
            max_iter: 2,
            n_runs: 1,
            episodes: 40,
            eval_repeats: 1,
            seed: 11,
            out: PathBuf::from("."),
        };
        assert!(matches!(run_experiment(&config), Err(CliError::Config(_))));
    }
}
