//! Command-line driver: simulate streams, mine synchronous patterns,
//! compute analytic thresholds, run the all-occurrence baseline, and
//! benchmark the two methods against each other.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use synmine::baseline::{
    enumerate_patterns, SurrogateConfig, SurrogatePool, DEFAULT_WINDOW_CAP,
};
use synmine::bench::{self, BenchConfig, Method, SweepParameter};
use synmine::counting::SpanPolicy;
use synmine::error::Error;
use synmine::events::{split_trials, EventSequence};
use synmine::mining::{mine, FrequencyThreshold, MiningConfig};
use synmine::significance::{evaluate, RateSpec, SignificanceParams};
use synmine::simulate::{embed_truth, generate, SimConfig};

#[derive(Parser)]
#[command(
    name = "synmine",
    version,
    about = "Mine and validate synchronous firing patterns in event streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Tsv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Mine frequent synchronous episodes from a spike file.
    Mine(MineArgs),
    /// Print the analytic frequency threshold for given parameters.
    Threshold(ThresholdArgs),
    /// Generate a simulated spike file plus a ground-truth sidecar.
    Simulate(SimulateArgs),
    /// Run the all-occurrence baseline with surrogate significance.
    Baseline(BaselineArgs),
    /// Sweep a parameter and benchmark miner vs. baseline.
    Bench(BenchArgs),
}

#[derive(Args)]
struct MineArgs {
    /// Input spike file (`timestamp<TAB or comma>event_id` per line).
    input: PathBuf,
    /// Expiry span in ticks.
    #[arg(long)]
    expiry: u64,
    /// Seconds per tick.
    #[arg(long = "delta-t")]
    delta_t: f64,
    /// Fixed minimum count.
    #[arg(long, conflicts_with = "epsilon")]
    threshold: Option<u64>,
    /// Type-I error bound for the analytic threshold.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Null firing rate in Hz for the analytic threshold; estimated from the
    /// data when omitted.
    #[arg(long, requires = "epsilon")]
    rho: Option<f64>,
    /// Cap on episode size.
    #[arg(long = "max-level")]
    max_level: Option<usize>,
    /// Require occurrence spans strictly below the expiry.
    #[arg(long = "strict-span")]
    strict_span: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Data length in ticks.
    #[arg(long = "L")]
    length_ticks: u64,
    /// Expiry span in ticks.
    #[arg(long = "T")]
    expiry: u64,
    /// Episode size.
    #[arg(long = "n")]
    episode_size: usize,
    /// Firing rate in Hz (repeat for per-constituent rates).
    #[arg(long = "rho", required = true)]
    rho: Vec<f64>,
    #[arg(long = "delta-t")]
    delta_t: f64,
    #[arg(long)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation config (TOML).
    config: PathBuf,
    /// Output spike file; the ground truth goes to `<out>.truth.tsv`.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BaselineArgs {
    input: PathBuf,
    #[arg(long)]
    expiry: u64,
    #[arg(long = "delta-t")]
    delta_t: f64,
    /// Largest pattern size to enumerate.
    #[arg(long = "max-size", default_value = "3")]
    max_size: usize,
    #[arg(long, default_value = "0.05")]
    alpha: f64,
    #[arg(long, default_value = "25")]
    surrogates: usize,
    #[arg(long, default_value = "20")]
    trials: usize,
    /// Jitter half-window in ticks; defaults to twice the expiry.
    #[arg(long)]
    jitter: Option<u64>,
    #[arg(long, default_value = "1")]
    seed: u64,
    /// Also print non-significant patterns.
    #[arg(long)]
    all: bool,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    /// Which parameter the sweep varies.
    #[arg(long)]
    vary: String,
    /// Grid values, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Methods to run, comma-separated (`pe`, `baseline`).
    #[arg(long, value_delimiter = ',', default_value = "pe,baseline")]
    methods: Vec<String>,
    /// Runs per grid point for both methods (defaults: 100 pe, 20 baseline).
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value = "20")]
    neurons: u32,
    #[arg(long, default_value = "50000")]
    length: u64,
    #[arg(long, default_value = "5.0")]
    rate: f64,
    #[arg(long, default_value = "5")]
    expiry: u64,
    #[arg(long = "delta-t", default_value = "0.001")]
    delta_t: f64,
    #[arg(long, default_value = "0.05")]
    epsilon: f64,
    /// Embedded pattern sizes, comma-separated.
    #[arg(long = "embed-sizes", value_delimiter = ',', default_value = "3,5")]
    embed_sizes: Vec<usize>,
    /// Embedding instances per second.
    #[arg(long = "embed-rate", default_value = "3.0")]
    embed_rate: f64,
    #[arg(long = "embed-jitter", default_value = "2")]
    embed_jitter: u64,
    #[arg(long, default_value = "25")]
    surrogates: usize,
    #[arg(long, default_value = "20")]
    trials: usize,
    #[arg(long, default_value = "0.05")]
    alpha: f64,
    #[arg(long, default_value = "1")]
    seed: u64,
    #[arg(long, value_enum, default_value = "tsv")]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mine(args) => cmd_mine(args),
        Command::Threshold(args) => cmd_threshold(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Baseline(args) => cmd_baseline(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::ContractViolation(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

#[derive(Serialize)]
struct MineRow {
    episode: String,
    size: usize,
    count: u64,
    threshold: u64,
}

fn cmd_mine(args: MineArgs) -> synmine::Result<()> {
    let threshold = match (args.threshold, args.epsilon) {
        (Some(t), None) => FrequencyThreshold::Fixed(t),
        (None, Some(epsilon)) => FrequencyThreshold::Auto {
            epsilon,
            rate_hz: args.rho,
        },
        (None, None) => {
            return Err(Error::InvalidConfig(
                "give one of --threshold or --epsilon".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("clap enforces the conflict"),
    };
    let seq = EventSequence::from_path(&args.input, args.delta_t)?;
    let config = MiningConfig {
        expiry: args.expiry,
        threshold,
        max_level: args.max_level,
        span_policy: if args.strict_span {
            SpanPolicy::Strict
        } else {
            SpanPolicy::Inclusive
        },
    };
    let mut mined = mine(&seq, &config)?;
    mined.sort_by(|a, b| {
        b.episode
            .size()
            .cmp(&a.episode.size())
            .then(b.count.cmp(&a.count))
            .then(a.episode.cmp(&b.episode))
    });
    let rows: Vec<MineRow> = mined
        .iter()
        .map(|m| MineRow {
            episode: m.episode.to_string(),
            size: m.episode.size(),
            count: m.count,
            threshold: m.threshold,
        })
        .collect();
    match args.format {
        Format::Tsv => {
            println!("episode\tsize\tcount\tthreshold");
            for r in rows {
                println!("{}\t{}\t{}\t{}", r.episode, r.size, r.count, r.threshold);
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serializable")),
    }
    Ok(())
}

#[derive(Serialize)]
struct ThresholdRow {
    p: f64,
    #[serde(rename = "F")]
    expected: f64,
    #[serde(rename = "V")]
    variance: f64,
    k: u64,
    threshold: f64,
}

fn cmd_threshold(args: ThresholdArgs) -> synmine::Result<()> {
    let rates = if args.rho.len() == 1 {
        RateSpec::Shared(args.rho[0])
    } else {
        RateSpec::PerConstituent(args.rho.clone())
    };
    let result = evaluate(&SignificanceParams {
        length_ticks: args.length_ticks,
        expiry: args.expiry,
        episode_size: args.episode_size,
        rates,
        delta_t: args.delta_t,
        epsilon: args.epsilon,
    })?;
    let row = ThresholdRow {
        p: result.occurrence_prob,
        expected: result.expected_frequency,
        variance: result.variance,
        k: result.chebyshev_k,
        threshold: result.threshold,
    };
    match args.format {
        Format::Tsv => {
            println!("p\tF\tV\tk\tthreshold");
            println!(
                "{}\t{}\t{}\t{}\t{}",
                row.p, row.expected, row.variance, row.k, row.threshold
            );
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&row).expect("serializable")),
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> synmine::Result<()> {
    let mut config = SimConfig::from_path(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let seq = generate(&config)?;
    let truth = embed_truth(&config)?;

    let mut out = BufWriter::new(File::create(&args.out)?);
    seq.write_spike_file(&mut out)?;
    out.flush()?;

    let mut truth_path = args.out.clone().into_os_string();
    truth_path.push(".truth.tsv");
    let mut sidecar = BufWriter::new(File::create(&truth_path)?);
    writeln!(sidecar, "pattern_types\tanchor_tick")?;
    for (pattern, anchors) in &truth {
        for anchor in anchors {
            writeln!(sidecar, "{pattern}\t{anchor}")?;
        }
    }
    sidecar.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct BaselineRow {
    episode: String,
    size: usize,
    observed_mean: f64,
    quantile: f64,
    significant: bool,
}

fn cmd_baseline(args: BaselineArgs) -> synmine::Result<()> {
    let seq = EventSequence::from_path(&args.input, args.delta_t)?;
    let trials = split_trials(&seq, args.trials)?;
    let patterns = enumerate_patterns(&seq, args.expiry, args.max_size, DEFAULT_WINDOW_CAP)?;
    let pool = SurrogatePool::build(
        &trials,
        &SurrogateConfig {
            n_surrogates: args.surrogates,
            jitter: args.jitter.unwrap_or(2 * args.expiry),
            n_trials: args.trials,
            alpha: args.alpha,
            seed: args.seed,
        },
    )?;
    let mut rows: Vec<BaselineRow> = patterns
        .iter()
        .map(|p| {
            let outcome = pool.evaluate(p, args.expiry);
            BaselineRow {
                episode: p.to_string(),
                size: p.size(),
                observed_mean: outcome.observed_mean,
                quantile: outcome.quantile,
                significant: outcome.significant,
            }
        })
        .filter(|r| args.all || r.significant)
        .collect();
    rows.sort_by(|a, b| {
        b.size
            .cmp(&a.size)
            .then(b.observed_mean.total_cmp(&a.observed_mean))
            .then(a.episode.cmp(&b.episode))
    });
    match args.format {
        Format::Tsv => {
            println!("episode\tsize\tobserved_mean\tquantile\tsignificant");
            for r in rows {
                println!(
                    "{}\t{}\t{}\t{}\t{}",
                    r.episode, r.size, r.observed_mean, r.quantile, r.significant
                );
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows).expect("serializable")),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> synmine::Result<()> {
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<synmine::Result<Vec<_>>>()?;
    let defaults = BenchConfig::default();
    let config = BenchConfig {
        vary: args.vary.parse::<SweepParameter>()?,
        values: args.values,
        methods,
        neurons: args.neurons,
        length_ticks: args.length,
        rate_hz: args.rate,
        expiry: args.expiry,
        delta_t: args.delta_t,
        epsilon: args.epsilon,
        embed_sizes: args.embed_sizes,
        embed_rate_hz: args.embed_rate,
        embed_jitter: args.embed_jitter,
        pe_runs: args.runs.unwrap_or(defaults.pe_runs),
        baseline_runs: args.runs.unwrap_or(defaults.baseline_runs),
        max_pattern_size: None,
        surrogates: args.surrogates,
        trials: args.trials,
        alpha: args.alpha,
        seed: args.seed,
    };
    let report = bench::run(&config)?;
    match args.format {
        Format::Tsv => print!("{}", report.to_tsv()),
        Format::Json => {
            println!("{}", serde_json::to_string_pretty(&report.rows).expect("serializable"))
        }
    }
    Ok(())
}
