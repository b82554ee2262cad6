use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use netmh::error::{Error, Result};
use netmh_cli::config::PipelineConfig;
use netmh_cli::pipeline::{export_features, run_ingest, run_pipeline, Task};
use netmh_cli::synth::{generate_synthetic, write_synthetic, SyntheticParams};

#[derive(Parser)]
#[command(name = "netmh", version, about = "Network-position analyses of weekly interaction logs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides applied after the file, e.g. `--set cluster_k=3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(p) => PipelineConfig::load(p).map_err(|e| match e {
                Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
                e => e,
            })?,
            None => PipelineConfig::default(),
        };
        for kv in &self.overrides {
            cfg.apply_override(kv)?;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Directory for events.csv and labels.csv.
    #[arg(short, long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = SyntheticParams::default().n_nodes)]
    n_nodes: usize,
    #[arg(long, default_value_t = SyntheticParams::default().n_weeks)]
    n_weeks: usize,
    #[arg(long, default_value_t = SyntheticParams::default().base_edge_prob)]
    base_edge_prob: f64,
    #[arg(long, default_value_t = SyntheticParams::default().positive_fraction)]
    positive_fraction: f64,
    #[arg(long, default_value_t = SyntheticParams::default().labeled_fraction)]
    labeled_fraction: f64,
    #[arg(long, default_value_t = SyntheticParams::default().centrality_multiplier)]
    centrality_multiplier: f64,
    #[arg(long, default_value_t = SyntheticParams::default().volatility_multiplier)]
    volatility_multiplier: f64,
    #[arg(long, default_value_t = SyntheticParams::default().modulation_sd)]
    modulation_sd: f64,
    #[arg(long, default_value_t = SyntheticParams::default().extra_events)]
    extra_events: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic events/labels pair with a planted trait effect.
    Synth(SynthArgs),
    /// Load and validate the inputs; write ingest_summary.json.
    Ingest(ConfigArgs),
    /// Export one feature family (or `all`) as CSV over the node universe.
    Features {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(short, long)]
        kind: String,
    },
    /// Group differences in centrality magnitude and fluctuation.
    Task1(ConfigArgs),
    /// Centrality-based clustering and label enrichment.
    Task2(ConfigArgs),
    /// Cross-validated trait prediction from each feature family.
    Task3(ConfigArgs),
    /// All three tasks.
    All(ConfigArgs),
}

fn run(cli: Cli) -> Result<()> {
    let tasks = |cfg: &ConfigArgs, tasks: &[Task]| -> Result<()> {
        for p in run_pipeline(&cfg.resolve()?, tasks)? {
            println!("{}", p.display());
        }
        Ok(())
    };
    match cli.command {
        Command::Synth(a) => {
            let p = SyntheticParams {
                n_nodes: a.n_nodes,
                n_weeks: a.n_weeks,
                base_edge_prob: a.base_edge_prob,
                positive_fraction: a.positive_fraction,
                labeled_fraction: a.labeled_fraction,
                centrality_multiplier: a.centrality_multiplier,
                volatility_multiplier: a.volatility_multiplier,
                modulation_sd: a.modulation_sd,
                extra_events: a.extra_events,
                seed: a.seed,
            };
            let data = generate_synthetic(&p)?;
            let (events, labels) = write_synthetic(&data, &a.out)?;
            println!("{}\n{}", events.display(), labels.display());
            Ok(())
        }
        Command::Ingest(c) => {
            let (summary, _) = run_ingest(&c.resolve()?)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(())
        }
        Command::Features { config, kind } => {
            for p in export_features(&config.resolve()?, &kind)? {
                println!("{}", p.display());
            }
            Ok(())
        }
        Command::Task1(c) => tasks(&c, &[Task::Task1]),
        Command::Task2(c) => tasks(&c, &[Task::Task2]),
        Command::Task3(c) => tasks(&c, &[Task::Task3]),
        Command::All(c) => tasks(&c, &Task::ALL),
    }
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("NETMH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("NETMH_THREADS = {raw:?}: expected a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match init_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}
