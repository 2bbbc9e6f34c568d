use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use moltop::datasets::Ingestion;
use moltop::expressivity::FingerprintMode;
use moltop::metrics::Metric;
use moltop::pipeline::{self, parse_seeds, Ablation, PipelineError, RunConfig};

#[derive(Parser)]
#[command(name = "moltop", version, about = "Molecular topological profile features and random forest baseline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the featurizer on the training split and write feature matrices.
    Featurize(RunArgs),
    /// Train one forest per seed and report valid/test scores.
    Evaluate(RunArgs),
    /// Time featurization and training.
    Benchmark(RunArgs),
    /// Count graph pairs with identical topological fingerprints.
    Expressivity(ExpressivityArgs),
    /// Aggregate forest importances per feature group.
    Importance(ImportanceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Auroc,
    Ap,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Histogram,
    Exact,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// CSV file with a SMILES column and binary task columns.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "smiles")]
    smiles_col: String,
    /// Comma-separated task columns (default: every other column).
    #[arg(long, value_delimiter = ',')]
    tasks: Vec<String>,
    /// Directory with train/valid/test index files.
    #[arg(long)]
    split_dir: PathBuf,
    /// Seeds: "7", "0,3,5" or "0..10".
    #[arg(long, default_value = "0..10")]
    seeds: String,
    /// Fixed number of histogram bins instead of the median molecule size.
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long, value_enum, default_value = "auroc")]
    metric: MetricArg,
    /// Feature family or refinement to disable (repeatable).
    #[arg(long)]
    ablate: Vec<String>,
    /// Number of trees (default 1000, or 100 with --ablate untuned-forest).
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Abort on unparseable SMILES (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip unparseable SMILES and list them in skipped.json.
    #[arg(long)]
    lenient: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let mut cfg = RunConfig::new(&self.dataset, &self.split_dir, &self.out);
        cfg.smiles_col = self.smiles_col.clone();
        cfg.tasks = self.tasks.clone();
        cfg.seeds = parse_seeds(&self.seeds)?;
        cfg.bins = self.bins;
        cfg.metric = match self.metric {
            MetricArg::Auroc => Metric::Auroc,
            MetricArg::Ap => Metric::Ap,
        };
        cfg.ablations = self.ablate.iter().map(|a| a.parse::<Ablation>()).collect::<Result<_, _>>()?;
        cfg.trees = self.trees;
        cfg.workers = self.workers;
        cfg.ingestion = if self.lenient { Ingestion::Lenient } else { Ingestion::Strict };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct ExpressivityArgs {
    /// graph6 file, one graph per line.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Bins in histogram mode (default: size of the first graph).
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct ImportanceArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Further datasets, each as CSV:SPLIT_DIR, averaged together with the first.
    #[arg(long)]
    also: Vec<String>,
}

fn run(cli: Cli) -> Result<String, PipelineError> {
    match cli.command {
        Command::Featurize(a) => Ok(json(&pipeline::cmd_featurize(&a.config()?)?)),
        Command::Evaluate(a) => {
            let r = pipeline::cmd_evaluate(&a.config()?)?;
            Ok(format!(
                "{} valid {:.4} ± {:.4}, test {:.4} ± {:.4} over {} seeds",
                r.metric.name(),
                r.valid_mean,
                r.valid_std,
                r.test_mean,
                r.test_std,
                r.seeds.len()
            ))
        }
        Command::Benchmark(a) => Ok(json(&pipeline::cmd_benchmark(&a.config()?)?)),
        Command::Expressivity(a) => {
            let mode = match a.mode {
                ModeArg::Exact => FingerprintMode::Exact,
                ModeArg::Histogram => {
                    let n_bins = match a.bins {
                        Some(b) => b,
                        None => moltop::datasets::load_graph6(&a.dataset)?
                            .first()
                            .map_or(1, |g| g.node_count()),
                    };
                    FingerprintMode::Histogram { n_bins }
                }
            };
            Ok(json(&pipeline::cmd_expressivity(&a.dataset, mode, a.workers, &a.out)?))
        }
        Command::Importance(a) => {
            let base = a.run.config()?;
            let mut cfgs = vec![base.clone()];
            for spec in &a.also {
                let (csv, split) = spec
                    .split_once(':')
                    .ok_or_else(|| PipelineError::Config(format!("expected CSV:SPLIT_DIR, got {spec:?}")))?;
                let mut c = base.clone();
                c.dataset = csv.into();
                c.split_dir = split.into();
                cfgs.push(c);
            }
            Ok(json(&pipeline::cmd_importance(&cfgs)?))
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serialization cannot fail")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
