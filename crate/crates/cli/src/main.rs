use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use icc_cli::config::{merge, read_config_file, ConfigMap, Mode, RunConfig, THREADS_ENV};
use icc_cli::io::{save_matrix, InputFormat};
use icc_cli::pipeline::run_full;
use icc_cli::{CliError, Result};
use icc_core::synth::{gaussian_blobs, BlobSpec};

#[derive(Parser)]
#[command(name = "icc", version, about = "Iterative consensus clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of clusters from the consensus spectrum.
    EstimateK(RunArgs),
    /// Vote on a partition with a known number of clusters (--k).
    Cluster(RunArgs),
    /// Estimate the number of clusters unless --k is given, then vote.
    Run(RunArgs),
    /// Write a Gaussian blob fixture with its ground-truth labels.
    Synth(SynthArgs),
}

/// Every option can also be set in the --config file under the same name.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<String>,
    /// dense-csv, labeled-csv or matrix-market (default: by extension).
    #[arg(long)]
    format: Option<String>,
    /// Treat columns as objects.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    transpose: Option<String>,
    /// Comma-separated: kmeans, pddp, pddp-kmeans, nmf, pic, ncut, njw.
    #[arg(long)]
    algorithms: Option<String>,
    /// Comma-separated: svd, pca, nmf; or `none`.
    #[arg(long)]
    reductions: Option<String>,
    /// Comma-separated target ranks for every reduction.
    #[arg(long)]
    ranks: Option<String>,
    /// Also cluster the unreduced matrix.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    include_raw: Option<String>,
    /// Cluster counts for the estimation ensemble, e.g. `4..10` or `3,5,7`.
    #[arg(long)]
    k_values: Option<String>,
    /// Known number of clusters.
    #[arg(long)]
    k: Option<String>,
    /// Intolerance: pairs with fewer than tau·T votes are dropped.
    #[arg(long)]
    tau: Option<String>,
    /// Eigenvalues examined for the gap.
    #[arg(long)]
    m_max: Option<String>,
    #[arg(long)]
    max_rounds: Option<String>,
    #[arg(long)]
    max_refinements: Option<String>,
    #[arg(long)]
    kmeans_restarts: Option<String>,
    #[arg(long)]
    kmeans_max_iters: Option<String>,
    #[arg(long)]
    histogram_bins: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    output: Option<String>,
    /// Worker threads; defaults to $ICC_THREADS, then one per core.
    #[arg(long)]
    threads: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> ConfigMap {
        let pairs = [
            ("input", &self.input),
            ("format", &self.format),
            ("transpose", &self.transpose),
            ("algorithms", &self.algorithms),
            ("reductions", &self.reductions),
            ("ranks", &self.ranks),
            ("include-raw", &self.include_raw),
            ("k-values", &self.k_values),
            ("k", &self.k),
            ("tau", &self.tau),
            ("m-max", &self.m_max),
            ("max-rounds", &self.max_rounds),
            ("max-refinements", &self.max_refinements),
            ("kmeans-restarts", &self.kmeans_restarts),
            ("kmeans-max-iters", &self.kmeans_max_iters),
            ("histogram-bins", &self.histogram_bins),
            ("seed", &self.seed),
            ("output", &self.output),
            ("threads", &self.threads),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn resolve(&self, mode: Mode) -> Result<RunConfig> {
        let base = match &self.config {
            Some(path) => read_config_file(path)?,
            None => ConfigMap::new(),
        };
        let map = merge(base, self.overrides())?;
        let env = std::env::var(THREADS_ENV).ok();
        RunConfig::from_map(mode, &map, env.as_deref())
    }
}

#[derive(Args)]
struct SynthArgs {
    /// Number of clusters.
    #[arg(long, default_value_t = 3)]
    clusters: usize,
    #[arg(long, default_value_t = 100)]
    per_cluster: usize,
    /// Comma-separated cluster sizes; overrides --clusters and --per-cluster.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// Distance between every pair of centers.
    #[arg(long, default_value_t = 12.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "labeled-csv")]
    format: String,
    /// File to write.
    #[arg(long)]
    output: PathBuf,
}

fn synth(args: &SynthArgs) -> Result<u8> {
    let spec = BlobSpec {
        sizes: args
            .sizes
            .clone()
            .unwrap_or_else(|| vec![args.per_cluster; args.clusters]),
        dim: args.dim,
        separation: args.separation,
        seed: args.seed,
    };
    let format: InputFormat = args.format.parse()?;
    let (x, truth) = gaussian_blobs(&spec)?;
    if let Some(parent) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    save_matrix(&args.output, &x, format, Some(&truth))?;
    println!(
        "wrote {} ({} x {}, k = {})",
        args.output.display(),
        x.nrows(),
        x.ncols(),
        truth.k()
    );
    Ok(0)
}

fn run(args: &RunArgs, mode: Mode) -> Result<u8> {
    let config = args.resolve(mode)?;
    let a = run_full(&config)?;
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
    let k_estimate = a.k_estimate.map_or("-".to_string(), |k| k.to_string());
    let k = a.labels.as_ref().map_or("-".to_string(), |l| l.k().to_string());
    println!(
        "status={} k_estimate={k_estimate} k={k} output={}",
        a.status.id(),
        config.output.display()
    );
    Ok(a.status.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", CliError::Usage(e.to_string().trim().to_string()).record());
            return ExitCode::from(2);
        }
    };
    let outcome = match &cli.command {
        Command::EstimateK(a) => run(a, Mode::EstimateK),
        Command::Cluster(a) => run(a, Mode::Cluster),
        Command::Run(a) => run(a, Mode::Run),
        Command::Synth(a) => synth(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
