use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mhc_cli::bench::{self, BenchConfig};
use mhc_cli::commands::{self, CutArgs, FitArgs};
use mhc_cli::{CliError, Result};
use mhc_core::{NnBackend, SyntheticSpec};

/// Parameter-free multi-view hierarchical clustering.
#[derive(Parser)]
#[command(name = "mhc", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the full hierarchy and write it as JSON.
    Fit {
        /// One delimited file per view, samples as rows.
        #[arg(long, num_args = 1.., required = true)]
        views: Vec<PathBuf>,
        /// Skip the first line of every view file.
        #[arg(long)]
        header: bool,
        #[arg(long, default_value = "tree")]
        nn_backend: NnBackend,
        #[arg(long)]
        out: PathBuf,
        /// Also write the dense integrated distance matrix (small n only).
        #[arg(long)]
        dump_distances: Option<PathBuf>,
    },
    /// Produce exactly k clusters from a fitted hierarchy.
    Cut {
        #[arg(long)]
        hierarchy: PathBuf,
        #[arg(long, num_args = 1.., required = true)]
        views: Vec<PathBuf>,
        #[arg(long)]
        header: bool,
        #[arg(short = 'k')]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predicted labels against ground truth (ACC, NMI, F-measure).
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Generate a synthetic multi-view blob dataset.
    Synth {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        views: usize,
        #[arg(long)]
        clusters: usize,
        /// Per-view dimensionality; one value applies to every view.
        #[arg(long, value_delimiter = ',', default_value = "16")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out_prefix: String,
    },
    /// Time fits on growing synthetic datasets and report the log-log slope.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000")]
        sizes: Vec<usize>,
        #[arg(long, default_value = "tree")]
        nn_backend: NnBackend,
        #[arg(long, default_value_t = 2)]
        views: usize,
        #[arg(long, value_delimiter = ',', default_value = "16")]
        dims: Vec<usize>,
        /// Samples per true cluster in the generated data.
        #[arg(long, default_value_t = 1000)]
        cluster_size: usize,
        #[arg(long, default_value_t = 1.0)]
        separation: f64,
        #[arg(long, default_value_t = 0.05)]
        noise: f64,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit {
            views,
            header,
            nn_backend,
            out,
            dump_distances,
        } => {
            let doc = commands::fit(&FitArgs {
                views,
                header,
                backend: nn_backend,
                out,
                dump_distances,
            })?;
            println!("{}", commands::levels_line(&doc.level_sizes));
        }
        Command::Cut {
            hierarchy,
            views,
            header,
            k,
            out,
        } => {
            let labels = commands::cut(&CutArgs {
                hierarchy,
                views,
                header,
                k,
                out,
            })?;
            println!("clusters: {}", labels.num_clusters());
        }
        Command::Eval { pred, truth, json } => {
            let output = commands::eval(&pred, &truth)?;
            if json {
                println!("{}", serde_json::to_string(&output).expect("report serializes"));
            } else {
                println!("{}", commands::report_line(&output.report));
            }
        }
        Command::Synth {
            n,
            views,
            clusters,
            dims,
            separation,
            noise,
            seed,
            out_prefix,
        } => {
            let spec = SyntheticSpec {
                n,
                clusters,
                dims: commands::expand_dims(&dims, views)?,
                separation,
                noise,
                seed,
            };
            for path in commands::synth(&spec, &out_prefix)? {
                println!("{}", path.display());
            }
        }
        Command::Bench {
            sizes,
            nn_backend,
            views,
            dims,
            cluster_size,
            separation,
            noise,
            repeats,
            seed,
        } => {
            if sizes.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::Validation("--sizes must be strictly ascending".into()));
            }
            let config = BenchConfig {
                sizes,
                backend: nn_backend,
                dims: commands::expand_dims(&dims, views)?,
                cluster_size,
                separation,
                noise,
                repeats,
                seed,
            };
            print!("{}", bench::run(&config)?.table());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("MHC_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(0);
    match mhc_core::par::with_threads(threads, || run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mhc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
