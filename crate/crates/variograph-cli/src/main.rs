use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use variograph_cli::config::{ConfigOverrides, ExperimentConfig};
use variograph_cli::experiments;

/// Variogram and spectral experiments on spatial sensor graphs.
///
/// Every run writes a `config.txt` into the output directory that
/// reproduces it exactly; results are independent of the thread count.
#[derive(Parser)]
#[command(name = "variograph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a sensor graph and write a simulated Gaussian ensemble
    Simulate(RunArgs),
    /// Ensemble variogram statistics with the model curve for reference
    Variogram(RunArgs),
    /// Empirical power spectral density in the graph Fourier basis
    Psd(RunArgs),
    /// Local-vs-global stationarity scores per vertex and lag
    Diagnose(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Output directory (created if missing)
    #[arg(long, short)]
    out: PathBuf,

    /// Config file of key=value lines; explicit flags override it
    #[arg(long)]
    config: Option<PathBuf>,

    /// Number of sensors
    #[arg(long)]
    n: Option<usize>,

    /// Position sampling scheme: uniform | nonuniform
    #[arg(long)]
    scheme: Option<String>,

    /// Graph connectivity: full | knn:<k>
    #[arg(long)]
    connectivity: Option<String>,

    /// Gaussian edge-kernel width
    #[arg(long)]
    sigma: Option<f64>,

    /// Field model: exp:<sill>:<range>[:<nugget>] | linear:<sill>:<range>[:<nugget>] | nugget:<sill>
    #[arg(long)]
    model: Option<String>,

    /// Realizations per graph
    #[arg(long)]
    realizations: Option<usize>,

    /// Number of independently sampled graphs
    #[arg(long)]
    graphs: Option<usize>,

    /// Number of equal-width distance bins
    #[arg(long)]
    bins: Option<usize>,

    /// Vertex window: ones | ball:<radius> | gauss:<rho>
    #[arg(long)]
    window: Option<String>,

    /// Master seed
    #[arg(long)]
    seed: Option<u64>,

    /// Worker threads (0 = default pool); never changes the results
    #[arg(long)]
    threads: Option<usize>,

    /// Minimum pairs for a bin to count toward summary error metrics
    #[arg(long)]
    min_pairs: Option<usize>,

    /// Emit spectra in decibels
    #[arg(long)]
    db: bool,

    /// Spectral runs use unit white noise instead of the field model
    #[arg(long)]
    iid: bool,
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                ExperimentConfig::parse(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        base.with_overrides(&ConfigOverrides {
            vertices: self.n,
            scheme: self.scheme.clone(),
            connectivity: self.connectivity.clone(),
            kernel_width: self.sigma,
            model: self.model.clone(),
            realizations: self.realizations,
            graphs: self.graphs,
            bins: self.bins,
            window: self.window.clone(),
            seed: self.seed,
            threads: self.threads,
            min_pairs: self.min_pairs,
            decibels: self.db,
            iid: self.iid,
        })
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&ExperimentConfig, &Path) -> Result<()>) = match &cli.command {
        Command::Simulate(a) => (a, experiments::run_simulate),
        Command::Variogram(a) => (a, experiments::run_variogram),
        Command::Psd(a) => (a, experiments::run_psd),
        Command::Diagnose(a) => (a, experiments::run_diagnose),
    };
    let cfg = args.resolve()?;
    let out = args.out.clone();
    experiments::with_threads(cfg.threads, move || run(&cfg, &out))??;
    println!("wrote {}", args.out.display());
    Ok(())
}
