use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use haarapprox::experiment::{self, BoundsParams, ExperimentConfig, ExperimentKind, OutputFormat};
use haarapprox::Error;

/// Monte Carlo experiments on the normal approximation of Haar orthogonal matrices.
#[derive(Parser)]
#[command(name = "haarapprox", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Variation distance E|K_n L_n - 1| between a scaled Haar block and a Gaussian block.
    Vardist(Common),
    /// Sample of log(K_n L_n) against its lognormal limit.
    Lognormal(Common),
    /// Coupling error eps_n(m) at the column thresholds set by --alpha.
    EpsTransition(Common),
    /// Law of the (1,1) entry and of the first row of a Haar matrix.
    Borel(Common),
    /// Analytic inequalities and simulated tail frequencies against their bounds.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        bounds: BoundsArgs,
    },
    /// Wishart trace moments tr((X'X)^k).
    Moments(Common),
}

#[derive(Args)]
struct Common {
    /// Ambient dimension; repeat or separate by commas for a grid.
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Block rows.
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,
    /// Block columns (defaults to --p).
    #[arg(long, value_delimiter = ',')]
    q: Vec<usize>,
    /// Row scaling, p = floor(x sqrt(n)); for bounds, the deviation grid.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
    /// Column scaling, q = floor(y sqrt(n)) (defaults to --x).
    #[arg(long, value_delimiter = ',')]
    y: Vec<f64>,
    /// Column-count parameter of the eps transition.
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Partial-sum length for bounds, one per --n.
    #[arg(long, value_delimiter = ',')]
    m: Vec<usize>,
    /// Highest trace power for moments.
    #[arg(long, default_value_t = 3)]
    k_max: u32,
    /// Replicates per grid cell.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
}

#[derive(Args)]
struct BoundsArgs {
    /// Gamma-ratio sandwich is checked for n = 1..=gamma-max.
    #[arg(long, default_value_t = 1000)]
    gamma_max: u64,
    /// Coupling bound: dimension.
    #[arg(long, default_value_t = 10_000)]
    coupling_n: usize,
    /// Coupling bound: column count.
    #[arg(long, default_value_t = 100)]
    coupling_m: usize,
    #[arg(long, default_value_t = 0.2)]
    r: f64,
    #[arg(long, default_value_t = 6.0)]
    s: f64,
    #[arg(long, default_value_t = 3.0)]
    t: f64,
    /// Coupling replicates; 0 evaluates the bound only.
    #[arg(long, default_value_t = 0)]
    coupling_reps: usize,
}

fn config(kind: ExperimentKind, c: Common, bounds: BoundsParams) -> ExperimentConfig {
    let workers = c
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    ExperimentConfig {
        kind,
        n: c.n,
        p: c.p,
        q: c.q,
        x: c.x,
        y: c.y,
        alpha: c.alpha,
        m: c.m,
        k_max: c.k_max,
        reps: c.reps,
        master_seed: c.seed,
        workers,
        out: c.out,
        format: c.format,
        bounds,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match cli.command {
        Command::Vardist(c) => config(ExperimentKind::Vardist, c, BoundsParams::default()),
        Command::Lognormal(c) => config(ExperimentKind::Lognormal, c, BoundsParams::default()),
        Command::EpsTransition(c) => config(ExperimentKind::EpsTransition, c, BoundsParams::default()),
        Command::Borel(c) => config(ExperimentKind::Borel, c, BoundsParams::default()),
        Command::Moments(c) => config(ExperimentKind::Moments, c, BoundsParams::default()),
        Command::Bounds { common, bounds: b } => {
            let params = BoundsParams {
                gamma_max: b.gamma_max,
                coupling_n: b.coupling_n,
                coupling_m: b.coupling_m,
                r: b.r,
                s: b.s,
                t: b.t,
                coupling_reps: b.coupling_reps,
                ..BoundsParams::default()
            };
            config(ExperimentKind::Bounds, common, params)
        }
    };
    let result = experiment::run(&cfg).and_then(|run| experiment::emit(&run, cfg.format, cfg.out.as_deref()));
    match result {
        Ok(paths) => {
            for p in paths {
                eprintln!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::Io { .. } | Error::Serialize { .. } => 3,
                _ => 1,
            })
        }
    }
}
