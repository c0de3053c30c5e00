use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use surfgl::gl2d::FieldMode;
use surfgl_cli::config::{Init, RunConfig};
use surfgl_cli::output::{output_root, OutDir};
use surfgl_cli::{commands, Failure};

/// Surface superconductivity in corner domains: 1D effective model, 2D
/// Ginzburg-Landau minimization and asymptotic checks.
#[derive(Parser)]
#[command(name = "surfgl", version)]
struct Cli {
    /// TOML file with one section per command; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root; defaults to $SURFGL_OUT, then ./surfgl-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize the half-line effective functional jointly in (α, f).
    #[command(name = "solve-1d")]
    Solve1d(Solve1dArgs),
    /// The threshold Θ₀ and its shift α₀ at two resolutions.
    Theta0(GridArgs),
    /// Minimize the 2D functional for one ε.
    #[command(name = "solve-2d")]
    Solve2d(Solve2dArgs),
    /// Run the full pipeline over a decreasing ε list.
    Sweep(SweepArgs),
    /// Run the acceptance suite.
    Check(CheckArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    t_max: Option<f64>,
    /// Grid nodes.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct Solve1dArgs {
    #[arg(long)]
    b: Option<f64>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Args)]
struct LayerArgs {
    /// `square`, `L` or `rounded-square`.
    #[arg(long)]
    domain: Option<String>,
    #[arg(long)]
    b: Option<f64>,
    /// Cells along the longer side of the bounding box.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    c0: Option<f64>,
    #[arg(long)]
    c1: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// `frozen` or `alternating`.
    #[arg(long)]
    field_mode: Option<FieldMode>,
}

#[derive(Args)]
struct Solve2dArgs {
    #[command(flatten)]
    layer: LayerArgs,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    init: Option<Init>,
    /// Seed for `--init random`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    layer: LayerArgs,
    /// Strictly decreasing, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    resolution: Option<usize>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Failure::input(format!("--jobs: {e}")))?;
    }
    let root = output_root(cli.out.as_deref());
    let dir = |name: &str| OutDir::create(root.join(name));
    match cli.command {
        Command::Solve1d(a) => {
            let c = &mut cfg.solve_1d;
            set(&mut c.b, a.b);
            set(&mut c.t_max, a.grid.t_max);
            set(&mut c.n, a.grid.n);
            commands::solve_1d(c, &dir("solve-1d")?)
        }
        Command::Theta0(a) => {
            let c = &mut cfg.theta0;
            set(&mut c.t_max, a.t_max);
            set(&mut c.n, a.n);
            commands::theta0(c, &dir("theta0")?)
        }
        Command::Solve2d(a) => {
            let c = &mut cfg.solve_2d;
            let l = a.layer;
            set(&mut c.domain, l.domain);
            set(&mut c.b, l.b);
            set(&mut c.resolution, l.resolution);
            set(&mut c.c0, l.c0);
            set(&mut c.c1, l.c1);
            set(&mut c.tol, l.tol);
            set(&mut c.max_iter, l.max_iter);
            set(&mut c.field_mode, l.field_mode);
            set(&mut c.epsilon, a.eps);
            set(&mut c.init, a.init);
            set(&mut c.seed, a.seed);
            commands::solve_2d(c, &dir("solve-2d")?)
        }
        Command::Sweep(a) => {
            let c = &mut cfg.sweep;
            let l = a.layer;
            set(&mut c.domain, l.domain);
            set(&mut c.b, l.b);
            set(&mut c.resolution, l.resolution);
            set(&mut c.c0, l.c0);
            set(&mut c.c1, l.c1);
            set(&mut c.tol, l.tol);
            set(&mut c.max_iter, l.max_iter);
            set(&mut c.field_mode, l.field_mode);
            set(&mut c.epsilons, a.eps);
            commands::sweep(c, cli.jobs, &dir("sweep")?)
        }
        Command::Check(a) => {
            let c = &mut cfg.check;
            set(&mut c.resolution, a.resolution);
            commands::check(c, &dir("check")?).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
