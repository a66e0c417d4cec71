use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rh_interp::experiment::{
    cmd_compress, cmd_convergence, cmd_deriv_bound, cmd_interpolate, ExperimentConfig, Instance, RetractionChoice,
};
use rh_interp::verify::{cmd_verify, Geometry};
use rh_interp::{Result, Scheme};

#[derive(Parser)]
#[command(name = "rh-interp", version, about = "Hermite interpolation on Stiefel and fixed-rank manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pointwise errors at the first sampling step of --h-list.
    Interpolate(Common),
    /// Maximum errors and log-log slopes over the --h-list sweep.
    Convergence(Common),
    /// Derivative estimates of RH and RH with r1 = 0.
    DerivBound(Common),
    /// Full versus subsampled RH on a dense fixed-rank curve.
    Compress(Common),
    /// Geometry and interpolation property suite.
    Verify {
        #[arg(long, value_enum, default_value_t = GeometryArg::All)]
        geometry: GeometryArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceArg {
    Qfactor,
    Svd,
}

#[derive(Clone, Copy, ValueEnum)]
enum RetractionArg {
    Qfactor,
    Pfactor,
    Orthographic,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeometryArg {
    Stiefel,
    FixedRank,
    All,
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = InstanceArg::Qfactor)]
    instance: InstanceArg,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, value_enum)]
    retraction: Option<RetractionArg>,
    /// Comma-separated: rh, linear, hermite, rhstar<r1>.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<Scheme>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated sampling steps, descending.
    #[arg(long, value_delimiter = ',')]
    h_list: Option<Vec<f64>>,
    /// Sampling steps of the derivative-estimate sweep (deriv-bound).
    #[arg(long, value_delimiter = ',')]
    deriv_h_list: Option<Vec<f64>>,
    /// Evaluation points per segment.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    subsample: Option<usize>,
    /// Number of dense segments (compress).
    #[arg(long)]
    dense_segments: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(self) -> ExperimentConfig {
        let instance = match self.instance {
            InstanceArg::Qfactor => Instance::Qfactor,
            InstanceArg::Svd => Instance::Svd,
        };
        let mut c = ExperimentConfig::new(instance);
        c.seed = self.seed;
        c.out = self.out;
        if let Some(r) = self.retraction {
            c.retraction = match r {
                RetractionArg::Qfactor => RetractionChoice::Qfactor,
                RetractionArg::Pfactor => RetractionChoice::Pfactor,
                RetractionArg::Orthographic => RetractionChoice::Orthographic,
            };
        }
        macro_rules! set {
            ($($field:ident),*) => { $(if let Some(v) = self.$field { c.$field = v; })* };
        }
        set!(n, k, m, rank, schemes, h_list, deriv_h_list, grid, subsample, dense_segments);
        c
    }
}

fn run(command: Command) -> Result<bool> {
    match command {
        Command::Interpolate(args) => {
            for r in cmd_interpolate(&args.config())? {
                let p = r.rows.iter().map(|x| x.eps_p).fold(0.0, f64::max);
                let d = r.rows.iter().map(|x| x.eps_d).fold(0.0, f64::max);
                println!("{:<10} h {:.4e}  max eps_p {p:.3e}  max eps_d {d:.3e}", r.scheme.label(), r.h);
            }
        }
        Command::Convergence(args) => {
            for r in cmd_convergence(&args.config())? {
                println!("{:<10} slope_p {:.3}  slope_d {:.3}", r.scheme.label(), r.slope_p, r.slope_d);
                for row in &r.rows {
                    println!("  h {:.4e}  {:.3e}  {:.3e}", row.h, row.max_eps_p, row.max_eps_d);
                }
            }
        }
        Command::DerivBound(args) => {
            for r in cmd_deriv_bound(&args.config())? {
                println!(
                    "{:<10} error slope {:.3}  order-4 slope {:.3}  order-4 max/min {:.3}",
                    r.scheme.label(),
                    r.error_slope,
                    r.order4_slope,
                    r.order4_ratio
                );
            }
        }
        Command::Compress(args) => {
            let r = cmd_compress(&args.config())?;
            println!(
                "{} samples, every {}-th kept: max rel err full {:.3e}, subsampled {:.3e}, storage ratio {:.3}",
                r.samples, r.subsample, r.max_full, r.max_sub, r.storage_ratio
            );
        }
        Command::Verify { geometry } => {
            let geometry = match geometry {
                GeometryArg::Stiefel => Geometry::Stiefel,
                GeometryArg::FixedRank => Geometry::FixedRank,
                GeometryArg::All => Geometry::All,
            };
            let report = cmd_verify(geometry)?;
            for r in &report.results {
                println!("{r}");
            }
            if let Some(f) = report.first_failure() {
                eprintln!("verify failed: {}", f.name);
                return Ok(false);
            }
            println!("all {} properties passed", report.results.len());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
