//! Convergence of RH on either instance. Usage:
//! `cargo run --release --example convergence_study -- [qfactor|svd] [out-dir]`

use rh_interp::experiment::{cmd_convergence, ExperimentConfig, Instance};
use rh_interp::{Result, Scheme};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let instance: Instance = args.next().as_deref().unwrap_or("qfactor").parse()?;
    let mut config = ExperimentConfig::new(instance);
    config.schemes = vec![Scheme::Rh];
    config.grid = 16;
    if instance == Instance::Qfactor {
        config.n = 30;
        config.k = 4;
    } else {
        config.m = 80;
        config.n = 60;
        config.rank = 5;
    }
    config.out = args.next().map(Into::into);
    for r in cmd_convergence(&config)? {
        println!("{}: slope {:.2} (points), {:.2} (derivatives)", r.scheme.label(), r.slope_p, r.slope_d);
        for row in &r.rows {
            println!("  h = {:.4e}   {:.3e}   {:.3e}", row.h, row.max_eps_p, row.max_eps_d);
        }
    }
    Ok(())
}
