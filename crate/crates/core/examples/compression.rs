//! Keeps one sample in twenty of a dense low-rank curve and compares the
//! interpolation error with that of the full sample set.

use rh_interp::experiment::{cmd_compress, ExperimentConfig, Instance};
use rh_interp::Result;

fn main() -> Result<()> {
    let mut config = ExperimentConfig::new(Instance::Svd);
    config.m = 150;
    config.n = 80;
    config.rank = 6;
    config.grid = 10;
    let r = cmd_compress(&config)?;
    println!("dense samples: {}, kept every {}-th", r.samples, r.subsample);
    println!("max relative error, all samples:  {:.3e}", r.max_full);
    println!("max relative error, subsampled:   {:.3e}", r.max_sub);
    println!("storage ratio: {:.3}", r.storage_ratio);
    Ok(())
}
