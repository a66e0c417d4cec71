//! Fourth-derivative estimates of RH and of the variant with r1 = 0 as the
//! sampling step shrinks.

use rh_interp::experiment::{cmd_deriv_bound, ExperimentConfig, Instance};
use rh_interp::Result;

fn main() -> Result<()> {
    let mut config = ExperimentConfig::new(Instance::Qfactor);
    config.n = 30;
    config.k = 4;
    config.grid = 16;
    for r in cmd_deriv_bound(&config)? {
        println!(
            "{}: error slope {:.2}, order-4 slope {:.2}, order-4 max/min {:.2}",
            r.scheme.label(),
            r.error_slope,
            r.order4_slope,
            r.order4_ratio
        );
        for row in r.rows.iter().filter(|x| x.order == 4) {
            println!("  h = {:.4e}   {:.3}", row.h, row.estimate);
        }
    }
    Ok(())
}
