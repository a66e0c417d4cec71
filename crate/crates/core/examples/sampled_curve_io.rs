//! Writes a sampled fixed-rank curve to disk, reads it back and interpolates it.

use rh_interp::io::{load_sampled_curve, save_sampled_curve};
use rh_interp::{svd_instance, uniform_times, sample_curve, Interpolant, ManifoldCurve, Manifold, Result, Scheme};

fn main() -> Result<()> {
    let mut curve = svd_instance(40, 30, 3, 2, (-0.5, 0.5))?;
    let sampled = sample_curve(&mut curve, &uniform_times(-0.5, 0.5, 8), 1e-5)?;
    let mr = *curve.manifold();

    let dir = std::env::temp_dir().join("rh-interp-sampled-curve");
    save_sampled_curve(&mr, &sampled, &dir)?;
    let loaded = load_sampled_curve(&mr, &dir)?;
    println!("wrote and read {} samples in {}", loaded.samples.len(), dir.display());

    let interp = Interpolant::new(mr, loaded.samples, Scheme::Rh)?;
    let t = 0.21;
    println!("error at t = {t}: {:.3e}", mr.ambient_distance(&interp.eval(t)?, &curve.eval(t)?));
    Ok(())
}
