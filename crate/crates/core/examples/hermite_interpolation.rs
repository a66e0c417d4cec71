//! Interpolates a Q-factor curve on St(100, 5) from 11 samples and compares
//! the RH scheme with the linear and naive Hermite schemes.

use rh_interp::curves::uniform_times;
use rh_interp::{qfactor_instance, sample_curve, Interpolant, ManifoldCurve, Manifold, Result, Scheme, StiefelRetraction};

fn main() -> Result<()> {
    let mut curve = qfactor_instance(100, 5, 0, (-1.1, 1.1), StiefelRetraction::QFactor)?;
    let sampled = sample_curve(&mut curve, &uniform_times(-1.1, 1.1, 10), 1e-5)?;
    let st = *curve.manifold();

    for scheme in [Scheme::Rh, Scheme::Linear, Scheme::NaiveHermite] {
        let interp = Interpolant::new(st, sampled.samples.clone(), scheme)?;
        let (mut node_d, mut mid_p) = (0.0_f64, 0.0_f64);
        for s in &sampled.samples[1..sampled.samples.len() - 1] {
            let d = interp.eval_derivative(s.t, 1e-5)?;
            node_d = node_d.max(st.tangent_distance(&d, &s.velocity));
        }
        for w in sampled.samples.windows(2) {
            let t = 0.5 * (w[0].t + w[1].t);
            mid_p = mid_p.max(st.ambient_distance(&interp.eval(t)?, &curve.eval(t)?));
        }
        println!(
            "{:<8} max derivative mismatch at nodes {node_d:.2e}   max error at midpoints {mid_p:.2e}",
            scheme.label()
        );
    }

    let rh = Interpolant::new(st, sampled.samples, Scheme::Rh)?;
    let (_, counters) = rh.eval_counted(0.123)?;
    println!(
        "one online evaluation: {} retractions, {} inverse retractions",
        counters.retractions, counters.inverse_retractions
    );
    Ok(())
}
