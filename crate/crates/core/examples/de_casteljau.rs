//! Endpoint retraction curves and the cubic de Casteljau construction on St(6, 2).

use rh_interp::linalg::rng_from_seed;
use rh_interp::manifold::{decasteljau_variant, endpoint_symmetry_check, fd_velocity};
use rh_interp::{decasteljau, endpoint_curve, Manifold, Result, Stiefel, StiefelRetraction};

fn main() -> Result<()> {
    let st = Stiefel::new(6, 2, StiefelRetraction::QFactor);
    let mut rng = rng_from_seed(7);
    let x = st.random_point(&mut rng);
    let near = |rng: &mut _| -> Result<_> {
        let v = st.random_tangent(&x, rng);
        st.retract(&st.tangent_scale(0.1 / st.tangent_norm(&v), &v))
    };
    let (b0, b1, b2, b3) = (near(&mut rng)?, near(&mut rng)?, near(&mut rng)?, near(&mut rng)?);

    println!("r-endpoint curves between b0 and b3, t = 0.4:");
    for r in [0.0, 0.25, 0.5, 1.0] {
        let p = endpoint_curve(&st, r, 0.4, &b0, &b3)?;
        println!("  r = {r:<4}  d(c_r, b0) = {:.6}", st.ambient_distance(&p, &b0));
    }
    println!("c_0(t; x, y) vs c_1(1 - t; y, x): {:.1e}", endpoint_symmetry_check(&st, &b0, &b3, 0.3)?);

    let curve = |t: f64| decasteljau(&st, t, &b0, &b1, &b2, &b3);
    let start = fd_velocity(&st, curve, 0.0, 1e-6)?;
    let expected = st.tangent_scale(3.0, &st.inv_retract(&b0, &b1)?);
    println!("slope at 0 vs 3 inv(b0, b1): {:.2e}", st.tangent_distance(&start, &expected));

    let mut gap = 0.0_f64;
    for j in 0..=20 {
        let t = j as f64 / 20.0;
        let a = curve(t)?;
        let b = decasteljau_variant(&st, t, &b0, &b1, &b2, &b3, 0.0)?;
        gap = gap.max(st.ambient_distance(&a, &b));
    }
    println!("max gap between r1 = 1/2 and r1 = 0: {gap:.3e}");
    Ok(())
}
