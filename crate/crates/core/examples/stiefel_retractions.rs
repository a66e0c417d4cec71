//! Q-factor and polar retractions on St(8, 3) and their inverses.

use rh_interp::linalg::rng_from_seed;
use rh_interp::{Manifold, Result, Stiefel, StiefelRetraction};

fn main() -> Result<()> {
    let mut rng = rng_from_seed(1);
    for retraction in [StiefelRetraction::QFactor, StiefelRetraction::PFactor] {
        let st = Stiefel::new(8, 3, retraction);
        let x = st.random_point(&mut rng);
        let v = st.random_tangent(&x, &mut rng);
        let v = st.tangent_scale(0.1 / st.tangent_norm(&v), &v);

        let y = st.retract(&v)?;
        let back = st.inv_retract(&x, &y)?;
        st.check_point(&y, 1e-12)?;
        println!(
            "{retraction:?}: |v| = {:.3}, d(x, R_x(v)) = {:.6}, |inv(x, R_x(v)) - v| = {:.2e}",
            st.tangent_norm(&v),
            st.ambient_distance(&x, &y),
            st.tangent_distance(&back, &v)
        );
    }

    // Far-apart points fall outside the domain of the inverse.
    let st = Stiefel::new(4, 2, StiefelRetraction::QFactor);
    let x = rh_interp::stiefel::random_point(4, 2, 5);
    let minus_x = st.point(-x.matrix())?;
    match st.inv_retract(&x, &minus_x) {
        Ok(_) => println!("antipodal pair unexpectedly invertible"),
        Err(e) => println!("antipodal pair: {e}"),
    }
    Ok(())
}
