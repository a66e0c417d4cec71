//! Orthographic retraction on rank-4 matrices of size 60x40, in factored form.

use rh_interp::linalg::{random_gaussian, rng_from_seed};
use rh_interp::{FixedRank, Manifold, Result};

fn main() -> Result<()> {
    let mut rng = rng_from_seed(3);
    let mr = FixedRank::new(60, 40, 4);

    // Best rank-4 approximation of a dense matrix.
    let a = random_gaussian(60, 40, &mut rng);
    let x = mr.truncate_dense(&a)?;
    let sv: Vec<String> = x.s().diagonal().iter().map(|s| format!("{s:.3}")).collect();
    println!("singular values of x: {}", sv.join(" "));

    let w = mr.random_tangent(&x, &mut rng);
    let w = mr.tangent_scale(0.3 * mr.ambient_norm(&x) / mr.tangent_norm(&w), &w);
    let y = mr.retract(&w)?;
    let back = mr.inv_retract(&x, &y)?;
    println!("d(x, y) = {:.4e}", mr.ambient_distance(&x, &y));
    println!("|inv(x, y) - w| = {:.2e}", mr.tangent_distance(&back, &w));

    // The factored result agrees with the dense projection formula.
    let z = mr.to_ambient(&x) + mr.tangent_to_ambient(&w);
    let core = (x.u().transpose() * &z * x.v()).try_inverse().expect("invertible core");
    let dense = &z * x.v() * core * x.u().transpose() * &z;
    println!("factored vs dense: {:.2e}", (mr.to_ambient(&y) - dense).norm());
    Ok(())
}
