//! Manifold contract and the geometry-independent curve constructions.
//!
//! Everything here is written against [`Manifold`], a retraction/inverse
//! retraction pair on an embedded matrix manifold. The two building blocks
//! are the r-endpoint retraction curve
//!
//! ```text
//! c_r(t; x, y) = R_q((1 - t) R_q⁻¹(x) + t R_q⁻¹(y)),   q = R_x(r R_x⁻¹(y))
//! ```
//!
//! and the cubic de Casteljau recursion that chains six of them.

use std::fmt::Debug;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Rng};

/// A retraction pair on an embedded Riemannian submanifold of a matrix space.
///
/// Points and tangents are cheap to clone (reference-counted storage) and
/// safe to share between threads. Tangent vectors remember their base point;
/// combining tangents at different base points is a contract violation,
/// checked by debug assertions.
pub trait Manifold: Clone + Send + Sync + Debug {
    type Point: Clone + Send + Sync + Debug;
    type Tangent: Clone + Send + Sync + Debug;

    /// Manifold dimension.
    fn dim(&self) -> usize;

    /// Shape of the ambient matrix space.
    fn ambient_shape(&self) -> (usize, usize);

    /// `R_x(v)`. Must return `x` itself when `v` is exactly zero.
    fn retract(&self, v: &Self::Tangent) -> Result<Self::Point>;

    /// `R_x⁻¹(y)`, or [`Error::RetractionDomain`] when `y` is outside the
    /// invertibility domain around `x`.
    fn inv_retract(&self, x: &Self::Point, y: &Self::Point) -> Result<Self::Tangent>;

    fn base<'a>(&self, v: &'a Self::Tangent) -> &'a Self::Point;

    fn zero_tangent(&self, x: &Self::Point) -> Self::Tangent;

    /// `a u + b w` for tangents sharing a base point.
    fn tangent_lincomb(&self, a: f64, u: &Self::Tangent, b: f64, w: &Self::Tangent) -> Self::Tangent;

    fn tangent_scale(&self, a: f64, u: &Self::Tangent) -> Self::Tangent;

    fn tangent_norm(&self, v: &Self::Tangent) -> f64;

    /// Orthogonal projection of a dense ambient matrix onto `T_x M`.
    fn project_tangent(&self, x: &Self::Point, z: &Matrix) -> Result<Self::Tangent>;

    /// Projection of `Σ c_j y_j` onto `T_x M`, where the `y_j` are points.
    /// Finite differences of manifold curves go through here; geometries with
    /// factored points never form the ambient sum.
    fn project_combination(&self, x: &Self::Point, terms: &[(f64, &Self::Point)]) -> Result<Self::Tangent>;

    /// Frobenius distance in the ambient space.
    fn ambient_distance(&self, x: &Self::Point, y: &Self::Point) -> f64;

    /// Frobenius norm of the ambient representative of `x`.
    fn ambient_norm(&self, x: &Self::Point) -> f64;

    /// Frobenius distance between two tangents seen as ambient matrices; the
    /// base points may differ.
    fn tangent_distance(&self, u: &Self::Tangent, w: &Self::Tangent) -> f64;

    /// Dense ambient matrix of a point. Intended for small problems and tests.
    fn to_ambient(&self, x: &Self::Point) -> Matrix;

    /// Dense ambient matrix of a tangent vector.
    fn tangent_to_ambient(&self, v: &Self::Tangent) -> Matrix;

    /// Feasibility of a point at tolerance `tol`.
    fn check_point(&self, x: &Self::Point, tol: f64) -> Result<()>;

    /// Tangency of `v` at its base point at tolerance `tol`.
    fn check_tangent(&self, v: &Self::Tangent, tol: f64) -> Result<()>;

    fn random_point(&self, rng: &mut Rng) -> Self::Point;

    /// Random tangent at `x` with unit norm.
    fn random_tangent(&self, x: &Self::Point, rng: &mut Rng) -> Self::Tangent;
}

/// Number of (inverse) retractions performed by an evaluation.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct EvalCounters {
    pub retractions: usize,
    pub inverse_retractions: usize,
}

pub(crate) fn retract_counted<M: Manifold>(
    m: &M,
    v: &M::Tangent,
    counters: &mut EvalCounters,
) -> Result<M::Point> {
    counters.retractions += 1;
    m.retract(v)
}

pub(crate) fn inv_retract_counted<M: Manifold>(
    m: &M,
    x: &M::Point,
    y: &M::Point,
    counters: &mut EvalCounters,
) -> Result<M::Tangent> {
    counters.inverse_retractions += 1;
    m.inv_retract(x, y)
}

/// r-endpoint retraction curve `c_r(t; x, y)`.
///
/// `r = 0` and `r = 1` anchor at `x` and `y` respectively, which saves one
/// retraction and two inverse retractions.
pub fn endpoint_curve<M: Manifold>(m: &M, r: f64, t: f64, x: &M::Point, y: &M::Point) -> Result<M::Point> {
    endpoint_curve_counted(m, r, t, x, y, &mut EvalCounters::default())
}

pub(crate) fn endpoint_curve_counted<M: Manifold>(
    m: &M,
    r: f64,
    t: f64,
    x: &M::Point,
    y: &M::Point,
    counters: &mut EvalCounters,
) -> Result<M::Point> {
    if r == 0.0 {
        let u = inv_retract_counted(m, x, y, counters).map_err(|e| e.at_stage("inv(x, y)"))?;
        retract_counted(m, &m.tangent_scale(t, &u), counters).map_err(|e| e.at_stage("retract at x"))
    } else if r == 1.0 {
        let u = inv_retract_counted(m, y, x, counters).map_err(|e| e.at_stage("inv(y, x)"))?;
        retract_counted(m, &m.tangent_scale(1.0 - t, &u), counters).map_err(|e| e.at_stage("retract at y"))
    } else {
        anchored_endpoint_curve(m, r, t, x, y, counters)
    }
}

/// The general form of `c_r`, anchored at `q(r)` for every `r`
/// (2 retractions, 3 inverse retractions).
pub(crate) fn anchored_endpoint_curve<M: Manifold>(
    m: &M,
    r: f64,
    t: f64,
    x: &M::Point,
    y: &M::Point,
    counters: &mut EvalCounters,
) -> Result<M::Point> {
    let u = inv_retract_counted(m, x, y, counters).map_err(|e| e.at_stage("inv(x, y)"))?;
    let q = retract_counted(m, &m.tangent_scale(r, &u), counters).map_err(|e| e.at_stage("anchor"))?;
    let a = inv_retract_counted(m, &q, x, counters).map_err(|e| e.at_stage("inv(q, x)"))?;
    let b = inv_retract_counted(m, &q, y, counters).map_err(|e| e.at_stage("inv(q, y)"))?;
    retract_counted(m, &m.tangent_lincomb(1.0 - t, &a, t, &b), counters).map_err(|e| e.at_stage("retract at q"))
}

/// `‖c_0(t; x, y) − c_1(1 − t; y, x)‖_F`, which vanishes for any retraction.
pub fn endpoint_symmetry_check<M: Manifold>(m: &M, x: &M::Point, y: &M::Point, t: f64) -> Result<f64> {
    let forward = endpoint_curve(m, 0.0, t, x, y)?;
    let backward = endpoint_curve(m, 1.0, 1.0 - t, y, x)?;
    Ok(m.ambient_distance(&forward, &backward))
}

/// Generalized cubic de Casteljau curve with `r_1 = 1/2`, `r_01 = 0`,
/// `r_12 = 1`, `r_012 = t`.
pub fn decasteljau<M: Manifold>(
    m: &M,
    t: f64,
    b0: &M::Point,
    b1: &M::Point,
    b2: &M::Point,
    b3: &M::Point,
) -> Result<M::Point> {
    decasteljau_variant(m, t, b0, b1, b2, b3, 0.5)
}

/// De Casteljau curve with a constant, caller-chosen `r_1` for the middle
/// first-level stage. `r_1 = 1/2` is [`decasteljau`].
pub fn decasteljau_variant<M: Manifold>(
    m: &M,
    t: f64,
    b0: &M::Point,
    b1: &M::Point,
    b2: &M::Point,
    b3: &M::Point,
    r1: f64,
) -> Result<M::Point> {
    let mut counters = EvalCounters::default();
    let c = &mut counters;
    let beta0 = endpoint_curve_counted(m, 0.0, t, b0, b1, c).map_err(|e| e.at_stage("beta_0"))?;
    let beta1 = anchored_endpoint_curve(m, r1, t, b1, b2, c).map_err(|e| e.at_stage("beta_1"))?;
    let beta2 = endpoint_curve_counted(m, 1.0, t, b2, b3, c).map_err(|e| e.at_stage("beta_2"))?;
    let beta01 = endpoint_curve_counted(m, 0.0, t, &beta0, &beta1, c).map_err(|e| e.at_stage("beta_01"))?;
    let beta12 = endpoint_curve_counted(m, 1.0, t, &beta1, &beta2, c).map_err(|e| e.at_stage("beta_12"))?;
    anchored_endpoint_curve(m, t, t, &beta01, &beta12, c).map_err(|e| e.at_stage("beta_012"))
}

/// De Casteljau recursion where every stage is `c_0`. Used by the naive
/// Hermite scheme; not C¹ across segment junctions.
pub fn decasteljau_c0<M: Manifold>(
    m: &M,
    t: f64,
    b0: &M::Point,
    b1: &M::Point,
    b2: &M::Point,
    b3: &M::Point,
) -> Result<M::Point> {
    let beta0 = endpoint_curve(m, 0.0, t, b0, b1).map_err(|e| e.at_stage("beta_0"))?;
    let beta1 = endpoint_curve(m, 0.0, t, b1, b2).map_err(|e| e.at_stage("beta_1"))?;
    let beta2 = endpoint_curve(m, 0.0, t, b2, b3).map_err(|e| e.at_stage("beta_2"))?;
    let beta01 = endpoint_curve(m, 0.0, t, &beta0, &beta1).map_err(|e| e.at_stage("beta_01"))?;
    let beta12 = endpoint_curve(m, 0.0, t, &beta1, &beta2).map_err(|e| e.at_stage("beta_12"))?;
    endpoint_curve(m, 0.0, t, &beta01, &beta12).map_err(|e| e.at_stage("beta_012"))
}

/// Central finite difference of a manifold curve, projected onto the tangent
/// space at `f(t)`.
pub fn fd_velocity<M, F>(m: &M, mut f: F, t: f64, step: f64) -> Result<M::Tangent>
where
    M: Manifold,
    F: FnMut(f64) -> Result<M::Point>,
{
    if !(step > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step {step}")));
    }
    let x = f(t)?;
    let plus = f(t + step)?;
    let minus = f(t - step)?;
    let c = 0.5 / step;
    m.project_combination(&x, &[(c, &plus), (-c, &minus)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rng_from_seed;
    use crate::stiefel::{Stiefel, StiefelRetraction};

    fn nearby_pair(m: &Stiefel, seed: u64, dist: f64) -> (<Stiefel as Manifold>::Point, <Stiefel as Manifold>::Point) {
        let mut rng = rng_from_seed(seed);
        let x = m.random_point(&mut rng);
        let v = m.random_tangent(&x, &mut rng);
        let y = m.retract(&m.tangent_scale(dist, &v)).unwrap();
        (x, y)
    }

    fn stiefel_q() -> Stiefel {
        Stiefel::new(8, 3, StiefelRetraction::QFactor)
    }

    #[test]
    fn endpoint_curve_hits_endpoints() {
        let m = stiefel_q();
        let (x, y) = nearby_pair(&m, 1, 0.4);
        for &r in &[0.0, 0.3, 0.5, 1.0] {
            let c0 = endpoint_curve(&m, r, 0.0, &x, &y).unwrap();
            let c1 = endpoint_curve(&m, r, 1.0, &x, &y).unwrap();
            assert!(m.ambient_distance(&c0, &x) < 1e-12, "r = {r}");
            assert!(m.ambient_distance(&c1, &y) < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn endpoint_curve_constant_when_points_coincide() {
        let m = stiefel_q();
        let (x, _) = nearby_pair(&m, 2, 0.1);
        for &r in &[0.0, 0.5, 1.0] {
            for &t in &[0.0, 0.25, 0.8] {
                let c = endpoint_curve(&m, r, t, &x, &x).unwrap();
                assert!(m.ambient_distance(&c, &x) < 1e-14);
            }
        }
    }

    #[test]
    fn endpoint_curve_initial_slope() {
        let m = stiefel_q();
        let (x, y) = nearby_pair(&m, 3, 0.3);
        let h = 1e-6;
        let plus = m.to_ambient(&endpoint_curve(&m, 0.0, h, &x, &y).unwrap());
        let minus = m.to_ambient(&endpoint_curve(&m, 0.0, -h, &x, &y).unwrap());
        let slope = (plus - minus) / (2.0 * h);
        let expected = m.tangent_to_ambient(&m.inv_retract(&x, &y).unwrap());
        assert!((slope - expected).norm() < 1e-5);
    }

    #[test]
    fn symmetry_of_extreme_members() {
        let m = stiefel_q();
        let (x, y) = nearby_pair(&m, 4, 0.3);
        assert!(endpoint_symmetry_check(&m, &x, &y, 0.3).unwrap() < 1e-10);
        assert_eq!(endpoint_symmetry_check(&m, &x, &x, 0.3).unwrap(), 0.0);
    }

    #[test]
    fn decasteljau_endpoints_and_constant() {
        let m = stiefel_q();
        let mut rng = rng_from_seed(5);
        let b0 = m.random_point(&mut rng);
        let pts: Vec<_> = (0..3)
            .map(|_| {
                let v = m.random_tangent(&b0, &mut rng);
                m.retract(&m.tangent_scale(0.2, &v)).unwrap()
            })
            .collect();
        let start = decasteljau(&m, 0.0, &b0, &pts[0], &pts[1], &pts[2]).unwrap();
        let end = decasteljau(&m, 1.0, &b0, &pts[0], &pts[1], &pts[2]).unwrap();
        assert!(m.ambient_distance(&start, &b0) < 1e-12);
        assert!(m.ambient_distance(&end, &pts[2]) < 1e-12);
        for &t in &[0.0, 0.4, 1.0] {
            let c = decasteljau(&m, t, &b0, &b0, &b0, &b0).unwrap();
            assert!(m.ambient_distance(&c, &b0) < 1e-14);
        }
    }

    #[test]
    fn variant_with_half_is_bitwise_decasteljau() {
        let m = stiefel_q();
        let mut rng = rng_from_seed(6);
        let b: Vec<_> = (0..4).map(|_| m.random_point(&mut rng)).collect();
        let b0 = b[0].clone();
        let near: Vec<_> = (0..3)
            .map(|_| {
                let v = m.random_tangent(&b0, &mut rng);
                m.retract(&m.tangent_scale(0.15, &v)).unwrap()
            })
            .collect();
        for &t in &[0.1, 0.5, 0.9] {
            let a = decasteljau(&m, t, &b0, &near[0], &near[1], &near[2]).unwrap();
            let v = decasteljau_variant(&m, t, &b0, &near[0], &near[1], &near[2], 0.5).unwrap();
            assert_eq!(m.to_ambient(&a), m.to_ambient(&v));
        }
    }

    #[test]
    fn stage_label_surfaces_in_errors() {
        // Antipodal columns are outside the Q-factor inverse domain.
        let m = Stiefel::new(2, 1, StiefelRetraction::QFactor);
        let x = m.point(Matrix::from_row_slice(2, 1, &[1.0, 0.0])).unwrap();
        let y = m.point(Matrix::from_row_slice(2, 1, &[-1.0, 0.0])).unwrap();
        let err = decasteljau(&m, 0.5, &x, &y, &y, &y).unwrap_err();
        match err {
            Error::RetractionDomain { stage, .. } => assert!(stage.starts_with("beta_0"), "{stage}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fd_velocity_rejects_bad_step() {
        let m = stiefel_q();
        let mut rng = rng_from_seed(7);
        let x = m.random_point(&mut rng);
        let r = fd_velocity(&m, |_| Ok(x.clone()), 0.0, 0.0);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }
}
