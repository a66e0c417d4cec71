//! The Stiefel manifold `St(n, k) = {X ∈ ℝ^{n×k} : XᵀX = I}` with the
//! Q-factor and P-factor retraction pairs.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::io::PointCodec;
use crate::linalg::{
    self, ensure_shape, format_matrix, parse_matrix, polar, qr_posdiag, random_gaussian, rng_from_seed,
    solve_lyapunov, solve_sym_part_triangular, sym, tol, Matrix, Rng,
};
use crate::manifold::Manifold;

/// Which retraction/inverse pair a Stiefel geometry uses. Fixed per
/// interpolant; the pairs are never mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StiefelRetraction {
    /// `R_X(V) = qf(X + V)`.
    QFactor,
    /// `R_X(V) = pf(X + V)`.
    PFactor,
}

/// A point `X` with orthonormal columns.
#[derive(Debug, Clone)]
pub struct StiefelPoint(Arc<Matrix>);

impl StiefelPoint {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    fn same_as(&self, other: &StiefelPoint) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

/// A tangent `V` at `base`, i.e. `XᵀV` skew-symmetric.
#[derive(Debug, Clone)]
pub struct StiefelTangent {
    pub v: Matrix,
    pub base: StiefelPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Stiefel {
    pub n: usize,
    pub k: usize,
    pub retraction: StiefelRetraction,
}

impl Stiefel {
    pub fn new(n: usize, k: usize, retraction: StiefelRetraction) -> Self {
        assert!(n >= k && k >= 1, "St(n, k) requires n >= k >= 1");
        Stiefel { n, k, retraction }
    }

    /// Wraps a matrix after checking shape and orthonormality.
    pub fn point(&self, x: Matrix) -> Result<StiefelPoint> {
        ensure_shape(&x, (self.n, self.k))?;
        let p = StiefelPoint(Arc::new(x));
        self.check_point(&p, tol::FEASIBILITY)?;
        Ok(p)
    }

    /// Wraps a matrix as a tangent at `base` after checking tangency.
    pub fn tangent(&self, base: &StiefelPoint, v: Matrix) -> Result<StiefelTangent> {
        ensure_shape(&v, (self.n, self.k))?;
        let t = StiefelTangent { v, base: base.clone() };
        self.check_tangent(&t, tol::FEASIBILITY)?;
        Ok(t)
    }

    fn unchecked_tangent(&self, base: &StiefelPoint, v: Matrix) -> StiefelTangent {
        StiefelTangent { v, base: base.clone() }
    }

    pub fn retract_q(&self, v: &StiefelTangent) -> Result<StiefelPoint> {
        let (q, _) = qr_posdiag(&(v.base.matrix() + &v.v))?;
        Ok(StiefelPoint(Arc::new(q)))
    }

    /// Inverse Q-factor retraction: `V = Y R − X` where `R` solves
    /// `(XᵀY) R + Rᵀ (XᵀY)ᵀ = 2I`.
    pub fn inv_retract_q(&self, x: &StiefelPoint, y: &StiefelPoint) -> Result<StiefelTangent> {
        let a = x.matrix().transpose() * y.matrix();
        let r = solve_sym_part_triangular(&a).map_err(|e| e.at_stage("inverse Q-factor"))?;
        Ok(self.unchecked_tangent(x, y.matrix() * r - x.matrix()))
    }

    pub fn retract_p(&self, v: &StiefelTangent) -> Result<StiefelPoint> {
        let p = polar(&(v.base.matrix() + &v.v))?;
        Ok(StiefelPoint(Arc::new(p)))
    }

    /// Inverse P-factor retraction: `V = Y S − X` where `S` solves
    /// `(XᵀY) S + S (XᵀY)ᵀ = 2I`. `S` must be positive definite for `Y` to
    /// be the polar factor of `X + V`.
    pub fn inv_retract_p(&self, x: &StiefelPoint, y: &StiefelPoint) -> Result<StiefelTangent> {
        let a = x.matrix().transpose() * y.matrix();
        let s = solve_lyapunov(&a).map_err(|e| e.at_stage("inverse P-factor"))?;
        if s.clone().cholesky().is_none() {
            return Err(Error::RetractionDomain {
                stage: "inverse P-factor".into(),
                reason: "Lyapunov solution is not positive definite".into(),
            });
        }
        Ok(self.unchecked_tangent(x, y.matrix() * s - x.matrix()))
    }
}

/// Q-factor of an `n×k` matrix with standard-normal entries drawn from
/// `seed`. Deterministic per seed.
pub fn random_point(n: usize, k: usize, seed: u64) -> StiefelPoint {
    let mut rng = rng_from_seed(seed);
    sample_point(n, k, &mut rng)
}

fn sample_point(n: usize, k: usize, rng: &mut Rng) -> StiefelPoint {
    loop {
        if let Ok((q, _)) = qr_posdiag(&random_gaussian(n, k, rng)) {
            return StiefelPoint(Arc::new(q));
        }
    }
}

impl Manifold for Stiefel {
    type Point = StiefelPoint;
    type Tangent = StiefelTangent;

    fn dim(&self) -> usize {
        self.n * self.k - self.k * (self.k + 1) / 2
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.n, self.k)
    }

    fn retract(&self, v: &StiefelTangent) -> Result<StiefelPoint> {
        if v.v.iter().all(|&e| e == 0.0) {
            return Ok(v.base.clone());
        }
        let y = match self.retraction {
            StiefelRetraction::QFactor => self.retract_q(v),
            StiefelRetraction::PFactor => self.retract_p(v),
        };
        debug_assert!(y.is_ok(), "X + V is full rank for any tangent V");
        y
    }

    fn inv_retract(&self, x: &StiefelPoint, y: &StiefelPoint) -> Result<StiefelTangent> {
        if x.same_as(y) {
            return Ok(self.zero_tangent(x));
        }
        match self.retraction {
            StiefelRetraction::QFactor => self.inv_retract_q(x, y),
            StiefelRetraction::PFactor => self.inv_retract_p(x, y),
        }
    }

    fn base<'a>(&self, v: &'a StiefelTangent) -> &'a StiefelPoint {
        &v.base
    }

    fn zero_tangent(&self, x: &StiefelPoint) -> StiefelTangent {
        self.unchecked_tangent(x, Matrix::zeros(self.n, self.k))
    }

    fn tangent_lincomb(&self, a: f64, u: &StiefelTangent, b: f64, w: &StiefelTangent) -> StiefelTangent {
        debug_assert!(u.base.same_as(&w.base), "tangents at different base points");
        self.unchecked_tangent(&u.base, &u.v * a + &w.v * b)
    }

    fn tangent_scale(&self, a: f64, u: &StiefelTangent) -> StiefelTangent {
        self.unchecked_tangent(&u.base, &u.v * a)
    }

    fn tangent_norm(&self, v: &StiefelTangent) -> f64 {
        v.v.norm()
    }

    fn project_tangent(&self, x: &StiefelPoint, z: &Matrix) -> Result<StiefelTangent> {
        ensure_shape(z, (self.n, self.k))?;
        let xm = x.matrix();
        let v = z - xm * sym(&(xm.transpose() * z));
        Ok(self.unchecked_tangent(x, v))
    }

    fn project_combination(&self, x: &StiefelPoint, terms: &[(f64, &StiefelPoint)]) -> Result<StiefelTangent> {
        let mut z = Matrix::zeros(self.n, self.k);
        for (c, y) in terms {
            z += y.matrix() * *c;
        }
        self.project_tangent(x, &z)
    }

    fn ambient_distance(&self, x: &StiefelPoint, y: &StiefelPoint) -> f64 {
        (x.matrix() - y.matrix()).norm()
    }

    fn ambient_norm(&self, x: &StiefelPoint) -> f64 {
        x.matrix().norm()
    }

    fn tangent_distance(&self, u: &StiefelTangent, w: &StiefelTangent) -> f64 {
        (&u.v - &w.v).norm()
    }

    fn to_ambient(&self, x: &StiefelPoint) -> Matrix {
        x.matrix().clone()
    }

    fn tangent_to_ambient(&self, v: &StiefelTangent) -> Matrix {
        v.v.clone()
    }

    fn check_point(&self, x: &StiefelPoint, tol: f64) -> Result<()> {
        ensure_shape(x.matrix(), (self.n, self.k))?;
        let residual = linalg::orthonormality_residual(x.matrix());
        if residual < tol {
            Ok(())
        } else {
            Err(Error::InfeasiblePoint { residual })
        }
    }

    fn check_tangent(&self, v: &StiefelTangent, tol: f64) -> Result<()> {
        ensure_shape(&v.v, (self.n, self.k))?;
        let xtv = v.base.matrix().transpose() * &v.v;
        let residual = (&xtv + xtv.transpose()).norm();
        if residual < tol {
            Ok(())
        } else {
            Err(Error::NotTangent { residual })
        }
    }

    fn random_point(&self, rng: &mut Rng) -> StiefelPoint {
        sample_point(self.n, self.k, rng)
    }

    fn random_tangent(&self, x: &StiefelPoint, rng: &mut Rng) -> StiefelTangent {
        let z = random_gaussian(self.n, self.k, rng);
        let mut t = self.project_tangent(x, &z).expect("shape matches");
        let norm = t.v.norm();
        t.v /= norm;
        t
    }
}

impl PointCodec for Stiefel {
    fn encode_point(&self, x: &StiefelPoint) -> String {
        format_matrix(x.matrix())
    }

    fn decode_point(&self, text: &str) -> Result<StiefelPoint> {
        self.point(parse_matrix(text)?)
    }

    fn encode_tangent(&self, v: &StiefelTangent) -> String {
        format_matrix(&v.v)
    }

    fn decode_tangent(&self, base: &StiefelPoint, text: &str) -> Result<StiefelTangent> {
        self.tangent(base, parse_matrix(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unit;

    fn both() -> [Stiefel; 2] {
        [
            Stiefel::new(7, 3, StiefelRetraction::QFactor),
            Stiefel::new(7, 3, StiefelRetraction::PFactor),
        ]
    }

    fn column(a: f64, b: f64) -> Matrix {
        Matrix::from_row_slice(2, 1, &[a, b])
    }

    #[test]
    fn dimension() {
        assert_eq!(Stiefel::new(500, 10, StiefelRetraction::QFactor).dim(), 4945);
        assert_eq!(Stiefel::new(3, 3, StiefelRetraction::PFactor).dim(), 3);
    }

    #[test]
    fn projection_examples() {
        let m = Stiefel::new(6, 2, StiefelRetraction::QFactor);
        let x = random_point(6, 2, 5);
        let mut rng = rng_from_seed(5);
        let t = m.random_tangent(&x, &mut rng);
        assert!((m.project_tangent(&x, &t.v).unwrap().v - &t.v).norm() < 1e-12);
        assert!(m.project_tangent(&x, x.matrix()).unwrap().v.norm() < 1e-14);

        let z = random_gaussian(6, 2, &mut rng);
        let once = m.project_tangent(&x, &z).unwrap();
        let twice = m.project_tangent(&x, &once.v).unwrap();
        assert!((once.v - twice.v).norm() < 1e-12);
        assert!(matches!(
            m.project_tangent(&x, &Matrix::zeros(2, 6)),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn projection_is_self_adjoint() {
        let m = Stiefel::new(9, 4, StiefelRetraction::QFactor);
        let mut rng = rng_from_seed(12);
        for _ in 0..20 {
            let x = m.random_point(&mut rng);
            let z1 = random_gaussian(9, 4, &mut rng);
            let z2 = random_gaussian(9, 4, &mut rng);
            let lhs = m.project_tangent(&x, &z1).unwrap().v.dot(&z2);
            let rhs = z1.dot(&m.project_tangent(&x, &z2).unwrap().v);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_tangent_retracts_to_base() {
        for m in both() {
            let x = random_point(7, 3, 1);
            let y = m.retract(&m.zero_tangent(&x)).unwrap();
            assert_eq!(y.matrix(), x.matrix());
        }
    }

    #[test]
    fn single_column_retractions_normalize() {
        let expected = column(1.0, 0.5) / 1.25f64.sqrt();
        assert!((expected[(0, 0)] - 0.894_427_190_999_916).abs() < 1e-15);
        for r in [StiefelRetraction::QFactor, StiefelRetraction::PFactor] {
            let m = Stiefel::new(2, 1, r);
            let x = m.point(column(1.0, 0.0)).unwrap();
            let v = m.tangent(&x, column(0.0, 0.5)).unwrap();
            let y = m.retract(&v).unwrap();
            assert!((y.matrix() - &expected).norm() < 1e-15);
        }
    }

    #[test]
    fn inverse_q_scalar_example() {
        let m = Stiefel::new(2, 1, StiefelRetraction::QFactor);
        let x = m.point(column(1.0, 0.0)).unwrap();
        let y = m.point(column(0.8, 0.6)).unwrap();
        let v = m.inv_retract(&x, &y).unwrap();
        assert!((v.v - column(0.0, 0.75)).norm() < 1e-15);
    }

    #[test]
    fn inverse_p_scalar_formula() {
        let m = Stiefel::new(4, 1, StiefelRetraction::PFactor);
        let x = random_point(4, 1, 8);
        let mut rng = rng_from_seed(8);
        let y = m.retract(&m.tangent_scale(0.3, &m.random_tangent(&x, &mut rng))).unwrap();
        let xty = (x.matrix().transpose() * y.matrix())[(0, 0)];
        let expected = y.matrix() / xty - x.matrix();
        let v = m.inv_retract(&x, &y).unwrap();
        assert!((v.v - expected).norm() < 1e-14);
    }

    #[test]
    fn inverse_at_base_is_zero() {
        for m in both() {
            let x = random_point(7, 3, 2);
            assert!(m.inv_retract(&x, &x).unwrap().v.norm() < 1e-14);
        }
    }

    #[test]
    fn roundtrips() {
        for m in both() {
            let mut rng = rng_from_seed(44);
            for _ in 0..100 {
                let x = m.random_point(&mut rng);
                let len = 0.1 * random_unit(&mut rng);
                let v = m.tangent_scale(len, &m.random_tangent(&x, &mut rng));
                let y = m.retract(&v).unwrap();
                m.check_point(&y, tol::FEASIBILITY).unwrap();
                let back = m.inv_retract(&x, &y).unwrap();
                m.check_tangent(&back, tol::FEASIBILITY).unwrap();
                assert!(m.tangent_distance(&back, &v) < 1e-9, "{:?}", m.retraction);
            }
        }
    }

    #[test]
    fn retractions_stay_feasible_for_large_steps() {
        for m in both() {
            let mut rng = rng_from_seed(45);
            for _ in 0..100 {
                let x = m.random_point(&mut rng);
                let len = random_unit(&mut rng);
                let v = m.tangent_scale(len, &m.random_tangent(&x, &mut rng));
                m.check_point(&m.retract(&v).unwrap(), tol::FEASIBILITY).unwrap();
            }
        }
    }

    #[test]
    fn mismatched_pairs_are_distinguishable() {
        let q = Stiefel::new(7, 3, StiefelRetraction::QFactor);
        let p = Stiefel::new(7, 3, StiefelRetraction::PFactor);
        let mut rng = rng_from_seed(46);
        let x = q.random_point(&mut rng);
        let v = q.tangent_scale(0.3, &q.random_tangent(&x, &mut rng));
        let y = p.retract(&v).unwrap();
        let w = q.inv_retract(&x, &y).unwrap();
        assert!(q.tangent_distance(&v, &w) > 1e-6);
    }

    #[test]
    fn antipodal_points_leave_the_domain() {
        let m = Stiefel::new(2, 1, StiefelRetraction::QFactor);
        let x = m.point(column(1.0, 0.0)).unwrap();
        let y = m.point(column(-1.0, 0.0)).unwrap();
        assert!(matches!(m.inv_retract(&x, &y), Err(Error::RetractionDomain { .. })));
        let m = Stiefel::new(2, 1, StiefelRetraction::PFactor);
        assert!(matches!(m.inv_retract(&x, &y), Err(Error::RetractionDomain { .. })));
        let z = m.point(column(0.0, 1.0)).unwrap();
        assert!(matches!(m.inv_retract(&x, &z), Err(Error::RetractionDomain { .. })));
    }

    #[test]
    fn random_point_is_deterministic() {
        let a = random_point(10, 3, 99);
        let b = random_point(10, 3, 99);
        let c = random_point(10, 3, 100);
        assert_eq!(a.matrix(), b.matrix());
        assert!((a.matrix() - c.matrix()).norm() > 1e-3);
        Stiefel::new(10, 3, StiefelRetraction::QFactor)
            .check_point(&a, tol::FEASIBILITY)
            .unwrap();
    }

    #[test]
    fn constructors_validate() {
        let m = Stiefel::new(2, 1, StiefelRetraction::QFactor);
        assert!(matches!(m.point(column(1.0, 1.0)), Err(Error::InfeasiblePoint { .. })));
        let x = m.point(column(1.0, 0.0)).unwrap();
        assert!(matches!(m.tangent(&x, column(1.0, 0.0)), Err(Error::NotTangent { .. })));
        assert!(matches!(m.point(Matrix::zeros(3, 1)), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn codec_roundtrip() {
        let m = Stiefel::new(5, 2, StiefelRetraction::PFactor);
        let mut rng = rng_from_seed(3);
        let x = m.random_point(&mut rng);
        let v = m.random_tangent(&x, &mut rng);
        let x2 = m.decode_point(&m.encode_point(&x)).unwrap();
        assert_eq!(x2.matrix(), x.matrix());
        let v2 = m.decode_tangent(&x2, &m.encode_tangent(&v)).unwrap();
        assert_eq!(v2.v, v.v);
    }
}
