//! The manifold `M_k` of `m×n` matrices of rank `k`, stored in factored form
//! `X = U S Vᵀ`, with the orthographic retraction and its inverse.
//!
//! Tangent vectors at `X` use the usual parametrization
//! `W = U M Vᵀ + Up Vᵀ + U Vpᵀ` with `UᵀUp = 0` and `VᵀVp = 0`. Ambient
//! differences are carried as low-rank products `A Bᵀ`; no routine here
//! builds an `m×n` matrix except [`Manifold::to_ambient`] and the dense
//! entry points that receive one.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::io::{format_blocks, parse_blocks, PointCodec};
use crate::linalg::{
    ensure_shape, orthonormality_residual, qr_posdiag, random_gaussian, random_uniform, singular_values, svd_thin, tol, Matrix,
    Rng, ThinSvd,
};
use crate::manifold::Manifold;

#[derive(Debug)]
struct Factors {
    u: Matrix,
    s: Matrix,
    v: Matrix,
}

/// A rank-`k` matrix `U S Vᵀ`; `U`, `V` have orthonormal columns and the core
/// `S` is any invertible `k×k` matrix.
#[derive(Debug, Clone)]
pub struct FixedRankPoint(Arc<Factors>);

impl FixedRankPoint {
    pub fn u(&self) -> &Matrix {
        &self.0.u
    }

    pub fn s(&self) -> &Matrix {
        &self.0.s
    }

    pub fn v(&self) -> &Matrix {
        &self.0.v
    }

    fn same_as(&self, other: &FixedRankPoint) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.u == other.0.u && self.0.s == other.0.s && self.0.v == other.0.v)
    }

    pub(crate) fn from_parts(u: Matrix, s: Matrix, v: Matrix) -> Self {
        FixedRankPoint(Arc::new(Factors { u, s, v }))
    }

    /// `(U S, V)` so that `X = (U S) Vᵀ`.
    pub fn factors(&self) -> (Matrix, Matrix) {
        (self.u() * self.s(), self.v().clone())
    }
}

/// `W = U M Vᵀ + Up Vᵀ + U Vpᵀ` at `base`.
#[derive(Debug, Clone)]
pub struct FixedRankTangent {
    pub m: Matrix,
    pub up: Matrix,
    pub vp: Matrix,
    pub base: FixedRankPoint,
}

impl FixedRankTangent {
    /// `(A, B)` with `W = A Bᵀ`, rank at most `2k`.
    pub fn factors(&self) -> (Matrix, Matrix) {
        let u = self.base.u();
        let v = self.base.v();
        let a = hcat(&[&(u * &self.m + &self.up), u]);
        let b = hcat(&[v, &self.vp]);
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedRank {
    pub m: usize,
    pub n: usize,
    pub k: usize,
}

impl FixedRank {
    pub fn new(m: usize, n: usize, k: usize) -> Self {
        assert!(k >= 1 && k <= m.min(n), "rank must satisfy 1 <= k <= min(m, n)");
        FixedRank { m, n, k }
    }

    /// Wraps factors after validating shapes, orthonormality and the core.
    pub fn point(&self, u: Matrix, s: Matrix, v: Matrix) -> Result<FixedRankPoint> {
        ensure_shape(&u, (self.m, self.k))?;
        ensure_shape(&s, (self.k, self.k))?;
        ensure_shape(&v, (self.n, self.k))?;
        let p = FixedRankPoint::from_parts(u, s, v);
        self.check_point(&p, tol::FEASIBILITY)?;
        Ok(p)
    }

    pub fn tangent(&self, base: &FixedRankPoint, m: Matrix, up: Matrix, vp: Matrix) -> Result<FixedRankTangent> {
        ensure_shape(&m, (self.k, self.k))?;
        ensure_shape(&up, (self.m, self.k))?;
        ensure_shape(&vp, (self.n, self.k))?;
        let t = FixedRankTangent {
            m,
            up,
            vp,
            base: base.clone(),
        };
        self.check_tangent(&t, tol::FEASIBILITY)?;
        Ok(t)
    }

    /// Projection of `Z = A Bᵀ` onto `T_X M_k` without forming `Z`.
    pub fn project_factored(&self, x: &FixedRankPoint, a: &Matrix, b: &Matrix) -> Result<FixedRankTangent> {
        if a.nrows() != self.m || b.nrows() != self.n || a.ncols() != b.ncols() {
            return Err(Error::ShapeMismatch {
                expected: (self.m, self.n),
                found: (a.nrows(), b.nrows()),
            });
        }
        let u = x.u();
        let v = x.v();
        let bt_v = b.transpose() * v;
        let at_u = a.transpose() * u;
        let m = at_u.transpose() * &bt_v;
        let mut up = a * &bt_v - u * &m;
        let mut vp = b * &at_u - v * m.transpose();
        // Strip the roundoff component along U (resp. V).
        up -= u * (u.transpose() * &up);
        vp -= v * (v.transpose() * &vp);
        Ok(FixedRankTangent {
            m,
            up,
            vp,
            base: x.clone(),
        })
    }

    /// Orthographic retraction, in closed form:
    /// `Y = A (S+M)⁻¹ Bᵀ` with `A = U(S+M) + Up`, `B = V(S+M)ᵀ + Vp`,
    /// refactored through positive-diagonal QR of `A` and `B`.
    pub fn retract_ortho(&self, w: &FixedRankTangent) -> Result<FixedRankPoint> {
        let x = &w.base;
        let core = x.s() + &w.m;
        let sv = singular_values(&core)?;
        if !(sv[self.k - 1] > tol::RANK_RELATIVE * sv[0]) {
            return Err(Error::CoreSingular);
        }
        let a = x.u() * &core + &w.up;
        let b = x.v() * core.transpose() + &w.vp;
        let (qa, ra) = qr_posdiag(&a).map_err(|_| Error::CoreSingular)?;
        let (qb, rb) = qr_posdiag(&b).map_err(|_| Error::CoreSingular)?;
        let solved = core.lu().solve(&rb.transpose()).ok_or(Error::CoreSingular)?;
        Ok(FixedRankPoint::from_parts(qa, ra * solved, qb))
    }

    /// `Π_X(Y − X) = Π_X(Y) − X`, from the factors of both points. With
    /// `G_u = UᵀU'`, `G_v = V'ᵀV`: `M = G_u S' G_v − S`,
    /// `Up = U' S' G_v − U (M + S)`, `Vp = V' S'ᵀ G_uᵀ − V (M + S)ᵀ`.
    pub fn inv_retract_ortho(&self, x: &FixedRankPoint, y: &FixedRankPoint) -> Result<FixedRankTangent> {
        let gu = x.u().tr_mul(y.u());
        let gv = y.v().tr_mul(x.v());
        let sy_gv = y.s() * &gv;
        let full = &gu * &sy_gv;
        let up = y.u() * &sy_gv - x.u() * &full;
        let vp = y.v() * (y.s().transpose() * gu.transpose()) - x.v() * full.transpose();
        Ok(self.unchecked_tangent(x, full - x.s(), up, vp))
    }

    /// Best rank-`k` approximation of a dense matrix.
    pub fn truncate_dense(&self, a: &Matrix) -> Result<FixedRankPoint> {
        ensure_shape(a, (self.m, self.n))?;
        let svd = svd_thin(a)?;
        self.truncate_svd(&svd)
    }

    /// Best rank-`k` approximation of `A Bᵀ`, working on QR factors of `A`
    /// and `B` only.
    pub fn truncate_factored(&self, a: &Matrix, b: &Matrix) -> Result<FixedRankPoint> {
        if a.nrows() != self.m || b.nrows() != self.n || a.ncols() != b.ncols() {
            return Err(Error::ShapeMismatch {
                expected: (self.m, self.n),
                found: (a.nrows(), b.nrows()),
            });
        }
        let (qa, ra) = thin_qr(a);
        let (qb, rb) = thin_qr(b);
        let svd = svd_thin(&(ra * rb.transpose()))?;
        let lifted = ThinSvd {
            u: qa * svd.u,
            s: svd.s,
            v: qb * svd.v,
        };
        self.truncate_svd(&lifted)
    }

    fn truncate_svd(&self, svd: &ThinSvd) -> Result<FixedRankPoint> {
        let k = self.k;
        if svd.s.len() < k || !(svd.s[k - 1] > tol::RANK_RELATIVE * svd.s[0]) {
            return Err(Error::RankTooSmall { rank: k });
        }
        let u = svd.u.columns(0, k).into_owned();
        let v = svd.v.columns(0, k).into_owned();
        let s = Matrix::from_diagonal(&DVector::from_iterator(k, svd.s.iter().take(k).copied()));
        Ok(FixedRankPoint::from_parts(u, s, v))
    }

    /// Rotates the factors so the core is diagonal with non-increasing,
    /// non-negative entries. Same ambient matrix; for display.
    pub fn normalize_svd(&self, x: &FixedRankPoint) -> Result<FixedRankPoint> {
        let svd = svd_thin(x.s())?;
        Ok(FixedRankPoint::from_parts(
            x.u() * &svd.u,
            Matrix::from_diagonal(&svd.s),
            x.v() * &svd.v,
        ))
    }

    fn unchecked_tangent(&self, base: &FixedRankPoint, m: Matrix, up: Matrix, vp: Matrix) -> FixedRankTangent {
        FixedRankTangent {
            m,
            up,
            vp,
            base: base.clone(),
        }
    }
}

/// Horizontal concatenation.
pub(crate) fn hcat(blocks: &[&Matrix]) -> Matrix {
    let rows = blocks[0].nrows();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = Matrix::zeros(rows, cols);
    let mut offset = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        out.columns_mut(offset, b.ncols()).copy_from(b);
        offset += b.ncols();
    }
    out
}

/// Householder QR without sign normalization; works for any shape.
fn thin_qr(a: &Matrix) -> (Matrix, Matrix) {
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// `‖A Bᵀ‖_F` without forming the product: `‖A Bᵀ‖ = ‖A R_Bᵀ‖` for `B = Q_B R_B`.
pub fn factored_norm(a: &Matrix, b: &Matrix) -> f64 {
    let (_, rb) = thin_qr(b);
    (a * rb.transpose()).norm()
}

impl Manifold for FixedRank {
    type Point = FixedRankPoint;
    type Tangent = FixedRankTangent;

    fn dim(&self) -> usize {
        (self.m + self.n - self.k) * self.k
    }

    fn ambient_shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn retract(&self, w: &FixedRankTangent) -> Result<FixedRankPoint> {
        let zero = w.m.iter().chain(w.up.iter()).chain(w.vp.iter()).all(|&e| e == 0.0);
        if zero {
            return Ok(w.base.clone());
        }
        self.retract_ortho(w)
    }

    fn inv_retract(&self, x: &FixedRankPoint, y: &FixedRankPoint) -> Result<FixedRankTangent> {
        if x.same_as(y) {
            return Ok(self.zero_tangent(x));
        }
        self.inv_retract_ortho(x, y)
    }

    fn base<'a>(&self, v: &'a FixedRankTangent) -> &'a FixedRankPoint {
        &v.base
    }

    fn zero_tangent(&self, x: &FixedRankPoint) -> FixedRankTangent {
        self.unchecked_tangent(
            x,
            Matrix::zeros(self.k, self.k),
            Matrix::zeros(self.m, self.k),
            Matrix::zeros(self.n, self.k),
        )
    }

    fn tangent_lincomb(&self, a: f64, u: &FixedRankTangent, b: f64, w: &FixedRankTangent) -> FixedRankTangent {
        debug_assert!(u.base.same_as(&w.base), "tangents at different base points");
        self.unchecked_tangent(
            &u.base,
            &u.m * a + &w.m * b,
            &u.up * a + &w.up * b,
            &u.vp * a + &w.vp * b,
        )
    }

    fn tangent_scale(&self, a: f64, u: &FixedRankTangent) -> FixedRankTangent {
        self.unchecked_tangent(&u.base, &u.m * a, &u.up * a, &u.vp * a)
    }

    fn tangent_norm(&self, v: &FixedRankTangent) -> f64 {
        (v.m.norm_squared() + v.up.norm_squared() + v.vp.norm_squared()).sqrt()
    }

    fn project_tangent(&self, x: &FixedRankPoint, z: &Matrix) -> Result<FixedRankTangent> {
        ensure_shape(z, (self.m, self.n))?;
        let u = x.u();
        let v = x.v();
        let zv = z * v;
        let ztu = z.transpose() * u;
        let m = u.transpose() * &zv;
        let up = zv - u * &m;
        let vp = ztu - v * m.transpose();
        Ok(self.unchecked_tangent(x, m, up, vp))
    }

    fn project_combination(&self, x: &FixedRankPoint, terms: &[(f64, &FixedRankPoint)]) -> Result<FixedRankTangent> {
        if terms.is_empty() {
            return Ok(self.zero_tangent(x));
        }
        let scaled: Vec<Matrix> = terms.iter().map(|(c, y)| y.u() * (y.s() * *c)).collect();
        let a = hcat(&scaled.iter().collect::<Vec<_>>());
        let b = hcat(&terms.iter().map(|(_, y)| y.v()).collect::<Vec<_>>());
        self.project_factored(x, &a, &b)
    }

    /// Splits `V' = V C + E` with `C = VᵀV'`, `VᵀE = 0`; then
    /// `‖X − Y‖² = ‖U S − U' S' Cᵀ‖² + ‖E S'ᵀ‖²`, each term a direct
    /// difference (no cancellation between large squared norms).
    fn ambient_distance(&self, x: &FixedRankPoint, y: &FixedRankPoint) -> f64 {
        if x.same_as(y) {
            return 0.0;
        }
        let c = x.v().tr_mul(y.v());
        let e = y.v() - x.v() * &c;
        let along = x.u() * x.s() - y.u() * (y.s() * c.transpose());
        let across = e * y.s().transpose();
        (along.norm_squared() + across.norm_squared()).sqrt()
    }

    fn ambient_norm(&self, x: &FixedRankPoint) -> f64 {
        x.s().norm()
    }

    fn tangent_distance(&self, u: &FixedRankTangent, w: &FixedRankTangent) -> f64 {
        let (au, bu) = u.factors();
        let (aw, bw) = w.factors();
        factored_norm(&hcat(&[&au, &(aw * -1.0)]), &hcat(&[&bu, &bw]))
    }

    fn to_ambient(&self, x: &FixedRankPoint) -> Matrix {
        x.u() * x.s() * x.v().transpose()
    }

    fn tangent_to_ambient(&self, w: &FixedRankTangent) -> Matrix {
        let (a, b) = w.factors();
        a * b.transpose()
    }

    fn check_point(&self, x: &FixedRankPoint, tol: f64) -> Result<()> {
        ensure_shape(x.u(), (self.m, self.k))?;
        ensure_shape(x.s(), (self.k, self.k))?;
        ensure_shape(x.v(), (self.n, self.k))?;
        let residual = orthonormality_residual(x.u()).max(orthonormality_residual(x.v()));
        if !(residual < tol) {
            return Err(Error::InfeasiblePoint { residual });
        }
        let sv = svd_thin(x.s())?;
        if !(sv.s[self.k - 1] > tol::RANK_RELATIVE * sv.s[0]) {
            return Err(Error::RankTooSmall { rank: self.k });
        }
        Ok(())
    }

    fn check_tangent(&self, w: &FixedRankTangent, tol: f64) -> Result<()> {
        ensure_shape(&w.m, (self.k, self.k))?;
        ensure_shape(&w.up, (self.m, self.k))?;
        ensure_shape(&w.vp, (self.n, self.k))?;
        let residual = (w.base.u().transpose() * &w.up)
            .norm()
            .max((w.base.v().transpose() * &w.vp).norm());
        if residual < tol {
            Ok(())
        } else {
            Err(Error::NotTangent { residual })
        }
    }

    fn random_point(&self, rng: &mut Rng) -> FixedRankPoint {
        let (u, _) = qr_posdiag(&random_gaussian(self.m, self.k, rng)).expect("full rank");
        let (v, _) = qr_posdiag(&random_gaussian(self.n, self.k, rng)).expect("full rank");
        let (r1, _) = qr_posdiag(&random_gaussian(self.k, self.k, rng)).expect("full rank");
        let (r2, _) = qr_posdiag(&random_gaussian(self.k, self.k, rng)).expect("full rank");
        let sigma = random_uniform(self.k, 1, 1.0, 3.0, rng);
        let s = r1 * Matrix::from_diagonal(&sigma.column(0).into_owned()) * r2.transpose();
        FixedRankPoint::from_parts(u, s, v)
    }

    fn random_tangent(&self, x: &FixedRankPoint, rng: &mut Rng) -> FixedRankTangent {
        let m = random_gaussian(self.k, self.k, rng);
        let mut up = random_gaussian(self.m, self.k, rng);
        let mut vp = random_gaussian(self.n, self.k, rng);
        up -= x.u() * (x.u().transpose() * &up);
        vp -= x.v() * (x.v().transpose() * &vp);
        let t = self.unchecked_tangent(x, m, up, vp);
        let norm = self.tangent_norm(&t);
        self.tangent_scale(1.0 / norm, &t)
    }
}

impl PointCodec for FixedRank {
    fn encode_point(&self, x: &FixedRankPoint) -> String {
        format_blocks(&[("U", x.u()), ("S", x.s()), ("V", x.v())])
    }

    fn decode_point(&self, text: &str) -> Result<FixedRankPoint> {
        let mut blocks = parse_blocks(text, &["U", "S", "V"])?.into_iter();
        let (u, s, v) = (blocks.next().unwrap(), blocks.next().unwrap(), blocks.next().unwrap());
        self.point(u, s, v)
    }

    fn encode_tangent(&self, w: &FixedRankTangent) -> String {
        format_blocks(&[("M", &w.m), ("Up", &w.up), ("Vp", &w.vp)])
    }

    fn decode_tangent(&self, base: &FixedRankPoint, text: &str) -> Result<FixedRankTangent> {
        let mut blocks = parse_blocks(text, &["M", "Up", "Vp"])?.into_iter();
        let (m, up, vp) = (blocks.next().unwrap(), blocks.next().unwrap(), blocks.next().unwrap());
        self.tangent(base, m, up, vp)
    }
}
