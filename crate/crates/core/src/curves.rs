//! Smooth ground-truth curves for the experiments and their sampling.
//!
//! Two random families: the Q-factor of a cubic matrix polynomial on the
//! Stiefel manifold, and the thin SVD of a product of matrix polynomials on
//! the fixed-rank manifold. A third, flat family (full-rank matrices along a
//! straight line) serves as an analytic oracle.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixedrank::{factored_norm, hcat, FixedRank, FixedRankPoint};
use crate::hermite::TangentSample;
use crate::io::PointCodec;
use crate::linalg::{qr_posdiag, random_gaussian, random_uniform, rng_from_seed, svd_thin, Matrix, Rng};
use crate::manifold::{fd_velocity, Manifold};
use crate::stiefel::{Stiefel, StiefelPoint, StiefelRetraction};

/// Evaluators accept parameters this fraction of the interval length beyond
/// either end, so that finite-difference stencils at the end nodes stay
/// inside the evaluator domain.
pub const DOMAIN_MARGIN: f64 = 1e-3;

/// Default finite-difference step for sampled velocities.
pub const DEFAULT_SAMPLE_STEP: f64 = 1e-5;

/// Relative singular-value gap below which the SVD path may reorder columns.
const CROSSING_TOL: f64 = 1e-8;

/// Relative threshold on `σ_r / σ_1` for the SVD path.
const RANK_DROP: f64 = 1e-10;

/// `C_0 + t C_1 + … + t^d C_d`.
#[derive(Debug, Clone)]
pub struct PolynomialMatrixCurve {
    coeffs: Vec<Matrix>,
}

impl PolynomialMatrixCurve {
    pub fn new(coeffs: Vec<Matrix>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidInput("polynomial curve needs degree >= 1".into()));
        }
        let shape = coeffs[0].shape();
        if let Some(c) = coeffs.iter().find(|c| c.shape() != shape) {
            return Err(Error::ShapeMismatch {
                expected: shape,
                found: c.shape(),
            });
        }
        Ok(PolynomialMatrixCurve { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Matrix] {
        &self.coeffs
    }

    /// Horner evaluation.
    pub fn eval(&self, t: f64) -> Matrix {
        let mut acc = self.coeffs[self.degree()].clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc *= t;
            acc += c;
        }
        acc
    }

    /// Entrywise uniform coefficients; `ranges[j]` is the range of `C_j`.
    fn random(rows: usize, cols: usize, ranges: &[(f64, f64)], rng: &mut Rng) -> Self {
        PolynomialMatrixCurve {
            coeffs: ranges.iter().map(|&(lo, hi)| random_uniform(rows, cols, lo, hi, rng)).collect(),
        }
    }
}

/// Identifies a curve instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "instance", rename_all = "snake_case")]
pub enum CurveDescriptor {
    Qfactor {
        n: usize,
        k: usize,
        seed: u64,
        interval: [f64; 2],
    },
    Svd {
        m: usize,
        n: usize,
        rank: usize,
        seed: u64,
        interval: [f64; 2],
        tail_rank: usize,
        tail_amplitude: f64,
    },
    FlatLinear {
        m: usize,
        n: usize,
        seed: u64,
        interval: [f64; 2],
    },
}

/// A smooth curve on a manifold. Evaluators may carry state between calls
/// (the SVD path does), so evaluation takes `&mut self`; clone for parallel
/// use.
pub trait ManifoldCurve: Clone + Send {
    type Geometry: PointCodec;

    fn manifold(&self) -> &Self::Geometry;

    /// Nominal parameter interval.
    fn interval(&self) -> (f64, f64);

    fn eval(&mut self, t: f64) -> Result<<Self::Geometry as Manifold>::Point>;

    fn descriptor(&self) -> CurveDescriptor;

    /// Interval widened by [`DOMAIN_MARGIN`] on both sides.
    fn domain(&self) -> (f64, f64) {
        let (a, b) = self.interval();
        let pad = DOMAIN_MARGIN * (b - a);
        (a - pad, b + pad)
    }

    /// Projected central difference of the curve at `t`.
    fn velocity(&mut self, t: f64, step: f64) -> Result<<Self::Geometry as Manifold>::Tangent> {
        let m = self.manifold().clone();
        fd_velocity(&m, |s| self.eval(s), t, step)
    }

    /// [`ManifoldCurve::velocity`] given the point `x = eval(t)`.
    fn velocity_at(
        &mut self,
        t: f64,
        x: &<Self::Geometry as Manifold>::Point,
        step: f64,
    ) -> Result<<Self::Geometry as Manifold>::Tangent> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput(format!("finite-difference step {step}")));
        }
        let plus = self.eval(t + step)?;
        let minus = self.eval(t - step)?;
        let c = 0.5 / step;
        self.manifold().project_combination(x, &[(c, &plus), (-c, &minus)])
    }
}

fn check_domain<C: ManifoldCurve>(curve: &C, t: f64) -> Result<()> {
    let (lo, hi) = curve.domain();
    if t >= lo && t <= hi {
        Ok(())
    } else {
        Err(Error::OutOfRange { t, lo, hi })
    }
}

/// Tangent samples of a curve plus the descriptor of its source.
#[derive(Debug, Clone)]
pub struct SampledCurve<M: Manifold> {
    pub samples: Vec<TangentSample<M>>,
    pub descriptor: CurveDescriptor,
}

/// Feasibility tolerance for stored samples.
const SAMPLE_CHECK: f64 = 1e-9;

impl<M: Manifold> SampledCurve<M> {
    /// Validates time ordering and feasibility of every sample.
    pub fn new(m: &M, samples: Vec<TangentSample<M>>, descriptor: CurveDescriptor) -> Result<Self> {
        if samples.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::InvalidInput("sample times must increase strictly".into()));
        }
        for s in &samples {
            m.check_point(&s.point, SAMPLE_CHECK)?;
            m.check_tangent(&s.velocity, SAMPLE_CHECK)?;
        }
        Ok(SampledCurve { samples, descriptor })
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Every `s`-th sample, always keeping the last one.
    pub fn subsample(&self, s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidInput("subsample factor must be positive".into()));
        }
        let last = self.samples.len() - 1;
        if !last.is_multiple_of(s) {
            return Err(Error::InvalidInput(format!(
                "{} samples cannot be subsampled evenly by {s}",
                self.samples.len()
            )));
        }
        Ok(SampledCurve {
            samples: self.samples.iter().step_by(s).cloned().collect(),
            descriptor: self.descriptor.clone(),
        })
    }
}

/// `count + 1` uniformly spaced times from `a` to `b`, endpoints exact.
pub fn uniform_times(a: f64, b: f64, segments: usize) -> Vec<f64> {
    (0..=segments)
        .map(|i| {
            if i == segments {
                b
            } else {
                a + (b - a) * i as f64 / segments as f64
            }
        })
        .collect()
}

/// Samples `curve` at `times` with projected central-difference velocities.
pub fn sample_curve<C: ManifoldCurve>(
    curve: &mut C,
    times: &[f64],
    fd_step: f64,
) -> Result<SampledCurve<C::Geometry>> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidInput(format!("finite-difference step {fd_step}")));
    }
    let (lo, hi) = curve.domain();
    if let Some(&t) = times.iter().find(|&&t| !(t - fd_step >= lo && t + fd_step <= hi)) {
        return Err(Error::OutOfRange { t, lo: lo + fd_step, hi: hi - fd_step });
    }
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let point = curve.eval(t)?;
        let velocity = curve.velocity_at(t, &point, fd_step)?;
        samples.push(TangentSample { t, point, velocity });
    }
    let m = curve.manifold().clone();
    SampledCurve::new(&m, samples, curve.descriptor())
}

/// `t ↦ qf(Y(t))` with `Y` a cubic `n×k` matrix polynomial.
#[derive(Debug, Clone)]
pub struct QFactorCurve {
    manifold: Stiefel,
    y: PolynomialMatrixCurve,
    seed: u64,
    interval: (f64, f64),
}

/// Coefficient ranges of the Q-factor instance.
const QFACTOR_RANGES: [(f64, f64); 4] = [(0.0, 1.0), (0.0, 0.5), (0.0, 0.5), (0.0, 0.2)];

/// Random Q-factor curve on `St(n, k)` equipped with `retraction`.
pub fn qfactor_instance(
    n: usize,
    k: usize,
    seed: u64,
    interval: (f64, f64),
    retraction: StiefelRetraction,
) -> Result<QFactorCurve> {
    if !(n >= k && k >= 1) {
        return Err(Error::InvalidInput(format!("Q-factor instance needs n >= k >= 1, got n = {n}, k = {k}")));
    }
    check_interval(interval)?;
    let mut rng = rng_from_seed(seed);
    let y = PolynomialMatrixCurve::random(n, k, &QFACTOR_RANGES, &mut rng);
    Ok(QFactorCurve {
        manifold: Stiefel::new(n, k, retraction),
        y,
        seed,
        interval,
    })
}

fn check_interval((a, b): (f64, f64)) -> Result<()> {
    if a.is_finite() && b.is_finite() && a < b {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("invalid interval [{a}, {b}]")))
    }
}

impl QFactorCurve {
    /// Q-factor curve of an explicit polynomial.
    pub fn from_polynomial(
        y: PolynomialMatrixCurve,
        interval: (f64, f64),
        retraction: StiefelRetraction,
    ) -> Result<Self> {
        check_interval(interval)?;
        let (n, k) = y.coefficients()[0].shape();
        if n < k {
            return Err(Error::InvalidInput("Q-factor curve needs n >= k".into()));
        }
        Ok(QFactorCurve {
            manifold: Stiefel::new(n, k, retraction),
            y,
            seed: 0,
            interval,
        })
    }

    pub fn polynomial(&self) -> &PolynomialMatrixCurve {
        &self.y
    }
}

impl ManifoldCurve for QFactorCurve {
    type Geometry = Stiefel;

    fn manifold(&self) -> &Stiefel {
        &self.manifold
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eval(&mut self, t: f64) -> Result<StiefelPoint> {
        check_domain(self, t)?;
        let (q, _) = qr_posdiag(&self.y.eval(t))?;
        self.manifold.point(q)
    }

    fn descriptor(&self) -> CurveDescriptor {
        CurveDescriptor::Qfactor {
            n: self.manifold.n,
            k: self.manifold.k,
            seed: self.seed,
            interval: [self.interval.0, self.interval.1],
        }
    }
}

/// Optional small-norm extension of the SVD instance: the reference curve is
/// `Y Zᵀ + Y_t Z_tᵀ` and the manifold curve is its best rank-`r`
/// approximation.
#[derive(Debug, Clone)]
struct Tail {
    y: PolynomialMatrixCurve,
    z: PolynomialMatrixCurve,
    amplitude: f64,
}

/// `t ↦` thin rank-`r` SVD of `W(t) = Y(t) Z(t)ᵀ` with `Y` cubic (`m×r`) and
/// `Z` quadratic (`n×r`), aligned to the previous evaluation.
#[derive(Debug, Clone)]
pub struct SvdCurve {
    manifold: FixedRank,
    y: PolynomialMatrixCurve,
    z: PolynomialMatrixCurve,
    tail: Option<Tail>,
    seed: u64,
    interval: (f64, f64),
    previous: Option<(Matrix, Matrix)>,
}

const SVD_Y_RANGES: [(f64, f64); 4] = [(0.0, 1.0), (0.0, 0.5), (0.0, 0.5), (0.0, 0.5)];
const SVD_Z_RANGES: [(f64, f64); 3] = [(0.0, 1.0), (0.0, 0.5), (0.0, 0.5)];

/// Random SVD curve on the manifold of rank-`r` `m×n` matrices.
pub fn svd_instance(m: usize, n: usize, r: usize, seed: u64, interval: (f64, f64)) -> Result<SvdCurve> {
    if !(r >= 1 && r <= m.min(n)) {
        return Err(Error::InvalidInput(format!("SVD instance needs 1 <= r <= min(m, n), got r = {r}")));
    }
    check_interval(interval)?;
    let mut rng = rng_from_seed(seed);
    let y = PolynomialMatrixCurve::random(m, r, &SVD_Y_RANGES, &mut rng);
    let z = PolynomialMatrixCurve::random(n, r, &SVD_Z_RANGES, &mut rng);
    Ok(SvdCurve {
        manifold: FixedRank::new(m, n, r),
        y,
        z,
        tail: None,
        seed,
        interval,
        previous: None,
    })
}

impl SvdCurve {
    /// Adds a rank-`tail_rank` term to the reference matrix, scaled so that
    /// its norm at the interval midpoint is `amplitude · ‖Y Zᵀ‖_F`. The
    /// manifold curve becomes the rank-`r` truncation of the sum.
    pub fn with_tail(mut self, tail_rank: usize, amplitude: f64) -> Result<Self> {
        if tail_rank == 0 || amplitude == 0.0 {
            self.tail = None;
            return Ok(self);
        }
        let (m, n, r) = (self.manifold.m, self.manifold.n, self.manifold.k);
        if r + tail_rank > m.min(n) || !(amplitude > 0.0) {
            return Err(Error::InvalidInput(format!("tail of rank {tail_rank}, amplitude {amplitude}")));
        }
        let mut rng = rng_from_seed(self.seed ^ 0x7a11);
        let ty = PolynomialMatrixCurve::new(vec![
            random_gaussian(m, tail_rank, &mut rng),
            random_gaussian(m, tail_rank, &mut rng) * 0.5,
        ])?;
        let tz = PolynomialMatrixCurve::new(vec![
            random_gaussian(n, tail_rank, &mut rng),
            random_gaussian(n, tail_rank, &mut rng) * 0.5,
        ])?;
        let mid = 0.5 * (self.interval.0 + self.interval.1);
        let main = factored_norm(&self.y.eval(mid), &self.z.eval(mid));
        let raw = factored_norm(&ty.eval(mid), &tz.eval(mid));
        let scale = (amplitude * main / raw).sqrt();
        let scaled = |p: PolynomialMatrixCurve| {
            PolynomialMatrixCurve::new(p.coefficients().iter().map(|c| c * scale).collect()).expect("same shapes")
        };
        self.tail = Some(Tail {
            y: scaled(ty),
            z: scaled(tz),
            amplitude,
        });
        Ok(self)
    }

    /// Factors `(A, B)` of the reference matrix `A Bᵀ` at `t`.
    pub fn reference_factors(&self, t: f64) -> (Matrix, Matrix) {
        let (y, z) = (self.y.eval(t), self.z.eval(t));
        match &self.tail {
            None => (y, z),
            Some(tail) => (hcat(&[&y, &tail.y.eval(t)]), hcat(&[&z, &tail.z.eval(t)])),
        }
    }

    /// `‖W(t)‖_F` of the reference matrix.
    pub fn reference_norm(&self, t: f64) -> f64 {
        let (a, b) = self.reference_factors(t);
        factored_norm(&a, &b)
    }

    /// `‖W(t) − X‖_F` without forming either matrix.
    pub fn reference_distance(&self, t: f64, x: &FixedRankPoint) -> f64 {
        let (a, b) = self.reference_factors(t);
        let a = hcat(&[&a, &(x.u() * x.s() * -1.0)]);
        let b = hcat(&[&b, x.v()]);
        factored_norm(&a, &b)
    }

    /// Forgets the alignment state.
    pub fn reset(&mut self) {
        self.previous = None;
    }
}

impl ManifoldCurve for SvdCurve {
    type Geometry = FixedRank;

    fn manifold(&self) -> &FixedRank {
        &self.manifold
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eval(&mut self, t: f64) -> Result<FixedRankPoint> {
        check_domain(self, t)?;
        let r = self.manifold.k;
        let (a, b) = self.reference_factors(t);
        let (qa, ra) = qr_posdiag(&a).map_err(|_| Error::RankDrop { t })?;
        let (qb, rb) = qr_posdiag(&b).map_err(|_| Error::RankDrop { t })?;
        let core = svd_thin(&(ra * rb.transpose()))?;
        if !(core.s[r - 1] > RANK_DROP * core.s[0]) {
            return Err(Error::RankDrop { t });
        }
        let mut u = qa * core.u.columns(0, r);
        let mut v = qb * core.v.columns(0, r);
        let mut s = core.s.rows(0, r).into_owned();
        if let Some((pu, pv)) = &self.previous {
            align_factors(pu, pv, &mut u, &mut s, &mut v);
        }
        self.previous = Some((u.clone(), v.clone()));
        Ok(FixedRankPoint::from_parts(u, Matrix::from_diagonal(&s), v))
    }

    fn descriptor(&self) -> CurveDescriptor {
        let (tail_rank, tail_amplitude) = match &self.tail {
            Some(t) => (t.y.coefficients()[0].ncols(), t.amplitude),
            None => (0, 0.0),
        };
        CurveDescriptor::Svd {
            m: self.manifold.m,
            n: self.manifold.n,
            rank: self.manifold.k,
            seed: self.seed,
            interval: [self.interval.0, self.interval.1],
            tail_rank,
            tail_amplitude,
        }
    }
}

/// Makes the SVD factors `(U, s, V)` continue `(U_prev, V_prev)`.
///
/// Columns whose `|s|` lie within a relative `1e-8` of each other are
/// permuted to follow the previous columns they overlap most. Then column
/// `j` of `U` (resp. `V`) is negated, with the sign moved into `s_j`,
/// whenever `(U_prevᵀ U)_jj < 0` (resp. for `V`). Applying the alignment a
/// second time is a no-op.
pub fn align_factors(prev_u: &Matrix, prev_v: &Matrix, u: &mut Matrix, s: &mut DVector<f64>, v: &mut Matrix) {
    let r = s.len();
    let scale = s.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let overlap_u = prev_u.transpose() * &*u;
    let overlap_v = prev_v.transpose() * &*v;

    let mut perm: Vec<usize> = (0..r).collect();
    let mut start = 0;
    while start < r {
        let mut end = start + 1;
        while end < r && (s[end - 1].abs() - s[end].abs()).abs() <= CROSSING_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            let mut free: Vec<usize> = (start..end).collect();
            for j in start..end {
                let (pos, _) = free
                    .iter()
                    .enumerate()
                    .map(|(p, &c)| (p, overlap_u[(j, c)].abs() + overlap_v[(j, c)].abs()))
                    .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
                perm[j] = free.remove(pos);
            }
        }
        start = end;
    }
    if perm.iter().enumerate().any(|(j, &c)| j != c) {
        *u = Matrix::from_columns(&perm.iter().map(|&c| u.column(c)).collect::<Vec<_>>());
        *v = Matrix::from_columns(&perm.iter().map(|&c| v.column(c)).collect::<Vec<_>>());
        *s = DVector::from_iterator(r, perm.iter().map(|&c| s[c]));
    }

    for j in 0..r {
        let du = prev_u.column(j).dot(&u.column(j));
        if du < 0.0 {
            u.column_mut(j).neg_mut();
            s[j] = -s[j];
        }
        let dv = prev_v.column(j).dot(&v.column(j));
        if dv < 0.0 {
            v.column_mut(j).neg_mut();
            s[j] = -s[j];
        }
    }
}

/// `t ↦ A_0 + t A_1` on the open set of full-rank `m×n` matrices (`m ≥ n`),
/// seen as the fixed-rank manifold with `k = n`. The orthographic retraction
/// there is `X + W`, so linear data is reproduced exactly.
#[derive(Debug, Clone)]
pub struct FlatLinearCurve {
    manifold: FixedRank,
    a0: Matrix,
    a1: Matrix,
    seed: u64,
    interval: (f64, f64),
}

pub fn flat_linear_instance(m: usize, n: usize, seed: u64, interval: (f64, f64)) -> Result<FlatLinearCurve> {
    if !(m >= n && n >= 1) {
        return Err(Error::InvalidInput(format!("flat instance needs m >= n >= 1, got {m}x{n}")));
    }
    check_interval(interval)?;
    let manifold = FixedRank::new(m, n, n);
    let mut rng = rng_from_seed(seed);
    let x = manifold.random_point(&mut rng);
    let a0 = manifold.to_ambient(&x);
    // Keep A_0 + t A_1 well inside the full-rank set over the interval.
    let reach = interval.0.abs().max(interval.1.abs()).max(1e-300);
    let a1 = random_gaussian(m, n, &mut rng);
    let a1 = &a1 * (0.2 / (reach * a1.norm()));
    Ok(FlatLinearCurve {
        manifold,
        a0,
        a1,
        seed,
        interval,
    })
}

impl FlatLinearCurve {
    /// `A_1`, the exact velocity everywhere.
    pub fn slope(&self) -> &Matrix {
        &self.a1
    }

    pub fn ambient(&self, t: f64) -> Matrix {
        &self.a0 + &self.a1 * t
    }
}

impl ManifoldCurve for FlatLinearCurve {
    type Geometry = FixedRank;

    fn manifold(&self) -> &FixedRank {
        &self.manifold
    }

    fn interval(&self) -> (f64, f64) {
        self.interval
    }

    fn eval(&mut self, t: f64) -> Result<FixedRankPoint> {
        check_domain(self, t)?;
        self.manifold.truncate_dense(&self.ambient(t))
    }

    fn descriptor(&self) -> CurveDescriptor {
        CurveDescriptor::FlatLinear {
            m: self.manifold.m,
            n: self.manifold.n,
            seed: self.seed,
            interval: [self.interval.0, self.interval.1],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::orthonormality_residual;

    fn desk_q() -> QFactorCurve {
        qfactor_instance(30, 4, 7, (-1.1, 1.1), StiefelRetraction::QFactor).unwrap()
    }

    #[test]
    fn polynomial_horner() {
        let c0 = Matrix::from_row_slice(1, 1, &[1.0]);
        let c1 = Matrix::from_row_slice(1, 1, &[2.0]);
        let c2 = Matrix::from_row_slice(1, 1, &[3.0]);
        let p = PolynomialMatrixCurve::new(vec![c0.clone(), c1, c2]).unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(2.0)[(0, 0)], 1.0 + 4.0 + 12.0);
        assert!(PolynomialMatrixCurve::new(vec![c0.clone()]).is_err());
        assert!(PolynomialMatrixCurve::new(vec![c0, Matrix::zeros(2, 1)]).is_err());
    }

    #[test]
    fn qfactor_points_are_orthonormal_and_continuous() {
        let mut c = desk_q();
        for i in 0..=22 {
            let t = -1.1 + 0.1 * i as f64;
            let q = c.eval(t).unwrap();
            assert!(orthonormality_residual(q.matrix()) < 1e-10);
            let q2 = c.eval((t + 1e-6).min(1.1)).unwrap();
            assert!((q2.matrix() - q.matrix()).norm() < 1e-4);
        }
        assert!(matches!(c.eval(1.2), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn qfactor_constant_polynomial() {
        let mut rng = rng_from_seed(3);
        let y0 = random_uniform(6, 2, 0.0, 1.0, &mut rng);
        let z = Matrix::zeros(6, 2);
        let p = PolynomialMatrixCurve::new(vec![y0, z.clone(), z.clone(), z]).unwrap();
        let mut c = QFactorCurve::from_polynomial(p, (0.0, 1.0), StiefelRetraction::QFactor).unwrap();
        let a = c.eval(0.0).unwrap();
        let b = c.eval(0.77).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn instance_validation() {
        assert!(qfactor_instance(3, 4, 0, (0.0, 1.0), StiefelRetraction::QFactor).is_err());
        assert!(qfactor_instance(5, 2, 0, (1.0, 0.0), StiefelRetraction::QFactor).is_err());
        assert!(svd_instance(5, 4, 5, 0, (0.0, 1.0)).is_err());
        assert!(flat_linear_instance(2, 3, 0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn svd_reconstruction_matches_dense_product() {
        let mut c = svd_instance(40, 25, 4, 11, (-0.5, 0.5)).unwrap();
        for &t in &[-0.5, -0.1, 0.3, 0.5] {
            let x = c.eval(t).unwrap();
            let (y, z) = c.reference_factors(t);
            let w = &y * z.transpose();
            let err = (c.manifold().to_ambient(&x) - &w).norm();
            assert!(err < 1e-9 * w.norm(), "t = {t}: {err}");
            assert!(c.reference_distance(t, &x) < 1e-9 * w.norm());
        }
    }

    #[test]
    fn svd_path_is_continuous() {
        let mut c = svd_instance(60, 30, 5, 12, (-0.5, 0.5)).unwrap();
        let mut prev = c.eval(-0.5).unwrap();
        let mut t: f64 = -0.5;
        while t < 0.5 {
            t += 1e-2;
            let x = c.eval(t.min(0.5)).unwrap();
            assert!((x.u() - prev.u()).norm() < 0.2, "jump at {t}");
            prev = x;
        }
        let a = c.eval(0.1).unwrap();
        let b = c.eval(0.1 + 1e-4).unwrap();
        assert!((b.u() - a.u()).norm() < 1e-2);
        assert!((b.v() - a.v()).norm() < 1e-2);
    }

    #[test]
    fn svd_constant_factors_give_constant_point() {
        let mut c = svd_instance(20, 15, 3, 13, (0.0, 1.0)).unwrap();
        let zero_y = Matrix::zeros(20, 3);
        let zero_z = Matrix::zeros(15, 3);
        c.y = PolynomialMatrixCurve::new(vec![c.y.coefficients()[0].clone(), zero_y.clone(), zero_y.clone(), zero_y])
            .unwrap();
        c.z = PolynomialMatrixCurve::new(vec![c.z.coefficients()[0].clone(), zero_z.clone(), zero_z]).unwrap();
        let a = c.eval(0.2).unwrap();
        let b = c.eval(0.9).unwrap();
        assert_eq!(a.u(), b.u());
        assert_eq!(a.s(), b.s());
        assert_eq!(a.v(), b.v());
    }

    #[test]
    fn alignment_is_idempotent_and_fixes_signs() {
        let mut rng = rng_from_seed(14);
        let (u0, _) = qr_posdiag(&random_gaussian(12, 4, &mut rng)).unwrap();
        let (v0, _) = qr_posdiag(&random_gaussian(9, 4, &mut rng)).unwrap();
        // Flip two columns and swap two equal singular values.
        let mut u = u0.clone();
        let mut v = v0.clone();
        u.column_mut(1).neg_mut();
        v.column_mut(3).neg_mut();
        u.swap_columns(2, 3);
        v.swap_columns(2, 3);
        let mut s = DVector::from_vec(vec![4.0, 3.0, 1.0, 1.0]);
        let w_before = &u * Matrix::from_diagonal(&s) * v.transpose();
        align_factors(&u0, &v0, &mut u, &mut s, &mut v);
        assert!((&u - &u0).norm() < 1e-14);
        assert!((&v - &v0).norm() < 1e-14);
        let w_after = &u * Matrix::from_diagonal(&s) * v.transpose();
        assert!((w_after - w_before).norm() < 1e-13);
        assert_eq!(s.as_slice(), &[4.0, -3.0, 1.0, -1.0]);

        let (u1, s1, v1) = (u.clone(), s.clone(), v.clone());
        align_factors(&u0, &v0, &mut u, &mut s, &mut v);
        assert_eq!((u, s, v), (u1, s1, v1));
    }

    #[test]
    fn tail_sets_reference_gap() {
        let base = svd_instance(50, 30, 4, 15, (-0.5, 0.5)).unwrap();
        let mut c = base.with_tail(2, 1e-4).unwrap();
        let x = c.eval(0.0).unwrap();
        let rel = c.reference_distance(0.0, &x) / c.reference_norm(0.0);
        assert!(rel > 1e-5 && rel < 1e-4, "{rel}");
        assert!(matches!(c.descriptor(), CurveDescriptor::Svd { tail_rank: 2, .. }));
    }

    #[test]
    fn sampling_counts_tangency_and_determinism() {
        let times = uniform_times(-1.1, 1.1, 10);
        let mut c = desk_q();
        let a = sample_curve(&mut c, &times, DEFAULT_SAMPLE_STEP).unwrap();
        assert_eq!(a.samples.len(), 11);
        let m = *c.manifold();
        for s in &a.samples {
            m.check_tangent(&s.velocity, 1e-9).unwrap();
        }
        let mut c2 = desk_q();
        let b = sample_curve(&mut c2, &times, DEFAULT_SAMPLE_STEP).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.point.matrix(), y.point.matrix());
            assert_eq!(m.tangent_to_ambient(&x.velocity), m.tangent_to_ambient(&y.velocity));
        }
        assert!(sample_curve(&mut c, &[0.0, 5.0], DEFAULT_SAMPLE_STEP).is_err());
        assert!(sample_curve(&mut c, &[0.5, 0.0], DEFAULT_SAMPLE_STEP).is_err());
    }

    #[test]
    fn flat_velocity_is_the_slope() {
        let mut c = flat_linear_instance(6, 3, 16, (0.0, 1.0)).unwrap();
        let sampled = sample_curve(&mut c, &uniform_times(0.0, 1.0, 4), DEFAULT_SAMPLE_STEP).unwrap();
        let m = *c.manifold();
        for s in &sampled.samples {
            assert!((m.tangent_to_ambient(&s.velocity) - c.slope()).norm() < 1e-8);
            assert!((m.to_ambient(&s.point) - c.ambient(s.t)).norm() < 1e-12);
        }
    }

    #[test]
    fn subsampling() {
        let mut c = desk_q();
        let full = sample_curve(&mut c, &uniform_times(-1.0, 1.0, 20), DEFAULT_SAMPLE_STEP).unwrap();
        let sub = full.subsample(5).unwrap();
        assert_eq!(sub.times(), [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|&t| {
            full.times().into_iter().find(|x| (x - t).abs() < 1e-12).unwrap()
        }).collect::<Vec<_>>());
        assert!(full.subsample(3).is_err());
        assert!(full.subsample(0).is_err());
        assert_eq!(full.subsample(1).unwrap().samples.len(), 21);
    }
}
