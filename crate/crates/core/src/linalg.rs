//! Dense matrix kernels behind the manifold geometries.
//!
//! Factorizations (QR, SVD) are delegated to `nalgebra`; this module adds the
//! sign and ordering conventions the retractions rely on, plus the two small
//! structured solves that realize the inverse Stiefel retractions:
//!
//! * `A R + Rᵀ Aᵀ = 2I` with `R` upper triangular (inverse Q-factor retraction),
//! * `A S + S Aᵀ = 2I` with `S` symmetric (inverse P-factor retraction).
//!
//! Both equations come from requiring `Xᵀ V` to be skew-symmetric when
//! `X + V = Y R` (resp. `Y S`).

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SVD};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{Error, Result};

/// Dense real matrix. Logical layout is row-major in the text format; storage
/// is whatever `nalgebra` uses.
pub type Matrix = DMatrix<f64>;

/// Seeded generator used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

/// Numerical tolerances, ~100x unit roundoff at the matrix sizes in use.
pub mod tol {
    /// Relative threshold on `min |R_jj|` (vs. `‖A‖_F`) for full column rank.
    pub const RANK_RELATIVE: f64 = 1e-12;
    /// Orthonormality residual `‖QᵀQ − I‖_F` produced by the factorizations.
    pub const ORTHONORMALITY: f64 = 1e-12;
    /// Residual of the structured (triangular / Lyapunov) solves.
    pub const STRUCTURED_RESIDUAL: f64 = 1e-10;
    /// Pivot ratio below which an LU factor is treated as singular.
    pub const PIVOT_RATIO: f64 = 1e-14;
    /// Feasibility tolerance for manifold points and tangents.
    pub const FEASIBILITY: f64 = 1e-10;
}

/// Largest `k` accepted by the structured solvers.
pub const MAX_STRUCTURED_DIM: usize = 64;

/// Iteration cap handed to the SVD.
const SVD_MAX_ITER: usize = 10_000;

/// Thin singular value decomposition `A = U diag(s) Vᵀ`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    /// Non-increasing, non-negative.
    pub s: DVector<f64>,
    pub v: Matrix,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn recompose(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, &sj) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(sj);
        }
        us * self.v.transpose()
    }
}

/// Thin QR with the sign convention `diag(R) > 0`.
///
/// Columns of `Q` and rows of `R` are flipped wherever Householder QR
/// produced a negative diagonal entry.
pub fn qr_posdiag(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (m, k) = a.shape();
    if m < k {
        return Err(Error::ShapeMismatch {
            expected: (k, k),
            found: (m, k),
        });
    }
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    let scale = a.norm();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
            r.row_mut(j).neg_mut();
        }
    }
    let min_diag = (0..k).map(|j| r[(j, j)]).fold(f64::INFINITY, f64::min);
    if !(min_diag > tol::RANK_RELATIVE * scale) {
        return Err(Error::RankDeficient);
    }
    Ok((q, r))
}

/// Singular values only, non-increasing.
pub fn singular_values(a: &Matrix) -> Result<DVector<f64>> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let svd = SVD::try_new(a.clone(), false, false, f64::EPSILON, SVD_MAX_ITER).ok_or(Error::NoConvergence)?;
    Ok(svd.singular_values)
}

/// Thin SVD with singular values sorted in non-increasing order.
pub fn svd_thin(a: &Matrix) -> Result<ThinSvd> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, SVD_MAX_ITER)
        .ok_or(Error::NoConvergence)?;
    let u = svd.u.ok_or(Error::NoConvergence)?;
    let v = svd.v_t.ok_or(Error::NoConvergence)?.transpose();
    Ok(ThinSvd {
        u,
        s: svd.singular_values,
        v,
    })
}

/// Orthonormal polar factor `P` of a full-column-rank `A = P H`.
///
/// `A = Q R` first, then the scaled Newton iteration `X ← (γX + X⁻ᵀ/γ)/2`
/// on `R`. The SVD route is less accurate: its singular vectors carry
/// errors around `1e-12` that leave `PᵀA` visibly non-symmetric.
pub fn polar(a: &Matrix) -> Result<Matrix> {
    let (m, k) = a.shape();
    if m < k {
        return Err(Error::ShapeMismatch {
            expected: (k, k),
            found: (m, k),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite matrix entry".into()));
    }
    let qr = a.clone().qr();
    let (q, mut x) = (qr.q(), qr.r());
    let sv = svd_thin(&x)?;
    if !(sv.s[k - 1] > tol::RANK_RELATIVE * sv.s[0]) {
        return Err(Error::RankDeficient);
    }
    let mut scaled = true;
    let mut finishing = false;
    for _ in 0..POLAR_MAX_ITER {
        let inv_t = x.clone().try_inverse().ok_or(Error::RankDeficient)?.transpose();
        let gamma = if scaled { (inv_t.norm() / x.norm()).sqrt() } else { 1.0 };
        let next = (&x * gamma + inv_t / gamma) * 0.5;
        let change = (&next - &x).norm();
        x = next;
        if finishing {
            return Ok(q * x);
        }
        if change < 1e-2 {
            scaled = false;
        }
        // Quadratic convergence: one more step after this lands at roundoff.
        if change < 1e-8 {
            finishing = true;
        }
    }
    Err(Error::NoConvergence)
}

const POLAR_MAX_ITER: usize = 100;

/// Solves `A R + Rᵀ Aᵀ = 2I` for upper-triangular `R` with positive diagonal.
///
/// Column `j` of `R` solves the leading `(j+1)x(j+1)` system
/// `A[..=j, ..=j] R[..=j, j] = c` with `c_i = -(A R)[j, i]` for `i < j`
/// (already known from earlier columns) and `c_j = 1`.
pub fn solve_sym_part_triangular(a: &Matrix) -> Result<Matrix> {
    let k = square_dim(a)?;
    if k > MAX_STRUCTURED_DIM {
        return Err(Error::DimensionTooLarge {
            k,
            max: MAX_STRUCTURED_DIM,
        });
    }
    let mut r = Matrix::zeros(k, k);
    // (A R) restricted to the columns computed so far.
    let mut ar = Matrix::zeros(k, k);
    for j in 0..k {
        let block = a.view((0, 0), (j + 1, j + 1)).into_owned();
        let mut rhs = DVector::zeros(j + 1);
        for i in 0..j {
            rhs[i] = -ar[(j, i)];
        }
        rhs[j] = 1.0;
        let x = lu_solve(block, rhs).ok_or(Error::SingularBlock { size: j + 1 })?;
        if !(x[j] > 0.0) {
            return Err(Error::NegativeDiagonal {
                index: j,
                value: x[j],
            });
        }
        for i in 0..=j {
            r[(i, j)] = x[i];
        }
        let col = a.columns(0, j + 1) * &x;
        ar.set_column(j, &col);
    }
    Ok(r)
}

/// Solves `A S + S Aᵀ = 2I` for symmetric `S` through the `k²xk²` vectorized
/// system `(I ⊗ A + A ⊗ I) vec(S) = vec(2I)`.
pub fn solve_lyapunov(a: &Matrix) -> Result<Matrix> {
    let k = square_dim(a)?;
    if k > MAX_STRUCTURED_DIM {
        return Err(Error::DimensionTooLarge {
            k,
            max: MAX_STRUCTURED_DIM,
        });
    }
    let n = k * k;
    // Column-major vec: vec(S)[i + k j] = S[i, j].
    let mut sys = Matrix::zeros(n, n);
    for j in 0..k {
        for i in 0..k {
            let row = i + k * j;
            // (A S)[i, j] = sum_l A[i, l] S[l, j]
            for l in 0..k {
                sys[(row, l + k * j)] += a[(i, l)];
            }
            // (S Aᵀ)[i, j] = sum_l S[i, l] A[j, l]
            for l in 0..k {
                sys[(row, i + k * l)] += a[(j, l)];
            }
        }
    }
    let mut rhs = DVector::zeros(n);
    for i in 0..k {
        rhs[i + k * i] = 2.0;
    }
    let x = lu_solve(sys, rhs).ok_or(Error::SingularSystem)?;
    let s = Matrix::from_column_slice(k, k, x.as_slice());
    Ok(sym(&s))
}

/// LU solve that refuses numerically singular factors.
fn lu_solve(a: Matrix, b: DVector<f64>) -> Option<DVector<f64>> {
    let lu = a.lu();
    let u = lu.u();
    let diag = u.diagonal();
    let max = diag.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let min = diag.iter().fold(f64::INFINITY, |acc, x| acc.min(x.abs()));
    if !(max > 0.0) || min <= tol::PIVOT_RATIO * max {
        return None;
    }
    let x = lu.solve(&b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn square_dim(a: &Matrix) -> Result<usize> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::ShapeMismatch {
            expected: (r, r),
            found: (r, c),
        });
    }
    Ok(r)
}

/// `(M + Mᵀ) / 2`.
pub fn sym(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// `‖AᵀA − I‖_F`.
pub fn orthonormality_residual(a: &Matrix) -> f64 {
    let k = a.ncols();
    (a.transpose() * a - Matrix::identity(k, k)).norm()
}

pub fn ensure_shape(a: &Matrix, expected: (usize, usize)) -> Result<()> {
    if a.shape() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            found: a.shape(),
        });
    }
    Ok(())
}

/// Matrix with independent standard-normal entries.
pub fn random_gaussian(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Matrix with independent entries uniform on `[lo, hi)`.
pub fn random_uniform(rows: usize, cols: usize, lo: f64, hi: f64, rng: &mut Rng) -> Matrix {
    let dist = Uniform::new(lo, hi).expect("valid uniform range");
    Matrix::from_fn(rows, cols, |_, _| dist.sample(rng))
}

/// Uniform scalar on `[0, 1)`.
pub fn random_unit(rng: &mut Rng) -> f64 {
    rng.random::<f64>()
}

/// Serializes a matrix: header `rows cols`, then one row per line, 17
/// significant digits per entry.
pub fn format_matrix(a: &Matrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{:.16e}", a[(i, j)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// Parses the format written by [`format_matrix`]. Whitespace layout of the
/// entries is free; only their count and row-major order matter.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut tokens = text.split_whitespace();
    let mut dim = |what: &str| -> Result<usize> {
        tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse::<usize>()
            .map_err(|e| Error::Parse(format!("bad {what}: {e}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    if rows == 0 || cols == 0 {
        return Err(Error::Parse("matrix dimensions must be positive".into()));
    }
    let entries: Vec<f64> = tokens
        .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad entry {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    if entries.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} entries, found {}",
            rows * cols,
            entries.len()
        )));
    }
    if entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::Parse("non-finite entry".into()));
    }
    Ok(Matrix::from_row_slice(rows, cols, &entries))
}
