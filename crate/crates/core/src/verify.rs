//! Cross-module property suite behind `rh-interp verify`.
//!
//! Every property runs on fixed seeds and reports the worst observed
//! residual against its tolerance. Tolerances can be multiplied through the
//! `RH_INTERP_TOLERANCE_SCALE` environment variable; a scale far below 1
//! makes the suite fail, which is how the failure path is exercised.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedrank::FixedRank;
use crate::hermite::{hermite_segment, Interpolant, Scheme, TangentSample};
use crate::linalg::{rng_from_seed, solve_lyapunov, solve_sym_part_triangular, Matrix, Rng};
use crate::manifold::{decasteljau, endpoint_curve, endpoint_symmetry_check, fd_velocity, Manifold};
use crate::stiefel::{Stiefel, StiefelRetraction};

pub const TOLERANCE_SCALE_VAR: &str = "RH_INTERP_TOLERANCE_SCALE";

/// Random draws per property.
const TRIALS: usize = 50;

/// Online-evaluation probes per geometry.
const PROBES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Geometry {
    Stiefel,
    FixedRank,
    All,
}

impl std::str::FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stiefel" => Ok(Geometry::Stiefel),
            "fixed-rank" | "fixedrank" => Ok(Geometry::FixedRank),
            "all" => Ok(Geometry::All),
            _ => Err(Error::InvalidInput(format!(
                "unknown geometry {s:?} (expected stiefel, fixed-rank or all)"
            ))),
        }
    }
}

/// Tolerances of the suite, all absolute unless named relative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub roundtrip: f64,
    pub rigidity: f64,
    pub second_derivative_rel: f64,
    pub residual: f64,
    pub endpoint: f64,
    pub slope: f64,
    pub online: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            roundtrip: 1e-9,
            rigidity: 1e-5,
            second_derivative_rel: 1e-4,
            residual: 1e-10,
            endpoint: 1e-10,
            slope: 1e-5,
            online: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(self, s: f64) -> Self {
        Tolerances {
            roundtrip: self.roundtrip * s,
            rigidity: self.rigidity * s,
            second_derivative_rel: self.second_derivative_rel * s,
            residual: self.residual * s,
            endpoint: self.endpoint * s,
            slope: self.slope * s,
            online: self.online * s,
        }
    }

    /// Defaults scaled by `RH_INTERP_TOLERANCE_SCALE` when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(TOLERANCE_SCALE_VAR) {
            Ok(text) => {
                let s: f64 = text
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("{TOLERANCE_SCALE_VAR}={text:?} is not a number")))?;
                if !(s >= 0.0 && s.is_finite()) {
                    return Err(Error::InvalidInput(format!("{TOLERANCE_SCALE_VAR} must be finite and >= 0")));
                }
                Ok(Self::default().scaled(s))
            }
            Err(_) => Ok(Self::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{status} {:<48} worst {:.3e}  tol {:.1e}", self.name, self.worst, self.tolerance)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub results: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn first_failure(&self) -> Option<&PropertyResult> {
        self.results.iter().find(|r| !r.passed)
    }

    fn record(&mut self, name: String, worst: f64, tolerance: f64) {
        let passed = worst.is_finite() && worst <= tolerance;
        self.results.push(PropertyResult {
            name,
            worst,
            tolerance,
            passed,
        });
    }

    /// Records a property whose evaluation may fail outright; an error
    /// counts as an infinite residual.
    fn check(&mut self, name: String, tolerance: f64, worst: Result<f64>) {
        self.record(name, worst.unwrap_or(f64::INFINITY), tolerance);
    }
}

/// Runs the suite on `geometry` with tolerances from the environment.
pub fn cmd_verify(geometry: Geometry) -> Result<VerifyReport> {
    Ok(run_suite(geometry, &Tolerances::from_env()?))
}

pub fn run_suite(geometry: Geometry, tol: &Tolerances) -> VerifyReport {
    let mut report = VerifyReport::default();
    if matches!(geometry, Geometry::Stiefel | Geometry::All) {
        for (label, retraction) in [("stiefel-q", StiefelRetraction::QFactor), ("stiefel-p", StiefelRetraction::PFactor)] {
            manifold_properties(&mut report, label, &Stiefel::new(12, 4, retraction), 11, tol);
        }
        inverse_residuals(&mut report, tol);
    }
    if matches!(geometry, Geometry::FixedRank | Geometry::All) {
        manifold_properties(&mut report, "fixed-rank", &FixedRank::new(14, 10, 3), 13, tol);
        orthographic_oracle(&mut report, tol);
    }
    report
}

fn unit_tangent<M: Manifold>(m: &M, x: &M::Point, norm: f64, rng: &mut Rng) -> M::Tangent {
    let v = m.random_tangent(x, rng);
    m.tangent_scale(norm / m.tangent_norm(&v), &v)
}

fn nearby<M: Manifold>(m: &M, x: &M::Point, dist: f64, rng: &mut Rng) -> Result<M::Point> {
    m.retract(&unit_tangent(m, x, dist, rng))
}

fn max_over<F: FnMut(&mut Rng) -> Result<f64>>(seed: u64, mut f: F) -> Result<f64> {
    let mut rng = rng_from_seed(seed);
    let mut worst = 0.0_f64;
    for _ in 0..TRIALS {
        worst = worst.max(f(&mut rng)?);
    }
    Ok(worst)
}

fn manifold_properties<M: Manifold>(report: &mut VerifyReport, label: &str, m: &M, seed: u64, tol: &Tolerances) {
    report.check(
        format!("{label}: retract(x, 0) = x"),
        0.0,
        max_over(seed, |rng| {
            let x = m.random_point(rng);
            Ok(m.ambient_distance(&x, &m.retract(&m.zero_tangent(&x))?))
        }),
    );
    report.check(
        format!("{label}: local rigidity"),
        tol.rigidity,
        max_over(seed + 1, |rng| {
            let x = m.random_point(rng);
            let v = unit_tangent(m, &x, 1.0, rng);
            let d = fd_velocity(m, |s| m.retract(&m.tangent_scale(s, &v)), 0.0, 1e-6)?;
            Ok(m.tangent_distance(&d, &v))
        }),
    );
    report.check(
        format!("{label}: inverse retraction roundtrip"),
        tol.roundtrip,
        max_over(seed + 2, |rng| {
            let x = m.random_point(rng);
            let norm = 0.1 * (1.0 - rand::Rng::random::<f64>(rng));
            let v = unit_tangent(m, &x, norm, rng);
            let back = m.inv_retract(&x, &m.retract(&v)?)?;
            Ok(m.tangent_distance(&back, &v))
        }),
    );
    report.check(
        format!("{label}: second-derivative identity"),
        tol.second_derivative_rel,
        max_over(seed + 3, |rng| {
            let x = m.random_point(rng);
            let v = unit_tangent(m, &x, 1.0, rng);
            let h = 1e-4;
            let f = |s: f64| -> Result<f64> { Ok(m.ambient_distance(&x, &m.retract(&m.tangent_scale(s, &v))?).powi(2)) };
            let second = (f(h)? - 2.0 * f(0.0)? + f(-h)?) / (h * h);
            let expected = 2.0 * m.tangent_norm(&v).powi(2);
            Ok((second - expected).abs() / expected)
        }),
    );
    report.check(
        format!("{label}: endpoint curve endpoints"),
        tol.endpoint,
        max_over(seed + 4, |rng| {
            let x = m.random_point(rng);
            let y = nearby(m, &x, 0.2, rng)?;
            let mut worst = 0.0_f64;
            for r in [0.0, 0.3, 0.5, 1.0] {
                worst = worst.max(m.ambient_distance(&endpoint_curve(m, r, 0.0, &x, &y)?, &x));
                worst = worst.max(m.ambient_distance(&endpoint_curve(m, r, 1.0, &x, &y)?, &y));
            }
            Ok(worst)
        }),
    );
    report.check(
        format!("{label}: endpoint curve initial slope"),
        tol.slope,
        max_over(seed + 5, |rng| {
            let x = m.random_point(rng);
            let y = nearby(m, &x, 0.2, rng)?;
            let d = fd_velocity(m, |t| endpoint_curve(m, 0.0, t, &x, &y), 0.0, 1e-6)?;
            Ok(m.tangent_distance(&d, &m.inv_retract(&x, &y)?))
        }),
    );
    report.check(
        format!("{label}: endpoint curve symmetry"),
        tol.endpoint,
        max_over(seed + 6, |rng| {
            let x = m.random_point(rng);
            let y = nearby(m, &x, 0.2, rng)?;
            endpoint_symmetry_check(m, &x, &y, rand::Rng::random::<f64>(rng))
        }),
    );
    let quadruple = |rng: &mut Rng| -> Result<[M::Point; 4]> {
        let x = m.random_point(rng);
        Ok([
            nearby(m, &x, 0.1, rng)?,
            nearby(m, &x, 0.1, rng)?,
            nearby(m, &x, 0.1, rng)?,
            nearby(m, &x, 0.1, rng)?,
        ])
    };
    report.check(
        format!("{label}: de Casteljau endpoints"),
        tol.endpoint,
        max_over(seed + 7, |rng| {
            let [b0, b1, b2, b3] = quadruple(rng)?;
            let start = decasteljau(m, 0.0, &b0, &b1, &b2, &b3)?;
            let end = decasteljau(m, 1.0, &b0, &b1, &b2, &b3)?;
            Ok(m.ambient_distance(&start, &b0).max(m.ambient_distance(&end, &b3)))
        }),
    );
    report.check(
        format!("{label}: de Casteljau endpoint slopes"),
        tol.slope,
        max_over(seed + 8, |rng| {
            let [b0, b1, b2, b3] = quadruple(rng)?;
            let curve = |t: f64| decasteljau(m, t, &b0, &b1, &b2, &b3);
            let d0 = fd_velocity(m, curve, 0.0, 1e-6)?;
            let d1 = fd_velocity(m, curve, 1.0, 1e-6)?;
            let e0 = m.tangent_scale(3.0, &m.inv_retract(&b0, &b1)?);
            let e1 = m.tangent_scale(-3.0, &m.inv_retract(&b3, &b2)?);
            Ok(m.tangent_distance(&d0, &e0).max(m.tangent_distance(&d1, &e1)))
        }),
    );
    online_properties(report, label, m, seed + 9, tol);
}

/// Samples of `s ↦ R_x(s u + s² w)` on `nodes` uniform times in `[0, 1]`.
fn smooth_samples<M: Manifold>(m: &M, nodes: usize, rng: &mut Rng) -> Result<Vec<TangentSample<M>>> {
    let x = m.random_point(rng);
    let u = unit_tangent(m, &x, 0.5, rng);
    let w = unit_tangent(m, &x, 0.3, rng);
    let curve = |s: f64| m.retract(&m.tangent_lincomb(s, &u, s * s, &w));
    (0..nodes)
        .map(|i| {
            let t = i as f64 / (nodes - 1) as f64;
            Ok(TangentSample {
                t,
                point: curve(t)?,
                velocity: fd_velocity(m, curve, t, 1e-6)?,
            })
        })
        .collect()
}

fn online_properties<M: Manifold>(report: &mut VerifyReport, label: &str, m: &M, seed: u64, tol: &Tolerances) {
    let mut rng = rng_from_seed(seed);
    let run = |rng: &mut Rng| -> Result<(f64, usize)> {
        let samples = smooth_samples(m, 5, rng)?;
        let interp = Interpolant::new(m.clone(), samples.clone(), Scheme::Rh)?;
        let mut worst = 0.0_f64;
        let mut miscounts = 0;
        for _ in 0..PROBES {
            let t = rand::Rng::random::<f64>(rng);
            let (online, counters) = interp.eval_counted(t)?;
            if (counters.retractions, counters.inverse_retractions) != (7, 5) {
                miscounts += 1;
            }
            let (i, tau) = interp.locate(t)?;
            let (s0, s1) = (&samples[i], &samples[i + 1]);
            let h = s1.t - s0.t;
            let direct = hermite_segment(
                m,
                tau,
                &s0.point,
                &m.tangent_scale(h, &s0.velocity),
                &s1.point,
                &m.tangent_scale(h, &s1.velocity),
            )?;
            worst = worst.max(m.ambient_distance(&online, &direct));
        }
        Ok((worst, miscounts))
    };
    match run(&mut rng) {
        Ok((worst, miscounts)) => {
            report.record(format!("{label}: online equals direct segment"), worst, tol.online);
            report.record(format!("{label}: 7 retractions + 5 inverses per call"), miscounts as f64, 0.0);
        }
        Err(_) => {
            report.record(format!("{label}: online equals direct segment"), f64::INFINITY, tol.online);
        }
    }
}

/// Residuals of the two structured solves behind the inverse Stiefel
/// retractions, on `A = XᵀY` for nearby `X`, `Y`.
fn inverse_residuals(report: &mut VerifyReport, tol: &Tolerances) {
    let m = Stiefel::new(12, 4, StiefelRetraction::QFactor);
    let pair = |rng: &mut Rng| -> Result<Matrix> {
        let x = m.random_point(rng);
        let y = nearby(&m, &x, 0.3, rng)?;
        Ok(x.matrix().tr_mul(y.matrix()))
    };
    report.check(
        "stiefel: A R + RᵀAᵀ = 2I".into(),
        tol.residual,
        max_over(31, |rng| {
            let a = pair(rng)?;
            let r = solve_sym_part_triangular(&a)?;
            let ar = &a * &r;
            Ok((&ar + ar.transpose() - Matrix::identity(4, 4) * 2.0).norm())
        }),
    );
    report.check(
        "stiefel: A S + S Aᵀ = 2I".into(),
        tol.residual,
        max_over(32, |rng| {
            let a = pair(rng)?;
            let s = solve_lyapunov(&a)?;
            Ok((&a * &s + &s * a.transpose() - Matrix::identity(4, 4) * 2.0).norm())
        }),
    );
}

/// Factored orthographic retraction against the dense formula
/// `Y = (X+W) V (Uᵀ(X+W) V)⁻¹ Uᵀ(X+W)`.
fn orthographic_oracle(report: &mut VerifyReport, tol: &Tolerances) {
    let m = FixedRank::new(30, 20, 4);
    report.check(
        "fixed-rank: orthographic dense oracle".into(),
        tol.residual,
        max_over(41, |rng| {
            let x = m.random_point(rng);
            let w = unit_tangent(&m, &x, 0.5, rng);
            let z = m.to_ambient(&x) + m.tangent_to_ambient(&w);
            let (u, v) = (x.u(), x.v());
            let core = (u.transpose() * &z * v)
                .try_inverse()
                .ok_or(Error::CoreSingular)?;
            let dense = &z * v * core * u.transpose() * &z;
            Ok((m.to_ambient(&m.retract(&w)?) - dense).norm())
        }),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_with_default_tolerances() {
        let report = run_suite(Geometry::All, &Tolerances::default());
        for r in &report.results {
            assert!(r.passed, "{r}");
        }
        assert!(report.results.len() > 20);
    }

    #[test]
    fn tiny_scale_fails_and_names_property() {
        let report = run_suite(Geometry::Stiefel, &Tolerances::default().scaled(1e-30));
        assert!(!report.passed());
        let first = report.first_failure().unwrap();
        assert!(first.name.starts_with("stiefel-q"), "{}", first.name);
    }

    #[test]
    fn geometry_names() {
        assert_eq!("stiefel".parse::<Geometry>().unwrap(), Geometry::Stiefel);
        assert_eq!("fixed-rank".parse::<Geometry>().unwrap(), Geometry::FixedRank);
        assert!("grassmann".parse::<Geometry>().is_err());
    }
}
