//! Piecewise retraction-based Hermite (RH) interpolation.
//!
//! Each segment `[t_i, t_{i+1}]` is a cubic de Casteljau curve with control
//! points `p_i`, `R_{p_i}(h v_i / 3)`, `R_{p_{i+1}}(−h v_{i+1} / 3)`,
//! `p_{i+1}`. Construction is split into an offline pass that caches the
//! middle-stage anchor `q_i` and the two tangents at it, and an online
//! evaluation that costs exactly 7 retractions and 5 inverse retractions.
//!
//! The comparison schemes (piecewise retraction-linear, naive Hermite with
//! `c_0` everywhere, and the RH variant with a different middle anchor) share
//! the same [`Interpolant`] type.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::manifold::{
    anchored_endpoint_curve, decasteljau_c0, decasteljau_variant, endpoint_curve, endpoint_curve_counted,
    retract_counted, EvalCounters, Manifold,
};

/// Default central finite-difference step for derivative evaluation.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Relative distance under which a parameter is treated as a node.
const NODE_SNAP: f64 = 1e-12;

/// Interpolation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scheme {
    /// Retraction-based Hermite, middle anchor at `r_1 = 1/2`.
    Rh,
    /// `L(t) = c_0(τ; p_i, p_{i+1})` on each segment.
    Linear,
    /// Same control points as RH, every de Casteljau stage is `c_0`.
    NaiveHermite,
    /// RH with the middle anchor at a constant `r_1`.
    RhStar(f64),
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Rh => "rh".into(),
            Scheme::Linear => "linear".into(),
            Scheme::NaiveHermite => "hermite".into(),
            Scheme::RhStar(r1) => format!("rhstar{r1}"),
        }
    }

    fn anchor(&self) -> Option<f64> {
        match self {
            Scheme::Rh => Some(0.5),
            Scheme::RhStar(r1) => Some(*r1),
            _ => None,
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rh" => Ok(Scheme::Rh),
            "linear" | "l" => Ok(Scheme::Linear),
            "hermite" | "h" => Ok(Scheme::NaiveHermite),
            other => match other.strip_prefix("rhstar") {
                Some(r) => {
                    let r1: f64 = if r.is_empty() { 0.0 } else { r.parse().map_err(|_| bad_scheme(other))? };
                    if (0.0..=1.0).contains(&r1) {
                        Ok(Scheme::RhStar(r1))
                    } else {
                        Err(bad_scheme(other))
                    }
                }
                None => Err(bad_scheme(other)),
            },
        }
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.label()
    }
}

impl TryFrom<String> for Scheme {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

fn bad_scheme(s: &str) -> Error {
    Error::InvalidInput(format!("unknown scheme {s:?} (expected rh, linear, hermite, rhstar[<r1>])"))
}

/// Interpolation datum: the curve passes through `point` at `t` with
/// velocity `velocity`.
#[derive(Debug, Clone)]
pub struct TangentSample<M: Manifold> {
    pub t: f64,
    pub point: M::Point,
    pub velocity: M::Tangent,
}

/// Offline data for one segment.
#[derive(Debug, Clone)]
pub struct SegmentCache<M: Manifold> {
    pub h: f64,
    /// Anchor of the middle first-level stage.
    pub q: M::Point,
    /// `R_q⁻¹(p_i⁺)`.
    pub w_plus: M::Tangent,
    /// `R_q⁻¹(p_{i+1}⁻)`.
    pub w_minus: M::Tangent,
}

#[derive(Debug, Clone)]
enum Segments<M: Manifold> {
    Anchored(Vec<SegmentCache<M>>),
    /// `(p_i⁺, p_{i+1}⁻)` per segment.
    Controls(Vec<(M::Point, M::Point)>),
    Linear,
}

/// Hermite segment on `[0, 1]`: matches `(p0, v0)` at 0 and `(p1, v1)` at 1.
pub fn hermite_segment<M: Manifold>(
    m: &M,
    t: f64,
    p0: &M::Point,
    v0: &M::Tangent,
    p1: &M::Point,
    v1: &M::Tangent,
) -> Result<M::Point> {
    hermite_segment_variant(m, t, p0, v0, p1, v1, 0.5)
}

/// [`hermite_segment`] with the middle anchor at `r1`.
pub fn hermite_segment_variant<M: Manifold>(
    m: &M,
    t: f64,
    p0: &M::Point,
    v0: &M::Tangent,
    p1: &M::Point,
    v1: &M::Tangent,
    r1: f64,
) -> Result<M::Point> {
    let (plus, minus) = control_points(m, p0, v0, p1, v1, 1.0)?;
    decasteljau_variant(m, t, p0, &plus, &minus, p1, r1)
}

/// `(R_{p0}(h v0 / 3), R_{p1}(−h v1 / 3))`.
fn control_points<M: Manifold>(
    m: &M,
    p0: &M::Point,
    v0: &M::Tangent,
    p1: &M::Point,
    v1: &M::Tangent,
    h: f64,
) -> Result<(M::Point, M::Point)> {
    let _ = (p0, p1);
    let plus = m.retract(&m.tangent_scale(h / 3.0, v0)).map_err(|e| e.at_stage("p_plus"))?;
    let minus = m.retract(&m.tangent_scale(-h / 3.0, v1)).map_err(|e| e.at_stage("p_minus"))?;
    Ok((plus, minus))
}

/// Offline phase: per-segment anchor `q_i` and tangents `w_i⁺`, `w_{i+1}⁻`
/// for the RH scheme.
pub fn offline<M: Manifold>(m: &M, samples: &[TangentSample<M>]) -> Result<Vec<SegmentCache<M>>> {
    offline_with_anchor(m, samples, 0.5)
}

/// Offline phase with the middle anchor at `r1`.
pub fn offline_with_anchor<M: Manifold>(
    m: &M,
    samples: &[TangentSample<M>],
    r1: f64,
) -> Result<Vec<SegmentCache<M>>> {
    validate_samples(m, samples)?;
    samples
        .windows(2)
        .enumerate()
        .map(|(i, pair)| {
            let label = |stage: &str| format!("segment {i}: {stage}");
            let (s0, s1) = (&pair[0], &pair[1]);
            let h = s1.t - s0.t;
            let (plus, minus) = control_points(m, &s0.point, &s0.velocity, &s1.point, &s1.velocity, h)
                .map_err(|e| e.at_stage(&label("controls")))?;
            let toward = m.inv_retract(&plus, &minus).map_err(|e| e.at_stage(&label("inv(p_plus, p_minus)")))?;
            let q = m.retract(&m.tangent_scale(r1, &toward)).map_err(|e| e.at_stage(&label("q")))?;
            let w_plus = m.inv_retract(&q, &plus).map_err(|e| e.at_stage(&label("w_plus")))?;
            let w_minus = m.inv_retract(&q, &minus).map_err(|e| e.at_stage(&label("w_minus")))?;
            Ok(SegmentCache { h, q, w_plus, w_minus })
        })
        .collect()
}

fn validate_samples<M: Manifold>(m: &M, samples: &[TangentSample<M>]) -> Result<()> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 samples, got {}", samples.len())));
    }
    if samples.iter().any(|s| !s.t.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample time".into()));
    }
    if let Some(w) = samples.windows(2).find(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidInput(format!(
            "sample times must increase strictly ({} then {})",
            w[0].t, w[1].t
        )));
    }
    for (i, s) in samples.iter().enumerate() {
        let d = m.ambient_distance(m.base(&s.velocity), &s.point);
        if d > 1e-12 * m.ambient_norm(&s.point).max(1.0) {
            return Err(Error::InvalidInput(format!("velocity {i} is not based at its sample point")));
        }
    }
    Ok(())
}

/// `(i, τ)` with `i` the largest index such that `t_i ≤ t`, clamped to the
/// last segment, and `τ = (t − t_i) / h_i`.
fn locate_in<M: Manifold>(samples: &[TangentSample<M>], t: f64) -> Result<(usize, f64)> {
    let lo = samples[0].t;
    let hi = samples[samples.len() - 1].t;
    if !(t >= lo && t <= hi) {
        return Err(Error::OutOfRange { t, lo, hi });
    }
    let n = samples.len() - 1;
    let i = samples.partition_point(|s| s.t <= t).saturating_sub(1).min(n - 1);
    let h = samples[i + 1].t - samples[i].t;
    Ok((i, (t - samples[i].t) / h))
}

/// Piecewise retraction-linear interpolation evaluated directly from samples.
pub fn linear_scheme<M: Manifold>(m: &M, t: f64, samples: &[TangentSample<M>]) -> Result<M::Point> {
    validate_samples(m, samples)?;
    let (i, tau) = locate_in(samples, t)?;
    endpoint_curve(m, 0.0, tau, &samples[i].point, &samples[i + 1].point)
}

/// Naive Hermite interpolation evaluated directly from samples.
pub fn naive_hermite<M: Manifold>(m: &M, t: f64, samples: &[TangentSample<M>]) -> Result<M::Point> {
    validate_samples(m, samples)?;
    let (i, tau) = locate_in(samples, t)?;
    let (s0, s1) = (&samples[i], &samples[i + 1]);
    let (plus, minus) = control_points(m, &s0.point, &s0.velocity, &s1.point, &s1.velocity, s1.t - s0.t)?;
    decasteljau_c0(m, tau, &s0.point, &plus, &minus, &s1.point)
}

/// An interpolating curve through tangent samples. Immutable once built;
/// evaluation is read-only and may run concurrently.
#[derive(Debug, Clone)]
pub struct Interpolant<M: Manifold> {
    manifold: M,
    samples: Vec<TangentSample<M>>,
    scheme: Scheme,
    segments: Segments<M>,
}

impl<M: Manifold> Interpolant<M> {
    /// Validates the samples and runs the offline phase of `scheme`.
    pub fn new(manifold: M, samples: Vec<TangentSample<M>>, scheme: Scheme) -> Result<Self> {
        validate_samples(&manifold, &samples)?;
        let segments = match scheme.anchor() {
            Some(r1) => Segments::Anchored(offline_with_anchor(&manifold, &samples, r1)?),
            None if scheme == Scheme::NaiveHermite => Segments::Controls(
                samples
                    .windows(2)
                    .enumerate()
                    .map(|(i, w)| {
                        control_points(&manifold, &w[0].point, &w[0].velocity, &w[1].point, &w[1].velocity, w[1].t - w[0].t)
                            .map_err(|e| e.at_stage(&format!("segment {i}")))
                    })
                    .collect::<Result<_>>()?,
            ),
            None => Segments::Linear,
        };
        Ok(Interpolant {
            manifold,
            samples,
            scheme,
            segments,
        })
    }

    pub fn manifold(&self) -> &M {
        &self.manifold
    }

    pub fn samples(&self) -> &[TangentSample<M>] {
        &self.samples
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Offline caches (empty for the linear and naive schemes).
    pub fn caches(&self) -> &[SegmentCache<M>] {
        match &self.segments {
            Segments::Anchored(c) => c,
            _ => &[],
        }
    }

    pub fn num_segments(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.samples[0].t, self.samples[self.samples.len() - 1].t)
    }

    /// Segment index and local parameter for `t`.
    pub fn locate(&self, t: f64) -> Result<(usize, f64)> {
        locate_in(&self.samples, t)
    }

    pub fn eval(&self, t: f64) -> Result<M::Point> {
        let (i, tau) = self.locate(t)?;
        self.eval_segment(i, tau, &mut EvalCounters::default())
    }

    /// Evaluation plus the number of (inverse) retractions it performed.
    pub fn eval_counted(&self, t: f64) -> Result<(M::Point, EvalCounters)> {
        let (i, tau) = self.locate(t)?;
        let mut counters = EvalCounters::default();
        let p = self.eval_segment(i, tau, &mut counters)?;
        Ok((p, counters))
    }

    /// Evaluates the formula of segment `i` at local parameter `tau`. `tau`
    /// may leave `[0, 1]` slightly; the construction extends smoothly.
    pub fn eval_segment(&self, i: usize, tau: f64, counters: &mut EvalCounters) -> Result<M::Point> {
        let m = &self.manifold;
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        match &self.segments {
            Segments::Anchored(caches) => {
                let c = &caches[i];
                let step = tau * c.h / 3.0;
                let label = |stage: &str| format!("segment {i}: {stage}");
                let beta0 = retract_counted(m, &m.tangent_scale(step, &s0.velocity), counters)
                    .map_err(|e| e.at_stage(&label("beta_0")))?;
                let beta1 = retract_counted(m, &m.tangent_lincomb(1.0 - tau, &c.w_plus, tau, &c.w_minus), counters)
                    .map_err(|e| e.at_stage(&label("beta_1")))?;
                let beta2 = retract_counted(m, &m.tangent_scale(-(1.0 - tau) * c.h / 3.0, &s1.velocity), counters)
                    .map_err(|e| e.at_stage(&label("beta_2")))?;
                let beta01 = endpoint_curve_counted(m, 0.0, tau, &beta0, &beta1, counters)
                    .map_err(|e| e.at_stage(&label("beta_01")))?;
                let beta12 = endpoint_curve_counted(m, 1.0, tau, &beta1, &beta2, counters)
                    .map_err(|e| e.at_stage(&label("beta_12")))?;
                anchored_endpoint_curve(m, tau, tau, &beta01, &beta12, counters)
                    .map_err(|e| e.at_stage(&label("beta_012")))
            }
            Segments::Controls(controls) => {
                let (plus, minus) = &controls[i];
                decasteljau_c0(m, tau, &s0.point, plus, minus, &s1.point)
                    .map_err(|e| e.at_stage(&format!("segment {i}")))
            }
            Segments::Linear => endpoint_curve_counted(m, 0.0, tau, &s0.point, &s1.point, counters)
                .map_err(|e| e.at_stage(&format!("segment {i}"))),
        }
    }

    /// Velocity at `t` by central differences, projected onto the tangent
    /// space at `eval(t)`.
    ///
    /// Inside a segment the stencil never crosses a node: the step shrinks to
    /// `0.4 · min(t − t_i, t_{i+1} − t)` when needed. At an interior node the
    /// stencil straddles it, and at the two end nodes a one-sided
    /// second-order stencil is used.
    pub fn eval_derivative(&self, t: f64, dt: f64) -> Result<M::Tangent> {
        Ok(self.eval_with_derivative(t, dt)?.1)
    }

    /// `(eval(t), eval_derivative(t, dt))` sharing the evaluation at `t`.
    pub fn eval_with_derivative(&self, t: f64, dt: f64) -> Result<(M::Point, M::Tangent)> {
        if !(dt > 0.0) {
            return Err(Error::InvalidInput(format!("finite-difference step {dt}")));
        }
        let (i, _) = self.locate(t)?;
        let x = self.eval(t)?;
        let n = self.num_segments();
        let times = |j: usize| self.samples[j].t;
        let snap = NODE_SNAP * t.abs().max(1.0);
        let node = [i, i + 1].into_iter().find(|&j| (t - times(j)).abs() <= snap);
        let m = &self.manifold;
        let at = |s: f64| if s == t { Ok(x.clone()) } else { self.eval(s) };
        let d = match node {
            Some(0) => {
                let t0 = times(0);
                let s = dt.min(0.2 * (times(1) - t0));
                let (f0, f1, f2) = (at(t0)?, self.eval(t0 + s)?, self.eval(t0 + 2.0 * s)?);
                let c = 0.5 / s;
                m.project_combination(&x, &[(-3.0 * c, &f0), (4.0 * c, &f1), (-c, &f2)])?
            }
            Some(j) if j == n => {
                let tn = times(n);
                let s = dt.min(0.2 * (tn - times(n - 1)));
                let (f0, f1, f2) = (at(tn)?, self.eval(tn - s)?, self.eval(tn - 2.0 * s)?);
                let c = 0.5 / s;
                m.project_combination(&x, &[(3.0 * c, &f0), (-4.0 * c, &f1), (c, &f2)])?
            }
            Some(j) => {
                let tj = times(j);
                let s = dt.min(0.4 * (tj - times(j - 1)).min(times(j + 1) - tj));
                self.central_difference(&x, tj, s)?
            }
            None => {
                let s = dt.min(0.4 * (t - times(i)).min(times(i + 1) - t));
                self.central_difference(&x, t, s)?
            }
        };
        Ok((x, d))
    }

    fn central_difference(&self, x: &M::Point, t: f64, s: f64) -> Result<M::Tangent> {
        let plus = self.eval(t + s)?;
        let minus = self.eval(t - s)?;
        let c = 0.5 / s;
        self.manifold.project_combination(x, &[(c, &plus), (-c, &minus)])
    }

    /// Largest norm of the `order`-th derivative (2, 3 or 4) over `grid`
    /// interior points per segment.
    ///
    /// Derivatives are central differences of the ambient curve, evaluated
    /// segment-locally and projected onto the tangent space at the
    /// evaluation point. Steps: `1e-3` for order 2, `1e-2 · h` for orders 3
    /// and 4.
    pub fn max_derivative_estimate(&self, order: usize, grid: usize) -> Result<f64> {
        let (offsets, weights): (&[f64], &[f64]) = match order {
            2 => (&[-1.0, 0.0, 1.0], &[1.0, -2.0, 1.0]),
            3 => (&[-2.0, -1.0, 1.0, 2.0], &[-0.5, 1.0, -1.0, 0.5]),
            4 => (&[-2.0, -1.0, 0.0, 1.0, 2.0], &[1.0, -4.0, 6.0, -4.0, 1.0]),
            _ => return Err(Error::InvalidInput(format!("derivative order {order} not in 2..=4"))),
        };
        if grid == 0 {
            return Err(Error::EmptyGrid);
        }
        let m = &self.manifold;
        let mut worst = 0.0_f64;
        for i in 0..self.num_segments() {
            let h = self.samples[i + 1].t - self.samples[i].t;
            let step_t = if order == 2 { 1e-3 } else { 1e-2 * h };
            let step_tau = step_t / h;
            let scale = step_t.powi(order as i32).recip();
            for j in 1..=grid {
                let tau = j as f64 / (grid + 1) as f64;
                let mut counters = EvalCounters::default();
                let x = self.eval_segment(i, tau, &mut counters)?;
                let stencil: Vec<M::Point> = offsets
                    .iter()
                    .map(|o| {
                        if *o == 0.0 {
                            Ok(x.clone())
                        } else {
                            self.eval_segment(i, tau + o * step_tau, &mut counters)
                        }
                    })
                    .collect::<Result<_>>()?;
                let terms: Vec<(f64, &M::Point)> =
                    weights.iter().zip(&stencil).map(|(w, p)| (w * scale, p)).collect();
                let d = m.project_combination(&x, &terms)?;
                worst = worst.max(m.tangent_norm(&d));
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixedrank::FixedRank;
    use crate::linalg::{rng_from_seed, Matrix};
    use crate::stiefel::{Stiefel, StiefelRetraction};

    /// Samples of a smooth Stiefel curve `t ↦ R_{x}(t a + t² b)` with exact
    /// velocities from finite differences.
    fn stiefel_samples(m: &Stiefel, times: &[f64], seed: u64) -> Vec<TangentSample<Stiefel>> {
        let mut rng = rng_from_seed(seed);
        let x = m.random_point(&mut rng);
        let a = m.random_tangent(&x, &mut rng);
        let b = m.tangent_scale(0.5, &m.random_tangent(&x, &mut rng));
        let curve = |t: f64| m.retract(&m.tangent_lincomb(t, &a, t * t, &b));
        times
            .iter()
            .map(|&t| {
                let p = curve(t).unwrap();
                let v = crate::manifold::fd_velocity(m, curve, t, 1e-5).unwrap();
                TangentSample {
                    t,
                    point: p,
                    velocity: v,
                }
            })
            .collect()
    }

    fn q() -> Stiefel {
        Stiefel::new(8, 3, StiefelRetraction::QFactor)
    }

    fn grid(n: usize, a: f64, b: f64) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn segment_endpoints_and_slopes() {
        let m = q();
        let s = stiefel_samples(&m, &[0.0, 0.3], 1);
        let (p0, v0, p1, v1) = (&s[0].point, &s[0].velocity, &s[1].point, &s[1].velocity);
        // Work on [0, 1] with velocities scaled by the interval length.
        let v0 = m.tangent_scale(0.3, v0);
        let v1 = m.tangent_scale(0.3, v1);
        let at = |t: f64| hermite_segment(&m, t, p0, &v0, p1, &v1).unwrap();
        assert!(m.ambient_distance(&at(0.0), p0) < 1e-12);
        assert!(m.ambient_distance(&at(1.0), p1) < 1e-12);
        let h = 1e-6;
        let slope0 = (m.to_ambient(&at(h)) - m.to_ambient(&at(-h))) / (2.0 * h);
        let slope1 = (m.to_ambient(&at(1.0 + h)) - m.to_ambient(&at(1.0 - h))) / (2.0 * h);
        assert!((slope0 - m.tangent_to_ambient(&v0)).norm() < 1e-5);
        assert!((slope1 - m.tangent_to_ambient(&v1)).norm() < 1e-5);
    }

    #[test]
    fn constant_data_gives_constant_segment() {
        let m = q();
        let mut rng = rng_from_seed(2);
        let p = m.random_point(&mut rng);
        let zero = m.zero_tangent(&p);
        for &t in &[0.0, 0.3, 1.0] {
            let x = hermite_segment(&m, t, &p, &zero, &p, &zero).unwrap();
            assert!(m.ambient_distance(&x, &p) < 1e-14);
        }
        let samples = vec![
            TangentSample { t: 0.0, point: p.clone(), velocity: zero.clone() },
            TangentSample { t: 1.0, point: p.clone(), velocity: zero.clone() },
        ];
        let caches = offline(&m, &samples).unwrap();
        assert_eq!(caches.len(), 1);
        assert!(m.ambient_distance(&caches[0].q, &p) < 1e-14);
        assert!(m.tangent_norm(&caches[0].w_plus) < 1e-14);
        assert!(m.tangent_norm(&caches[0].w_minus) < 1e-14);

        let interp = Interpolant::new(m, samples, Scheme::Rh).unwrap();
        assert!(m.tangent_norm(&interp.eval_derivative(0.5, DEFAULT_FD_STEP).unwrap()) < 1e-9);
        // Zero up to the roundoff floor of the stencils (~1e-16 / step^order).
        for order in 2..=4 {
            assert!(interp.max_derivative_estimate(order, 5).unwrap() < 1e-6);
        }
    }

    #[test]
    fn offline_cache_unwinds() {
        let m = q();
        let s = stiefel_samples(&m, &grid(4, 0.0, 0.8), 3);
        let caches = offline(&m, &s).unwrap();
        assert_eq!(caches.len(), 4);
        for (i, c) in caches.iter().enumerate() {
            let plus = m.retract(&m.tangent_scale(c.h / 3.0, &s[i].velocity)).unwrap();
            let back = m.retract(&m.tangent_lincomb(1.0, &c.w_plus, 0.0, &c.w_minus)).unwrap();
            assert!(m.ambient_distance(&plus, &back) < 1e-10);
        }
    }

    #[test]
    fn online_matches_direct_segment_and_counts() {
        for retraction in [StiefelRetraction::QFactor, StiefelRetraction::PFactor] {
            let m = Stiefel::new(8, 3, retraction);
            let times = [0.0, 0.15, 0.35, 0.5, 0.8];
            let s = stiefel_samples(&m, &times, 4);
            let interp = Interpolant::new(m, s.clone(), Scheme::Rh).unwrap();
            for k in 0..=40 {
                let t = 0.8 * k as f64 / 40.0;
                let (x, counters) = interp.eval_counted(t).unwrap();
                assert_eq!(counters, EvalCounters { retractions: 7, inverse_retractions: 5 });
                let (i, tau) = interp.locate(t).unwrap();
                let h = s[i + 1].t - s[i].t;
                let direct = hermite_segment(
                    &m,
                    tau,
                    &s[i].point,
                    &m.tangent_scale(h, &s[i].velocity),
                    &s[i + 1].point,
                    &m.tangent_scale(h, &s[i + 1].velocity),
                )
                .unwrap();
                let gap = m.ambient_distance(&x, &direct);
                assert!(gap < 1e-12, "{retraction:?} t = {t}: {gap:e}");
            }
            for smp in &s {
                assert!(m.ambient_distance(&interp.eval(smp.t).unwrap(), &smp.point) < 1e-10);
            }
        }
    }

    #[test]
    fn locate_rules() {
        let m = q();
        let s = stiefel_samples(&m, &[0.0, 0.5, 1.0], 5);
        let interp = Interpolant::new(m, s, Scheme::Linear).unwrap();
        assert_eq!(interp.locate(0.0).unwrap(), (0, 0.0));
        assert_eq!(interp.locate(0.5).unwrap(), (1, 0.0));
        assert_eq!(interp.locate(1.0).unwrap(), (1, 1.0));
        assert!(matches!(interp.eval(1.0 + 1e-9), Err(Error::OutOfRange { .. })));
        assert!(matches!(interp.eval(-0.1), Err(Error::OutOfRange { .. })));
        assert!(matches!(interp.eval(f64::NAN), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn sample_validation() {
        let m = q();
        let s = stiefel_samples(&m, &[0.0, 0.5], 6);
        assert!(matches!(
            Interpolant::new(m, s[..1].to_vec(), Scheme::Rh),
            Err(Error::InvalidInput(_))
        ));
        let mut swapped = s.clone();
        swapped[1].t = 0.0;
        assert!(matches!(Interpolant::new(m, swapped, Scheme::Rh), Err(Error::InvalidInput(_))));
        let mut wrong_base = s.clone();
        wrong_base[0].velocity = s[1].velocity.clone();
        assert!(matches!(Interpolant::new(m, wrong_base, Scheme::Rh), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn rhstar_half_is_rh_bitwise() {
        let m = q();
        let s = stiefel_samples(&m, &grid(3, 0.0, 0.9), 7);
        let rh = Interpolant::new(m, s.clone(), Scheme::Rh).unwrap();
        let star = Interpolant::new(m, s, Scheme::RhStar(0.5)).unwrap();
        for k in 0..=30 {
            let t = 0.9 * k as f64 / 30.0;
            assert_eq!(m.to_ambient(&rh.eval(t).unwrap()), m.to_ambient(&star.eval(t).unwrap()));
        }
    }

    #[test]
    fn rhstar_zero_differs_in_interior() {
        let m = q();
        let s = stiefel_samples(&m, &[0.0, 0.6], 8);
        let rh = Interpolant::new(m, s.clone(), Scheme::Rh).unwrap();
        let star = Interpolant::new(m, s, Scheme::RhStar(0.0)).unwrap();
        let gap = (1..10)
            .map(|k| {
                let t = 0.06 * k as f64;
                m.ambient_distance(&rh.eval(t).unwrap(), &star.eval(t).unwrap())
            })
            .fold(0.0, f64::max);
        assert!(gap > 1e-8);
        assert!(m.ambient_distance(&rh.eval(0.6).unwrap(), &star.eval(0.6).unwrap()) < 1e-12);
    }

    #[test]
    fn comparison_schemes_reproduce_nodes() {
        let m = q();
        let s = stiefel_samples(&m, &grid(4, 0.0, 0.8), 9);
        for scheme in [Scheme::Linear, Scheme::NaiveHermite, Scheme::RhStar(0.0)] {
            let interp = Interpolant::new(m, s.clone(), scheme).unwrap();
            for smp in &s {
                assert!(m.ambient_distance(&interp.eval(smp.t).unwrap(), &smp.point) < 1e-10, "{scheme:?}");
            }
        }
        for &t in &[0.0, 0.13, 0.4, 0.8] {
            let a = linear_scheme(&m, t, &s).unwrap();
            let b = Interpolant::new(m, s.clone(), Scheme::Linear).unwrap().eval(t).unwrap();
            assert!(m.ambient_distance(&a, &b) < 1e-15);
            let a = naive_hermite(&m, t, &s).unwrap();
            let b = Interpolant::new(m, s.clone(), Scheme::NaiveHermite).unwrap().eval(t).unwrap();
            assert!(m.ambient_distance(&a, &b) < 1e-15);
        }
    }

    #[test]
    fn linear_scheme_follows_retraction_curve() {
        let m = q();
        let mut rng = rng_from_seed(10);
        let x = m.random_point(&mut rng);
        let y = m.retract(&m.tangent_scale(0.4, &m.random_tangent(&x, &mut rng))).unwrap();
        let zero_x = m.zero_tangent(&x);
        let zero_y = m.zero_tangent(&y);
        let s = vec![
            TangentSample { t: 2.0, point: x.clone(), velocity: zero_x },
            TangentSample { t: 4.0, point: y.clone(), velocity: zero_y },
        ];
        for &t in &[2.0, 2.5, 3.7, 4.0] {
            let on_curve = endpoint_curve(&m, 0.0, (t - 2.0) / 2.0, &x, &y).unwrap();
            assert!(m.ambient_distance(&linear_scheme(&m, t, &s).unwrap(), &on_curve) < 1e-15);
        }
    }

    #[test]
    fn naive_hermite_differs_from_rh_inside() {
        let m = q();
        let s = stiefel_samples(&m, &[0.0, 0.7], 11);
        let rh = Interpolant::new(m, s.clone(), Scheme::Rh).unwrap();
        let naive = Interpolant::new(m, s, Scheme::NaiveHermite).unwrap();
        assert!(m.ambient_distance(&rh.eval(0.0).unwrap(), &naive.eval(0.0).unwrap()) < 1e-12);
        assert!(m.ambient_distance(&rh.eval(0.7).unwrap(), &naive.eval(0.7).unwrap()) < 1e-12);
        assert!(m.ambient_distance(&rh.eval(0.35).unwrap(), &naive.eval(0.35).unwrap()) > 1e-8);
    }

    #[test]
    fn rh_is_c1_at_interior_nodes() {
        let m = q();
        let s = stiefel_samples(&m, &grid(4, 0.0, 1.0), 12);
        let rh = Interpolant::new(m, s.clone(), Scheme::Rh).unwrap();
        let h = 1e-6;
        for smp in &s[1..s.len() - 1] {
            let x = m.to_ambient(&rh.eval(smp.t).unwrap());
            let left = (&x - m.to_ambient(&rh.eval(smp.t - h).unwrap())) / h;
            let right = (m.to_ambient(&rh.eval(smp.t + h).unwrap()) - &x) / h;
            let v = m.tangent_to_ambient(&smp.velocity);
            assert!((left - &v).norm() < 1e-5);
            assert!((right - &v).norm() < 1e-5);
        }
    }

    #[test]
    fn derivative_at_nodes_matches_data() {
        let m = q();
        let s = stiefel_samples(&m, &grid(5, 0.0, 1.0), 13);
        let rh = Interpolant::new(m, s.clone(), Scheme::Rh).unwrap();
        for smp in &s {
            let d = rh.eval_derivative(smp.t, DEFAULT_FD_STEP).unwrap();
            assert!(m.tangent_distance(&d, &smp.velocity) < 1e-6, "t = {}", smp.t);
        }
        assert!(matches!(rh.eval_derivative(0.5, 0.0), Err(Error::InvalidInput(_))));
        assert!(matches!(rh.eval_derivative(1.5, 1e-5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn derivative_agrees_with_five_point_stencil() {
        let m = q();
        let s = stiefel_samples(&m, &grid(3, 0.0, 0.9), 14);
        let rh = Interpolant::new(m, s, Scheme::Rh).unwrap();
        let t = 0.45;
        let h = 1e-3;
        let f = |x: f64| m.to_ambient(&rh.eval(x).unwrap());
        let five = (f(t - 2.0 * h) - f(t - h) * 8.0 + f(t + h) * 8.0 - f(t + 2.0 * h)) / (12.0 * h);
        let five = m.project_tangent(&rh.eval(t).unwrap(), &five).unwrap();
        let d = rh.eval_derivative(t, DEFAULT_FD_STEP).unwrap();
        assert!(m.tangent_distance(&d, &five) < 1e-8);
    }

    #[test]
    fn derivative_order_validation() {
        let m = q();
        let s = stiefel_samples(&m, &[0.0, 0.5], 15);
        let rh = Interpolant::new(m, s, Scheme::Rh).unwrap();
        assert!(matches!(rh.max_derivative_estimate(1, 4), Err(Error::InvalidInput(_))));
        assert!(matches!(rh.max_derivative_estimate(5, 4), Err(Error::InvalidInput(_))));
        assert_eq!(rh.max_derivative_estimate(2, 0).unwrap_err(), Error::EmptyGrid);
    }

    #[test]
    fn flat_linear_data_has_vanishing_second_derivative() {
        // Full-rank fixed-rank matrices form an open subset of the ambient
        // space, where the orthographic retraction is X + W.
        let g = FixedRank::new(4, 3, 3);
        let mut rng = rng_from_seed(16);
        let x0 = g.random_point(&mut rng);
        let slope = g.random_tangent(&x0, &mut rng);
        let a0 = g.to_ambient(&x0);
        let a1 = g.tangent_to_ambient(&slope) * 0.2;
        let samples: Vec<_> = grid(4, 0.0, 1.0)
            .into_iter()
            .map(|t| {
                let p = g.truncate_dense(&(&a0 + &a1 * t)).unwrap();
                let v = g.project_tangent(&p, &a1).unwrap();
                TangentSample { t, point: p, velocity: v }
            })
            .collect();
        let interp = Interpolant::new(g, samples, Scheme::Rh).unwrap();
        assert!(interp.max_derivative_estimate(2, 8).unwrap() < 1e-6);
        let mid: Matrix = g.to_ambient(&interp.eval(0.37).unwrap());
        let gap = (mid - (&a0 + &a1 * 0.37)).norm();
        assert!(gap < 1e-12 * a0.norm(), "{gap:e}");
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("rh".parse::<Scheme>().unwrap(), Scheme::Rh);
        assert_eq!("l".parse::<Scheme>().unwrap(), Scheme::Linear);
        assert_eq!("hermite".parse::<Scheme>().unwrap(), Scheme::NaiveHermite);
        assert_eq!("rhstar".parse::<Scheme>().unwrap(), Scheme::RhStar(0.0));
        assert_eq!("rhstar0.25".parse::<Scheme>().unwrap(), Scheme::RhStar(0.25));
        assert!("rhstar2".parse::<Scheme>().is_err());
        assert!("cubic".parse::<Scheme>().is_err());
        assert_eq!(Scheme::RhStar(0.0).label(), "rhstar0");
    }
}
