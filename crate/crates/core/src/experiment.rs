//! Experiment drivers behind the `rh-interp` subcommands.
//!
//! Each command builds a sampled curve, constructs interpolants, measures
//! errors on a fine grid and optionally writes CSV files plus a JSON run
//! manifest into an output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::curves::{
    qfactor_instance, sample_curve, svd_instance, uniform_times, ManifoldCurve, SampledCurve, SvdCurve,
    DEFAULT_SAMPLE_STEP,
};
use crate::error::{Error, Result};
use crate::hermite::{Interpolant, Scheme, DEFAULT_FD_STEP};
use crate::manifold::Manifold;
use crate::stiefel::StiefelRetraction;

/// Errors at or below this level are excluded from slope fits.
pub const ERROR_FLOOR: f64 = 1e-12;

/// Smallest accepted evaluation-grid density (points per segment).
pub const MIN_GRID: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instance {
    Qfactor,
    Svd,
}

impl std::str::FromStr for Instance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qfactor" => Ok(Instance::Qfactor),
            "svd" => Ok(Instance::Svd),
            _ => Err(Error::InvalidInput(format!("unknown instance {s:?} (expected qfactor or svd)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetractionChoice {
    Qfactor,
    Pfactor,
    Orthographic,
}

impl std::str::FromStr for RetractionChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qfactor" => Ok(RetractionChoice::Qfactor),
            "pfactor" => Ok(RetractionChoice::Pfactor),
            "orthographic" => Ok(RetractionChoice::Orthographic),
            _ => Err(Error::InvalidInput(format!(
                "unknown retraction {s:?} (expected qfactor, pfactor or orthographic)"
            ))),
        }
    }
}

/// Settings shared by all experiment commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub instance: Instance,
    /// Stiefel: ambient rows. Fixed-rank: columns.
    pub n: usize,
    /// Stiefel: columns.
    pub k: usize,
    /// Fixed-rank: rows.
    pub m: usize,
    /// Fixed-rank: rank.
    pub rank: usize,
    pub retraction: RetractionChoice,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    /// Sampling steps, positive and non-increasing. Each is rounded to the
    /// nearest step that divides the parameter interval.
    pub h_list: Vec<f64>,
    /// Sampling steps of the derivative-estimate sweep in `deriv-bound`.
    /// Coarser than `h_list`: the order-4 difference quotients lose all
    /// digits to roundoff once a segment is much shorter than `L/100`.
    pub deriv_h_list: Vec<f64>,
    /// Evaluation points per segment.
    pub grid: usize,
    /// Compression: keep every `subsample`-th sample.
    pub subsample: usize,
    /// Compression: number of dense segments.
    pub dense_segments: usize,
    /// Compression: rank of the reference tail.
    pub tail_rank: usize,
    /// Compression: relative size of the reference tail.
    pub tail_amplitude: f64,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Desk-scale defaults for `instance`.
    pub fn new(instance: Instance) -> Self {
        let interval = instance_interval(instance);
        let length = interval.1 - interval.0;
        ExperimentConfig {
            instance,
            n: if instance == Instance::Qfactor { 100 } else { 120 },
            k: 5,
            m: 400,
            rank: 10,
            retraction: match instance {
                Instance::Qfactor => RetractionChoice::Qfactor,
                Instance::Svd => RetractionChoice::Orthographic,
            },
            schemes: vec![Scheme::Rh, Scheme::Linear, Scheme::NaiveHermite],
            seed: 0,
            h_list: default_h_list(length),
            deriv_h_list: default_deriv_h_list(length),
            grid: 64,
            subsample: 20,
            dense_segments: 200,
            tail_rank: 2,
            tail_amplitude: 1e-4,
            out: None,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        instance_interval(self.instance)
    }

    pub fn validate(&self) -> Result<()> {
        check_h_list(&self.h_list)?;
        check_h_list(&self.deriv_h_list)?;
        if self.grid == 0 {
            return Err(Error::EmptyGrid);
        }
        if self.grid < MIN_GRID {
            return Err(Error::InvalidInput(format!("grid density {} below {MIN_GRID}", self.grid)));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidInput("no schemes requested".into()));
        }
        match (self.instance, self.retraction) {
            (Instance::Qfactor, RetractionChoice::Orthographic) | (Instance::Svd, RetractionChoice::Qfactor | RetractionChoice::Pfactor) => {
                Err(Error::InvalidInput(format!(
                    "retraction {:?} does not apply to instance {:?}",
                    self.retraction, self.instance
                )))
            }
            _ => Ok(()),
        }
    }

    fn stiefel_retraction(&self) -> StiefelRetraction {
        match self.retraction {
            RetractionChoice::Pfactor => StiefelRetraction::PFactor,
            _ => StiefelRetraction::QFactor,
        }
    }
}

fn check_h_list(h_list: &[f64]) -> Result<()> {
    if h_list.is_empty() {
        return Err(Error::InvalidInput("empty h list".into()));
    }
    if h_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
        return Err(Error::InvalidInput("h values must be positive".into()));
    }
    if h_list.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidInput("h values must be sorted in descending order".into()));
    }
    Ok(())
}

/// Parameter interval of each instance family.
pub fn instance_interval(instance: Instance) -> (f64, f64) {
    match instance {
        Instance::Qfactor => (-1.1, 1.1),
        Instance::Svd => (-0.5, 0.5),
    }
}

/// `length · 2^-j` for `j = 2..=9`.
pub fn default_h_list(length: f64) -> Vec<f64> {
    (2..=9).map(|j| length * 0.5_f64.powi(j)).collect()
}

/// `length · 2^-j` for `j = 3..=7`.
pub fn default_deriv_h_list(length: f64) -> Vec<f64> {
    (3..=7).map(|j| length * 0.5_f64.powi(j)).collect()
}

/// Number of uniform segments whose width is closest to `h`.
fn segments_for(h: f64, (a, b): (f64, f64)) -> usize {
    ((b - a) / h).round().max(1.0) as usize
}

/// One row of a per-`t` report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointwiseRow {
    pub t: f64,
    pub eps_p: f64,
    pub eps_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointwiseReport {
    pub scheme: Scheme,
    pub h: f64,
    pub rows: Vec<PointwiseRow>,
}

/// One row of a per-`h` report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    pub max_eps_p: f64,
    pub max_eps_d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub rows: Vec<ConvergenceRow>,
    pub slope_p: f64,
    pub slope_d: f64,
}

/// Least-squares slope of `log err` against `log h` over rows with
/// `err > ERROR_FLOOR`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<f64> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(h, e)| *e > ERROR_FLOOR && *h > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::SlopeUndefined { usable: usable.len() });
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = usable.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = usable.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if !(sxx > 0.0) {
        return Err(Error::SlopeUndefined { usable: usable.len() });
    }
    Ok(sxy / sxx)
}

/// Samples `curve` on `segments` uniform segments of its interval.
pub fn sample_uniform<C: ManifoldCurve>(curve: &mut C, segments: usize) -> Result<SampledCurve<C::Geometry>> {
    let (a, b) = curve.interval();
    sample_curve(curve, &uniform_times(a, b, segments), DEFAULT_SAMPLE_STEP)
}

/// `(t, ε_P, ε_D)` on `grid` points per segment (nodes included), with
/// `ε_P = ‖A(t) − Ã(t)‖_F` and `ε_D = ‖Ȧ(t) − Ã̇(t)‖_F`, both derivatives by
/// projected central differences.
pub fn pointwise_errors<C: ManifoldCurve>(
    curve: &mut C,
    interp: &Interpolant<C::Geometry>,
    grid: usize,
) -> Result<Vec<PointwiseRow>> {
    if grid == 0 {
        return Err(Error::EmptyGrid);
    }
    let m = curve.manifold().clone();
    let (a, b) = interp.domain();
    let times = uniform_times(a, b, grid * interp.num_segments());
    times
        .into_iter()
        .map(|t| {
            let exact = curve.eval(t)?;
            let exact_d = curve.velocity_at(t, &exact, DEFAULT_SAMPLE_STEP)?;
            let (approx, approx_d) = interp.eval_with_derivative(t, DEFAULT_FD_STEP)?;
            Ok(PointwiseRow {
                t,
                eps_p: m.ambient_distance(&exact, &approx),
                eps_d: m.tangent_distance(&exact_d, &approx_d),
            })
        })
        .collect()
}

fn max_errors(rows: &[PointwiseRow]) -> (f64, f64) {
    rows.iter()
        .fold((0.0_f64, 0.0_f64), |(p, d), r| (p.max(r.eps_p), d.max(r.eps_d)))
}

/// Per-`h` maxima for each scheme; the sweep runs in parallel, each worker
/// on its own clone of the curve.
pub fn convergence_rows<C: ManifoldCurve + Sync>(
    curve: &C,
    schemes: &[Scheme],
    h_list: &[f64],
    grid: usize,
) -> Result<Vec<Vec<ConvergenceRow>>> {
    let per_h: Vec<Vec<ConvergenceRow>> = h_list
        .par_iter()
        .map(|&h| {
            let mut c = curve.clone();
            let segments = segments_for(h, c.interval());
            let sampled = sample_uniform(&mut c, segments)?;
            let actual_h = (c.interval().1 - c.interval().0) / segments as f64;
            schemes
                .iter()
                .map(|&scheme| {
                    let interp = Interpolant::new(c.manifold().clone(), sampled.samples.clone(), scheme)?;
                    let (p, d) = max_errors(&pointwise_errors(&mut c, &interp, grid)?);
                    Ok(ConvergenceRow {
                        h: actual_h,
                        max_eps_p: p,
                        max_eps_d: d,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok((0..schemes.len())
        .map(|s| per_h.iter().map(|row| row[s]).collect())
        .collect())
}

fn write_csv(path: &Path, header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut text = String::new();
    text.push_str(header);
    text.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        let _ = writeln!(text, "{}", cells.join(","));
    }
    fs::write(path, text)?;
    Ok(())
}

fn write_manifest(dir: &Path, name: &str, command: &str, config: &ExperimentConfig, results: serde_json::Value) -> Result<()> {
    let manifest = json!({
        "command": command,
        "config": config,
        "results": results,
    });
    fs::write(dir.join(name), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

fn prepare_out(config: &ExperimentConfig) -> Result<Option<&Path>> {
    match &config.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.as_path()))
        }
        None => Ok(None),
    }
}

/// Pointwise errors of each requested scheme at the first `h` of the
/// configuration.
pub fn cmd_interpolate(config: &ExperimentConfig) -> Result<Vec<PointwiseReport>> {
    config.validate()?;
    let h = config.h_list[0];
    let reports = match config.instance {
        Instance::Qfactor => interpolate_on(&mut qfactor_curve(config)?, config, h)?,
        Instance::Svd => interpolate_on(&mut svd_curve(config)?, config, h)?,
    };
    if let Some(dir) = prepare_out(config)? {
        let mut files = Vec::new();
        for r in &reports {
            let name = format!("interpolate_{}.csv", r.scheme.label());
            write_csv(&dir.join(&name), "t,eps_p,eps_d", r.rows.iter().map(|x| vec![x.t, x.eps_p, x.eps_d]))?;
            files.push(name);
        }
        let summary: Vec<_> = reports
            .iter()
            .map(|r| {
                let (p, d) = max_errors(&r.rows);
                json!({"scheme": r.scheme.label(), "h": r.h, "max_eps_p": p, "max_eps_d": d})
            })
            .collect();
        write_manifest(dir, "interpolate.json", "interpolate", config, json!({"files": files, "schemes": summary}))?;
    }
    Ok(reports)
}

fn interpolate_on<C: ManifoldCurve>(curve: &mut C, config: &ExperimentConfig, h: f64) -> Result<Vec<PointwiseReport>> {
    let segments = segments_for(h, curve.interval());
    let sampled = sample_uniform(curve, segments)?;
    let actual_h = (curve.interval().1 - curve.interval().0) / segments as f64;
    config
        .schemes
        .iter()
        .map(|&scheme| {
            let interp = Interpolant::new(curve.manifold().clone(), sampled.samples.clone(), scheme)?;
            Ok(PointwiseReport {
                scheme,
                h: actual_h,
                rows: pointwise_errors(curve, &interp, config.grid)?,
            })
        })
        .collect()
}

/// Maximum errors over the `h` sweep and fitted log–log slopes per scheme.
pub fn cmd_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceReport>> {
    config.validate()?;
    let tables = match config.instance {
        Instance::Qfactor => convergence_rows(&qfactor_curve(config)?, &config.schemes, &config.h_list, config.grid)?,
        Instance::Svd => convergence_rows(&svd_curve(config)?, &config.schemes, &config.h_list, config.grid)?,
    };
    let reports: Vec<ConvergenceReport> = config
        .schemes
        .iter()
        .zip(tables)
        .map(|(&scheme, rows)| {
            let slope_p = fit_slope(&rows.iter().map(|r| (r.h, r.max_eps_p)).collect::<Vec<_>>())?;
            let slope_d = fit_slope(&rows.iter().map(|r| (r.h, r.max_eps_d)).collect::<Vec<_>>())?;
            Ok(ConvergenceReport {
                scheme,
                rows,
                slope_p,
                slope_d,
            })
        })
        .collect::<Result<_>>()?;
    if let Some(dir) = prepare_out(config)? {
        let mut summary = Vec::new();
        for r in &reports {
            let name = format!("convergence_{}.csv", r.scheme.label());
            write_csv(
                &dir.join(&name),
                "h,max_eps_p,max_eps_d",
                r.rows.iter().map(|x| vec![x.h, x.max_eps_p, x.max_eps_d]),
            )?;
            summary.push(json!({"scheme": r.scheme.label(), "file": name, "slope_p": r.slope_p, "slope_d": r.slope_d}));
        }
        write_manifest(dir, "convergence.json", "convergence", config, json!({"schemes": summary}))?;
    }
    Ok(reports)
}

/// One row of the derivative-bound study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivBoundRow {
    pub h: f64,
    pub order: usize,
    pub estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivBoundReport {
    pub scheme: Scheme,
    pub rows: Vec<DerivBoundRow>,
    /// Per-`h` pointwise-error maxima of the same scheme.
    pub errors: Vec<ConvergenceRow>,
    /// Slope of `max ε_P` against `h`.
    pub error_slope: f64,
    /// Slope of the order-4 estimate against `h`.
    pub order4_slope: f64,
    /// Max over min of the order-4 estimate across the sweep.
    pub order4_ratio: f64,
}

/// Derivative-grid density of the bound study (points per segment).
const DERIV_GRID: usize = 8;

/// Estimates of the 2nd–4th derivatives of RH and RH with the middle anchor
/// at `r_1 = 0` across `deriv_h_list`, plus their pointwise-error slopes
/// across `h_list`.
pub fn cmd_deriv_bound(config: &ExperimentConfig) -> Result<Vec<DerivBoundReport>> {
    config.validate()?;
    let schemes = [Scheme::Rh, Scheme::RhStar(0.0)];
    let reports: Vec<DerivBoundReport> = match config.instance {
        Instance::Qfactor => deriv_bound_on(&qfactor_curve(config)?, &schemes, config)?,
        Instance::Svd => deriv_bound_on(&svd_curve(config)?, &schemes, config)?,
    };
    if let Some(dir) = prepare_out(config)? {
        let mut summary = Vec::new();
        for r in &reports {
            let name = format!("deriv_bound_{}.csv", r.scheme.label());
            write_csv(
                &dir.join(&name),
                "h,order,estimate",
                r.rows.iter().map(|x| vec![x.h, x.order as f64, x.estimate]),
            )?;
            let errs = format!("deriv_bound_errors_{}.csv", r.scheme.label());
            write_csv(
                &dir.join(&errs),
                "h,max_eps_p,max_eps_d",
                r.errors.iter().map(|x| vec![x.h, x.max_eps_p, x.max_eps_d]),
            )?;
            summary.push(json!({
                "scheme": r.scheme.label(),
                "files": [name, errs],
                "error_slope": r.error_slope,
                "order4_slope": r.order4_slope,
                "order4_ratio": r.order4_ratio,
            }));
        }
        write_manifest(dir, "deriv_bound.json", "deriv-bound", config, json!({"schemes": summary}))?;
    }
    Ok(reports)
}

fn deriv_bound_on<C: ManifoldCurve + Sync>(
    curve: &C,
    schemes: &[Scheme],
    config: &ExperimentConfig,
) -> Result<Vec<DerivBoundReport>> {
    let errors = convergence_rows(curve, schemes, &config.h_list, config.grid)?;
    let estimates: Vec<Vec<Vec<DerivBoundRow>>> = config
        .deriv_h_list
        .par_iter()
        .map(|&h| {
            let mut c = curve.clone();
            let segments = segments_for(h, c.interval());
            let sampled = sample_uniform(&mut c, segments)?;
            let actual_h = (c.interval().1 - c.interval().0) / segments as f64;
            schemes
                .iter()
                .map(|&scheme| {
                    let interp = Interpolant::new(c.manifold().clone(), sampled.samples.clone(), scheme)?;
                    (2..=4)
                        .map(|order| {
                            Ok(DerivBoundRow {
                                h: actual_h,
                                order,
                                estimate: interp.max_derivative_estimate(order, DERIV_GRID)?,
                            })
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    schemes
        .iter()
        .enumerate()
        .zip(errors)
        .map(|((s, &scheme), errors)| {
            let rows: Vec<DerivBoundRow> = estimates.iter().flat_map(|per_h| per_h[s].clone()).collect();
            let order4: Vec<(f64, f64)> = rows.iter().filter(|r| r.order == 4).map(|r| (r.h, r.estimate)).collect();
            let hi = order4.iter().map(|p| p.1).fold(0.0_f64, f64::max);
            let lo = order4.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            Ok(DerivBoundReport {
                scheme,
                error_slope: fit_slope(&errors.iter().map(|r| (r.h, r.max_eps_p)).collect::<Vec<_>>())?,
                order4_slope: fit_slope(&order4)?,
                order4_ratio: hi / lo,
                rows,
                errors,
            })
        })
        .collect()
}

/// Relative errors of the full-sample and subsampled RH interpolants.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressReport {
    pub samples: usize,
    pub subsample: usize,
    /// `(t, relative error of the full interpolant, of the subsampled one)`.
    pub rows: Vec<(f64, f64, f64)>,
    pub max_full: f64,
    pub max_sub: f64,
    pub storage_ratio: f64,
    /// Same maxima measured against the manifold curve itself rather than
    /// the reference matrix.
    pub max_full_vs_curve: f64,
    pub max_sub_vs_curve: f64,
}

/// Compresses a dense sampled curve on the fixed-rank SVD instance by
/// keeping every `s`-th sample, and compares both RH interpolants against
/// the dense reference matrix `W(t)`.
pub fn cmd_compress(config: &ExperimentConfig) -> Result<CompressReport> {
    config.validate()?;
    if config.instance != Instance::Svd {
        return Err(Error::InvalidInput("compression runs on the svd instance".into()));
    }
    let s = config.subsample;
    if s == 0 || !config.dense_segments.is_multiple_of(s) {
        return Err(Error::InvalidInput(format!(
            "subsample factor {s} must divide the {} dense segments",
            config.dense_segments
        )));
    }
    let mut curve = svd_curve(config)?.with_tail(config.tail_rank, config.tail_amplitude)?;
    let dense = sample_uniform(&mut curve, config.dense_segments)?;
    let sparse = dense.subsample(s)?;
    let m = *curve.manifold();
    let full = Interpolant::new(m, dense.samples.clone(), Scheme::Rh)?;
    let sub = Interpolant::new(m, sparse.samples.clone(), Scheme::Rh)?;
    let (a, b) = curve.interval();
    let times = uniform_times(a, b, config.grid * sparse.samples.len().saturating_sub(1).max(1));
    let mut rows = Vec::with_capacity(times.len());
    let (mut full_curve, mut sub_curve) = (0.0_f64, 0.0_f64);
    for &t in &times {
        let xf = full.eval(t)?;
        let xs = sub.eval(t)?;
        let norm = curve.reference_norm(t);
        rows.push((t, curve.reference_distance(t, &xf) / norm, curve.reference_distance(t, &xs) / norm));
        let on_curve = curve.eval(t)?;
        let scale = m.ambient_norm(&on_curve);
        full_curve = full_curve.max(m.ambient_distance(&on_curve, &xf) / scale);
        sub_curve = sub_curve.max(m.ambient_distance(&on_curve, &xs) / scale);
    }
    let max_full = rows.iter().map(|r| r.1).fold(0.0_f64, f64::max);
    let max_sub = rows.iter().map(|r| r.2).fold(0.0_f64, f64::max);
    let report = CompressReport {
        samples: dense.samples.len(),
        subsample: s,
        rows,
        max_full,
        max_sub,
        storage_ratio: 1.0 / s as f64,
        max_full_vs_curve: full_curve,
        max_sub_vs_curve: sub_curve,
    };
    if let Some(dir) = prepare_out(config)? {
        write_csv(
            &dir.join("compress.csv"),
            "t,rel_err_full,rel_err_sub",
            report.rows.iter().map(|r| vec![r.0, r.1, r.2]),
        )?;
        write_manifest(
            dir,
            "compress.json",
            "compress",
            config,
            json!({
                "file": "compress.csv",
                "samples": report.samples,
                "subsample": s,
                "max_rel_err_full": max_full,
                "max_rel_err_sub": max_sub,
                "ratio": max_sub / max_full,
                "storage_ratio": report.storage_ratio,
                "max_rel_err_full_vs_curve": full_curve,
                "max_rel_err_sub_vs_curve": sub_curve,
            }),
        )?;
    }
    Ok(report)
}

fn qfactor_curve(config: &ExperimentConfig) -> Result<crate::curves::QFactorCurve> {
    qfactor_instance(config.n, config.k, config.seed, config.interval(), config.stiefel_retraction())
}

fn svd_curve(config: &ExperimentConfig) -> Result<SvdCurve> {
    svd_instance(config.m, config.n, config.rank, config.seed, config.interval())
}
