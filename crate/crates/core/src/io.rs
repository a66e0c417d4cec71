//! Text serialization of points, tangents and sampled curves.
//!
//! Matrices use the plain format of [`crate::linalg::format_matrix`].
//! Multi-block objects (factored points, factored tangents) are the
//! matrix blocks concatenated, each preceded by a header line naming it.
//! A sampled curve is a directory holding one point file and one tangent
//! file per sample plus a JSON manifest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curves::{CurveDescriptor, SampledCurve};
use crate::error::{Error, Result};
use crate::hermite::TangentSample;
use crate::linalg::{format_matrix, parse_matrix, Matrix};
use crate::manifold::Manifold;

/// Text encoding for the points and tangents of a geometry.
pub trait PointCodec: Manifold {
    fn encode_point(&self, x: &Self::Point) -> String;
    fn decode_point(&self, text: &str) -> Result<Self::Point>;
    fn encode_tangent(&self, v: &Self::Tangent) -> String;
    fn decode_tangent(&self, base: &Self::Point, text: &str) -> Result<Self::Tangent>;
}

pub fn format_blocks(blocks: &[(&str, &Matrix)]) -> String {
    let mut out = String::new();
    for (name, m) in blocks {
        out.push_str(name);
        out.push('\n');
        out.push_str(&format_matrix(m));
    }
    out
}

/// Parses blocks written by [`format_blocks`]; headers must appear in the
/// given order.
pub fn parse_blocks(text: &str, names: &[&str]) -> Result<Vec<Matrix>> {
    let lines: Vec<&str> = text.lines().collect();
    let mut starts = Vec::with_capacity(names.len());
    let mut cursor = 0;
    for name in names {
        let found = lines[cursor..]
            .iter()
            .position(|l| l.trim() == *name)
            .ok_or_else(|| Error::Parse(format!("missing block header {name:?}")))?;
        starts.push(cursor + found);
        cursor += found + 1;
    }
    starts
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let end = starts.get(i + 1).copied().unwrap_or(lines.len());
            parse_matrix(&lines[s + 1..end].join("\n"))
        })
        .collect()
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    descriptor: CurveDescriptor,
    times: Vec<f64>,
    points: Vec<String>,
    tangents: Vec<String>,
}

const MANIFEST: &str = "manifest.json";

/// Writes `curve` into `dir` (created if needed).
pub fn save_sampled_curve<M: PointCodec>(m: &M, curve: &SampledCurve<M>, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest {
        descriptor: curve.descriptor.clone(),
        times: Vec::with_capacity(curve.samples.len()),
        points: Vec::new(),
        tangents: Vec::new(),
    };
    for (i, s) in curve.samples.iter().enumerate() {
        let p = format!("point_{i:05}.txt");
        let v = format!("tangent_{i:05}.txt");
        fs::write(dir.join(&p), m.encode_point(&s.point))?;
        fs::write(dir.join(&v), m.encode_tangent(&s.velocity))?;
        manifest.times.push(s.t);
        manifest.points.push(p);
        manifest.tangents.push(v);
    }
    fs::write(dir.join(MANIFEST), serde_json::to_string_pretty(&manifest)?)?;
    Ok(())
}

pub fn load_sampled_curve<M: PointCodec>(m: &M, dir: &Path) -> Result<SampledCurve<M>> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST))?)?;
    if manifest.points.len() != manifest.times.len() || manifest.tangents.len() != manifest.times.len() {
        return Err(Error::Parse("manifest lists disagree in length".into()));
    }
    let mut samples = Vec::with_capacity(manifest.times.len());
    for ((t, p), v) in manifest.times.iter().zip(&manifest.points).zip(&manifest.tangents) {
        let point = m.decode_point(&fs::read_to_string(dir.join(p))?)?;
        let velocity = m.decode_tangent(&point, &fs::read_to_string(dir.join(v))?)?;
        samples.push(TangentSample {
            t: *t,
            point,
            velocity,
        });
    }
    SampledCurve::new(m, samples, manifest.descriptor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_roundtrip_and_order() {
        let a = Matrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let b = Matrix::from_row_slice(2, 1, &[3.0, 4.0]);
        let text = format_blocks(&[("A", &a), ("B", &b)]);
        let back = parse_blocks(&text, &["A", "B"]).unwrap();
        assert_eq!(back, vec![a, b]);
        assert!(parse_blocks(&text, &["B", "A"]).is_err());
        assert!(parse_blocks(&text, &["A", "C"]).is_err());
    }
}
