//! Retraction-based Hermite interpolation on matrix manifolds.
//!
//! The crate provides
//!
//! * dense kernels ([`linalg`]): positive-diagonal QR, thin SVD, polar
//!   factor, and the two structured solves behind the inverse Stiefel
//!   retractions;
//! * a [`Manifold`] trait with two geometries, the Stiefel manifold
//!   ([`stiefel`], Q-factor and polar retractions) and the fixed-rank
//!   manifold ([`fixedrank`], orthographic retraction);
//! * endpoint retraction curves and the generalized de Casteljau recursion
//!   ([`manifold`]);
//! * the piecewise Hermite interpolant and comparison schemes ([`hermite`]);
//! * random smooth test curves ([`curves`]) and the experiment drivers
//!   ([`experiment`], [`verify`]) used by the `rh-interp` binary.

// `!(x > 0.0)` and friends deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod error;
pub mod experiment;
pub mod fixedrank;
pub mod hermite;
pub mod io;
pub mod linalg;
pub mod manifold;
pub mod stiefel;
pub mod verify;

pub use curves::{
    flat_linear_instance, qfactor_instance, sample_curve, svd_instance, uniform_times, CurveDescriptor,
    ManifoldCurve, SampledCurve,
};
pub use error::{Error, Result};
pub use fixedrank::{FixedRank, FixedRankPoint, FixedRankTangent};
pub use hermite::{Interpolant, Scheme, SegmentCache, TangentSample};
pub use linalg::Matrix;
pub use manifold::{decasteljau, endpoint_curve, EvalCounters, Manifold};
pub use stiefel::{Stiefel, StiefelPoint, StiefelRetraction, StiefelTangent};
