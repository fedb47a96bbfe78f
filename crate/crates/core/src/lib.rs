//! Max-min affine strings, geometric approximation of continuous functions,
//! compilation to narrow ReLU networks, and width lower-bound certificates.
//!
//! The central object is the [`MaxMinString`]: a left-deep nesting of
//! coordinate-wise `max`/`min` over affine maps `R^d_in -> R^d_out`. Strings
//! are exactly representable by ReLU networks whose hidden layers all have
//! width `d_in + d_out` ([`compile`]), they interpolate arbitrary finite data
//! ([`interpolate`]), and they approximate arbitrary continuous functions on
//! a ball to any accuracy ([`build`]). The [`analyzer`] module provides the
//! complementary negative result: networks of hidden width only `d_in` carry
//! an affine restriction on their all-positive region, which yields a
//! quantitative approximation lower bound against a quadratic witness.
//!
//! All arithmetic is `f64`; every randomized routine takes an explicit seed
//! and is fully deterministic.

pub mod affine;
pub mod analyzer;
pub mod builder;
pub mod compile;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod interpolate;
mod linalg;
pub mod modulus;
pub mod net;
pub mod report;
pub mod verify;

pub use affine::{AffineMap, MaxMin, MaxMinString};
pub use analyzer::{certify_lower_bound, Certificate, Polyhedron, WitnessInstance};
pub use builder::{build, BuildConfig, BuildTrace};
pub use compile::{compile, verify_compilation, CompilationPlan, CompilationReport};
pub use error::{Error, Result};
pub use geometry::{Ball, Domain};
pub use interpolate::{interpolate, LabeledPointSet};
pub use modulus::{estimate_modulus, inverse_modulus, ModulusSpec};
pub use net::ReluNet;
pub use report::{depth_sweep, DepthReport};
pub use verify::{grid_compare, Grid, GridReport, PointFn};

/// Default absolute/relative tolerance for float comparisons in checks that
/// are not otherwise pinned: `|a - b| <= TOL * (1 + max(|a|, |b|))`.
pub const TOL: f64 = 1e-9;

/// A target function writing its `d_out` values into `out`.
///
/// Callers promise the function is evaluable on the stated domain inflated by
/// twice the resolution at which it will be approximated; the builder places
/// probe apexes slightly outside the enclosing ball.
pub type TargetFn<'a> = &'a dyn Fn(&[f64], &mut [f64]);
