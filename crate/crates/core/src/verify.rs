//! Grid comparison of point maps.
//!
//! Sup-norm error over a continuum is unobservable; these helpers measure it
//! on an inclusive rectangular grid and expose the spacing `h` so callers can
//! state the explicit slack: for targets with Lipschitz constant `L`, the
//! true sup exceeds the grid sup by at most `L * h`.

use crate::affine::MaxMinString;
use crate::error::{Error, Result};
use crate::net::ReluNet;

/// Anything that maps points to points with fixed dimensions.
pub trait PointFn {
    fn d_in(&self) -> usize;
    fn d_out(&self) -> usize;
    fn eval_point(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
}

impl PointFn for MaxMinString {
    fn d_in(&self) -> usize {
        self.d_in()
    }
    fn d_out(&self) -> usize {
        self.d_out()
    }
    fn eval_point(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.eval_into(x, out)
    }
}

impl PointFn for ReluNet {
    fn d_in(&self) -> usize {
        self.d_in()
    }
    fn d_out(&self) -> usize {
        self.d_out()
    }
    fn eval_point(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.forward_into(x, out)
    }
}

/// Closure adapter carrying the dimensions a bare closure lacks.
pub struct RawFn<F> {
    d_in: usize,
    d_out: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> RawFn<F> {
    pub fn new(d_in: usize, d_out: usize, f: F) -> Self {
        RawFn { d_in, d_out, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> PointFn for RawFn<F> {
    fn d_in(&self) -> usize {
        self.d_in
    }
    fn d_out(&self) -> usize {
        self.d_out
    }
    fn eval_point(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        (self.f)(x, out);
        if !out.iter().all(|v| v.is_finite()) {
            return Err(Error::TargetEval {
                point: x.to_vec(),
                reason: "non-finite value".into(),
            });
        }
        Ok(())
    }
}

/// Inclusive rectangular grid with `per_axis` points along every axis.
///
/// Axis endpoints are hit exactly; a single-point axis degenerates to the
/// interval midpoint. Iteration order is row-major with the last axis
/// fastest, so runs are reproducible byte for byte.
pub struct Grid {
    axes: Vec<Vec<f64>>,
    spacing: f64,
}

impl Grid {
    pub fn new(lo: &[f64], hi: &[f64], per_axis: usize) -> Result<Grid> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), got: hi.len() });
        }
        if lo.is_empty() || per_axis == 0 {
            return Err(Error::InvalidInput("grid needs at least one axis and one point".into()));
        }
        let mut axes = Vec::with_capacity(lo.len());
        let mut spacing = 0.0f64;
        for (&a, &b) in lo.iter().zip(hi) {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(Error::InvalidInput(format!("bad grid axis [{a}, {b}]")));
            }
            let axis = if per_axis == 1 {
                spacing = spacing.max(b - a);
                vec![0.5 * (a + b)]
            } else {
                let h = (b - a) / (per_axis - 1) as f64;
                spacing = spacing.max(h);
                (0..per_axis)
                    .map(|i| if i + 1 == per_axis { b } else { a + h * i as f64 })
                    .collect()
            };
            axes.push(axis);
        }
        Ok(Grid { axes, spacing })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Largest spacing over all axes: the `h` in the `Lip * h` slack.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> GridPoints<'_> {
        GridPoints { grid: self, index: vec![0; self.axes.len()], done: false }
    }
}

pub struct GridPoints<'a> {
    grid: &'a Grid,
    index: Vec<usize>,
    done: bool,
}

impl Iterator for GridPoints<'_> {
    type Item = Vec<f64>;

    fn next(&mut self) -> Option<Vec<f64>> {
        if self.done {
            return None;
        }
        let point: Vec<f64> =
            self.index.iter().zip(&self.grid.axes).map(|(&i, axis)| axis[i]).collect();
        // Odometer increment, last axis fastest.
        self.done = true;
        for k in (0..self.index.len()).rev() {
            self.index[k] += 1;
            if self.index[k] < self.grid.axes[k].len() {
                self.done = false;
                break;
            }
            self.index[k] = 0;
        }
        Some(point)
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GridReport {
    pub samples: usize,
    pub max_err: f64,
    pub mean_err: f64,
    pub argmax: Vec<f64>,
    /// Grid spacing `h` for the caller's slack accounting.
    pub spacing: f64,
}

/// Max and mean of the coordinate-wise sup distance between `a` and `b` over
/// the grid.
pub fn grid_compare(a: &dyn PointFn, b: &dyn PointFn, grid: &Grid) -> Result<GridReport> {
    if a.d_in() != b.d_in() || a.d_in() != grid.dim() {
        return Err(Error::DimensionMismatch { expected: a.d_in(), got: grid.dim() });
    }
    if a.d_out() != b.d_out() {
        return Err(Error::DimensionMismatch { expected: a.d_out(), got: b.d_out() });
    }
    let d_out = a.d_out();
    let mut va = vec![0.0; d_out];
    let mut vb = vec![0.0; d_out];
    let mut max_err = 0.0f64;
    let mut sum = 0.0f64;
    let mut argmax = Vec::new();
    let mut samples = 0usize;
    for p in grid.points() {
        a.eval_point(&p, &mut va)?;
        b.eval_point(&p, &mut vb)?;
        let mut err = 0.0f64;
        for k in 0..d_out {
            err = err.max((va[k] - vb[k]).abs());
        }
        if err > max_err || argmax.is_empty() {
            max_err = err;
            argmax = p.clone();
        }
        sum += err;
        samples += 1;
    }
    Ok(GridReport { samples, max_err, mean_err: sum / samples as f64, argmax, spacing: grid.spacing })
}
