//! Length-growth accounting across a tolerance sweep.
//!
//! Rebuilding one target at several tolerances exposes how string length
//! scales with the piece resolution; the fitted log-log slope should stay
//! near `d_in + 1` (near 1 on the line, where each round adds a bounded
//! number of pieces).

use serde::Serialize;

use crate::builder::{build, BuildConfig};
use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::TargetFn;

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    /// Piece resolution at this tolerance.
    pub resolution: f64,
    pub radius: f64,
    pub length: usize,
    /// The predicted growth order `(radius / resolution)^(d_in + 1)`.
    pub predicted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DepthReport {
    pub d_in: usize,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `ln length` against `ln (1/resolution)`; absent
    /// when the sweep is degenerate (constant length or constant resolution).
    pub slope: Option<f64>,
}

/// Builds `f` once per tolerance in `eps_list` and fits the growth slope.
/// `template` supplies every knob except `eps`.
pub fn depth_sweep(
    f: TargetFn,
    d_out: usize,
    domain: &Domain,
    template: &BuildConfig,
    eps_list: &[f64],
) -> Result<DepthReport> {
    if eps_list.len() < 2 {
        return Err(Error::InvalidInput("a sweep needs at least two tolerances".into()));
    }
    let mut rows = Vec::with_capacity(eps_list.len());
    let mut d_in = 0;
    for &eps in eps_list {
        let mut config = template.clone();
        config.eps = eps;
        let (_, trace) = build(f, d_out, domain, &config)?;
        d_in = trace.dim;
        rows.push(SweepRow {
            eps,
            resolution: trace.resolution,
            radius: trace.radius,
            length: trace.total_length,
            predicted: (trace.radius / trace.resolution).powi(trace.dim as i32 + 1),
        });
    }
    let slope = fit_slope(&rows);
    Ok(DepthReport { d_in, rows, slope })
}

fn fit_slope(rows: &[SweepRow]) -> Option<f64> {
    let lengths: Vec<f64> = rows.iter().map(|r| r.length as f64).collect();
    if lengths.iter().all(|&l| l == lengths[0]) {
        return None;
    }
    let xs: Vec<f64> = rows.iter().map(|r| (1.0 / r.resolution).ln()).collect();
    let ys: Vec<f64> = lengths.iter().map(|&l| l.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-18 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}
