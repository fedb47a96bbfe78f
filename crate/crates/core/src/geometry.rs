//! Balls, domain descriptors, and the radial profile of one annulus step.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Closed Euclidean ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if center.is_empty() || !center.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("ball center must be finite and non-empty".into()));
        }
        if !radius.is_finite() || radius < 0.0 {
            return Err(Error::InvalidInput("ball radius must be finite and nonnegative".into()));
        }
        Ok(Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        linalg::dist(&self.center, x) <= self.radius + slack
    }
}

/// Compact approximation domain. Boxes and point clouds are replaced by the
/// circumscribed ball of their bounding box; balls are taken as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Points { points: Vec<Vec<f64>> },
    Ball { center: Vec<f64>, radius: f64 },
}

impl Domain {
    pub fn unit_box(dim: usize) -> Self {
        Domain::Box { lo: vec![0.0; dim], hi: vec![1.0; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lo, .. } => lo.len(),
            Domain::Points { points } => points.first().map_or(0, |p| p.len()),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    pub fn enclosing_ball(&self) -> Result<Ball> {
        match self {
            Domain::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return Err(Error::InvalidInput("box bounds must have equal positive dim".into()));
                }
                if lo.iter().zip(hi).any(|(a, b)| !(a <= b)) {
                    return Err(Error::InvalidInput("box needs lo <= hi in every axis".into()));
                }
                let center: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (a + b)).collect();
                let half: Vec<f64> = lo.iter().zip(hi).map(|(a, b)| 0.5 * (b - a)).collect();
                Ball::new(center, linalg::norm(&half))
            }
            Domain::Points { points } => {
                let first = points
                    .first()
                    .ok_or_else(|| Error::InvalidInput("empty point cloud".into()))?;
                let dim = first.len();
                if points.iter().any(|p| p.len() != dim) {
                    return Err(Error::InvalidInput("ragged point cloud".into()));
                }
                let mut lo = first.clone();
                let mut hi = first.clone();
                for p in points {
                    for i in 0..dim {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                Domain::Box { lo, hi }.enclosing_ball()
            }
            Domain::Ball { center, radius } => Ball::new(center.clone(), *radius),
        }
    }

    /// Axis-aligned box used for verification grids: the box itself, or the
    /// bounding box of the descriptor.
    pub fn bounding_box(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Domain::Box { lo, hi } => Ok((lo.clone(), hi.clone())),
            Domain::Points { .. } => {
                let b = self.enclosing_ball()?;
                Ok(ball_box(&b))
            }
            Domain::Ball { .. } => {
                let b = self.enclosing_ball()?;
                Ok(ball_box(&b))
            }
        }
    }
}

fn ball_box(b: &Ball) -> (Vec<f64>, Vec<f64>) {
    let lo = b.center.iter().map(|c| c - b.radius).collect();
    let hi = b.center.iter().map(|c| c + b.radius).collect();
    (lo, hi)
}

/// Uniform point on the unit sphere.
pub fn unit_vector<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let n = linalg::norm(&v);
        if n > 1e-12 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point in a ball.
pub fn sample_in_ball<R: Rng>(ball: &Ball, rng: &mut R) -> Vec<f64> {
    let dir = unit_vector(ball.dim(), rng);
    let t: f64 = rng.gen::<f64>().powf(1.0 / ball.dim() as f64);
    dir.iter().zip(&ball.center).map(|(u, c)| c + ball.radius * t * u).collect()
}

/// Golden-ratio lattice of `n` near-uniform directions on the 2-sphere.
pub fn fibonacci_sphere(n: usize) -> Vec<[f64; 3]> {
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden_angle * i as f64;
            [rho * phi.cos(), rho * phi.sin(), z]
        })
        .collect()
}

/// Radial profile of one annulus extension step.
///
/// In the plane through the step axis: the inner circle has radius `r`, the
/// outer circle radius `r_prime = r + w^2 / (c r)`. A chord of the inner
/// circle perpendicular to the axis at axial offset `h` is extended to the
/// outer circle, where its length is exactly `w`; the tangents to the outer
/// circle at the extended endpoints meet on the axis at the apex `z`.
///
/// All derived quantities avoid catastrophic cancellation: differences of
/// squared radii are expanded analytically instead of subtracted.
#[derive(Debug, Clone, Copy)]
pub struct AnnulusStep {
    pub r: f64,
    pub r_prime: f64,
    /// Piece diameter budget; also the outer chord length.
    pub w: f64,
    /// Inner chord length |XY|.
    pub inner_chord: f64,
    /// Axial offset of the chord plane.
    pub h: f64,
    /// Half the outer chord (transverse radius of the piece base).
    pub half_outer: f64,
    /// Axial position of the apex.
    pub apex_axial: f64,
    /// Distance from apex to the chord plane.
    pub axial_height: f64,
}

/// Computes the radial profile. Requires `0 < w <= r` and an annulus constant
/// `c > 8` (the default is 10) so that the inner chord is real.
pub fn annulus_step(r: f64, w: f64, annulus_constant: f64) -> Result<AnnulusStep> {
    if !(w > 0.0 && w.is_finite() && r >= w && r.is_finite()) {
        return Err(Error::Geometry(format!("annulus step needs 0 < w <= r, got r={r}, w={w}")));
    }
    if !(annulus_constant > 8.0) {
        return Err(Error::Geometry(format!(
            "annulus constant must exceed 8 for a real chord, got {annulus_constant}"
        )));
    }
    let delta = w * w / (annulus_constant * r);
    let r_prime = r + delta;
    // r_prime^2 - r^2, expanded to avoid cancellation.
    let ring = delta * (2.0 * r + delta);
    let inner_chord_sq = w * w - 4.0 * ring;
    if inner_chord_sq <= 0.0 {
        return Err(Error::Geometry(format!(
            "inner chord degenerate at r={r}, w={w}, c={annulus_constant}"
        )));
    }
    let inner_chord = inner_chord_sq.sqrt();
    let h = (r * r - 0.25 * inner_chord_sq).sqrt();
    // s'^2 = r_prime^2 - h^2 = ring + |XY|^2/4, again cancellation-free.
    let half_outer_sq = ring + 0.25 * inner_chord_sq;
    let half_outer = half_outer_sq.sqrt();
    let axial_height = half_outer_sq / h;
    let apex_axial = h + axial_height;

    // The apex triangle must be obtuse at the apex so its diameter is the
    // outer chord; holds for all w <= r.
    if h * h < 0.5 * r_prime * r_prime * (1.0 - 1e-12) {
        return Err(Error::Geometry(format!("apex triangle not obtuse at r={r}, w={w}")));
    }
    Ok(AnnulusStep { r, r_prime, w, inner_chord, h, half_outer, apex_axial, axial_height })
}

impl AnnulusStep {
    /// Outer chord length |X'Y'| (equals `w` up to roundoff).
    pub fn outer_chord(&self) -> f64 {
        2.0 * self.half_outer
    }

    /// Distance from the apex to an outer chord endpoint.
    pub fn slant(&self) -> f64 {
        (self.axial_height * self.axial_height + self.half_outer * self.half_outer).sqrt()
    }

    /// Diameter of the added piece (triangle in the plane, cone tip in space).
    pub fn diameter(&self) -> f64 {
        self.outer_chord().max(self.slant())
    }

    /// Angle subtended at the origin by the inner chord.
    pub fn center_angle(&self) -> f64 {
        2.0 * (0.5 * self.inner_chord / self.r).asin()
    }

    /// Half-angle of the spherical cap of the outer ball covered by the piece
    /// together with the inner ball (equals `center_angle / 2`).
    pub fn cap_half_angle(&self) -> f64 {
        (self.h / self.r).clamp(-1.0, 1.0).acos()
    }
}
