//! Lower-bound analysis of narrow nets against a fixed quadratic witness.
//!
//! A net whose hidden layers all have width equal to the input dimension is
//! affine on its all-positive region: the open polyhedron where every hidden
//! pre-activation stays positive, so every ReLU acts as the identity. The
//! witness `f(x) = sum_j (x_j - 1/2)^2` surrounds the box center (value 0)
//! with a mid-level sphere on which it equals 1/8 exactly. When that sphere
//! lies inside the all-positive region, the net is affine there, and an
//! affine function cannot be close to 0 at the sphere's center and close to
//! 1/8 across the whole sphere at once: the certified error is
//!
//!   max(|g(y)|, |g(y) - rho |u| - 1/8|, |g(y) + rho |u| - 1/8|) >= 1/16,
//!
//! where `g(x) = u . x + v` is the affine restriction, `y` is the center and
//! `rho` the sphere radius (the extremes of `g` on the sphere are attained,
//! so each term is a genuine pointwise error). When some sphere point
//! escapes the region, that point is reported as a witness and the error is
//! only estimated by sampling; the same bound still holds mathematically,
//! but this module does not certify it numerically in that case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::affine::AffineMap;
use crate::error::{Error, Result};
use crate::geometry::{fibonacci_sphere, unit_vector};
use crate::linalg;
use crate::net::ReluNet;

/// Open halfspace `normal . x + offset > 0`.
#[derive(Debug, Clone, Serialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
    /// Hidden layer and unit whose pre-activation this constraint is.
    pub layer: usize,
    pub unit: usize,
}

/// Intersection of open halfspaces, ordered by layer: truncating the list at
/// a layer boundary yields the (larger) region of the shallower prefix.
#[derive(Debug, Clone, Serialize)]
pub struct Polyhedron {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl Polyhedron {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Smallest constraint value `normal . x + offset`; infinite when there
    /// are no constraints.
    pub fn min_margin(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim);
        self.halfspaces
            .iter()
            .fold(f64::INFINITY, |m, h| m.min(linalg::dot(&h.normal, x) + h.offset))
    }

    /// Strict membership with an explicit margin.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.min_margin(x) > tol
    }
}

/// True iff the closed ball `B(center, radius)` lies inside every halfspace
/// with margin at least `tol`: `normal . center + offset - radius |normal|
/// >= tol` for each constraint.
pub fn sphere_in_polyhedron(center: &[f64], radius: f64, poly: &Polyhedron, tol: f64) -> bool {
    assert_eq!(center.len(), poly.dim);
    poly.halfspaces.iter().all(|h| {
        linalg::dot(&h.normal, center) + h.offset - radius * linalg::norm(&h.normal) >= tol
    })
}

/// Composes the net's layers as if every ReLU were the identity, recording
/// one halfspace per hidden unit (its pre-activation, as an affine functional
/// of the raw input, required positive). On the returned polyhedron the net
/// genuinely equals the returned affine map. Only nets whose hidden widths
/// all equal `d_in` are in scope.
pub fn all_positive_region(net: &ReluNet) -> Result<(Polyhedron, AffineMap)> {
    let d = net.d_in();
    for (i, w) in net.hidden_widths().iter().enumerate() {
        if *w != d {
            return Err(Error::OutOfScopeNet(format!(
                "hidden layer {i} has width {w}; the region analysis covers width-{d} nets"
            )));
        }
    }
    let layers = net.layers();
    let mut halfspaces = Vec::new();
    let mut affine = AffineMap::identity(d);
    for (j, layer) in layers[..layers.len() - 1].iter().enumerate() {
        let pre = layer.compose(&affine)?;
        for unit in 0..pre.rows() {
            halfspaces.push(Halfspace {
                normal: pre.weight_row(unit).to_vec(),
                offset: pre.offset()[unit],
                layer: j,
                unit,
            });
        }
        affine = pre;
    }
    let restriction = layers[layers.len() - 1].compose(&affine)?;
    Ok((Polyhedron { dim: d, halfspaces }, restriction))
}

/// The pinned hard target: `f(x) = sum_j (x_j - 1/2)^2` on the unit box.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessInstance {
    d_in: usize,
    center: Vec<f64>,
    /// Witness value on the outer level sphere.
    pub level_a: f64,
    /// Witness value at the center.
    pub level_b: f64,
    /// Mid level `(a + b) / 2`, attained exactly on the mid sphere.
    pub level_c: f64,
    /// Radius of the outer level sphere.
    pub outer_radius: f64,
    /// Radius of the mid-level sphere.
    pub mid_radius: f64,
}

impl WitnessInstance {
    pub fn unit_box(d_in: usize) -> Result<Self> {
        if d_in == 0 {
            return Err(Error::InvalidInput("witness needs at least one input".into()));
        }
        Ok(WitnessInstance {
            d_in,
            center: vec![0.5; d_in],
            level_a: 0.25,
            level_b: 0.0,
            level_c: 0.125,
            outer_radius: 0.5,
            mid_radius: 0.125f64.sqrt(),
        })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    /// 1: certified via the affine restriction; 2: witness point escapes the
    /// region, bound is a sampled estimate only.
    pub case: u8,
    pub bound: f64,
    /// Mid-sphere point outside the all-positive region (case 2).
    pub witness: Option<Vec<f64>>,
    pub certified: bool,
    pub halfspaces: usize,
    /// |u| of the affine restriction `u . x + v`.
    pub slope_norm: f64,
    pub restriction_at_center: f64,
    /// Layers whose weight matrix is rank deficient (analysis proceeds
    /// regardless; recorded for diagnosis).
    pub rank_deficient_layers: Vec<usize>,
    pub samples: usize,
    pub diagnosis: String,
}

/// Points scanned on spheres during containment pre-scans and error
/// estimation, by input dimension.
fn sphere_directions(dim: usize, seed: u64) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..360)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 360.0;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => fibonacci_sphere(2000).into_iter().map(|d| d.to_vec()).collect(),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..2000).map(|_| unit_vector(dim, &mut rng)).collect()
        }
    }
}

/// Certified (case 1) or estimated (case 2) lower bound on the sup error of
/// `net` against the witness over the unit box.
pub fn certify_lower_bound(
    net: &ReluNet,
    witness: &WitnessInstance,
    tol: f64,
) -> Result<Certificate> {
    if net.d_out() != 1 {
        return Err(Error::OutOfScopeNet(format!(
            "certification compares scalar outputs, net has d_out {}",
            net.d_out()
        )));
    }
    if witness.d_in() != net.d_in() {
        return Err(Error::DimensionMismatch { expected: witness.d_in(), got: net.d_in() });
    }
    let (poly, restriction) = all_positive_region(net)?;
    let rank_deficient_layers: Vec<usize> = net
        .layers()
        .iter()
        .enumerate()
        .filter(|(_, l)| {
            linalg::rank(l.weights(), l.rows(), l.cols(), 1e-12) < l.rows().min(l.cols())
        })
        .map(|(i, _)| i)
        .collect();

    let y = witness.center();
    let rho = witness.mid_radius;
    let u = restriction.weight_row(0);
    let slope_norm = linalg::norm(u);
    let at_center = restriction.eval(y)?[0];

    // Containment pre-scan: an explicit mid-sphere point outside the region
    // settles case 2 with a concrete witness.
    let dirs = sphere_directions(witness.d_in(), 0);
    let mut scanned = 0usize;
    let mut escape: Option<Vec<f64>> = None;
    for dir in &dirs {
        let x: Vec<f64> = y.iter().zip(dir).map(|(c, d)| c + rho * d).collect();
        scanned += 1;
        if poly.min_margin(&x) <= 0.0 {
            escape = Some(x);
            break;
        }
    }
    if escape.is_none() && sphere_in_polyhedron(y, rho, &poly, tol) {
        let m = at_center - rho * slope_norm;
        let big_m = at_center + rho * slope_norm;
        let bound = (at_center - witness.level_b)
            .abs()
            .max((m - witness.level_c).abs())
            .max((big_m - witness.level_c).abs());
        return Ok(Certificate {
            case: 1,
            bound,
            witness: None,
            certified: true,
            halfspaces: poly.halfspaces.len(),
            slope_norm,
            restriction_at_center: at_center,
            rank_deficient_layers,
            samples: scanned,
            diagnosis: "mid-level sphere lies inside the all-positive region; the affine \
                        restriction must miss the center value or the mid level"
                .into(),
        });
    }
    // The exact test failed (or a scan point escaped): construct the
    // deepest-violation sphere point for the worst constraint if the scan
    // did not already produce one.
    let witness_point = escape.unwrap_or_else(|| {
        let worst = poly
            .halfspaces
            .iter()
            .min_by(|a, b| {
                let ma = linalg::dot(&a.normal, y) + a.offset - rho * linalg::norm(&a.normal);
                let mb = linalg::dot(&b.normal, y) + b.offset - rho * linalg::norm(&b.normal);
                ma.total_cmp(&mb)
            })
            .expect("exact containment cannot fail without constraints");
        let n = linalg::norm(&worst.normal);
        if n > 0.0 {
            y.iter().zip(&worst.normal).map(|(c, a)| c - rho * a / n).collect()
        } else {
            let mut x = y.to_vec();
            x[0] += rho;
            x
        }
    });

    // Sampled estimate of the sup error over the outer level sphere plus the
    // center; every term is a real pointwise error, so the estimate is a
    // valid (if unverified-as-tight) lower bound.
    let mut out = [0.0];
    net.forward_into(y, &mut out)?;
    let mut estimate = (out[0] - witness.level_b).abs();
    let mut samples = scanned + 1;
    for dir in &dirs {
        let x: Vec<f64> =
            y.iter().zip(dir).map(|(c, d)| c + witness.outer_radius * d).collect();
        net.forward_into(&x, &mut out)?;
        estimate = estimate.max((out[0] - witness.eval(&x)).abs());
        samples += 1;
    }
    Ok(Certificate {
        case: 2,
        bound: estimate,
        witness: Some(witness_point),
        certified: false,
        halfspaces: poly.halfspaces.len(),
        slope_norm,
        restriction_at_center: at_center,
        rank_deficient_layers,
        samples,
        diagnosis: "a mid-sphere point escapes the all-positive region (recorded as witness); \
                    the level-set argument still forces the 1/16 error, but this run only \
                    reports a sampled estimate"
            .into(),
    })
}
