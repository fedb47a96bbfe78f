//! Exact interpolation of finitely many labeled points by a max-min string
//! of length `2n - 1`.
//!
//! The construction peels off an extreme point of the set (a strict maximizer
//! along a random direction), interpolates the rest recursively, then clamps
//! the recursive string between `f(s0) - l` and `f(s0) + l`, where `l` is an
//! affine map vanishing at `s0` and large at every other point. The clamp
//! pins the value at `s0` without disturbing the other points, adding two
//! pieces per point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::affine::{AffineMap, MaxMin, MaxMinString};
use crate::error::{Error, Result};
use crate::geometry::unit_vector;
use crate::linalg;

/// Relative margin below which two directional projections count as tied.
const TIE_TOL: f64 = 1e-12;
const MAX_DIRECTION_DRAWS: usize = 64;

/// Distinct sample points with target values, validated on construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "PointSetData", into = "PointSetData")]
pub struct LabeledPointSet {
    points: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    d_in: usize,
    d_out: usize,
}

#[derive(Serialize, Deserialize)]
struct PointSetData {
    #[serde(default = "default_version")]
    version: u32,
    points: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
}

fn default_version() -> u32 {
    1
}

impl TryFrom<PointSetData> for LabeledPointSet {
    type Error = Error;
    fn try_from(d: PointSetData) -> Result<Self> {
        if d.version != 1 {
            return Err(Error::Schema(format!("unsupported point set version {}", d.version)));
        }
        LabeledPointSet::new(d.points, d.values)
    }
}

impl From<LabeledPointSet> for PointSetData {
    fn from(s: LabeledPointSet) -> Self {
        PointSetData { version: 1, points: s.points, values: s.values }
    }
}

impl LabeledPointSet {
    pub fn new(points: Vec<Vec<f64>>, values: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("need at least one point".into()));
        }
        if points.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: values.len() });
        }
        let d_in = points[0].len();
        let d_out = values[0].len();
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidInput("points and values must be nonempty vectors".into()));
        }
        for (p, v) in points.iter().zip(&values) {
            if p.len() != d_in {
                return Err(Error::DimensionMismatch { expected: d_in, got: p.len() });
            }
            if v.len() != d_out {
                return Err(Error::DimensionMismatch { expected: d_out, got: v.len() });
            }
            if !p.iter().chain(v.iter()).all(|x| x.is_finite()) {
                return Err(Error::InvalidInput("points and values must be finite".into()));
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if points[i] == points[j] {
                    return Err(Error::InvalidInput(format!(
                        "points {i} and {j} coincide; interpolation needs distinct points"
                    )));
                }
            }
        }
        Ok(LabeledPointSet { points, values, d_in, d_out })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }
}

/// Finds a point that is the strict maximizer of `x -> dot(u, x)` for a
/// random unit direction `u`, returning `(index, u)`.
///
/// Directions whose top two projections tie within `1e-12` (relative) are
/// rejected and redrawn; points in symmetric position simply get a different
/// direction next try. Gives up after 64 draws, which for distinct points
/// essentially never happens.
pub fn extreme_point<R: Rng>(points: &[&[f64]], rng: &mut R) -> Result<(usize, Vec<f64>)> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points".into()));
    }
    let dim = points[0].len();
    if points.len() == 1 {
        return Ok((0, unit_vector(dim, rng)));
    }
    for _ in 0..MAX_DIRECTION_DRAWS {
        let u = unit_vector(dim, rng);
        let (mut best, mut best_i) = (f64::NEG_INFINITY, 0);
        let mut second = f64::NEG_INFINITY;
        for (i, p) in points.iter().enumerate() {
            let d = linalg::dot(&u, p);
            if d > best {
                second = best;
                best = d;
                best_i = i;
            } else if d > second {
                second = d;
            }
        }
        let scale = 1.0_f64.max(best.abs()).max(second.abs());
        if best - second > TIE_TOL * scale {
            return Ok((best_i, u));
        }
    }
    Err(Error::DegenerateConfiguration(format!(
        "no uniquely extreme point after {MAX_DIRECTION_DRAWS} random directions; \
         points may be duplicated or pathologically close"
    )))
}

/// Affine map (all `d_out` rows equal) that vanishes exactly at
/// `points[idx]` and is at least `t` at every other point of the set.
///
/// `direction` must make `points[idx]` the strict maximizer of
/// `dot(direction, .)`, as produced by [`extreme_point`].
pub fn separating_affine(
    points: &[&[f64]],
    idx: usize,
    direction: &[f64],
    t: f64,
    d_out: usize,
) -> Result<AffineMap> {
    let d_in = direction.len();
    let s0 = points[idx];
    if s0.len() != d_in {
        return Err(Error::DimensionMismatch { expected: d_in, got: s0.len() });
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidInput(format!("separation level must be positive, got {t}")));
    }
    // Along c = -direction, s0 is the strict minimizer; delta is its margin.
    let c: Vec<f64> = direction.iter().map(|v| -v).collect();
    let base = linalg::dot(&c, s0);
    let mut delta = f64::INFINITY;
    for (j, p) in points.iter().enumerate() {
        if j != idx {
            delta = delta.min(linalg::dot(&c, p) - base);
        }
    }
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::DegenerateConfiguration(format!(
            "direction does not separate point {idx} (margin {delta})"
        )));
    }
    let row: Vec<f64> = c.iter().map(|v| (t / delta) * v).collect();
    let mut weights = Vec::with_capacity(d_out * d_in);
    for _ in 0..d_out {
        weights.extend_from_slice(&row);
    }
    AffineMap::vanishing_at(d_out, d_in, weights, s0)
}

/// Builds a max-min string of length exactly `2n - 1` that reproduces every
/// labeled value up to floating-point roundoff.
pub fn interpolate(set: &LabeledPointSet, seed: u64) -> Result<MaxMinString> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = set.len();

    // Peel extreme points, remembering each one's separating direction. The
    // direction is extreme over the set *before* removal, which is exactly
    // the group the clamp must not disturb when we later wrap back outward.
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut peeled: Vec<(usize, Vec<f64>)> = Vec::with_capacity(n - 1);
    while remaining.len() > 1 {
        let pts: Vec<&[f64]> = remaining.iter().map(|&i| set.point(i)).collect();
        let (local, dir) = extreme_point(&pts, &mut rng)?;
        peeled.push((remaining[local], dir));
        remaining.remove(local);
    }

    let innermost = remaining[0];
    let mut g = MaxMinString::constant(set.d_in(), set.value(innermost))?;
    let mut covered = vec![innermost];
    let mut buf = vec![0.0; set.d_out()];
    let mut max_t = 1.0f64;

    for (idx, dir) in peeled.into_iter().rev() {
        let fv = set.value(idx);
        let mut worst = 0.0f64;
        for &j in &covered {
            g.eval_into(set.point(j), &mut buf)?;
            for k in 0..set.d_out() {
                worst = worst.max((buf[k] - fv[k]).abs());
            }
        }
        let t = 2.0 * worst + 1.0;
        max_t = max_t.max(t);

        let mut group: Vec<&[f64]> = Vec::with_capacity(covered.len() + 1);
        group.push(set.point(idx));
        group.extend(covered.iter().map(|&j| set.point(j)));
        let ell = separating_affine(&group, 0, &dir, t, set.d_out())?;

        // Clamp g into [f(s0) - l, f(s0) + l]: pins s0, leaves others alone
        // because l exceeds |g - f(s0)| there by construction.
        let (plus, minus) = crate::affine::clamp_pair(fv, &ell)?;
        g.push(MaxMin::Min, &plus);
        g.push(MaxMin::Max, &minus);
        covered.push(idx);
    }

    debug_assert_eq!(g.len(), 2 * n - 1);

    // The clamps interact only through roundoff; refuse to return a string
    // that drifted measurably off its data.
    let mut max_val = 0.0f64;
    for i in 0..n {
        max_val = set.value(i).iter().fold(max_val, |m, v| m.max(v.abs()));
    }
    let tol = 1e-9 * (1.0 + max_val + max_t);
    for i in 0..n {
        g.eval_into(set.point(i), &mut buf)?;
        for k in 0..set.d_out() {
            let err = (buf[k] - set.value(i)[k]).abs();
            if err > tol {
                return Err(Error::Verification(format!(
                    "interpolant misses point {i} coordinate {k} by {err:.3e} (tol {tol:.3e})"
                )));
            }
        }
    }
    Ok(g)
}
