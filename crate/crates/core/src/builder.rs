//! Constructive approximation of a continuous target on a ball by a max-min
//! string, with a certified sup-norm error.
//!
//! The scheme grows the certified region radially. Seed: a constant string
//! equal to the target at the domain center, good on a ball whose radius is
//! the resolution `w = inverse_modulus(modulus, tighten * eps)`. Growth: each
//! round advances the covered radius `r` by one annulus. The annulus is
//! covered by spherical caps of the outer ball (intervals for `d_in = 1`,
//! circular caps for 2, spherical caps for 3); for each cap the string is
//! clamped into `[f(A) - l, f(A) + l]`, where `A` is the apex of the tangent
//! cone over the cap and `l` is an affine map vanishing at `A`.
//!
//! Two facts make the clamp safe. On the cap itself `l` stays below
//! `tighten * eps` and every point is within `w` of the apex, so the newly
//! covered points end up within `2 * tighten * eps` of the target. Everywhere
//! else in the outer ball, `l(x)` dominates the chain bound
//! `omega(|x - A|) - 2 * tighten * eps`, so a clamp never pushes an already
//! certified value out of its band. With the default `tighten = 0.5` the
//! final certified error is `eps` exactly.
//!
//! The target callback is evaluated at cap apexes, which lie slightly outside
//! the covered ball: it must be well defined on the domain's enclosing ball
//! inflated by twice the resolution.
//!
//! Coverage of an annulus by caps is exact by construction for `d_in` 1 and
//! 2. For `d_in = 3` the directions come from golden-ratio sphere lattices
//! whose covering radius is verified against a 16x denser probe lattice (the
//! probe mesh itself is bounded by the standard `3 / sqrt(n)` estimate); if
//! verification fails the lattice is densified and retried.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::affine::{clamp_pair, AffineMap, MaxMin, MaxMinString};
use crate::error::{Error, Result};
use crate::geometry::{annulus_step, fibonacci_sphere, sample_in_ball, AnnulusStep, Ball, Domain};
use crate::linalg;
use crate::modulus::{inverse_modulus, ModulusSpec};
use crate::TargetFn;

#[derive(Debug, Clone)]
pub struct BuildConfig {
    /// Certified sup-norm error of the returned string on the domain.
    pub eps: f64,
    pub modulus: ModulusSpec,
    /// Internal tightening: pieces are built to `tighten * eps` so the final
    /// certificate is `2 * tighten * eps`. Must lie in (0, 0.5].
    pub tighten: f64,
    /// Annulus growth constant `c` in `delta = w^2 / (c r)`; must exceed 8.
    pub annulus_constant: f64,
    /// Fraction of the exact cap spacing actually used (margin for roundoff).
    pub overlap: f64,
    pub seed: u64,
    /// Random spot-check points; 0 disables the built-in verification.
    pub probes: usize,
    /// Retries when the 3D direction lattice fails its covering check.
    pub max_densify: usize,
}

impl BuildConfig {
    pub fn new(eps: f64, modulus: ModulusSpec) -> Self {
        BuildConfig {
            eps,
            modulus,
            tighten: 0.5,
            annulus_constant: 10.0,
            overlap: 0.9,
            seed: 0,
            probes: 64,
            max_densify: 4,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(Error::InvalidInput(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.tighten > 0.0 && self.tighten <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "tighten must lie in (0, 0.5] to certify the requested eps, got {}",
                self.tighten
            )));
        }
        if !(self.annulus_constant > 8.0) {
            return Err(Error::InvalidInput(format!(
                "annulus constant must exceed 8, got {}",
                self.annulus_constant
            )));
        }
        if !(self.overlap >= 0.5 && self.overlap <= 0.99) {
            return Err(Error::InvalidInput(format!(
                "overlap must lie in [0.5, 0.99], got {}",
                self.overlap
            )));
        }
        self.modulus.validate()
    }
}

/// One annulus round of a build.
#[derive(Debug, Clone, Serialize)]
pub struct AnnulusRow {
    pub index: usize,
    pub r: f64,
    pub r_prime: f64,
    pub pieces: usize,
    pub cumulative_length: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildTrace {
    pub dim: usize,
    pub d_out: usize,
    pub eps: f64,
    pub internal_eps: f64,
    /// Piece resolution `w`.
    pub resolution: f64,
    /// Radius of the enclosing ball that was covered.
    pub radius: f64,
    pub rounds: Vec<AnnulusRow>,
    pub total_length: usize,
    pub probe_count: usize,
    /// Max |g - f| over the spot-check probes (0 when probes are disabled).
    pub probe_error: f64,
    /// Excluded from serialized artifacts to keep runs byte-reproducible.
    #[serde(skip)]
    pub wall_seconds: f64,
}

impl BuildTrace {
    /// Length divided by `(radius / resolution)^(dim + 1)`, the predicted
    /// growth order. Meaningful once the resolution is below the radius.
    pub fn growth_constant(&self) -> f64 {
        let ratio = self.radius / self.resolution;
        self.total_length as f64 / ratio.powi(self.dim as i32 + 1)
    }
}

/// Approximates `f` on `domain` to within `config.eps` in sup norm.
pub fn build(
    f: TargetFn,
    d_out: usize,
    domain: &Domain,
    config: &BuildConfig,
) -> Result<(MaxMinString, BuildTrace)> {
    config.validate()?;
    if d_out == 0 {
        return Err(Error::InvalidInput("d_out must be at least 1".into()));
    }
    let started = std::time::Instant::now();
    let ball = domain.enclosing_ball()?;
    let dim = ball.dim();
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidInput(format!(
            "builder supports input dimensions 1 through 3, got {dim}"
        )));
    }
    let eps_in = config.tighten * config.eps;
    let w = inverse_modulus(&config.modulus, eps_in)?;
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::UnusableModulus(format!("resolution {w}")));
    }

    let center = &ball.center;
    let radius = ball.radius;

    let mut fc = vec![0.0; d_out];
    eval_target(f, center, &mut fc)?;
    let mut g = MaxMinString::constant(dim, &fc)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut probes = Probes::sample(f, &ball, config.probes, d_out, &fc, &mut rng)?;

    let mut rounds: Vec<AnnulusRow> = Vec::new();
    let mut covers = SphereCovers::default();
    let mut r = w.min(radius);
    // Relative slack keeps float accumulation of the radius schedule from
    // scheduling a spurious final annulus for a 1-ulp shortfall.
    let goal = radius * (1.0 - 1e-12);
    while r < goal {
        let index = rounds.len();
        let (r_next, pieces) = match dim {
            1 => {
                let beta = eps_in / w;
                for side in [1.0, -1.0] {
                    extend_piece(&mut g, f, center, &[side], r + w, beta, &mut probes)?;
                }
                (r + w, 2)
            }
            _ => {
                let step = annulus_step(r, w.min(r), config.annulus_constant)?;
                check_step(&step, w)?;
                let beta = clamp_slope(&step, eps_in, w)?;
                if dim == 2 {
                    let dirs = directions_2d(&step, config.overlap);
                    for e in &dirs {
                        extend_piece(&mut g, f, center, e, step.apex_axial, beta, &mut probes)?;
                    }
                    (step.r_prime, dirs.len())
                } else {
                    let target = config.overlap * step.cap_half_angle();
                    let dirs = covers.directions(target, config.max_densify)?;
                    for e in &dirs {
                        extend_piece(&mut g, f, center, e, step.apex_axial, beta, &mut probes)?;
                    }
                    (step.r_prime, dirs.len())
                }
            }
        };
        probes.check(r_next.min(radius), 2.0 * eps_in, index)?;
        rounds.push(AnnulusRow { index, r, r_prime: r_next, pieces, cumulative_length: g.len() });
        r = r_next;
    }
    // Covers the constant-only case (no rounds), where the modulus alone
    // carries the certificate.
    probes.check(radius, 2.0 * eps_in, rounds.len())?;

    let trace = BuildTrace {
        dim,
        d_out,
        eps: config.eps,
        internal_eps: eps_in,
        resolution: w,
        radius,
        rounds,
        total_length: g.len(),
        probe_count: probes.len(),
        probe_error: probes.worst(),
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((g, trace))
}

/// Per-annulus geometry assertions: the added cap never exceeds the piece
/// resolution in diameter, and the tangent rays from the apex clear the
/// covered ball (containment of the old region in the cone).
fn check_step(step: &AnnulusStep, w: f64) -> Result<()> {
    let diam = step.diameter().max(step.slant());
    if diam > w * (1.0 + 1e-9) {
        return Err(Error::Geometry(format!(
            "cap diameter {diam:.6e} exceeds resolution {w:.6e} at r={}",
            step.r
        )));
    }
    // Distance from the domain center to the tangent ray; equals r' when the
    // apex really is the tangent intersection.
    let tangency = step.half_outer * step.apex_axial / step.slant();
    if (tangency - step.r_prime).abs() > 1e-9 * step.r_prime {
        return Err(Error::Geometry(format!(
            "apex rays miss tangency at r={}: {tangency:.12} vs {:.12}",
            step.r, step.r_prime
        )));
    }
    Ok(())
}

/// Slope of the clamp profile `l(x) = beta * (z - e . (x - center))`.
///
/// `beta` is pinned by two constraints: at most `eps_in` on the cap
/// (`beta <= eps_in / axial_height`, used with equality) and at least the
/// chain bound `(eps_in / w) * max |x - A| / (z - e.x)` over the outer ball,
/// whose maximum is `r' / half_outer` at the tangent-cone boundary. The
/// allowance exceeds the need by the factor `2h/r' >= 1.5` for every valid
/// step; the check guards the geometry, it is not expected to fire.
fn clamp_slope(step: &AnnulusStep, eps_in: f64, w: f64) -> Result<f64> {
    let beta = eps_in / step.axial_height;
    let needed = (eps_in / w) * (step.r_prime / step.half_outer);
    if beta < needed {
        return Err(Error::Geometry(format!(
            "clamp slope infeasible at r={} (have {beta:.3e}, need {needed:.3e})",
            step.r
        )));
    }
    Ok(beta)
}

/// Evenly spaced cap directions; spacing stays below `overlap` times the cap
/// aperture so consecutive caps overlap and the ring is covered exactly.
fn directions_2d(step: &AnnulusStep, overlap: f64) -> Vec<Vec<f64>> {
    let spacing = overlap * step.center_angle();
    let m = (std::f64::consts::TAU / spacing).ceil() as usize;
    let dtheta = std::f64::consts::TAU / m as f64;
    (0..m)
        .map(|i| {
            let t = i as f64 * dtheta;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

/// Clamps the string into `[f(A) - l, f(A) + l]` for the cap with apex
/// `center + z * e`, where `l(x) = beta * (z - e . (x - center))` vanishes at
/// the apex exactly.
fn extend_piece(
    g: &mut MaxMinString,
    f: TargetFn,
    center: &[f64],
    e: &[f64],
    z: f64,
    beta: f64,
    probes: &mut Probes,
) -> Result<()> {
    let (dim, d_out) = (g.d_in(), g.d_out());
    let apex: Vec<f64> = center.iter().zip(e).map(|(c, u)| c + z * u).collect();
    let mut fa = vec![0.0; d_out];
    eval_target(f, &apex, &mut fa)?;
    let row: Vec<f64> = e.iter().map(|u| -beta * u).collect();
    let mut weights = Vec::with_capacity(d_out * dim);
    for _ in 0..d_out {
        weights.extend_from_slice(&row);
    }
    let ell = AffineMap::vanishing_at(d_out, dim, weights, &apex)?;
    let (plus, minus) = clamp_pair(&fa, &ell)?;
    probes.apply(&plus, &minus);
    g.push(MaxMin::Min, &plus);
    g.push(MaxMin::Max, &minus);
    Ok(())
}

fn eval_target(f: TargetFn, x: &[f64], out: &mut [f64]) -> Result<()> {
    f(x, out);
    if !out.iter().all(|v| v.is_finite()) {
        return Err(Error::TargetEval { point: x.to_vec(), reason: "non-finite value".into() });
    }
    Ok(())
}

/// Spot-check points with incrementally maintained string values: each clamp
/// updates every probe in O(d_out * dim), so checks never re-evaluate the
/// (possibly very long) string.
struct Probes {
    points: Vec<Vec<f64>>,
    dist: Vec<f64>,
    f_vals: Vec<Vec<f64>>,
    g_vals: Vec<Vec<f64>>,
    tol: f64,
}

impl Probes {
    fn sample(
        f: TargetFn,
        ball: &Ball,
        count: usize,
        d_out: usize,
        seed_val: &[f64],
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        let mut points = Vec::with_capacity(count);
        let mut f_vals = Vec::with_capacity(count);
        let mut scale = 1.0f64;
        for _ in 0..count {
            let p = sample_in_ball(ball, rng);
            let mut v = vec![0.0; d_out];
            eval_target(f, &p, &mut v)?;
            scale = v.iter().fold(scale, |m, x| m.max(x.abs()));
            points.push(p);
            f_vals.push(v);
        }
        let dist = points.iter().map(|p| linalg::dist(p, &ball.center)).collect();
        let g_vals = vec![seed_val.to_vec(); count];
        Ok(Probes { points, dist, f_vals, g_vals, tol: 1e-9 * scale })
    }

    fn len(&self) -> usize {
        self.points.len()
    }

    fn apply(&mut self, plus: &AffineMap, minus: &AffineMap) {
        let d_out = plus.rows();
        for (p, g) in self.points.iter().zip(self.g_vals.iter_mut()) {
            for k in 0..d_out {
                let up = linalg::dot(plus.weight_row(k), p) + plus.offset()[k];
                let lo = linalg::dot(minus.weight_row(k), p) + minus.offset()[k];
                g[k] = lo.max(up.min(g[k]));
            }
        }
    }

    /// All probes within the covered radius must sit within the certificate.
    fn check(&self, covered: f64, bound: f64, round: usize) -> Result<()> {
        for i in 0..self.points.len() {
            if self.dist[i] > covered {
                continue;
            }
            for k in 0..self.f_vals[i].len() {
                let err = (self.g_vals[i][k] - self.f_vals[i][k]).abs();
                if err > bound + self.tol {
                    return Err(Error::Verification(format!(
                        "probe {i} off by {err:.3e} after round {round} (certified {bound:.3e}); \
                         the modulus likely understates the target's variation"
                    )));
                }
            }
        }
        Ok(())
    }

    fn worst(&self) -> f64 {
        let mut worst = 0.0f64;
        for (fs, gs) in self.f_vals.iter().zip(&self.g_vals) {
            for (a, b) in fs.iter().zip(gs) {
                worst = worst.max((a - b).abs());
            }
        }
        worst
    }
}

/// Verified golden-ratio direction lattices, cached by size.
///
/// Sizes are powers of two so a long build touches few distinct lattices.
/// The covering verification is the dominant one-time cost per size; see the
/// module docs for what "verified" means in 3D.
#[derive(Default)]
struct SphereCovers {
    verified: HashMap<usize, f64>,
}

impl SphereCovers {
    fn directions(&mut self, target: f64, max_densify: usize) -> Result<Vec<Vec<f64>>> {
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::Geometry(format!("bad covering target {target}")));
        }
        // Size the lattice so the nominal covering radius 2.3/sqrt(n) lands
        // around 0.55 * target, leaving room for the probe-mesh slack.
        let mut n = (((2.3 / (0.55 * target)).powi(2)).ceil() as usize).next_power_of_two().max(64);
        for _ in 0..=max_densify {
            let bound = match self.verified.get(&n) {
                Some(&b) => b,
                None => {
                    let b = covering_bound(n);
                    self.verified.insert(n, b);
                    b
                }
            };
            if bound <= target {
                return Ok(fibonacci_sphere(n).into_iter().map(|d| d.to_vec()).collect());
            }
            n *= 2;
        }
        Err(Error::Geometry(format!(
            "no direction lattice reached covering radius {target} after {max_densify} densifications"
        )))
    }
}

/// Upper bound on the covering radius of `fibonacci_sphere(n)`: exact nearest
/// angles on a 16x denser probe lattice, plus the probe mesh slack.
fn covering_bound(n: usize) -> f64 {
    let dirs = fibonacci_sphere(n);
    let m = 16 * n;
    let probe_mesh = 3.0 / (m as f64).sqrt();
    let mut worst = 0.0f64;
    for p in fibonacci_sphere(m) {
        let a = nearest_angle(&dirs, &p);
        if a > worst {
            worst = a;
        }
    }
    worst + probe_mesh
}

/// Exact nearest-direction angle using the lattice's sorted z structure: any
/// direction within angle `a` of `p` has `|z - p.z| <= a`, so scanning a z
/// window suffices; the window doubles until it certifies its own result.
fn nearest_angle(dirs: &[[f64; 3]], p: &[f64; 3]) -> f64 {
    let n = dirs.len();
    let mut half_width = 8.0 / (n as f64).sqrt();
    loop {
        let zhi = (p[2] + half_width).min(1.0);
        let zlo = (p[2] - half_width).max(-1.0);
        // dirs[i] has z = 1 - (2i+1)/n, strictly decreasing in i.
        let i_lo = (((1.0 - zhi) * n as f64 - 1.0) / 2.0).floor().max(0.0) as usize;
        let i_hi = (((1.0 - zlo) * n as f64 - 1.0) / 2.0).ceil().min((n - 1) as f64) as usize;
        let mut best_cos = -1.0f64;
        for d in &dirs[i_lo..=i_hi] {
            let c = d[0] * p[0] + d[1] * p[1] + d[2] * p[2];
            if c > best_cos {
                best_cos = c;
            }
        }
        let angle = best_cos.clamp(-1.0, 1.0).acos();
        if angle <= half_width || (i_lo == 0 && i_hi == n - 1) {
            return angle;
        }
        half_width *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lip(l: f64) -> ModulusSpec {
        ModulusSpec::Lipschitz { l }
    }

    #[test]
    fn constant_target_needs_one_piece() {
        let f = |_: &[f64], out: &mut [f64]| out[0] = 3.0;
        let cfg = BuildConfig::new(0.1, lip(0.01));
        let (g, trace) = build(&f, 1, &Domain::unit_box(2), &cfg).unwrap();
        assert_eq!(g.len(), 1);
        assert!(trace.rounds.is_empty());
        assert!(trace.probe_error <= 1e-12);
        assert_eq!(g.eval(&[0.9, 0.1]).unwrap(), vec![3.0]);
    }

    #[test]
    fn absolute_value_on_the_line() {
        let f = |x: &[f64], out: &mut [f64]| out[0] = (x[0] - 0.3).abs();
        let cfg = BuildConfig::new(0.1, lip(1.0));
        let (g, trace) = build(&f, 1, &Domain::unit_box(1), &cfg).unwrap();
        // R = 0.5, w = 0.05: 9 rounds of 2 pieces, each piece 2 affines.
        assert_eq!(trace.rounds.len(), 9);
        assert_eq!(g.len(), 37);
        assert_eq!(trace.total_length, 37);
        let mut sup = 0.0f64;
        for i in 0..=2000 {
            let x = i as f64 / 2000.0;
            let got = g.eval(&[x]).unwrap()[0];
            sup = sup.max((got - (x - 0.3).abs()).abs());
        }
        assert!(sup <= 0.1 + 1e-9, "sup error {sup}");
        assert!(trace.probe_error <= 0.1 + 1e-9);
    }

    #[test]
    fn first_annulus_piece_count_matches_chord_geometry() {
        let step = annulus_step(1.0, 0.5, 10.0).unwrap();
        assert_eq!(directions_2d(&step, 0.9).len(), 32);
    }

    #[test]
    fn quadratic_on_the_unit_square() {
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
        };
        let cfg = BuildConfig::new(0.3, lip(1.5));
        let (g, trace) = build(&f, 1, &Domain::unit_box(2), &cfg).unwrap();
        assert!(trace.total_length > 100, "expected a nontrivial build");
        assert_eq!(trace.total_length, g.len());
        let last = trace.rounds.last().unwrap();
        assert_eq!(last.cumulative_length, g.len());
        assert!(last.r_prime >= trace.radius);

        let mut sup = 0.0f64;
        for i in 0..=40 {
            for j in 0..=40 {
                let x = [i as f64 / 40.0, j as f64 / 40.0];
                let want = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
                let got = g.eval(&x).unwrap()[0];
                sup = sup.max((got - want).abs());
            }
        }
        assert!(sup <= 0.3 + 1e-9, "sup error {sup}");
    }

    #[test]
    fn linear_target_in_three_dimensions() {
        let f = |x: &[f64], out: &mut [f64]| out[0] = 0.4 * (x[0] + x[1] + x[2]);
        let dom = Domain::Ball { center: vec![0.0; 3], radius: 0.6 };
        let cfg = BuildConfig::new(0.4, lip(0.7));
        let (g, trace) = build(&f, 1, &dom, &cfg).unwrap();
        assert!(trace.probe_error <= 0.4 + 1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ball = Ball::new(vec![0.0; 3], 0.6).unwrap();
        let mut sup = 0.0f64;
        for _ in 0..300 {
            let x = sample_in_ball(&ball, &mut rng);
            let want = 0.4 * (x[0] + x[1] + x[2]);
            sup = sup.max((g.eval(&x).unwrap()[0] - want).abs());
        }
        assert!(sup <= 0.4 + 1e-9, "sup error {sup}");
    }

    #[test]
    fn lying_modulus_is_caught() {
        // A unit jump cannot satisfy a Lipschitz-1 modulus; the probe checks
        // must notice instead of returning a bogus certificate.
        let f = |x: &[f64], out: &mut [f64]| out[0] = if x[0] < 0.0 { 0.0 } else { 1.0 };
        let dom = Domain::Box { lo: vec![-0.5], hi: vec![0.5] };
        let cfg = BuildConfig::new(0.2, lip(1.0));
        match build(&f, 1, &dom, &cfg) {
            Err(Error::Verification(_)) => {}
            other => panic!("expected a verification failure, got {other:?}"),
        }
    }

    #[test]
    fn trace_rows_are_consistent() {
        let f = |x: &[f64], out: &mut [f64]| out[0] = x[0].sin();
        let cfg = BuildConfig::new(0.05, lip(1.0));
        let (g, trace) = build(&f, 1, &Domain::Box { lo: vec![-2.0], hi: vec![2.0] }, &cfg).unwrap();
        let mut pieces = 0;
        let mut prev_r = trace.resolution;
        for (i, row) in trace.rounds.iter().enumerate() {
            assert_eq!(row.index, i);
            assert!((row.r - prev_r).abs() <= 1e-12);
            assert!(row.r_prime > row.r);
            pieces += row.pieces;
            assert_eq!(row.cumulative_length, 1 + 2 * pieces);
            prev_r = row.r_prime;
        }
        assert_eq!(g.len(), 1 + 2 * pieces);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let f = |x: &[f64], out: &mut [f64]| out[0] = x[0] * x[1];
        let cfg = BuildConfig::new(0.5, lip(2.0));
        let a = build(&f, 1, &Domain::unit_box(2), &cfg).unwrap().0;
        let b = build(&f, 1, &Domain::unit_box(2), &cfg).unwrap().0;
        assert_eq!(a.to_json_string().unwrap(), b.to_json_string().unwrap());
    }

    #[test]
    fn rejects_bad_configs_and_dimensions() {
        let f = |_: &[f64], out: &mut [f64]| out[0] = 0.0;
        let mut cfg = BuildConfig::new(0.1, lip(1.0));
        cfg.tighten = 0.7;
        assert!(build(&f, 1, &Domain::unit_box(1), &cfg).is_err());
        let mut cfg = BuildConfig::new(0.1, lip(1.0));
        cfg.annulus_constant = 8.0;
        assert!(build(&f, 1, &Domain::unit_box(1), &cfg).is_err());
        let cfg = BuildConfig::new(-0.1, lip(1.0));
        assert!(build(&f, 1, &Domain::unit_box(1), &cfg).is_err());
        let cfg = BuildConfig::new(0.1, lip(1.0));
        assert!(build(&f, 1, &Domain::unit_box(4), &cfg).is_err());
        assert!(build(&f, 0, &Domain::unit_box(2), &cfg).is_err());
    }

    #[test]
    fn vector_valued_targets() {
        let f = |x: &[f64], out: &mut [f64]| {
            out[0] = x[0].abs();
            out[1] = 1.0 - x[0];
        };
        let cfg = BuildConfig::new(0.2, lip(1.0));
        let (g, trace) = build(&f, 2, &Domain::Box { lo: vec![-1.0], hi: vec![1.0] }, &cfg).unwrap();
        assert_eq!(g.d_out(), 2);
        assert!(trace.probe_error <= 0.2 + 1e-9);
        for i in 0..=100 {
            let x = -1.0 + 2.0 * i as f64 / 100.0;
            let got = g.eval(&[x]).unwrap();
            assert!((got[0] - x.abs()).abs() <= 0.2 + 1e-9);
            assert!((got[1] - (1.0 - x)).abs() <= 0.2 + 1e-9);
        }
    }

    #[test]
    fn covering_bound_shrinks_with_density() {
        let coarse = covering_bound(64);
        let fine = covering_bound(256);
        assert!(fine < coarse);
        assert!(coarse < 1.0, "64 directions cover to within a radian: {coarse}");
    }
}
