//! Compiles a max-min string into a ReLU network whose hidden layers all have
//! width `d_in + d_out`.
//!
//! On a ball `B(c, rho)` the input is first shifted by `s = rho*1 - c` so it
//! stays coordinatewise nonnegative; the first `d_in` units of every hidden
//! layer then carry the shifted input through ReLU unchanged. The remaining
//! `d_out` units accumulate the string one affine piece at a time using the
//! hinge identities
//!
//! ```text
//! max(t, l) = l + relu(t - l)      min(t, l) = l - relu(l - t)
//! ```
//!
//! Folding the surrounding `sign * (. - l)` work into the neighbouring affine
//! layers gives one network layer per string piece: length L compiles to L
//! affine layers (L - 1 ReLUs). The result agrees with the string exactly on
//! the ball, up to floating-point roundoff.

use serde::{Deserialize, Serialize};

use crate::affine::{AffineMap, MaxMin, MaxMinString};
use crate::error::{Error, Result};
use crate::geometry::Ball;
use crate::linalg;
use crate::net::{NetMeta, ReluNet};

/// How a string was lowered: the input shift, the hinge sign per combine step
/// (+1 for max, -1 for min), and per-piece positivity offsets (the smallest
/// constants that would make each piece strictly positive on the domain —
/// not needed by the merged construction, but cheap to certify and useful
/// when debugging a lowering).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompilationPlan {
    pub shift: Vec<f64>,
    pub signs: Vec<f64>,
    pub positivity_offsets: Vec<f64>,
    pub depth: usize,
    pub hidden_widths: Vec<usize>,
    pub width_bound: usize,
}

/// Numeric and structural comparison of a compiled net against its string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompilationReport {
    pub samples: usize,
    pub max_abs_err: f64,
    /// Largest |g| seen while sampling; scales relative tolerances.
    pub max_abs_value: f64,
    pub hidden_widths: Vec<usize>,
    pub width_bound: usize,
    pub widths_within_bound: bool,
    pub depth: usize,
    pub depth_matches: bool,
}

pub fn compile(g: &MaxMinString, domain: &Ball) -> Result<(ReluNet, CompilationPlan)> {
    if g.d_in() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: g.d_in(), got: domain.dim() });
    }
    let (d, k, len) = (g.d_in(), g.d_out(), g.len());
    let rho = domain.radius;
    let shift: Vec<f64> = domain.center.iter().map(|c| rho - c).collect();

    // Hinge sign merging piece j+2 into the running value: +1 for max.
    let signs: Vec<f64> = g
        .ops()
        .iter()
        .map(|&op| if op == MaxMin::Max { 1.0 } else { -1.0 })
        .collect();

    let positivity_offsets = (0..len).map(|i| positivity_offset(g, i, domain)).collect();

    let mut layers: Vec<AffineMap> = Vec::with_capacity(len);
    if len == 1 {
        layers.push(g.affine(0));
    } else {
        let mut translated: Vec<AffineMap> = Vec::with_capacity(len);
        for i in 0..len {
            translated.push(g.affine(i).translated(&shift)?);
        }
        layers.push(first_layer(g, &shift, signs[0]));
        for j in 1..len - 1 {
            layers.push(middle_layer(&translated[j], &translated[j + 1], signs[j - 1], signs[j], d, k));
        }
        layers.push(last_layer(&translated[len - 1], signs[len - 2], d, k));
    }

    let meta = NetMeta { provenance: "max-min lowering".into(), domain: Some(domain.clone()) };
    let net = ReluNet::new(layers, meta)?;

    let plan = CompilationPlan {
        shift,
        signs,
        positivity_offsets,
        depth: net.depth(),
        hidden_widths: net.hidden_widths(),
        width_bound: d + k,
    };
    Ok((net, plan))
}

/// Smallest C >= 0 (plus a hair of margin) with piece_i + C > 0 on the ball.
/// The minimum of an affine row over B(c, rho) is its value at the center
/// minus rho times the row norm, so this is exact rather than sampled.
fn positivity_offset(g: &MaxMinString, i: usize, domain: &Ball) -> f64 {
    let mut at_center = vec![0.0; g.d_out()];
    g.affine(i)
        .eval_into(&domain.center, &mut at_center)
        .expect("center has the string's input dimension");
    let mut worst = f64::INFINITY;
    for r in 0..g.d_out() {
        let row = &g.affine_weights(i)[r * g.d_in()..(r + 1) * g.d_in()];
        worst = worst.min(at_center[r] - domain.radius * linalg::norm(row));
    }
    (-worst).max(0.0) + 1e-6
}

/// x -> (x + s, s2 * (l1 - l2)(x)).
fn first_layer(g: &MaxMinString, shift: &[f64], s2: f64) -> AffineMap {
    let (d, k) = (g.d_in(), g.d_out());
    let (w1, w2) = (g.affine_weights(0), g.affine_weights(1));
    let (b1, b2) = (g.affine_offset(0), g.affine_offset(1));
    let mut w = vec![0.0; (d + k) * d];
    let mut b = vec![0.0; d + k];
    for i in 0..d {
        w[i * d + i] = 1.0;
        b[i] = shift[i];
    }
    for r in 0..k {
        for c in 0..d {
            w[(d + r) * d + c] = s2 * (w1[r * d + c] - w2[r * d + c]);
        }
        b[d + r] = s2 * (b1[r] - b2[r]);
    }
    AffineMap::new(d + k, d, w, b).expect("first layer is well-formed")
}

/// (x', t) -> (x', s_next * s_cur * t + s_next * (lj' - lnext')(x')).
fn middle_layer(lj: &AffineMap, lnext: &AffineMap, s_cur: f64, s_next: f64, d: usize, k: usize) -> AffineMap {
    let n = d + k;
    let mut w = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for i in 0..d {
        w[i * n + i] = 1.0;
    }
    for r in 0..k {
        for c in 0..d {
            w[(d + r) * n + c] = s_next * (lj.weights()[r * d + c] - lnext.weights()[r * d + c]);
        }
        w[(d + r) * n + d + r] = s_next * s_cur;
        b[d + r] = s_next * (lj.offset()[r] - lnext.offset()[r]);
    }
    AffineMap::new(n, n, w, b).expect("middle layer is well-formed")
}

/// (x', t) -> s_last * t + llast'(x').
fn last_layer(llast: &AffineMap, s_last: f64, d: usize, k: usize) -> AffineMap {
    let n = d + k;
    let mut w = vec![0.0; k * n];
    let mut b = vec![0.0; k];
    for r in 0..k {
        for c in 0..d {
            w[r * n + c] = llast.weights()[r * d + c];
        }
        w[r * n + d + r] = s_last;
        b[r] = llast.offset()[r];
    }
    AffineMap::new(k, n, w, b).expect("last layer is well-formed")
}

/// Samples the ball and compares net against string; also records the
/// structural facts (depth, hidden widths) a caller typically asserts on.
pub fn verify_compilation(
    g: &MaxMinString,
    net: &ReluNet,
    domain: &Ball,
    samples: usize,
    seed: u64,
) -> Result<CompilationReport> {
    use rand::SeedableRng;
    if g.d_in() != net.d_in() || g.d_out() != net.d_out() {
        return Err(Error::DimensionMismatch { expected: g.d_in(), got: net.d_in() });
    }
    if g.d_in() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: g.d_in(), got: domain.dim() });
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut gs = vec![0.0; g.d_out()];
    let mut ns = vec![0.0; g.d_out()];
    let mut max_abs_err = 0.0f64;
    let mut max_abs_value = 0.0f64;
    for _ in 0..samples {
        let x = crate::geometry::sample_in_ball(domain, &mut rng);
        g.eval_into(&x, &mut gs)?;
        net.forward_into(&x, &mut ns)?;
        for i in 0..g.d_out() {
            max_abs_err = max_abs_err.max((gs[i] - ns[i]).abs());
            max_abs_value = max_abs_value.max(gs[i].abs());
        }
    }
    let hidden_widths = net.hidden_widths();
    let width_bound = g.d_in() + g.d_out();
    Ok(CompilationReport {
        samples,
        max_abs_err,
        max_abs_value,
        widths_within_bound: hidden_widths.iter().all(|&w| w <= width_bound),
        hidden_widths,
        width_bound,
        depth: net.depth(),
        depth_matches: net.depth() == g.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ball(center: &[f64], r: f64) -> Ball {
        Ball::new(center.to_vec(), r).unwrap()
    }

    fn random_string(rng: &mut ChaCha8Rng, d_in: usize, d_out: usize, len: usize) -> MaxMinString {
        let mk = |rng: &mut ChaCha8Rng| {
            let w: Vec<f64> = (0..d_in * d_out).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..d_out).map(|_| rng.gen_range(-2.0..2.0)).collect();
            AffineMap::new(d_out, d_in, w, b).unwrap()
        };
        let mut s = MaxMinString::from_affine(mk(rng));
        for _ in 1..len {
            let op = if rng.gen_bool(0.5) { MaxMin::Max } else { MaxMin::Min };
            let a = mk(rng);
            s.push(op, &a);
        }
        s
    }

    #[test]
    fn constant_string_compiles_to_single_affine() {
        let g = MaxMinString::constant(2, &[3.5, -1.0]).unwrap();
        let (net, plan) = compile(&g, &ball(&[0.0, 0.0], 1.0)).unwrap();
        assert_eq!(net.depth(), 1);
        assert!(net.hidden_widths().is_empty());
        assert_eq!(plan.depth, 1);
        let mut out = vec![0.0; 2];
        net.forward_into(&[0.3, -0.4], &mut out).unwrap();
        assert_eq!(out, vec![3.5, -1.0]);
    }

    #[test]
    fn max_with_constant_matches_hinge() {
        // g(x) = max(x, 0.5) on [-1, 1].
        let mut g = MaxMinString::from_affine(AffineMap::identity(1));
        g.push(MaxMin::Max, &AffineMap::constant(1, &[0.5]).unwrap());
        let dom = ball(&[0.0], 1.0);
        let (net, plan) = compile(&g, &dom).unwrap();
        assert_eq!(net.hidden_widths(), vec![2]);
        assert_eq!(plan.signs, vec![1.0]);
        let mut out = [0.0];
        for &(x, want) in &[(0.25, 0.5), (0.75, 0.75), (-1.0, 0.5), (0.5, 0.5), (1.0, 1.0)] {
            net.forward_into(&[x], &mut out).unwrap();
            assert!((out[0] - want).abs() <= 1e-12, "x={x}: {} vs {want}", out[0]);
        }
    }

    #[test]
    fn min_of_coordinates() {
        let mut g = MaxMinString::from_affine(
            AffineMap::new(1, 2, vec![1.0, 0.0], vec![0.0]).unwrap(),
        );
        g.push(MaxMin::Min, &AffineMap::new(1, 2, vec![0.0, 1.0], vec![0.0]).unwrap());
        let dom = ball(&[0.0, 0.0], 2.0);
        let (net, _) = compile(&g, &dom).unwrap();
        let mut out = [0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            net.forward_into(&x, &mut out).unwrap();
            let want = x[0].min(x[1]);
            assert!((out[0] - want).abs() <= 1e-12);
        }
    }

    #[test]
    fn alternating_ops_match_direct_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut g = random_string(&mut rng, 2, 1, 1);
        for op in [MaxMin::Max, MaxMin::Min, MaxMin::Max, MaxMin::Min] {
            let w: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let a = AffineMap::new(1, 2, w, vec![rng.gen_range(-1.0..1.0)]).unwrap();
            g.push(op, &a);
        }
        let dom = ball(&[0.5, -0.25], 1.5);
        let (net, _) = compile(&g, &dom).unwrap();
        let report = verify_compilation(&g, &net, &dom, 500, 0).unwrap();
        assert!(report.max_abs_err <= 1e-9 * (1.0 + report.max_abs_value), "{report:?}");
    }

    #[test]
    fn random_strings_compile_exactly_with_narrow_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for trial in 0..40 {
            let d_in = rng.gen_range(1..=3);
            let d_out = rng.gen_range(1..=2);
            let len = rng.gen_range(1..=12);
            let g = random_string(&mut rng, d_in, d_out, len);
            let center: Vec<f64> = (0..d_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let dom = ball(&center, rng.gen_range(0.5..2.0));
            let (net, plan) = compile(&g, &dom).unwrap();

            assert_eq!(net.depth(), len, "trial {trial}");
            assert_eq!(net.hidden_widths(), vec![d_in + d_out; len.saturating_sub(1)]);
            assert_eq!(plan.width_bound, d_in + d_out);

            let report = verify_compilation(&g, &net, &dom, 60, trial).unwrap();
            assert!(report.depth_matches && report.widths_within_bound);
            assert!(
                report.max_abs_err <= 1e-9 * (1.0 + report.max_abs_value),
                "trial {trial}: {:?}",
                report.max_abs_err
            );
        }
    }

    #[test]
    fn positivity_offsets_certify_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_string(&mut rng, 2, 2, 5);
        let dom = ball(&[0.2, -0.1], 1.3);
        let (_, plan) = compile(&g, &dom).unwrap();
        let mut vals = vec![0.0; 2];
        for _ in 0..500 {
            let x = crate::geometry::sample_in_ball(&dom, &mut rng);
            for i in 0..g.len() {
                g.affine(i).eval_into(&x, &mut vals).unwrap();
                for &v in &vals {
                    assert!(v + plan.positivity_offsets[i] > 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let g = MaxMinString::constant(2, &[1.0]).unwrap();
        assert!(compile(&g, &ball(&[0.0], 1.0)).is_err());
    }

    #[test]
    fn shift_keeps_input_nonnegative_at_tangent_point() {
        // Tangent point x = c - rho*e1 maps to first coordinate exactly 0;
        // ReLU must pass it through unharmed.
        let mut g = MaxMinString::from_affine(AffineMap::identity(1));
        g.push(MaxMin::Min, &AffineMap::constant(1, &[10.0]).unwrap());
        g.push(MaxMin::Max, &AffineMap::constant(1, &[-10.0]).unwrap());
        let dom = ball(&[2.0], 0.5);
        let (net, plan) = compile(&g, &dom).unwrap();
        assert_eq!(plan.shift, vec![-1.5]);
        let mut out = [0.0];
        net.forward_into(&[1.5], &mut out).unwrap();
        assert!((out[0] - 1.5).abs() <= 1e-12);
    }
}
