//! One user journey across every module: parse an expression, estimate its
//! modulus, build an approximant, compile it, verify, persist, reload, and
//! run the lower-bound analysis on the results.

use maxmin_core::affine::{AffineMap, MaxMinString};
use maxmin_core::analyzer::{all_positive_region, certify_lower_bound, WitnessInstance};
use maxmin_core::builder::{build, BuildConfig};
use maxmin_core::compile::{compile, verify_compilation};
use maxmin_core::error::Error;
use maxmin_core::expr::parse;
use maxmin_core::geometry::Domain;
use maxmin_core::interpolate::{interpolate, LabeledPointSet};
use maxmin_core::modulus::estimate_modulus;
use maxmin_core::net::{NetMeta, ReluNet};
use maxmin_core::verify::{grid_compare, Grid, RawFn};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn expression_to_certificate_end_to_end() {
    // Parse. `x1`/`x2` give a planar target.
    let expr = parse("sin(x1) + 0.5*cos(2*x2)").unwrap();
    assert_eq!(expr.arity(), 2);
    let f = move |x: &[f64], out: &mut [f64]| out[0] = expr.eval(x).unwrap();

    // Estimate a modulus from samples, then build against it.
    let domain = Domain::unit_box(2);
    let ball = domain.enclosing_ball().unwrap();
    let modulus = estimate_modulus(&f, 1, &ball, 400, 0.5, 11).unwrap();
    let cfg = BuildConfig::new(0.6, modulus);
    let (g, trace) = build(&f, 1, &domain, &cfg).unwrap();
    assert!(trace.probe_count > 0, "probes should be active by default");
    assert!(trace.probe_error <= 0.6, "probe error {}", trace.probe_error);

    // The empirical modulus halves the inverted distance as a safety
    // margin; the grid sup should land well inside the tolerance.
    let grid = Grid::new(&[0.0, 0.0], &[1.0, 1.0], 50).unwrap();
    let oracle = RawFn::new(2, 1, f);
    let report = grid_compare(&g, &oracle, &grid).unwrap();
    assert!(report.max_err <= 0.6, "grid sup {}", report.max_err);

    // Compile and verify the net against the string.
    let (net, _plan) = compile(&g, &ball).unwrap();
    assert_eq!(net.hidden_widths(), vec![3; g.len() - 1]);
    let faith = verify_compilation(&g, &net, &ball, 800, 17).unwrap();
    assert!(faith.max_abs_err <= 1e-9 * (1.0 + faith.max_abs_value));

    // Persist both artifacts atomically, reload, and demand bitwise-equal
    // forward behaviour.
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let g_path = dir.join("pipeline_string.json");
    let net_path = dir.join("pipeline_net.json");
    g.save(&g_path).unwrap();
    net.save(&net_path).unwrap();
    let g2 = MaxMinString::load(&g_path).unwrap();
    let net2 = ReluNet::load(&net_path).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..50 {
        let x = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
        let a = g.eval(&x).unwrap()[0];
        let b = g2.eval(&x).unwrap()[0];
        assert_eq!(a.to_bits(), b.to_bits());
        let u = net.forward(&x).unwrap()[0];
        let v = net2.forward(&x).unwrap()[0];
        assert_eq!(u.to_bits(), v.to_bits());
    }

    // Width-3 hidden layers are outside the analyzer's scope, and it must
    // say so rather than guess.
    let witness = WitnessInstance::unit_box(2).unwrap();
    match certify_lower_bound(&net, &witness, 1e-9) {
        Err(Error::OutOfScopeNet(_)) => {}
        other => panic!("expected an out-of-scope rejection, got {other:?}"),
    }
    assert!(matches!(all_positive_region(&net), Err(Error::OutOfScopeNet(_))));

    // A width-2 net stays in scope and yields a certificate.
    let narrow = ReluNet::new(
        vec![
            AffineMap::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![2.0, 2.0]).unwrap(),
            AffineMap::new(1, 2, vec![0.6, 0.4], vec![-1.0]).unwrap(),
        ],
        NetMeta::default(),
    )
    .unwrap();
    let cert = certify_lower_bound(&narrow, &witness, 1e-9).unwrap();
    assert_eq!(cert.case, 1);
    assert!(cert.certified && cert.bound >= 1.0 / 16.0 - 1e-6);

    // Finally, interpolation reproduces samples of the approximant itself.
    let points: Vec<Vec<f64>> = (0..12)
        .map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
        .collect();
    let values: Vec<Vec<f64>> = points.iter().map(|p| g.eval(p).unwrap()).collect();
    let set = LabeledPointSet::new(points, values).unwrap();
    let h = interpolate(&set, 0).unwrap();
    for i in 0..set.len() {
        let got = h.eval(set.point(i)).unwrap()[0];
        assert!((got - set.value(i)[0]).abs() <= 1e-8);
    }
}
