use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use maxmin_bench::{compiled, grid_points, random_string};
use maxmin_core::analyzer::{certify_lower_bound, WitnessInstance};
use maxmin_core::builder::{build, BuildConfig};
use maxmin_core::geometry::{annulus_step, Domain};
use maxmin_core::interpolate::{interpolate, LabeledPointSet};
use maxmin_core::modulus::ModulusSpec;
use maxmin_core::net::{NetMeta, ReluNet};
use maxmin_core::affine::AffineMap;

fn string_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("string_eval");
    for len in [64usize, 512, 4096] {
        let g = random_string(1, 2, 1, len);
        let x = [0.3, 0.7];
        group.bench_with_input(BenchmarkId::new("point", len), &len, |b, _| {
            b.iter(|| g.eval(black_box(&x)).unwrap())
        });
        let points = grid_points(2, 32);
        let mut out = vec![0.0; 32 * 32];
        group.bench_with_input(BenchmarkId::new("batch_1024", len), &len, |b, _| {
            b.iter(|| g.eval_batch(black_box(&points), &mut out).unwrap())
        });
    }
    group.finish();
}

fn net_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("net_forward");
    for len in [64usize, 512] {
        let net = compiled(2, 2, 1, len);
        let x = [0.3, 0.7];
        group.bench_with_input(BenchmarkId::from_parameter(len), &len, |b, _| {
            b.iter(|| net.forward(black_box(&x)).unwrap())
        });
    }
    group.finish();
}

fn build_line(c: &mut Criterion) {
    let f = |x: &[f64], out: &mut [f64]| out[0] = (x[0] - 0.3).abs();
    c.bench_function("build_line_eps_0.02", |b| {
        b.iter(|| {
            let cfg = BuildConfig::new(0.02, ModulusSpec::Lipschitz { l: 1.0 });
            build(black_box(&f), 1, &Domain::unit_box(1), &cfg).unwrap()
        })
    });
}

fn build_planar(c: &mut Criterion) {
    let f = |x: &[f64], out: &mut [f64]| {
        out[0] = (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2);
    };
    c.bench_function("build_planar_eps_0.4", |b| {
        b.iter(|| {
            let cfg =
                BuildConfig::new(0.4, ModulusSpec::Lipschitz { l: std::f64::consts::SQRT_2 });
            build(black_box(&f), 1, &Domain::unit_box(2), &cfg).unwrap()
        })
    });
}

fn interpolate_points(c: &mut Criterion) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let points: Vec<Vec<f64>> =
        (0..30).map(|_| vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
    let values: Vec<Vec<f64>> = (0..30).map(|_| vec![rng.gen_range(-1.0..1.0)]).collect();
    c.bench_function("interpolate_30_points", |b| {
        b.iter(|| {
            let set = LabeledPointSet::new(points.clone(), values.clone()).unwrap();
            interpolate(black_box(&set), 0).unwrap()
        })
    });
}

fn certify(c: &mut Criterion) {
    let net = ReluNet::new(
        vec![
            AffineMap::new(2, 2, vec![0.9, 0.1, -0.2, 0.8], vec![1.5, 1.2]).unwrap(),
            AffineMap::new(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.5, 0.5]).unwrap(),
            AffineMap::new(1, 2, vec![0.6, 0.4], vec![-1.0]).unwrap(),
        ],
        NetMeta::default(),
    )
    .unwrap();
    let witness = WitnessInstance::unit_box(2).unwrap();
    c.bench_function("certify_width2_depth3", |b| {
        b.iter(|| certify_lower_bound(black_box(&net), &witness, 1e-9).unwrap())
    });
}

fn annulus(c: &mut Criterion) {
    c.bench_function("annulus_step", |b| {
        b.iter(|| annulus_step(black_box(1.0), black_box(0.05), 10.0).unwrap())
    });
}

criterion_group!(
    benches,
    string_eval,
    net_forward,
    build_line,
    build_planar,
    interpolate_points,
    certify,
    annulus
);
criterion_main!(benches);
