//! Shared fixtures for the criterion benches: deterministic random strings
//! and nets of a requested size.

use maxmin_core::affine::{AffineMap, MaxMin, MaxMinString};
use maxmin_core::geometry::Ball;
use maxmin_core::net::ReluNet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_string(seed: u64, d_in: usize, d_out: usize, len: usize) -> MaxMinString {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let affine = |rng: &mut ChaCha8Rng| {
        let w: Vec<f64> = (0..d_in * d_out).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b: Vec<f64> = (0..d_out).map(|_| rng.gen_range(-1.0..1.0)).collect();
        AffineMap::new(d_out, d_in, w, b).unwrap()
    };
    let mut g = MaxMinString::from_affine(affine(&mut rng));
    for _ in 1..len {
        let op = if rng.gen_bool(0.5) { MaxMin::Max } else { MaxMin::Min };
        g.push(op, &affine(&mut rng));
    }
    g
}

pub fn compiled(seed: u64, d_in: usize, d_out: usize, len: usize) -> ReluNet {
    let g = random_string(seed, d_in, d_out, len);
    let ball = Ball::new(vec![0.0; d_in], 1.0).unwrap();
    maxmin_core::compile::compile(&g, &ball).unwrap().0
}

pub fn grid_points(d_in: usize, per_axis: usize) -> Vec<f64> {
    let grid = maxmin_core::verify::Grid::new(&vec![0.0; d_in], &vec![1.0; d_in], per_axis).unwrap();
    let mut flat = Vec::with_capacity(grid.len() * d_in);
    for p in grid.points() {
        flat.extend_from_slice(&p);
    }
    flat
}
