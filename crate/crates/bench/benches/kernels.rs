use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use fock_bench::{alpha_one, perturbed_unit_lattice, ratio_lattice};
use fock_core::canonical::{CanonicalProduct, SigmaFunction};
use fock_core::pointsets::{separation, SquareLattice};
use fock_core::sampling::{frame_bounds, frame_matrix};
use fock_core::Complex;

fn sampling(c: &mut Criterion) {
    let (gamma, _) = ratio_lattice(1.2, 14.0);
    c.bench_function("frame_matrix N=24", |b| {
        b.iter(|| frame_matrix(black_box(&gamma), alpha_one(), 24))
    });
    c.bench_function("frame_bounds N=24", |b| {
        b.iter(|| frame_bounds(black_box(&gamma), alpha_one(), 24, 14.0).unwrap())
    });
}

fn canonical(c: &mut Criterion) {
    let sigma = SigmaFunction::new(SquareLattice::new(1.0).unwrap(), 24).unwrap();
    let z = Complex::new(3.7, -2.2);
    c.bench_function("sigma log", |b| b.iter(|| sigma.log(black_box(z)).unwrap()));

    let gamma = perturbed_unit_lattice(600, 3);
    let cp = CanonicalProduct::new(&gamma, &SquareLattice::new(1.0).unwrap(), 24).unwrap();
    c.bench_function("canonical product log", |b| b.iter(|| cp.log(black_box(z)).unwrap()));
}

fn pointsets(c: &mut Criterion) {
    let gamma = perturbed_unit_lattice(100_000, 5);
    c.bench_function("separation 1e5", |b| b.iter(|| separation(black_box(&gamma)).unwrap()));
}

criterion_group!(benches, sampling, canonical, pointsets);
criterion_main!(benches);
