use std::time::{Duration, Instant};

use fock_bench::perturbed_unit_lattice;
use fock_core::pointsets::separation;

#[test]
fn separation_of_a_million_points() {
    let gamma = perturbed_unit_lattice(1_000_000, 1);
    assert!(gamma.len() >= 990_000);
    let start = Instant::now();
    let q = separation(&gamma).unwrap();
    let took = start.elapsed();
    println!("{} points: q = {q:.4}, {took:.2?}", gamma.len());
    // two points of a unit lattice moved by at most 0.2 stay 0.6 apart
    assert!((0.6..=1.0).contains(&q));
    assert!(took < Duration::from_secs(5), "{took:?}");
}
