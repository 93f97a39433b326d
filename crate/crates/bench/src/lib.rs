//! Shared fixtures for the benchmarks and the scale tests.

use fock_core::pointsets::{lattice_points, perturb, PointSet, SquareLattice};
use fock_core::space::FockParameter;

pub fn alpha_one() -> FockParameter {
    FockParameter::new(1.0).expect("1 is a valid alpha")
}

/// The lattice of density `ratio * alpha / pi` for `alpha = 1` inside `window`.
pub fn ratio_lattice(ratio: f64, window: f64) -> (PointSet, SquareLattice) {
    let lattice = SquareLattice::with_density_ratio(alpha_one(), ratio).expect("positive ratio");
    (lattice_points(&lattice, window).expect("positive window"), lattice)
}

/// A unit-spacing lattice with about `n` points, each moved by at most 0.2.
pub fn perturbed_unit_lattice(n: usize, seed: u64) -> PointSet {
    let window = (n as f64 / std::f64::consts::PI).sqrt();
    let base = lattice_points(&SquareLattice::new(1.0).expect("unit spacing"), window).expect("window");
    perturb(&base, 0.2, seed).expect("shift below half the spacing")
}
