use std::collections::BTreeMap;

use fock_core::complex::Complex;
use fock_core::interpolation::{
    build_interpolant, lagrange_reconstruct, norm_growth_report, pointwise_bound, random_bounded_data, residual_check,
    truncation_difference, InterpolationProblem, LagrangeReconstructor,
};
use fock_core::pointsets::{lattice_points, perturb, PointSet, SquareLattice};
use fock_core::space::{FockFunction, FockParameter};

fn alpha1() -> FockParameter {
    FockParameter::new(1.0).unwrap()
}

fn setup(ratio: f64, window: f64) -> (PointSet, SquareLattice) {
    let lat = SquareLattice::with_density_ratio(alpha1(), ratio).unwrap();
    (lattice_points(&lat, window).unwrap(), lat)
}

fn samples_of(f: &FockFunction, gamma: &PointSet) -> BTreeMap<(i64, i64), Complex> {
    gamma
        .points()
        .iter()
        .zip(gamma.lattice_index().unwrap())
        .map(|(&z, &p)| (p, f.eval(z).unwrap()))
        .collect()
}

fn disk(radius: f64, step: f64) -> Vec<Complex> {
    let k = (radius / step).round() as i64;
    (-k..=k)
        .flat_map(|j| (-k..=k).map(move |i| Complex::new(i as f64 * step, j as f64 * step)))
        .filter(|z| z.norm() <= radius + 1e-12)
        .collect()
}

/// Sup error on `|z| <= 2`, grid offset so no point is a node.
fn sup_error(f: &FockFunction, gamma: &PointSet, lat: &SquareLattice, radius: f64) -> f64 {
    let rec = LagrangeReconstructor::new(gamma, lat, alpha1(), &samples_of(f, gamma), radius).unwrap();
    disk(1.95, 0.25)
        .into_iter()
        .map(|z| z + Complex::new(0.013, 0.007))
        .map(|z| (rec.eval(z).unwrap() - f.eval(z).unwrap()).norm())
        .fold(0.0, f64::max)
}

#[test]
fn reconstruction_of_constants() {
    let (gamma, lat) = setup(1.5, 12.0);
    let one = FockFunction::monomial(alpha1(), vec![Complex::new(1.0, 0.0)]).unwrap();
    let z = Complex::new(0.3, 0.2);
    let v8 = lagrange_reconstruct(&gamma, &lat, alpha1(), &samples_of(&one, &gamma), z, 8.0).unwrap();
    let v12 = lagrange_reconstruct(&gamma, &lat, alpha1(), &samples_of(&one, &gamma), z, 12.0).unwrap();
    println!(
        "f = 1: radius 8 -> {:.3e}, 12 -> {:.3e}",
        (v8 - 1.0).norm(),
        (v12 - 1.0).norm()
    );
    assert!((v8 - 1.0).norm() <= 5e-3);
    assert!((v12 - 1.0).norm() <= 1e-4);

    let e3 = FockFunction::basis(alpha1(), 3);
    let w = lagrange_reconstruct(&gamma, &lat, alpha1(), &samples_of(&e3, &gamma), z, 8.0).unwrap();
    assert!((w - e3.eval(z).unwrap()).norm() <= 5e-3);

    let node = gamma.points()[3];
    let samples = samples_of(&e3, &gamma);
    let at_node = lagrange_reconstruct(&gamma, &lat, alpha1(), &samples, node, 12.0).unwrap();
    assert_eq!(at_node, e3.eval(node).unwrap());
}

#[test]
fn reconstruction_error_shrinks_with_radius() {
    let (gamma, lat) = setup(1.5, 12.0);
    let coeffs: Vec<Complex> = (0..=8)
        .map(|n| Complex::new(1.0 / (n as f64 + 1.0), 0.3 * n as f64 - 1.0))
        .collect();
    let f = FockFunction::monomial(alpha1(), coeffs).unwrap();
    let errs: Vec<f64> = [6.0, 8.0, 10.0, 12.0]
        .iter()
        .map(|&r| sup_error(&f, &gamma, &lat, r))
        .collect();
    println!("span e_0..e_8: {errs:?}");
    for w in errs.windows(2) {
        assert!(w[1] <= 1.1 * w[0]);
    }
    assert!(errs[3] <= 1e-4);
}

#[test]
fn reconstruction_on_a_perturbed_lattice() {
    let (lattice_set, lat) = setup(1.5, 12.0);
    let gamma = perturb(&lattice_set, 0.1 * lat.spacing(), 4).unwrap();
    let f = FockFunction::basis(alpha1(), 2);
    let err = sup_error(&f, &gamma, &lat, 12.0);
    println!("perturbed: {err:.3e}");
    assert!(err <= 1e-4);
}

fn random_problem(window: f64, seed: u64) -> InterpolationProblem {
    let (gamma, lat) = setup(0.8, window);
    let data = random_bounded_data(gamma.len(), seed);
    InterpolationProblem::new(gamma, lat, alpha1(), data).unwrap()
}

#[test]
fn interpolation_residuals() {
    let p = random_problem(14.0, 7);
    let ev10 = build_interpolant(&p, 10.0).unwrap();
    let ev14 = build_interpolant(&p, 14.0).unwrap();
    let (r10, r14) = (residual_check(&ev10).unwrap(), residual_check(&ev14).unwrap());
    println!("residuals: 10 -> {r10:.3e}, 14 -> {r14:.3e}");
    assert!(r10 <= 1e-3);
    assert!(r14 <= r10);
    assert!(ev10.node_identity_error().unwrap() <= 1e-12);
    assert!(ev14.node_identity_error().unwrap() <= 1e-12);

    // between nodes the truncated series settles as the radius grows
    let ev6 = build_interpolant(&p, 6.0).unwrap();
    let ev8 = build_interpolant(&p, 8.0).unwrap();
    let d6 = truncation_difference(&ev6, &ev14, 2.0, 0.17).unwrap();
    let d8 = truncation_difference(&ev8, &ev14, 2.0, 0.17).unwrap();
    let d10 = truncation_difference(&ev10, &ev14, 2.0, 0.17).unwrap();
    println!("off-node truncation: 6 -> {d6:.3e}, 8 -> {d8:.3e}, 10 -> {d10:.3e}");
    assert!(d6 > d8 && d8 > d10);
}

#[test]
fn interpolation_is_linear() {
    let p1 = random_problem(12.0, 1);
    let p2 = p1.with_data(random_bounded_data(p1.gamma().len(), 2)).unwrap();
    let sum: Vec<Complex> = p1.data().iter().zip(p2.data()).map(|(a, b)| a + b).collect();
    let p12 = p1.with_data(sum).unwrap();
    let (e1, e2, e12) = (
        build_interpolant(&p1, 10.0).unwrap(),
        build_interpolant(&p2, 10.0).unwrap(),
        build_interpolant(&p12, 10.0).unwrap(),
    );
    for z in disk(4.0, 0.37) {
        let lhs = e12.eval_weighted(z).unwrap();
        let rhs = e1.eval_weighted(z).unwrap() + e2.eval_weighted(z).unwrap();
        assert!((lhs - rhs).norm() <= 1e-10);
    }
}

#[test]
fn norm_growth_is_stable() {
    let (gamma, lat) = setup(0.8, 8.0);
    let n = gamma.len();
    let base = InterpolationProblem::new(gamma, lat, alpha1(), vec![Complex::new(0.0, 0.0); n]).unwrap();
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let mut d = random_bounded_data(n, 100 + seed);
        let l2 = d.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        d.iter_mut().for_each(|a| *a /= l2);
        let ev = build_interpolant(&base.with_data(d).unwrap(), 8.0).unwrap();
        ratios.push(norm_growth_report(&ev, 96).unwrap().ratio.unwrap());
    }
    let mut sorted = ratios.clone();
    sorted.sort_by(f64::total_cmp);
    let median = 0.5 * (sorted[9] + sorted[10]);
    println!(
        "norm ratios: median {median:.4}, range {:.4}..{:.4}",
        sorted[0], sorted[19]
    );
    assert!(ratios.iter().all(|r| *r <= 3.0 * median && *r >= median / 3.0));

    let mut single = vec![Complex::new(0.0, 0.0); n];
    single[0] = Complex::new(0.6, -0.8);
    let ev = build_interpolant(&base.with_data(single).unwrap(), 8.0).unwrap();
    let report = norm_growth_report(&ev, 32).unwrap();
    assert!(report.norm2 >= 1.0 - 1e-3, "{}", report.norm2);
}

#[test]
fn pointwise_bound_holds() {
    let p = random_problem(12.0, 7);
    let ev = build_interpolant(&p, 10.0).unwrap();
    let b = pointwise_bound(&ev, 0.2).unwrap();
    println!("pointwise: C = {:.4}, max weighted {:.4}", b.c, b.max_weighted);
    assert!(b.holds && b.c.is_finite());
}
