//! Finite-dimensional tests of the sampling inequality
//!
//! ```text
//! A ||f||^2 <= sum_{z in Gamma} exp(-alpha|z|^2) |f(z)|^2 <= B ||f||^2
//! ```
//!
//! on the test space `span{e_0..e_N}`, where the middle term is the
//! Hermitian form `c^H S c` of the frame matrix `S`.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{ln_factorials, Complex};
use crate::error::{FockError, Result};
use crate::pointsets::PointSet;
use crate::quadrature::GaussLegendre;
use crate::space::{FockFunction, FockParameter, Representation};

/// Points per block of the parallel frame-matrix assembly. Blocks are summed
/// in point order, so the result does not depend on the thread count.
const CHUNK: usize = 64;

/// Quadrature order of the cell integrals and of their doubling check.
pub const CELL_ORDER: usize = 24;
/// Largest relative change of a cell integral allowed when the order doubles.
pub const CELL_TOLERANCE: f64 = 1e-10;

/// Extremal eigenvalue estimates of the frame matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEstimate {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    pub degree: usize,
    pub effective_radius: f64,
    pub window_radius: f64,
    /// `(n, A_n, B_n)` for the degree ladder `N/2, 3N/4, N`.
    pub convergence_table: Vec<(usize, f64, f64)>,
    /// False when the window does not cover the effective radius.
    pub reliable: bool,
}

/// `exp(-alpha|z|^2/2) e_n(z)` for `n = 0..=degree`.
fn weighted_basis(z: Complex, alpha: f64, lnfact: &[f64], out: &mut [Complex]) {
    let r2 = z.norm_sqr();
    if r2 == 0.0 {
        out.fill(Complex::new(0.0, 0.0));
        out[0] = Complex::new(1.0, 0.0);
        return;
    }
    let ln_r = 0.5 * r2.ln();
    let theta = z.im.atan2(z.re);
    let ln_a = alpha.ln();
    for (n, v) in out.iter_mut().enumerate() {
        let nf = n as f64;
        let log_mag = -0.5 * alpha * r2 + 0.5 * (nf * ln_a - lnfact[n]) + nf * ln_r;
        *v = Complex::from_polar(log_mag.exp(), nf * theta);
    }
}

/// The frame matrix `S_jk = sum_z exp(-alpha|z|^2) conj(e_j(z)) e_k(z)` of
/// size `(degree + 1)^2`. An empty set gives the zero matrix.
pub fn frame_matrix(gamma: &PointSet, alpha: FockParameter, degree: usize) -> DMatrix<Complex> {
    frame_matrix_of(gamma.points(), alpha, degree)
}

fn frame_matrix_of(points: &[Complex], alpha: FockParameter, degree: usize) -> DMatrix<Complex> {
    let n = degree + 1;
    let a = alpha.value();
    let lnfact = ln_factorials(degree);
    let blocks: Vec<DMatrix<Complex>> = points
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut s = DMatrix::<Complex>::zeros(n, n);
            let mut v = vec![Complex::new(0.0, 0.0); n];
            for &z in chunk {
                weighted_basis(z, a, &lnfact, &mut v);
                for k in 0..n {
                    for j in 0..n {
                        s[(j, k)] += v[j].conj() * v[k];
                    }
                }
            }
            s
        })
        .collect();
    let mut s = DMatrix::<Complex>::zeros(n, n);
    for b in &blocks {
        s += b;
    }
    s
}

/// Smallest and largest eigenvalue of the leading `(n+1)`-block.
fn extremal_eigenvalues(s: &DMatrix<Complex>, n: usize) -> (f64, f64) {
    let block = s.view((0, 0), (n + 1, n + 1)).into_owned();
    let eig = SymmetricEigen::new(block);
    let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // rounding can push a zero eigenvalue slightly negative
    (lo.max(0.0), hi.max(0.0))
}

fn ladder(degree: usize) -> Vec<usize> {
    let mut out = vec![degree / 2, (3 * degree) / 4, degree];
    out.dedup();
    out
}

/// Frame bounds of `gamma` on `span{e_0..e_N}`.
///
/// The window must contain every point of `gamma`. If it does not cover the
/// effective radius `sqrt(N/alpha) + 4/sqrt(alpha)` the estimate is still
/// computed but marked unreliable.
pub fn frame_bounds(
    gamma: &PointSet,
    alpha: FockParameter,
    degree: usize,
    window_radius: f64,
) -> Result<FrameEstimate> {
    frame_bounds_at(gamma, alpha, degree, window_radius, Complex::new(0.0, 0.0))
}

/// [`frame_bounds`] for the window and test space centred at `centre`.
///
/// The test space is `T_centre span{e_0..e_N}`; since the translation is an
/// isometry with a phase common to all basis functions, this is the frame
/// matrix of `gamma - centre`.
pub fn frame_bounds_at(
    gamma: &PointSet,
    alpha: FockParameter,
    degree: usize,
    window_radius: f64,
    centre: Complex,
) -> Result<FrameEstimate> {
    if !(window_radius.is_finite() && window_radius > 0.0) {
        return Err(FockError::invalid("window_radius", "must be positive"));
    }
    let tol = 1e-12 * window_radius.max(1.0);
    let local: Vec<Complex> = gamma.points().iter().map(|&z| z - centre).collect();
    if let Some(z) = local.iter().find(|z| z.norm() > window_radius + tol) {
        let z = z + centre;
        return Err(FockError::invalid(
            "window_radius",
            format!("point ({}, {}) lies outside the window", z.re, z.im),
        ));
    }
    let s = frame_matrix_of(&local, alpha, degree);
    Ok(estimate_from_matrix(&s, alpha, degree, window_radius))
}

fn estimate_from_matrix(
    s: &DMatrix<Complex>,
    alpha: FockParameter,
    degree: usize,
    window_radius: f64,
) -> FrameEstimate {
    let convergence_table: Vec<(usize, f64, f64)> = ladder(degree)
        .into_iter()
        .map(|n| {
            let (a, b) = extremal_eigenvalues(s, n);
            (n, a, b)
        })
        .collect();
    let &(_, a, b) = convergence_table.last().expect("ladder ends at the degree");
    let effective_radius = alpha.concentration_radius(degree);
    FrameEstimate {
        a,
        b,
        degree,
        effective_radius,
        window_radius,
        convergence_table,
        reliable: effective_radius <= window_radius,
    }
}

/// Relative gap between `||f||^2` and the sum of the cell integrals
/// `int_{R + lambda_kl} |f|^2 dmu_alpha` over `|k|, |l| <= cells`, where `R`
/// is the centred square of side `h = 1/sqrt(alpha)` and `lambda_kl = h(k + il)`.
///
/// Each cell uses a tensor Gauss-Legendre rule of order [`CELL_ORDER`],
/// checked against the doubled order.
pub fn norm_decomposition_check(f: &FockFunction, alpha: FockParameter, cells: usize) -> Result<f64> {
    if f.alpha() != alpha {
        return Err(FockError::AlphaMismatch(f.alpha().value(), alpha.value()));
    }
    let a = alpha.value();
    let h = 1.0 / a.sqrt();
    let covered = (cells as f64 + 0.5) * h;
    if let Representation::Kernel { nodes, .. } = f.repr() {
        let reach = nodes.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if reach > 0.5 * covered {
            return Err(FockError::invalid(
                "cells",
                format!("nodes reach {reach}, beyond half the covered radius {covered}"),
            ));
        }
    }
    let norm = f.norm2()?;
    let total = norm * norm;
    let rule = GaussLegendre::new(CELL_ORDER);
    let fine = GaussLegendre::new(2 * CELL_ORDER);
    let k = cells as i64;
    let lambdas: Vec<(f64, f64)> = (-k..=k)
        .flat_map(|l| (-k..=k).map(move |m| (m as f64 * h, l as f64 * h)))
        .collect();
    let integrals: Vec<(f64, f64)> = lambdas
        .par_iter()
        .map(|&(cx, cy)| {
            (
                cell_integral(f, a, &rule, cx, cy, h),
                cell_integral(f, a, &fine, cx, cy, h),
            )
        })
        .collect();
    let mut sum = 0.0;
    for &(coarse, refined) in &integrals {
        let scale = refined.abs();
        let moved = (coarse - refined).abs();
        if moved > CELL_TOLERANCE * scale && moved > f64::MIN_POSITIVE {
            return Err(FockError::QuadratureOrderTooLow(moved / scale.max(f64::MIN_POSITIVE)));
        }
        sum += coarse;
    }
    Ok((total - sum).abs() / total)
}

/// `(alpha/pi) int |exp(-alpha|z|^2/2) f(z)|^2 dA` over the square of side
/// `h` centred at `(cx, cy)`.
fn cell_integral(f: &FockFunction, a: f64, rule: &GaussLegendre, cx: f64, cy: f64, h: f64) -> f64 {
    let half = 0.5 * h;
    let mut acc = 0.0;
    for (y, wy) in rule.on(cy - half, cy + half) {
        let mut row = 0.0;
        for (x, wx) in rule.on(cx - half, cx + half) {
            let v = f.eval_weighted_log(Complex::new(x, y));
            row += wx * (2.0 * v.log_mag).exp();
        }
        acc += wy * row;
    }
    a / std::f64::consts::PI * acc
}

/// Frame estimates of `gamma` and of `gamma` without `removed`, both over the
/// window of `gamma`.
pub fn point_removal_experiment(
    gamma: &PointSet,
    alpha: FockParameter,
    degree: usize,
    removed: Complex,
) -> Result<(FrameEstimate, FrameEstimate)> {
    let pos = gamma
        .position_of(removed)
        .ok_or(FockError::PointNotInSet(removed.re, removed.im))?;
    let window = gamma.window_radius().max(f64::MIN_POSITIVE);
    let before = frame_bounds(gamma, alpha, degree, window)?;
    let after = frame_bounds(&gamma.without(pos), alpha, degree, window)?;
    Ok((before, after))
}
