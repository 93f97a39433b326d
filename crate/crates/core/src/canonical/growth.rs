//! Numerical check of the two-sided growth bounds of a canonical product:
//!
//! ```text
//! C1 e^{-c l(z)} dist(z, Gamma) <= e^{-alpha|z|^2/2} |g(z)| <= C2 e^{c l(z)},
//! C1 e^{-c l(z)} <= e^{-alpha|z|^2/2} |g'(z_p)|            at the nodes,
//! ```
//!
//! with `l(z) = max(|z|, 1) ln max(|z|, 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::Complex;
use crate::error::{FockError, Result};
use crate::space::FockParameter;
use crate::spatial::SpatialGrid;

use super::product::CanonicalProduct;

/// Slack (in log units) allowed before a grid point forces `c > 0`.
pub const LOG_TOLERANCE: f64 = 1e-9;

/// Fitted constants of the growth bounds on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthBoundFit {
    pub c: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub grid_radius: f64,
    pub grid_step: f64,
    /// Grid points or nodes where no finite bound applies: non-finite
    /// values, or zeros away from the set.
    pub violations: usize,
    pub grid_points: usize,
    pub nodes: usize,
}

fn ell(z: Complex) -> f64 {
    let r = z.norm().max(1.0);
    r * r.ln()
}

struct Sample {
    /// `ln(e^{-alpha|z|^2/2} |g(z)|)`
    w: f64,
    ell: f64,
    ln_dist: f64,
    inner: bool,
}

/// Fit the growth constants on the square grid `k * grid_step` inside the
/// disk of radius `grid_radius`.
///
/// `C1` and `C2` are the tightest constants on the inner half-radius disk
/// (nodes included for `C1`); `c` is then the smallest exponent that makes
/// both bounds hold on the whole grid within [`LOG_TOLERANCE`].
pub fn growth_check(
    cp: &CanonicalProduct,
    alpha: FockParameter,
    grid_radius: f64,
    grid_step: f64,
) -> Result<GrowthBoundFit> {
    if !(grid_radius.is_finite() && grid_radius > 0.0) {
        return Err(FockError::invalid("grid_radius", "must be positive"));
    }
    if !(grid_step.is_finite() && grid_step > 0.0 && grid_step < grid_radius) {
        return Err(FockError::invalid(
            "grid_step",
            "must be positive and below grid_radius",
        ));
    }
    let window = cp.gamma().window_radius() - cp.shift().norm();
    if grid_radius > 0.6 * window {
        return Err(FockError::invalid(
            "grid_radius",
            format!("{grid_radius} exceeds 0.6 x window radius {window}"),
        ));
    }
    let a = alpha.value();
    let nodes: Vec<(Complex, (i64, i64))> = cp.nodes().collect();
    let node_points: Vec<Complex> = nodes.iter().map(|n| n.0).collect();
    let spatial = SpatialGrid::new(&node_points, cp.lattice().spacing());
    let inner_radius = 0.5 * grid_radius;

    let k = (grid_radius / grid_step).floor() as i64;
    let rows: Vec<Vec<Result<Option<Sample>>>> = (-k..=k)
        .into_par_iter()
        .map(|iy| {
            (-k..=k)
                .map(|ix| {
                    let z = Complex::new(ix as f64 * grid_step, iy as f64 * grid_step);
                    if z.norm() > grid_radius {
                        return Ok(None);
                    }
                    let g = cp.log(z)?;
                    let (d, _) = spatial.nearest(z);
                    Ok(Some(Sample {
                        w: g.log_mag - 0.5 * a * z.norm_sqr(),
                        ell: ell(z),
                        ln_dist: d.ln(),
                        inner: z.norm() <= inner_radius,
                    }))
                })
                .collect()
        })
        .collect();
    let mut samples = Vec::new();
    for row in rows {
        for s in row {
            if let Some(s) = s? {
                samples.push(s);
            }
        }
    }
    let node_samples: Vec<(f64, f64, bool)> = nodes
        .par_iter()
        .filter(|(z, _)| z.norm() <= grid_radius)
        .map(|&(z, q)| {
            let d = cp.derivative_log(q)?;
            Ok((d.log_mag - 0.5 * a * z.norm_sqr(), ell(z), z.norm() <= inner_radius))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut violations = 0;
    let mut ln_c1 = f64::INFINITY;
    let mut ln_c2 = f64::NEG_INFINITY;
    for s in &samples {
        let on_gamma = s.ln_dist == f64::NEG_INFINITY;
        if s.w.is_nan() || s.w == f64::INFINITY || (s.w == f64::NEG_INFINITY && !on_gamma) {
            violations += 1;
            continue;
        }
        if s.inner {
            ln_c2 = ln_c2.max(s.w);
            if !on_gamma {
                ln_c1 = ln_c1.min(s.w - s.ln_dist);
            }
        }
    }
    for &(w, _, inner) in &node_samples {
        if !w.is_finite() {
            violations += 1;
        } else if inner {
            ln_c1 = ln_c1.min(w);
        }
    }

    let mut c: f64 = 0.0;
    let mut need = |excess: f64, l: f64, violations: &mut usize| {
        if excess <= LOG_TOLERANCE {
            return;
        }
        if l > 0.0 {
            c = c.max((excess - LOG_TOLERANCE) / l);
        } else {
            *violations += 1;
        }
    };
    for s in &samples {
        if !s.w.is_finite() {
            continue;
        }
        need(s.w - ln_c2, s.ell, &mut violations);
        need(ln_c1 + s.ln_dist - s.w, s.ell, &mut violations);
    }
    for &(w, l, _) in &node_samples {
        if w.is_finite() {
            need(ln_c1 - w, l, &mut violations);
        }
    }
    Ok(GrowthBoundFit {
        c,
        c1: ln_c1.exp(),
        c2: ln_c2.exp(),
        grid_radius,
        grid_step,
        violations,
        grid_points: samples.len(),
        nodes: node_samples.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointsets::{perturb, square_lattice, SquareLattice};
    use std::f64::consts::PI;

    #[test]
    fn critical_lattice_needs_no_exponent() {
        let s = 1.0;
        let lat = SquareLattice::new(s).unwrap();
        let cp = CanonicalProduct::new(&square_lattice(s, 7.0).unwrap(), &lat, 24).unwrap();
        let alpha = FockParameter::new(PI / (s * s)).unwrap();
        let fit = growth_check(&cp, alpha, 4.0, 0.1).unwrap();
        assert_eq!(fit.violations, 0);
        assert_eq!(fit.c, 0.0);
        assert!(fit.c1 > 0.0 && fit.c2 > 0.0 && fit.c2.is_finite());
    }

    #[test]
    fn perturbed_lattice_fits() {
        let lat = SquareLattice::new(1.0).unwrap();
        let p = perturb(&square_lattice(1.0, 7.0).unwrap(), 0.2, 13).unwrap();
        let cp = CanonicalProduct::new(&p, &lat, 24).unwrap();
        let fit = growth_check(&cp, FockParameter::new(PI).unwrap(), 4.0, 0.125).unwrap();
        assert_eq!(fit.violations, 0);
        assert!(fit.c.is_finite());
    }

    #[test]
    fn radius_guard() {
        let lat = SquareLattice::new(1.0).unwrap();
        let cp = CanonicalProduct::new(&square_lattice(1.0, 5.0).unwrap(), &lat, 24).unwrap();
        assert!(growth_check(&cp, FockParameter::new(PI).unwrap(), 4.0, 0.1).is_err());
    }
}
