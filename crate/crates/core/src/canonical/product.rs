//! Canonical products of point sets uniformly close to a square lattice.
//!
//! For `Gamma = {z_p}` indexed by the lattice `Lambda = {lambda_p}` with
//! `z_{00}` the point nearest the origin,
//!
//! ```text
//! g(z) = (z - z_00) prod'_p (1 - z/z_p) exp(z/z_p + z^2/(2 lambda_p^2)).
//! ```
//!
//! Indices missing from the finite set are filled with their lattice points,
//! so `g` is the product of the set completed by the lattice outside its
//! window. Dividing by the sigma product of the lattice leaves
//!
//! ```text
//! g(z) = sigma(z) (z - z_00)/z prod'_{p perturbed} rho_p(z),
//! rho_p(z) = (1 - z/z_p) e^{z/z_p} / ((1 - z/lambda_p) e^{z/lambda_p}),
//! ```
//!
//! whose quadratic terms cancel. The fast route evaluates this with one
//! factor per perturbed point. The direct route multiplies the box
//! `|m|, |n| <= M` factor by factor and is kept as an independent check.

use std::sync::Arc;

use crate::complex::{ln_1m, weierstrass_remainder, Complex, LogComplex};
use crate::error::{FockError, Result};
use crate::pointsets::{separation, PointSet, SquareLattice};

use super::sigma::{direct_truncation_floor, SigmaFunction};

const ORIGIN: (i64, i64) = (0, 0);

/// The canonical product of an indexed point set.
///
/// A product may describe a translate `Gamma - z_{q}` of the stored set, in
/// which case indices are shifted by `q` so the translated node sits at
/// index `(0, 0)`; translates share the sigma data and the point storage.
#[derive(Debug, Clone)]
pub struct CanonicalProduct {
    sigma: Arc<SigmaFunction>,
    gamma: Arc<PointSet>,
    shift: Complex,
    index_shift: (i64, i64),
    z00: Complex,
    closeness_q: f64,
    separation_q: f64,
}

impl CanonicalProduct {
    /// Build the product for `gamma` against `lattice`, truncating the sigma
    /// cell product at `truncation`.
    pub fn new(gamma: &PointSet, lattice: &SquareLattice, truncation: usize) -> Result<Self> {
        let sigma = Arc::new(SigmaFunction::new(*lattice, truncation)?);
        Self::with_sigma(Arc::new(gamma.clone()), sigma)
    }

    /// Build with an existing sigma function.
    pub fn with_sigma(gamma: Arc<PointSet>, sigma: Arc<SigmaFunction>) -> Result<Self> {
        let index = gamma.lattice_index().ok_or(FockError::MissingLatticeIndex)?;
        let z00 = gamma.point_at_index(0, 0).ok_or(FockError::NodeIndexMissing(0, 0))?;
        let lattice = *sigma.lattice();
        let s = lattice.spacing();
        let mut q: f64 = 0.0;
        let mut worst = ORIGIN;
        for (z, &(m, n)) in gamma.points().iter().zip(index) {
            let d = (z - lattice.point(m, n)).norm();
            if d > q {
                q = d;
                worst = (m, n);
            }
        }
        if q >= 0.5 * s {
            return Err(FockError::NotUniformlyClose(worst.0, worst.1));
        }
        let r00 = z00.norm();
        if let Some(z) = gamma
            .points()
            .iter()
            .find(|z| z.norm() < r00 || (z.norm() == r00 && z.arg() < z00.arg()))
        {
            return Err(FockError::invalid(
                "gamma",
                format!("{z} is nearer the origin than the point of index (0, 0)"),
            ));
        }
        let separation_q = if gamma.len() >= 2 {
            separation(&gamma)?
        } else {
            f64::INFINITY
        };
        Ok(CanonicalProduct {
            sigma,
            gamma,
            shift: Complex::new(0.0, 0.0),
            index_shift: ORIGIN,
            z00,
            closeness_q: q,
            separation_q,
        })
    }

    /// The product of the translate `Gamma - z_q`, `q` an index of this
    /// product, re-indexed so that the translated node is `z_00 = 0`.
    pub fn translated(&self, q: (i64, i64)) -> Result<CanonicalProduct> {
        let zq = self.node(q).ok_or(FockError::NodeIndexMissing(q.0, q.1))?;
        let shift = self.shift + zq;
        let index_shift = (self.index_shift.0 + q.0, self.index_shift.1 + q.1);
        let lattice = self.sigma.lattice();
        let mut closeness: f64 = 0.0;
        let index = self.gamma.lattice_index().expect("indexed on construction");
        for (z, &(m, n)) in self.gamma.points().iter().zip(index) {
            let p = (m - index_shift.0, n - index_shift.1);
            closeness = closeness.max((z - shift - lattice.point(p.0, p.1)).norm());
        }
        Ok(CanonicalProduct {
            sigma: self.sigma.clone(),
            gamma: self.gamma.clone(),
            shift,
            index_shift,
            z00: Complex::new(0.0, 0.0),
            closeness_q: closeness,
            separation_q: self.separation_q,
        })
    }

    pub fn sigma(&self) -> &SigmaFunction {
        &self.sigma
    }

    pub fn lattice(&self) -> &SquareLattice {
        self.sigma.lattice()
    }

    pub fn z00(&self) -> Complex {
        self.z00
    }

    pub fn truncation_index(&self) -> usize {
        self.sigma.truncation_index()
    }

    pub fn closeness_q(&self) -> f64 {
        self.closeness_q
    }

    pub fn separation_q(&self) -> f64 {
        self.separation_q
    }

    /// Offset of this product's coordinates from the stored set.
    pub fn shift(&self) -> Complex {
        self.shift
    }

    /// The underlying (untranslated) point set.
    pub fn gamma(&self) -> &PointSet {
        &self.gamma
    }

    /// Zeros of the product in this product's coordinates with their indices.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex, (i64, i64))> + '_ {
        let index = self.gamma.lattice_index().expect("indexed on construction");
        self.gamma
            .points()
            .iter()
            .zip(index)
            .map(move |(z, &(m, n))| (z - self.shift, (m - self.index_shift.0, n - self.index_shift.1)))
    }

    /// The zero with index `p` (in this product's coordinates).
    pub fn node(&self, p: (i64, i64)) -> Option<Complex> {
        self.gamma
            .point_at_index(p.0 + self.index_shift.0, p.1 + self.index_shift.1)
            .map(|z| z - self.shift)
    }

    /// `g(z)` in log form.
    pub fn log(&self, z: Complex) -> Result<LogComplex> {
        self.log_value(z, None)
    }

    /// `g(z)` with the linear factor vanishing at the node of index `skip`
    /// removed. For `skip = (0, 0)` that factor is `z - z_00`; for a perturbed
    /// node `z_p` it is `1 - z/z_p`; for a node on its lattice point it is
    /// `z - lambda_p`.
    pub fn log_value(&self, z: Complex, skip: Option<(i64, i64)>) -> Result<LogComplex> {
        let lattice = *self.sigma.lattice();
        let red = self.sigma.reduce(z)?;
        let k = red.index;
        let mut acc = red.rest;
        let mut zero = false;
        let mut linear = |idx: (i64, i64), value: Complex, acc: &mut Complex| {
            if skip == Some(idx) {
                return;
            }
            if value == Complex::new(0.0, 0.0) {
                zero = true;
            } else {
                *acc += value.ln();
            }
        };
        if k == ORIGIN {
            // sigma(z)/z = exp(rest)
            linear(ORIGIN, z - self.z00, &mut acc);
        } else {
            linear(ORIGIN, z - self.z00, &mut acc);
            acc -= z.ln();
            let lam_k = lattice.point(k.0, k.1);
            match self.node(k) {
                Some(zk) if zk != lam_k => {
                    // (z - lambda_k) rho_k = -lambda_k (1 - z/z_k) e^{z/z_k - z/lambda_k}
                    acc += (-lam_k).ln() + z / zk - z / lam_k;
                    let factor = if z == zk {
                        Complex::new(0.0, 0.0)
                    } else {
                        Complex::new(1.0, 0.0) - z / zk
                    };
                    linear(k, factor, &mut acc);
                }
                _ => linear(k, red.linear, &mut acc),
            }
        }
        if let Some(q) = skip {
            if q != ORIGIN && q != k {
                let lam_q = lattice.point(q.0, q.1);
                match self.node(q) {
                    Some(zq) if zq != lam_q => {}
                    _ => acc -= (z - lam_q).ln(),
                }
            }
        }
        for (zp, p) in self.nodes() {
            if p == ORIGIN || p == k {
                continue;
            }
            let lam = lattice.point(p.0, p.1);
            if zp == lam {
                continue;
            }
            let d = (lam - zp) / (zp * lam);
            let one_minus = Complex::new(1.0, 0.0) - z / lam;
            if skip == Some(p) {
                acc += z * d - one_minus.ln();
                continue;
            }
            if z == zp {
                zero = true;
                continue;
            }
            acc += ln_1m(z * d / one_minus) + z * d;
        }
        if zero {
            return Ok(LogComplex::ZERO);
        }
        Ok(LogComplex::exp(acc))
    }

    /// `g'(z_q)` at the node of index `q`, as the product of the remaining
    /// factors times the derivative of the vanishing one.
    pub fn derivative_log(&self, q: (i64, i64)) -> Result<LogComplex> {
        let zq = self.node(q).ok_or(FockError::NodeIndexMissing(q.0, q.1))?;
        let rest = self.log_value(zq, Some(q))?;
        let lam = self.lattice().point(q.0, q.1);
        if q == ORIGIN || zq == lam {
            Ok(rest)
        } else {
            Ok(rest * LogComplex::from_complex(-zq.inv()))
        }
    }

    /// `g(z)` from the box product `|m|, |n| <= M` in index space, absent
    /// indices filled with lattice points, plus the lattice tail beyond the
    /// box. Agrees with [`Self::log`] when the box holds every node.
    pub fn log_direct(&self, z: Complex) -> Result<LogComplex> {
        let lattice = *self.sigma.lattice();
        let s = lattice.spacing();
        let m = self.truncation_index();
        if m < direct_truncation_floor(z.norm() / s) {
            return Err(FockError::TruncationTooSmall {
                m,
                remainder: f64::INFINITY,
            });
        }
        if z == self.z00 {
            return Ok(LogComplex::ZERO);
        }
        let mut acc = (z - self.z00).ln() + self.sigma.tails().correction(z / s)?;
        let mi = m as i64;
        for n in -mi..=mi {
            for k in -mi..=mi {
                if (k, n) == ORIGIN {
                    continue;
                }
                let lam = lattice.point(k, n);
                let zeta = self.node((k, n)).unwrap_or(lam);
                if z == zeta {
                    return Ok(LogComplex::ZERO);
                }
                let u = z / zeta;
                let w = z / lam;
                acc += weierstrass_remainder(u) + 0.5 * (w * w - u * u);
            }
        }
        Ok(LogComplex::exp(acc))
    }

    /// Relative discrepancy between [`Self::derivative_log`] and central
    /// differences at steps `s/100, s/200, s/400` combined by Richardson
    /// extrapolation.
    pub fn derivative_fd_discrepancy(&self, q: (i64, i64)) -> Result<f64> {
        let zq = self.node(q).ok_or(FockError::NodeIndexMissing(q.0, q.1))?;
        let d = self.derivative_log(q)?;
        let s = self.lattice().spacing();
        // differences of g / g'(z_q), which keeps large moduli out of range
        let central = |h: f64| -> Result<Complex> {
            let hp = (self.log(zq + h)? / d).to_complex()?;
            let hm = (self.log(zq - h)? / d).to_complex()?;
            Ok((hp - hm) / (2.0 * h))
        };
        let h = 1e-2 * s;
        let (d1, d2, d3) = (central(h)?, central(h / 2.0)?, central(h / 4.0)?);
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d3 - d2) / 3.0;
        let r = (16.0 * r2 - r1) / 15.0;
        Ok((r - 1.0).norm())
    }
}

/// `g(z)` for a canonical product.
pub fn gfun_log(cp: &CanonicalProduct, z: Complex) -> Result<LogComplex> {
    cp.log(z)
}

/// `g(z)` from the direct box product.
pub fn gfun_log_direct(cp: &CanonicalProduct, z: Complex) -> Result<LogComplex> {
    cp.log_direct(z)
}

/// `g'(z_{mn})` in log form.
pub fn gfun_derivative_at_node(cp: &CanonicalProduct, node_index: (i64, i64)) -> Result<LogComplex> {
    cp.derivative_log(node_index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::reduce_phase;
    use crate::pointsets::{perturb, square_lattice};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn unit() -> SquareLattice {
        SquareLattice::new(1.0).unwrap()
    }

    #[test]
    fn unperturbed_product_is_sigma() {
        let lat = unit();
        let cp = CanonicalProduct::new(&square_lattice(1.0, 6.0).unwrap(), &lat, 24).unwrap();
        for z in [c(0.3, 0.2), c(1.7, -0.4), c(-1.2, 1.9)] {
            let g = cp.log(z).unwrap();
            let s = cp.sigma().log(z).unwrap();
            assert!((g.log_mag - s.log_mag).abs() < 1e-10);
            assert!(reduce_phase(g.phase - s.phase).abs() < 1e-10);
        }
    }

    #[test]
    fn zeros_exactly_on_gamma() {
        let lat = unit();
        let p = perturb(&square_lattice(1.0, 6.0).unwrap(), 0.3, 4).unwrap();
        let cp = CanonicalProduct::new(&p, &lat, 24).unwrap();
        for &z in p.points() {
            assert!(cp.log(z).unwrap().is_zero());
        }
        assert!(!cp.log(c(0.55, 0.45)).unwrap().is_zero());
    }

    #[test]
    fn fast_and_direct_routes_agree() {
        let lat = unit();
        let p = perturb(&square_lattice(1.0, 5.0).unwrap(), 0.25, 8).unwrap();
        let cp = CanonicalProduct::new(&p, &lat, 30).unwrap();
        for z in [c(0.1, 0.05), c(1.3, 0.6), c(-2.4, -1.1), c(3.3, 2.2)] {
            let a = cp.log(z).unwrap();
            let b = cp.log_direct(z).unwrap();
            assert!(
                (a.log_mag - b.log_mag).abs() < 1e-10,
                "{z}: {} {}",
                a.log_mag,
                b.log_mag
            );
            assert!(reduce_phase(a.phase - b.phase).abs() < 1e-9);
        }
    }

    #[test]
    fn normalized_at_origin() {
        let cp = CanonicalProduct::new(&square_lattice(1.0, 4.0).unwrap(), &unit(), 24).unwrap();
        let z = c(1e-4, 0.0);
        let ratio = (cp.log(z).unwrap() / LogComplex::from_complex(z)).to_complex().unwrap();
        assert!((ratio - 1.0).norm() < 1e-6);
        let d = cp.derivative_log((0, 0)).unwrap().to_complex().unwrap();
        assert!((d - 1.0).norm() < 1e-12);
    }

    #[test]
    fn derivative_matches_differences() {
        let lat = unit();
        let cp = CanonicalProduct::new(&square_lattice(1.0, 6.0).unwrap(), &lat, 24).unwrap();
        assert!(cp.derivative_fd_discrepancy((1, 0)).unwrap() < 1e-6);
        let a = cp.derivative_log((1, 0)).unwrap();
        let b = cp.derivative_log((0, 1)).unwrap();
        assert!((a.log_mag - b.log_mag).abs() < 1e-10);

        let p = perturb(&square_lattice(1.0, 6.0).unwrap(), 0.2, 2).unwrap();
        let cp = CanonicalProduct::new(&p, &lat, 24).unwrap();
        for q in [(0, 0), (1, 0), (-2, 1), (3, 2)] {
            assert!(cp.derivative_fd_discrepancy(q).unwrap() < 1e-6, "{q:?}");
        }
    }

    #[test]
    fn translated_product_vanishes_on_the_translate() {
        let lat = unit();
        let p = perturb(&square_lattice(1.0, 5.0).unwrap(), 0.15, 6).unwrap();
        let cp = CanonicalProduct::new(&p, &lat, 24).unwrap();
        let t = cp.translated((1, -2)).unwrap();
        assert_eq!(t.z00(), c(0.0, 0.0));
        assert_eq!(t.node((0, 0)), Some(c(0.0, 0.0)));
        let z12 = p.point_at_index(1, -2).unwrap();
        for &z in p.points() {
            assert!(t.log(z - z12).unwrap().is_zero());
        }
        // g(w)/w at w = 0 is exactly one
        let a = t.log_value(c(0.0, 0.0), Some((0, 0))).unwrap();
        assert_eq!(a.to_complex().unwrap(), c(1.0, 0.0));
        // translate computed directly from a shifted set agrees
        let shifted_pts: Vec<Complex> = p.points().iter().map(|z| z - z12).collect();
        let shifted_idx: Vec<(i64, i64)> = p
            .lattice_index()
            .unwrap()
            .iter()
            .map(|&(m, n)| (m - 1, n + 2))
            .collect();
        let q = PointSet::with_index(shifted_pts, shifted_idx, p.window_radius() + z12.norm()).unwrap();
        let direct = CanonicalProduct::new(&q, &lat, 24).unwrap();
        for w in [c(0.4, 0.3), c(-1.6, 0.8)] {
            let x = t.log(w).unwrap();
            let y = direct.log(w).unwrap();
            assert!((x.log_mag - y.log_mag).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_sets() {
        let lat = unit();
        let bare = PointSet::new(vec![c(0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(
            CanonicalProduct::new(&bare, &lat, 24),
            Err(FockError::MissingLatticeIndex)
        ));
        let no_origin = PointSet::with_index(vec![c(1.0, 0.0)], vec![(1, 0)], 1.0).unwrap();
        assert!(matches!(
            CanonicalProduct::new(&no_origin, &lat, 24),
            Err(FockError::NodeIndexMissing(0, 0))
        ));
        let far = PointSet::with_index(vec![c(0.0, 0.0), c(1.6, 0.0)], vec![(0, 0), (1, 0)], 2.0).unwrap();
        assert!(matches!(
            CanonicalProduct::new(&far, &lat, 24),
            Err(FockError::NotUniformlyClose(1, 0))
        ));
    }
}
