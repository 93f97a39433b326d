//! The Weierstrass sigma function of a square lattice `s Z[i]`.
//!
//! Everything is computed for the unit lattice in coordinates `v = z/s` and
//! rescaled with `sigma_s(z) = s sigma_1(z/s)`. Two routes are available:
//!
//! * the reduced route: `v = v0 + P` with `P` the nearest lattice point,
//!   quasi-periodicity moves the evaluation into the cell around 0, where the
//!   product is grouped by rotation orbits into factors `1 - v0^4/lambda^4`;
//! * the direct route: the raw box product `|m|, |n| <= M` evaluated at `v`
//!   itself. It is used to determine the quasi-period constants and to
//!   cross-check the reduced route.
//!
//! Both add the outer-shell correction from [`TailSeries`].

use std::sync::Arc;

use crate::complex::{ln_1m, weierstrass_remainder, Complex, LogComplex};
use crate::error::{FockError, Result};
use crate::pointsets::SquareLattice;

use super::eisenstein::TailSeries;

/// Default truncation index of the cell product.
pub const DEFAULT_TRUNCATION: usize = 24;

/// Probe points (unit coordinates) for the quasi-period constants.
pub const PROBES: [Complex; 3] = [
    Complex::new(0.1, 0.2),
    Complex::new(0.25, -0.15),
    Complex::new(-0.3, 0.05),
];

/// Agreement required between probes, and of the Legendre relation.
pub const PROBE_TOLERANCE: f64 = 1e-10;

/// Smallest box admissible for the direct route at `|v|`.
pub fn direct_truncation_floor(v_abs: f64) -> usize {
    (2.0 * v_abs + 20.0).ceil() as usize
}

/// Raw box product with tail, in unit coordinates: `ln sigma_1(v)`.
///
/// The imaginary part is only meaningful modulo `2 pi`.
pub fn direct_unit_log(v: Complex, tails: &TailSeries) -> Result<Complex> {
    let m = tails.truncation_index();
    if m < direct_truncation_floor(v.norm()) {
        return Err(FockError::TruncationTooSmall {
            m,
            remainder: f64::INFINITY,
        });
    }
    let tail = tails.correction(v)?;
    let mi = m as i64;
    let mut acc = Complex::new(0.0, 0.0);
    for n in -mi..=mi {
        for k in -mi..=mi {
            if (k, n) == (0, 0) {
                continue;
            }
            let lam = Complex::new(k as f64, n as f64);
            if v == lam {
                return Ok(Complex::new(f64::NEG_INFINITY, 0.0));
            }
            acc += weierstrass_remainder(v / lam);
        }
    }
    if v == Complex::new(0.0, 0.0) {
        return Ok(Complex::new(f64::NEG_INFINITY, 0.0));
    }
    Ok(v.ln() + acc + tail)
}

/// Quasi-period constants of the unit lattice from the direct route:
/// `eta_w = ln(sigma(v + w) / -sigma(v)) / (v + w/2)` for `w = 1, i`.
fn unit_quasi_periods(tails: &TailSeries) -> Result<(Complex, Complex)> {
    let mut eta1 = Vec::with_capacity(PROBES.len());
    let mut eta2 = Vec::with_capacity(PROBES.len());
    for &v in &PROBES {
        let base = LogComplex::exp(direct_unit_log(v, tails)?);
        for (w, out) in [(Complex::new(1.0, 0.0), &mut eta1), (Complex::new(0.0, 1.0), &mut eta2)] {
            let shifted = LogComplex::exp(direct_unit_log(v + w, tails)?);
            let ratio = shifted / -base;
            out.push(ratio.ln() / (v + 0.5 * w));
        }
    }
    let spread = |xs: &[Complex]| {
        let mut worst: f64 = 0.0;
        for a in xs {
            for b in xs {
                worst = worst.max((a - b).norm());
            }
        }
        worst
    };
    let s = spread(&eta1).max(spread(&eta2));
    if s > PROBE_TOLERANCE {
        return Err(FockError::InconsistentProbes(s));
    }
    let mean = |xs: &[Complex]| xs.iter().sum::<Complex>() / xs.len() as f64;
    let (e1, e2) = (mean(&eta1), mean(&eta2));
    // Legendre relation for periods (1, i): eta1 * i - eta2 = 2 pi i
    let legendre = (e1 * Complex::i() - e2 - Complex::new(0.0, 2.0 * std::f64::consts::PI)).norm();
    if legendre > PROBE_TOLERANCE {
        return Err(FockError::InconsistentProbes(legendre));
    }
    Ok((e1, e2))
}

/// Decomposition `sigma(z) = (z - lambda_k) * exp(rest)` around the nearest
/// lattice point `lambda_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reduced {
    pub index: (i64, i64),
    /// `z - lambda_k`, exact zero when `z` is the lattice point.
    pub linear: Complex,
    /// `ln(sigma(z) / (z - lambda_k))`, finite everywhere.
    pub rest: Complex,
}

/// Sigma function of a square lattice with precomputed tail sums and
/// quasi-period constants.
#[derive(Debug, Clone)]
pub struct SigmaFunction {
    lattice: SquareLattice,
    tails: Arc<TailSeries>,
    /// `lambda^{-4}` for one representative per rotation orbit of the box.
    inv4: Vec<Complex>,
    /// Quasi-period constants of the unit lattice.
    eta_unit: (Complex, Complex),
}

impl SigmaFunction {
    pub fn new(lattice: SquareLattice, truncation: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(FockError::invalid("truncation", "must be at least 1"));
        }
        let tails = Arc::new(TailSeries::new(truncation));
        // the probes need a box large enough for the direct route
        let eta_unit = if truncation >= direct_truncation_floor(1.31) {
            unit_quasi_periods(&tails)?
        } else {
            unit_quasi_periods(&TailSeries::new(DEFAULT_TRUNCATION))?
        };
        let m = truncation as i64;
        let mut inv4 = Vec::with_capacity((m * (m + 1)) as usize);
        for a in 1..=m {
            for b in 0..=m {
                inv4.push(Complex::new(a as f64, b as f64).inv().powu(4));
            }
        }
        Ok(SigmaFunction {
            lattice,
            tails,
            inv4,
            eta_unit,
        })
    }

    pub fn lattice(&self) -> &SquareLattice {
        &self.lattice
    }

    pub fn truncation_index(&self) -> usize {
        self.tails.truncation_index()
    }

    pub fn tails(&self) -> &TailSeries {
        &self.tails
    }

    /// `(eta1, eta2)` for the periods `s` and `i s`.
    pub fn quasi_periods(&self) -> (Complex, Complex) {
        let s = self.lattice.spacing();
        (self.eta_unit.0 / s, self.eta_unit.1 / s)
    }

    /// `ln(sigma_1(v0)/v0)` for `v0` in the cell around 0.
    fn cell_rest(&self, v0: Complex) -> Result<Complex> {
        let v4 = v0.powu(4);
        let mut acc = Complex::new(0.0, 0.0);
        for w in &self.inv4 {
            acc += ln_1m(v4 * w);
        }
        Ok(acc + self.tails.correction(v0)?)
    }

    pub fn reduce(&self, z: Complex) -> Result<Reduced> {
        let s = self.lattice.spacing();
        let (a, b) = self.lattice.nearest_index(z);
        let lam = self.lattice.point(a, b);
        let linear = z - lam;
        let v0 = linear / s;
        let mut rest = self.cell_rest(v0)?;
        if (a, b) != (0, 0) {
            let (e1, e2) = self.eta_unit;
            let p = Complex::new(a as f64, b as f64);
            rest += (e1 * a as f64 + e2 * b as f64) * (v0 + 0.5 * p);
            if (a + b + a * b).rem_euclid(2) == 1 {
                rest += Complex::new(0.0, std::f64::consts::PI);
            }
        }
        Ok(Reduced {
            index: (a, b),
            linear,
            rest,
        })
    }

    /// `sigma(z)` in log form via the reduced route.
    pub fn log(&self, z: Complex) -> Result<LogComplex> {
        let r = self.reduce(z)?;
        if r.linear == Complex::new(0.0, 0.0) {
            return Ok(LogComplex::ZERO);
        }
        Ok(LogComplex::from_complex(r.linear).mul_exp(r.rest))
    }

    /// `sigma(z)` in log form from the raw box product at `z` (no reduction).
    pub fn log_direct(&self, z: Complex) -> Result<LogComplex> {
        let s = self.lattice.spacing();
        let (a, b) = self.lattice.nearest_index(z);
        if z == self.lattice.point(a, b) {
            return Ok(LogComplex::ZERO);
        }
        let w = direct_unit_log(z / s, &self.tails)?;
        Ok(LogComplex::exp(w).mul_exp(Complex::new(s.ln(), 0.0)))
    }
}

/// `sigma(z)` for the lattice, truncated at `m` (with tail correction).
pub fn sigma_log(lattice: &SquareLattice, z: Complex, m: usize) -> Result<LogComplex> {
    SigmaFunction::new(*lattice, m)?.log(z)
}

/// Quasi-period constants `(eta1, eta2)` of the lattice.
pub fn quasi_period_constants(lattice: &SquareLattice, m: usize) -> Result<(Complex, Complex)> {
    if m < direct_truncation_floor(1.31) {
        return Err(FockError::TruncationTooSmall {
            m,
            remainder: f64::INFINITY,
        });
    }
    let tails = TailSeries::new(m);
    let (e1, e2) = unit_quasi_periods(&tails)?;
    let s = lattice.spacing();
    Ok((e1 / s, e2 / s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn zeros_on_the_lattice() {
        let lat = SquareLattice::new(1.3).unwrap();
        let sf = SigmaFunction::new(lat, 24).unwrap();
        for (m, n) in [(0, 0), (1, 0), (-2, 3), (5, -4)] {
            assert!(sf.log(lat.point(m, n)).unwrap().is_zero());
        }
        assert!(!sf.log(c(0.3, 0.1)).unwrap().is_zero());
    }

    #[test]
    fn derivative_at_origin_is_one() {
        let lat = SquareLattice::new(1.0).unwrap();
        let sf = SigmaFunction::new(lat, 24).unwrap();
        let h = 1e-5;
        let p = sf.log(c(h, 0.0)).unwrap().to_complex().unwrap();
        let m = sf.log(c(-h, 0.0)).unwrap().to_complex().unwrap();
        assert!(((p - m) / (2.0 * h) - 1.0).norm() < 1e-8);
    }

    #[test]
    fn odd_function() {
        let lat = SquareLattice::new(1.0).unwrap();
        let sf = SigmaFunction::new(lat, 24).unwrap();
        let z = c(0.3, 0.4);
        let a = sf.log(z).unwrap();
        let b = sf.log(-z).unwrap();
        assert!((a.log_mag - b.log_mag).abs() < 1e-12);
        let dphase = crate::complex::reduce_phase(b.phase - a.phase);
        assert!((dphase.abs() - PI).abs() < 1e-12);
    }

    #[test]
    fn lemniscatic_quasi_periods() {
        for s in [1.0, PI.sqrt(), 0.7] {
            let lat = SquareLattice::new(s).unwrap();
            let (e1, e2) = quasi_period_constants(&lat, 24).unwrap();
            assert!((e1 * s - PI).norm() < 1e-8, "{e1}");
            assert!((e2 - (-Complex::i() * e1)).norm() < 1e-10);
            let residual = (e1 * Complex::new(0.0, s) - e2 * s - Complex::new(0.0, 2.0 * PI)).norm();
            assert!(residual <= 1e-10);
        }
    }

    #[test]
    fn reduced_and_direct_routes_agree() {
        let lat = SquareLattice::new(1.0).unwrap();
        let sf = SigmaFunction::new(lat, 30).unwrap();
        for z in [c(0.2, 0.1), c(1.4, -0.3), c(-2.6, 1.9), c(3.1, 3.3), c(0.5, 0.5)] {
            let a = sf.log(z).unwrap();
            let b = sf.log_direct(z).unwrap();
            assert!(
                (a.log_mag - b.log_mag).abs() < 1e-11,
                "{z}: {} vs {}",
                a.log_mag,
                b.log_mag
            );
            assert!(crate::complex::reduce_phase(a.phase - b.phase).abs() < 1e-10);
        }
    }

    #[test]
    fn truncation_converges() {
        // the tail correction makes the direct route insensitive to the box
        let lat = SquareLattice::new(1.0).unwrap();
        let z = c(2.2, -1.7);
        let a = SigmaFunction::new(lat, 26).unwrap().log_direct(z).unwrap();
        let b = SigmaFunction::new(lat, 31).unwrap().log_direct(z).unwrap();
        assert!((a.log_mag - b.log_mag).abs() < 1e-10);
    }

    #[test]
    fn direct_route_guard() {
        let lat = SquareLattice::new(1.0).unwrap();
        let sf = SigmaFunction::new(lat, 24).unwrap();
        assert!(matches!(
            sf.log_direct(c(4.0, 0.5)),
            Err(FockError::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn weighted_modulus_is_periodic_at_critical_density() {
        let s = 1.0;
        let alpha = PI / (s * s);
        let sf = SigmaFunction::new(SquareLattice::new(s).unwrap(), 24).unwrap();
        let w = |z: Complex| sf.log(z).unwrap().log_mag - 0.5 * alpha * z.norm_sqr();
        for z in [c(0.13, 0.27), c(-0.41, 0.05), c(0.33, -0.48)] {
            for shift in [c(s, 0.0), c(0.0, s), c(-3.0 * s, 2.0 * s)] {
                assert!((w(z) - w(z + shift)).abs() < 1e-9);
            }
        }
    }
}
