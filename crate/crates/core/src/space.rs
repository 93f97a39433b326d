//! The Bargmann-Fock space `F^2_alpha`: kernels, finite function
//! representations, norms, inner products and the isometric translations.
//!
//! Functions are kept in one of two exact finite forms:
//!
//! * coefficients in the orthonormal monomial basis
//!   `e_n(z) = sqrt(alpha^n / n!) z^n`, and
//! * kernel combinations `f(z) = sum_j w_j exp(alpha * conj(zeta_j) * z)`.
//!
//! Inner products use `<f, g> = int f conj(g) dmu_alpha`, which gives the
//! reproducing identity `<f, K(., z)> = f(z)` and `||K(., zeta)||^2 = K(zeta, zeta)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{ln_factorials, log_sum, Complex, LogComplex, EXP_OVERFLOW};
use crate::error::{FockError, Result};

/// The Gaussian weight exponent `alpha > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FockParameter(f64);

impl FockParameter {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(FockError::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        Ok(FockParameter(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Radius of the disk carrying the mass of `span{e_0..e_n}`:
    /// `sqrt(n/alpha) + 4/sqrt(alpha)`.
    pub fn concentration_radius(self, degree: usize) -> f64 {
        (degree as f64 / self.0).sqrt() + 4.0 / self.0.sqrt()
    }

    /// Critical density `alpha / pi`.
    pub fn critical_density(self) -> f64 {
        self.0 / std::f64::consts::PI
    }
}

impl TryFrom<f64> for FockParameter {
    type Error = FockError;
    fn try_from(v: f64) -> Result<Self> {
        FockParameter::new(v)
    }
}

impl From<FockParameter> for f64 {
    fn from(a: FockParameter) -> f64 {
        a.0
    }
}

/// The concrete finite form of a Fock-space function.
#[derive(Debug, Clone, PartialEq)]
pub enum Representation {
    /// Coefficients `c_0..c_N` in the orthonormal monomial basis.
    Monomial { coeffs: Vec<Complex> },
    /// `sum_j w_j K(., zeta_j)` with pairwise distinct nodes.
    Kernel { nodes: Vec<Complex>, weights: Vec<Complex> },
}

/// An element of `F^2_alpha` in one of the exact finite representations.
#[derive(Debug, Clone, PartialEq)]
pub struct FockFunction {
    alpha: FockParameter,
    repr: Representation,
}

fn check_finite(name: &'static str, values: &[Complex]) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(FockError::invalid(name, "non-finite component"))
    }
}

impl FockFunction {
    pub fn monomial(alpha: FockParameter, coeffs: Vec<Complex>) -> Result<Self> {
        check_finite("coeffs", &coeffs)?;
        Ok(FockFunction {
            alpha,
            repr: Representation::Monomial { coeffs },
        })
    }

    pub fn kernel_combo(alpha: FockParameter, nodes: Vec<Complex>, weights: Vec<Complex>) -> Result<Self> {
        if nodes.len() != weights.len() {
            return Err(FockError::invalid(
                "weights",
                format!("{} weights for {} nodes", weights.len(), nodes.len()),
            ));
        }
        check_finite("nodes", &nodes)?;
        check_finite("weights", &weights)?;
        let mut sorted: Vec<(u64, u64)> = nodes.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(FockError::DuplicatePoint(
                f64::from_bits(w[0].0),
                f64::from_bits(w[0].1),
            ));
        }
        Ok(FockFunction {
            alpha,
            repr: Representation::Kernel { nodes, weights },
        })
    }

    /// The basis function `e_n`.
    pub fn basis(alpha: FockParameter, n: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex::new(1.0, 0.0);
        FockFunction {
            alpha,
            repr: Representation::Monomial { coeffs },
        }
    }

    /// The reproducing kernel `K(., zeta)`, i.e. `z -> exp(alpha conj(zeta) z)`.
    pub fn kernel_at(alpha: FockParameter, zeta: Complex) -> Result<Self> {
        Self::kernel_combo(alpha, vec![zeta], vec![Complex::new(1.0, 0.0)])
    }

    pub fn alpha(&self) -> FockParameter {
        self.alpha
    }

    pub fn repr(&self) -> &Representation {
        &self.repr
    }

    /// Radius beyond which the weighted modulus is negligible for this
    /// function (monomial degree `N` or outermost kernel node).
    pub fn concentration_radius(&self) -> f64 {
        match &self.repr {
            Representation::Monomial { coeffs } => {
                let deg = coeffs.iter().rposition(|c| *c != Complex::new(0.0, 0.0)).unwrap_or(0);
                self.alpha.concentration_radius(deg)
            }
            Representation::Kernel { nodes, .. } => {
                let far = nodes.iter().map(|z| z.norm()).fold(0.0, f64::max);
                far + 4.0 / self.alpha.0.sqrt()
            }
        }
    }

    /// Radius that must be covered for a sup-norm scan to see the peak of
    /// the weighted modulus.
    pub fn peak_radius(&self) -> f64 {
        let a = self.alpha.0;
        match &self.repr {
            Representation::Monomial { coeffs } => {
                let deg = coeffs.iter().rposition(|c| *c != Complex::new(0.0, 0.0)).unwrap_or(0);
                (deg as f64 / a).sqrt() + 1.0 / a.sqrt()
            }
            Representation::Kernel { nodes, .. } => nodes.iter().map(|z| z.norm()).fold(0.0, f64::max) + 1.0 / a.sqrt(),
        }
    }

    /// `f(z)` in log form.
    pub fn eval_log(&self, z: Complex) -> LogComplex {
        let a = self.alpha.0;
        match &self.repr {
            Representation::Monomial { coeffs } => {
                if z == Complex::new(0.0, 0.0) {
                    return coeffs
                        .first()
                        .map_or(LogComplex::ZERO, |c| LogComplex::from_complex(*c));
                }
                let lz = LogComplex::from_complex(z);
                let lnfact = ln_factorials(coeffs.len());
                let terms: Vec<LogComplex> = coeffs
                    .iter()
                    .enumerate()
                    .map(|(n, c)| {
                        let nf = n as f64;
                        let basis =
                            LogComplex::new(0.5 * nf * a.ln() - 0.5 * lnfact[n] + nf * lz.log_mag, nf * lz.phase);
                        LogComplex::from_complex(*c) * basis
                    })
                    .collect();
                log_sum(&terms)
            }
            Representation::Kernel { nodes, weights } => {
                let terms: Vec<LogComplex> = nodes
                    .iter()
                    .zip(weights)
                    .map(|(zeta, w)| LogComplex::from_complex(*w).mul_exp(a * zeta.conj() * z))
                    .collect();
                log_sum(&terms)
            }
        }
    }

    /// `f(z)`; fails with `Overflow` instead of returning infinity.
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        self.eval_log(z).to_complex()
    }

    /// `exp(-alpha |z|^2 / 2) f(z)` in log form.
    pub fn eval_weighted_log(&self, z: Complex) -> LogComplex {
        self.eval_log(z)
            .mul_exp(Complex::new(-0.5 * self.alpha.0 * z.norm_sqr(), 0.0))
    }

    /// `exp(-alpha |z|^2 / 2) f(z)`, computed term by term in the log domain.
    pub fn eval_weighted(&self, z: Complex) -> Result<Complex> {
        self.eval_weighted_log(z).to_complex()
    }

    /// The norm in `F^2_alpha`.
    pub fn norm2(&self) -> Result<f64> {
        match &self.repr {
            Representation::Monomial { coeffs } => Ok(coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()),
            Representation::Kernel { .. } => {
                let sq = inner_log(self, self)?;
                let log_norm = 0.5 * sq.log_mag;
                if log_norm >= EXP_OVERFLOW {
                    return Err(FockError::Overflow { log_mag: log_norm });
                }
                Ok(log_norm.exp())
            }
        }
    }

    /// Grid estimate of `sup_z exp(-alpha|z|^2/2) |f(z)|`.
    ///
    /// Scans the square grid `{k*step : |x|,|y| <= search_radius}` and then a
    /// 3x finer patch around the grid argmax.
    pub fn norm_inf(&self, search_radius: f64, grid_step: f64) -> Result<SupEstimate> {
        if !(grid_step.is_finite() && grid_step > 0.0) {
            return Err(FockError::invalid("grid_step", "must be positive"));
        }
        if !(search_radius.is_finite() && search_radius > 0.0) {
            return Err(FockError::invalid("search_radius", "must be positive"));
        }
        let required = self.peak_radius();
        if search_radius < required {
            return Err(FockError::RadiusTooSmall {
                radius: search_radius,
                required,
            });
        }
        let k = (search_radius / grid_step).floor() as i64;
        let weighted = |z: Complex| self.eval_weighted_log(z).log_mag;
        // per-row maxima in parallel, reduced in row order
        let rows: Vec<(f64, Complex)> = (-k..=k)
            .into_par_iter()
            .map(|iy| {
                let y = iy as f64 * grid_step;
                let mut best = (f64::NEG_INFINITY, Complex::new(0.0, y));
                for ix in -k..=k {
                    let z = Complex::new(ix as f64 * grid_step, y);
                    let v = weighted(z);
                    if v > best.0 {
                        best = (v, z);
                    }
                }
                best
            })
            .collect();
        let mut best = rows[0];
        for r in &rows[1..] {
            if r.0 > best.0 {
                best = *r;
            }
        }
        let fine = grid_step / 3.0;
        let center = best.1;
        for iy in -3..=3 {
            for ix in -3..=3 {
                let z = center + Complex::new(ix as f64 * fine, iy as f64 * fine);
                let v = weighted(z);
                if v > best.0 {
                    best = (v, z);
                }
            }
        }
        if best.0 >= EXP_OVERFLOW {
            return Err(FockError::Overflow { log_mag: best.0 });
        }
        Ok(SupEstimate {
            value: best.0.exp(),
            argmax: best.1,
            resolution: fine,
        })
    }

    /// The translation `(T_a f)(z) = exp(alpha conj(a) z - alpha|a|^2/2) f(z - a)`.
    pub fn translate(&self, a: Complex) -> Result<FockFunction> {
        let Representation::Kernel { nodes, weights } = &self.repr else {
            return Err(FockError::UnsupportedRepresentation("monomial"));
        };
        if a == Complex::new(0.0, 0.0) {
            return Ok(self.clone());
        }
        let al = self.alpha.0;
        let mut new_nodes = Vec::with_capacity(nodes.len());
        let mut new_weights = Vec::with_capacity(nodes.len());
        for (zeta, w) in nodes.iter().zip(weights) {
            let expo = -0.5 * al * a.norm_sqr() - al * zeta.conj() * a;
            new_nodes.push(zeta + a);
            new_weights.push(LogComplex::from_complex(*w).mul_exp(expo).to_complex()?);
        }
        FockFunction::kernel_combo(self.alpha, new_nodes, new_weights)
    }

    /// The inner product `<self, other>`.
    pub fn inner(&self, other: &FockFunction) -> Result<Complex> {
        inner_log(self, other)?.to_complex()
    }
}

/// Result of a grid sup-norm scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupEstimate {
    pub value: f64,
    pub argmax: Complex,
    /// Spacing of the finest grid used.
    pub resolution: f64,
}

/// `K(z, zeta) = exp(alpha conj(z) zeta)`; overflow is an error.
pub fn kernel(alpha: FockParameter, z: Complex, zeta: Complex) -> Result<Complex> {
    kernel_log(alpha, z, zeta).to_complex()
}

/// `K(z, zeta)` in log form.
pub fn kernel_log(alpha: FockParameter, z: Complex, zeta: Complex) -> LogComplex {
    LogComplex::exp(alpha.0 * z.conj() * zeta)
}

fn check_alpha(f: &FockFunction, g: &FockFunction) -> Result<()> {
    if f.alpha != g.alpha {
        return Err(FockError::AlphaMismatch(f.alpha.0, g.alpha.0));
    }
    Ok(())
}

/// `<f, g>`; see the module docs for the convention.
pub fn inner(f: &FockFunction, g: &FockFunction) -> Result<Complex> {
    f.inner(g)
}

/// `<f, g>` in log form.
pub fn inner_log(f: &FockFunction, g: &FockFunction) -> Result<LogComplex> {
    check_alpha(f, g)?;
    let a = f.alpha.0;
    use Representation::*;
    Ok(match (&f.repr, &g.repr) {
        (Monomial { coeffs: c }, Monomial { coeffs: d }) => {
            let s: Complex = c.iter().zip(d).map(|(x, y)| x * y.conj()).sum();
            LogComplex::from_complex(s)
        }
        (Kernel { nodes: zf, weights: wf }, Kernel { nodes: zg, weights: wg }) => {
            // <K_zeta, K_eta> = K_zeta(eta) = exp(alpha conj(zeta) eta)
            let mut terms = Vec::with_capacity(zf.len() * zg.len());
            for (zj, wj) in zf.iter().zip(wf) {
                for (zk, wk) in zg.iter().zip(wg) {
                    let coef = LogComplex::from_complex(wj * wk.conj());
                    terms.push(coef.mul_exp(a * zj.conj() * zk));
                }
            }
            log_sum(&terms)
        }
        (Monomial { .. }, Kernel { nodes, weights }) => {
            // <p, K_eta> = p(eta)
            let terms: Vec<LogComplex> = nodes
                .iter()
                .zip(weights)
                .map(|(eta, w)| f.eval_log(*eta) * LogComplex::from_complex(w.conj()))
                .collect();
            log_sum(&terms)
        }
        (Kernel { .. }, Monomial { .. }) => inner_log(g, f)?.conj(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, PI};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn alpha(a: f64) -> FockParameter {
        FockParameter::new(a).unwrap()
    }

    #[test]
    fn alpha_must_be_positive() {
        assert!(FockParameter::new(0.0).is_err());
        assert!(FockParameter::new(-1.0).is_err());
        assert!(FockParameter::new(f64::NAN).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel(alpha(1.0), c(3.0, -2.0), c(0.0, 0.0)).unwrap(), c(1.0, 0.0));
        assert!((kernel(alpha(1.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap() - E).norm() < 1e-15);
        // conj(i) * i = 1
        let k = kernel(alpha(PI), c(0.0, 1.0), c(0.0, 1.0)).unwrap();
        assert!((k - c(PI.exp(), 0.0)).norm() < 1e-12);
        assert!((k.re - 23.140_692_632_779_27).abs() < 1e-9);
    }

    #[test]
    fn kernel_overflow() {
        let r = kernel(alpha(1.0), c(30.0, 0.0), c(30.0, 0.0));
        assert!(matches!(r, Err(FockError::Overflow { .. })));
        assert!((kernel_log(alpha(1.0), c(30.0, 0.0), c(30.0, 0.0)).log_mag - 900.0).abs() < 1e-12);
    }

    #[test]
    fn eval_weighted_examples() {
        let one = FockFunction::monomial(alpha(1.0), vec![c(1.0, 0.0)]).unwrap();
        assert_eq!(one.eval_weighted(c(0.0, 0.0)).unwrap(), c(1.0, 0.0));

        let k = FockFunction::kernel_at(alpha(1.0), c(2.0, 0.0)).unwrap();
        let v = k.eval_weighted(c(2.0, 0.0)).unwrap();
        assert!((v.re - 2f64.exp()).abs() < 1e-12 && v.im.abs() < 1e-12);

        let e1 = FockFunction::basis(alpha(1.0), 1);
        let v = e1.eval_weighted(c(10.0, 0.0)).unwrap();
        let expect = 10.0 * (-50f64).exp();
        assert!((v.re - expect).abs() < 1e-12 * expect);
        assert!((expect - 1.928_749_847_963_917_8e-21).abs() < 1e-33);
    }

    #[test]
    fn eval_weighted_survives_large_arguments() {
        let coeffs: Vec<Complex> = (0..=60).map(|n| c(1.0, (n as f64).sin())).collect();
        let f = FockFunction::monomial(alpha(4.0), coeffs).unwrap();
        for z in [c(50.0, 0.0), c(-35.0, 35.0), c(0.0, -49.9), c(1e-3, 0.0)] {
            let v = f.eval_weighted(z).unwrap();
            assert!(v.re.is_finite() && v.im.is_finite());
        }
    }

    #[test]
    fn norm2_examples() {
        assert_eq!(FockFunction::basis(alpha(2.0), 2).norm2().unwrap(), 1.0);
        let f = FockFunction::monomial(alpha(1.0), vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((f.norm2().unwrap() - 5.0).abs() < 1e-15);
        let zeta = c(1.5, -0.5);
        let k = FockFunction::kernel_at(alpha(1.3), zeta).unwrap();
        let expect = (0.5 * 1.3 * zeta.norm_sqr()).exp();
        assert!((k.norm2().unwrap() - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn kernel_norm_matches_monomial_expansion() {
        // K(., zeta) = sum_n sqrt(alpha^n / n!) conj(zeta)^n e_n
        let a = 0.7;
        let nodes = vec![c(0.4, 0.3), c(-1.1, 0.2), c(0.0, -0.9)];
        let weights = vec![c(1.0, -0.5), c(0.3, 0.2), c(-0.7, 0.0)];
        let f = FockFunction::kernel_combo(alpha(a), nodes.clone(), weights.clone()).unwrap();
        let lnf = ln_factorials(80);
        let mut coeffs = vec![c(0.0, 0.0); 80];
        for (z, w) in nodes.iter().zip(&weights) {
            for (n, cn) in coeffs.iter_mut().enumerate() {
                let scale = (0.5 * (n as f64 * a.ln() - lnf[n])).exp();
                *cn += w * z.conj().powu(n as u32) * scale;
            }
        }
        let p = FockFunction::monomial(alpha(a), coeffs).unwrap();
        assert!((f.norm2().unwrap() - p.norm2().unwrap()).abs() < 1e-12);
        let z = c(0.3, -0.8);
        assert!((f.eval(z).unwrap() - p.eval(z).unwrap()).norm() < 1e-12);
        // mixed inner products agree with the monomial-monomial branch
        let g = FockFunction::basis(alpha(a), 3);
        assert!((f.inner(&g).unwrap() - p.inner(&g).unwrap()).norm() < 1e-12);
        assert!((g.inner(&f).unwrap() - g.inner(&p).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn norm_inf_examples() {
        let one = FockFunction::monomial(alpha(1.0), vec![c(1.0, 0.0)]).unwrap();
        let s = one.norm_inf(1.0, 0.05).unwrap();
        assert_eq!(s.value, 1.0);

        let e1 = FockFunction::basis(alpha(1.0), 1);
        let s = e1.norm_inf(3.0, 0.05).unwrap();
        let exact = (-0.5f64).exp();
        assert!(s.value <= exact + 1e-15);
        assert!(exact - s.value < 1e-4, "{}", s.value);

        let k0 = FockFunction::kernel_at(alpha(1.0), c(0.0, 0.0)).unwrap();
        assert_eq!(k0.norm_inf(2.0, 0.1).unwrap().value, 1.0);
    }

    #[test]
    fn norm_inf_refines_monotonically() {
        let e1 = FockFunction::basis(alpha(1.0), 1);
        let mut last = 0.0;
        for step in [0.4, 0.2, 0.1, 0.05, 0.025] {
            let v = e1.norm_inf(3.0, step).unwrap().value;
            assert!(v >= last, "step {step}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn norm_inf_rejects_small_radius() {
        let e4 = FockFunction::basis(alpha(1.0), 4);
        assert!(matches!(e4.norm_inf(2.0, 0.1), Err(FockError::RadiusTooSmall { .. })));
    }

    #[test]
    fn translate_examples() {
        let a = alpha(1.0);
        let f = FockFunction::kernel_combo(a, vec![c(0.5, 0.1), c(-0.3, 0.7)], vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
        assert_eq!(f.translate(c(0.0, 0.0)).unwrap(), f);

        let shift = c(1.2, -0.4);
        let k0 = FockFunction::kernel_at(a, c(0.0, 0.0)).unwrap();
        let t = k0.translate(shift).unwrap();
        match t.repr() {
            Representation::Kernel { nodes, weights } => {
                assert_eq!(nodes[0], shift);
                assert!((weights[0].re - (-0.5 * shift.norm_sqr()).exp()).abs() < 1e-15);
            }
            _ => unreachable!(),
        }
        assert!((t.norm2().unwrap() - 1.0).abs() < 1e-12);

        let back = f.translate(shift).unwrap().translate(-shift).unwrap();
        for z in [c(0.0, 0.0), c(1.0, 1.0), c(-2.0, 0.5)] {
            let d = back.eval_weighted(z).unwrap().norm() - f.eval_weighted(z).unwrap().norm();
            assert!(d.abs() < 1e-10);
        }
        let mono = FockFunction::basis(a, 2);
        assert!(matches!(
            mono.translate(shift),
            Err(FockError::UnsupportedRepresentation(_))
        ));
    }

    #[test]
    fn inner_examples() {
        let a = alpha(1.0);
        assert_eq!(
            FockFunction::basis(a, 2).inner(&FockFunction::basis(a, 2)).unwrap(),
            c(1.0, 0.0)
        );
        assert_eq!(
            FockFunction::basis(a, 2).inner(&FockFunction::basis(a, 3)).unwrap(),
            c(0.0, 0.0)
        );
        let f = FockFunction::monomial(a, vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let kz = FockFunction::kernel_at(a, c(0.5, 0.0)).unwrap();
        assert!((f.inner(&kz).unwrap() - c(2.0, 0.0)).norm() < 1e-14);
        let n = f.norm2().unwrap();
        assert!((f.inner(&f).unwrap().re - n * n).abs() < 1e-14);

        let other = FockFunction::basis(alpha(2.0), 0);
        assert!(matches!(f.inner(&other), Err(FockError::AlphaMismatch(..))));
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let r = FockFunction::kernel_combo(alpha(1.0), vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0); 2]);
        assert!(matches!(r, Err(FockError::DuplicatePoint(..))));
    }
}
