//! Reconstruction from samples and the explicit interpolation formula.
//!
//! For `Gamma` uniformly close to a square lattice of density `beta/pi` with
//! canonical product `g`:
//!
//! * if `beta > alpha`, every `f` in the space is recovered from its samples by
//!   `f(z) = sum_p f(z_p) g(z) / (g'(z_p) (z - z_p))`;
//! * if `beta < alpha`, the weighted data `exp(-alpha|z_p|^2/2) f(z_p) = a_p` is
//!   attained by
//!   `f(z) = sum_p b_p exp(alpha conj(z_p) z - alpha|z_p|^2) g_p(z - z_p)/(z - z_p)`
//!   with `b_p = a_p exp(alpha|z_p|^2/2)` and `g_p` the product of `Gamma - z_p`.
//!
//! Both series are truncated to the nodes in a disk of radius
//! `truncation_radius` around the origin.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{CanonicalProduct, DEFAULT_TRUNCATION};
use crate::complex::{ln_factorials, log_sum, Complex, LogComplex};
use crate::error::{FockError, Result};
use crate::pointsets::{PointSet, SquareLattice};
use crate::space::FockParameter;

const ORIGIN: (i64, i64) = (0, 0);

/// Relative band around `beta = alpha` treated as the critical density.
pub const CRITICAL_BAND: f64 = 1e-12;

fn is_below(beta: f64, alpha: f64) -> bool {
    beta < alpha * (1.0 - CRITICAL_BAND)
}

fn is_above(beta: f64, alpha: f64) -> bool {
    beta > alpha * (1.0 + CRITICAL_BAND)
}

fn check_radius(gamma: &PointSet, truncation_radius: f64) -> Result<()> {
    if !(truncation_radius.is_finite() && truncation_radius > 0.0) {
        return Err(FockError::invalid("truncation_radius", "must be positive"));
    }
    if truncation_radius > gamma.window_radius() {
        return Err(FockError::invalid(
            "truncation_radius",
            format!(
                "{truncation_radius} exceeds the window radius {}",
                gamma.window_radius()
            ),
        ));
    }
    Ok(())
}

/// Lagrange-type reconstruction with the canonical product and its
/// derivatives at the nodes cached.
#[derive(Debug, Clone)]
pub struct LagrangeReconstructor {
    product: CanonicalProduct,
    truncation_radius: f64,
    /// `(z_p, index, f(z_p) / g'(z_p))` for the nodes within the radius.
    terms: Vec<(Complex, (i64, i64), LogComplex)>,
    samples: BTreeMap<(i64, i64), Complex>,
}

impl LagrangeReconstructor {
    /// Requires `beta > alpha` and a sample for every node with
    /// `|z_p| <= truncation_radius`; samples are keyed by lattice index.
    pub fn new(
        gamma: &PointSet,
        lattice: &SquareLattice,
        alpha: FockParameter,
        samples: &BTreeMap<(i64, i64), Complex>,
        truncation_radius: f64,
    ) -> Result<Self> {
        if !is_above(lattice.beta(), alpha.value()) {
            return Err(FockError::DensityOrderViolated {
                alpha: alpha.value(),
                beta: lattice.beta(),
            });
        }
        check_radius(gamma, truncation_radius)?;
        let product = CanonicalProduct::new(gamma, lattice, DEFAULT_TRUNCATION)?;
        let inside: Vec<(Complex, (i64, i64))> =
            product.nodes().filter(|(z, _)| z.norm() <= truncation_radius).collect();
        let terms = inside
            .par_iter()
            .map(|&(z, p)| {
                let f = samples.get(&p).ok_or(FockError::MissingSamples(p.0, p.1))?;
                let d = product.derivative_log(p)?;
                Ok((z, p, LogComplex::from_complex(*f) / d))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LagrangeReconstructor {
            product,
            truncation_radius,
            terms,
            samples: samples.clone(),
        })
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// The partial sum in log form. On a node the sample is returned.
    pub fn eval_log(&self, z: Complex) -> Result<LogComplex> {
        if !(z.norm() < 0.5 * self.truncation_radius) {
            return Err(FockError::invalid(
                "z",
                format!(
                    "must lie strictly inside half the truncation radius {}",
                    self.truncation_radius
                ),
            ));
        }
        if let Some(&(_, p, _)) = self.terms.iter().find(|t| t.0 == z) {
            return Ok(LogComplex::from_complex(self.samples[&p]));
        }
        let g = self.product.log(z)?;
        let terms: Vec<LogComplex> = self
            .terms
            .iter()
            .map(|&(zp, _, c)| c * g / LogComplex::from_complex(z - zp))
            .collect();
        Ok(log_sum(&terms))
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        if let Some(&(_, p, _)) = self.terms.iter().find(|t| t.0 == z) {
            return Ok(self.samples[&p]);
        }
        self.eval_log(z)?.to_complex()
    }
}

/// `f(z)` from the samples of `f` on `gamma` (see [`LagrangeReconstructor`]).
pub fn lagrange_reconstruct(
    gamma: &PointSet,
    lattice: &SquareLattice,
    alpha: FockParameter,
    samples: &BTreeMap<(i64, i64), Complex>,
    z: Complex,
    truncation_radius: f64,
) -> Result<Complex> {
    LagrangeReconstructor::new(gamma, lattice, alpha, samples, truncation_radius)?.eval(z)
}

/// Weighted interpolation data on an indexed point set.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationProblem {
    gamma: PointSet,
    lattice: SquareLattice,
    alpha: FockParameter,
    /// `data[i]` is the target for `exp(-alpha|z_i|^2/2) f(z_i)`, `z_i` the
    /// i-th point of `gamma`.
    data: Vec<Complex>,
}

impl InterpolationProblem {
    pub fn new(gamma: PointSet, lattice: SquareLattice, alpha: FockParameter, data: Vec<Complex>) -> Result<Self> {
        if gamma.lattice_index().is_none() {
            return Err(FockError::MissingLatticeIndex);
        }
        if data.len() != gamma.len() {
            return Err(FockError::invalid(
                "data",
                format!("{} values for {} nodes", data.len(), gamma.len()),
            ));
        }
        if !data.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
            return Err(FockError::invalid("data", "non-finite value"));
        }
        Ok(InterpolationProblem {
            gamma,
            lattice,
            alpha,
            data,
        })
    }

    pub fn gamma(&self) -> &PointSet {
        &self.gamma
    }

    pub fn lattice(&self) -> &SquareLattice {
        &self.lattice
    }

    pub fn alpha(&self) -> FockParameter {
        self.alpha
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    /// The same nodes with other data.
    pub fn with_data(&self, data: Vec<Complex>) -> Result<Self> {
        Self::new(self.gamma.clone(), self.lattice, self.alpha, data)
    }

    /// `l^2` norm of the supplied data.
    pub fn data_l2(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `sup |a|` of the supplied data.
    pub fn data_sup(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

/// One term of the interpolation series.
#[derive(Debug, Clone)]
struct Term {
    node: Complex,
    index: (i64, i64),
    data: Complex,
    product: CanonicalProduct,
}

/// The truncated interpolation series with the translated products cached.
#[derive(Debug, Clone)]
pub struct InterpolantEvaluator {
    problem: InterpolationProblem,
    truncation_radius: f64,
    terms: Vec<Term>,
}

/// Build the evaluator; requires `beta < alpha`.
pub fn build_interpolant(problem: &InterpolationProblem, truncation_radius: f64) -> Result<InterpolantEvaluator> {
    let alpha = problem.alpha.value();
    let beta = problem.lattice.beta();
    if !is_below(beta, alpha) {
        return Err(FockError::DensityOrderViolated { alpha, beta });
    }
    check_radius(&problem.gamma, truncation_radius)?;
    let base = CanonicalProduct::new(&problem.gamma, &problem.lattice, DEFAULT_TRUNCATION)?;
    let index = problem.gamma.lattice_index().expect("checked on construction");
    let selected: Vec<(Complex, (i64, i64), Complex)> = problem
        .gamma
        .points()
        .iter()
        .zip(index)
        .zip(&problem.data)
        .filter(|((z, _), a)| z.norm() <= truncation_radius && **a != Complex::new(0.0, 0.0))
        .map(|((z, p), a)| (*z, *p, *a))
        .collect();
    let terms = selected
        .par_iter()
        .map(|&(node, index, data)| {
            let product = base.translated(index)?;
            Ok(Term {
                node,
                index,
                data,
                product,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolantEvaluator {
        problem: problem.clone(),
        truncation_radius,
        terms,
    })
}

impl InterpolantEvaluator {
    pub fn problem(&self) -> &InterpolationProblem {
        &self.problem
    }

    pub fn truncation_radius(&self) -> f64 {
        self.truncation_radius
    }

    /// Number of series terms (nodes with nonzero data inside the radius).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `exp(-alpha|z|^2/2) b_p exp(alpha conj(z_p) z - alpha|z_p|^2) g_p(w)/w`
    /// per unit data, `w = z - z_p`. The Gaussian factors combine into
    /// `exp(-alpha|w|^2/2 + i alpha Im(conj(z_p) z))`.
    fn unit_term(&self, t: &Term, z: Complex) -> Result<Complex> {
        let a = self.problem.alpha.value();
        let w = z - t.node;
        let ratio = t.product.log_value(w, Some(ORIGIN))?;
        let gauss = Complex::new(-0.5 * a * w.norm_sqr(), a * (t.node.conj() * z).im);
        ratio.mul_exp(gauss).to_complex()
    }

    /// `exp(-alpha|z|^2/2) f(z)`.
    pub fn eval_weighted(&self, z: Complex) -> Result<Complex> {
        let mut acc = Complex::new(0.0, 0.0);
        for t in &self.terms {
            acc += t.data * self.unit_term(t, z)?;
        }
        Ok(acc)
    }

    /// `f(z)` in log form.
    pub fn eval_log(&self, z: Complex) -> Result<LogComplex> {
        let w = self.eval_weighted(z)?;
        Ok(LogComplex::from_complex(w).mul_exp(Complex::new(0.5 * self.problem.alpha.value() * z.norm_sqr(), 0.0)))
    }

    /// `f(z)`; fails with `Overflow` where the value leaves `f64`.
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        self.eval_log(z)?.to_complex()
    }

    /// Weighted values on many points, in parallel.
    pub fn eval_weighted_many(&self, points: &[Complex]) -> Result<Vec<Complex>> {
        points.par_iter().map(|&z| self.eval_weighted(z)).collect()
    }

    /// `sum_p |unit term_p(z)|`, the Lebesgue function of the series.
    pub fn lebesgue(&self, z: Complex) -> Result<f64> {
        let mut acc = 0.0;
        for t in &self.terms {
            acc += self.unit_term(t, z)?.norm();
        }
        Ok(acc)
    }

    /// `|a_p - (own term at z_p)|` relative to `|a_p|`, maximised over terms:
    /// the own term of each node reproduces its datum.
    pub fn node_identity_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in &self.terms {
            let own = t.data * self.unit_term(t, t.node)?;
            worst = worst.max((own - t.data).norm() / t.data.norm());
        }
        Ok(worst)
    }

    /// Indices of the nodes carrying series terms.
    pub fn term_indices(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        self.terms.iter().map(|t| t.index)
    }
}

/// Max of `|exp(-alpha|z_p|^2/2) f(z_p) - a_p|` over the nodes with
/// `|z_p| <= truncation_radius / 2`.
pub fn residual_check(ev: &InterpolantEvaluator) -> Result<f64> {
    let half = 0.5 * ev.truncation_radius;
    let gamma = &ev.problem.gamma;
    let residuals = gamma
        .points()
        .par_iter()
        .zip(&ev.problem.data)
        .filter(|(z, _)| z.norm() <= half)
        .map(|(&z, &a)| Ok((ev.eval_weighted(z)? - a).norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(residuals.into_iter().fold(0.0, f64::max))
}

/// Largest weighted difference between two evaluators on the grid of step
/// `step` inside the disk of radius `radius`; measures truncation between
/// nodes, where the node residual vanishes by construction.
pub fn truncation_difference(
    a: &InterpolantEvaluator,
    b: &InterpolantEvaluator,
    radius: f64,
    step: f64,
) -> Result<f64> {
    let pts = disk_grid(radius, step)?;
    let va = a.eval_weighted_many(&pts)?;
    let vb = b.eval_weighted_many(&pts)?;
    Ok(va.iter().zip(&vb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

fn disk_grid(radius: f64, step: f64) -> Result<Vec<Complex>> {
    if !(step.is_finite() && step > 0.0) {
        return Err(FockError::invalid("grid_step", "must be positive"));
    }
    let k = (radius / step).floor() as i64;
    Ok((-k..=k)
        .flat_map(|iy| (-k..=k).map(move |ix| Complex::new(ix as f64 * step, iy as f64 * step)))
        .filter(|z| z.norm() <= radius)
        .collect())
}

/// Bound `|exp(-alpha|z|^2/2) f(z)| <= (1 + sup|a|) C` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseBound {
    /// Max of the Lebesgue function over the grid.
    #[serde(rename = "C")]
    pub c: f64,
    pub sup_data: f64,
    pub max_weighted: f64,
    pub radius: f64,
    pub grid_step: f64,
    pub holds: bool,
}

/// Check the pointwise bound on the grid of step `grid_step` inside half the
/// truncation radius.
pub fn pointwise_bound(ev: &InterpolantEvaluator, grid_step: f64) -> Result<PointwiseBound> {
    let radius = 0.5 * ev.truncation_radius;
    let pts = disk_grid(radius, grid_step)?;
    let pairs = pts
        .par_iter()
        .map(|&z| Ok((ev.lebesgue(z)?, ev.eval_weighted(z)?.norm())))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let c = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_weighted = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let sup_data = ev.problem.data_sup();
    let holds = pairs.iter().all(|p| p.0.is_finite() && p.1.is_finite())
        && max_weighted <= (1.0 + sup_data) * c * (1.0 + 1e-12);
    Ok(PointwiseBound {
        c,
        sup_data,
        max_weighted,
        radius,
        grid_step,
        holds,
    })
}

/// Norm comparison for one interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormGrowth {
    pub data_l2: f64,
    /// `||P_N f||`, the norm of the projection onto `span{e_0..e_N}`.
    pub norm2: f64,
    /// `norm2 / data_l2`; `None` for zero data.
    pub ratio: Option<f64>,
    pub degree: usize,
}

/// `(l^2 norm of the data, ||P_N f||)` with `P_N` the orthogonal projection
/// onto `span{e_0..e_N}`.
///
/// The coefficients `<f, e_n>` are the Taylor coefficients of `f` scaled by
/// `sqrt(n!/alpha^n)`, computed by the trapezoid rule on circles. Degrees
/// `m <= n < 2m` share the circle `alpha r^2 = m`, where the rounding error
/// relative to the coefficient scale grows only like `m^{1/4}`.
pub fn norm_growth_report(ev: &InterpolantEvaluator, degree: usize) -> Result<NormGrowth> {
    let data_l2 = ev.problem.data_l2();
    if ev.is_empty() {
        return Ok(NormGrowth {
            data_l2,
            norm2: 0.0,
            ratio: None,
            degree,
        });
    }
    let a = ev.problem.alpha.value();
    let lnfact = ln_factorials(degree);
    let mut sq = 0.0;
    let mut m = 1;
    let mut lo = 0;
    while lo <= degree {
        let hi = (2 * m).min(degree + 1);
        let r = (m as f64 / a).sqrt();
        // aliasing from degree n + p is negligible once p >> m
        let p = (8 * m).max(64);
        let values = (0..p)
            .into_par_iter()
            .map(|j| ev.eval_log(Complex::from_polar(r, 2.0 * PI * j as f64 / p as f64)))
            .collect::<Result<Vec<LogComplex>>>()?;
        for (n, &lnfact_n) in lnfact.iter().enumerate().take(hi).skip(lo) {
            let nf = n as f64;
            // a_n r^n = (1/p) sum_j f(r w^j) w^{-jn}
            let terms: Vec<LogComplex> = values
                .iter()
                .enumerate()
                .map(|(j, v)| v.mul_exp(Complex::new(0.0, -2.0 * PI * (j * n % p) as f64 / p as f64)))
                .collect();
            let log_scale = -(p as f64).ln() - nf * r.ln() + 0.5 * (lnfact_n - nf * a.ln());
            let c = log_sum(&terms).mul_exp(Complex::new(log_scale, 0.0));
            sq += c.to_complex()?.norm_sqr();
        }
        lo = hi;
        m *= 2;
    }
    let norm2 = sq.sqrt();
    Ok(NormGrowth {
        data_l2,
        norm2,
        ratio: (data_l2 > 0.0).then(|| norm2 / data_l2),
        degree,
    })
}

/// `n` data values drawn uniformly from the closed unit disk.
pub fn random_bounded_data(n: usize, seed: u64) -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let v: f64 = rng.random();
            Complex::from_polar(u.sqrt(), 2.0 * PI * v)
        })
        .collect()
}
