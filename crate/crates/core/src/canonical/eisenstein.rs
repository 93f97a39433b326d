//! Lattice sums over the Gaussian integers and the tail of the truncated
//! sigma product.
//!
//! For the unit square lattice `Z[i]` and a box `|m|, |n| <= M`, the factors
//! left out of the truncated product contribute
//!
//! ```text
//! sum_{|lambda|_inf > M} [ln(1 - v/lambda) + v/lambda + v^2/(2 lambda^2)]
//!     = -sum_{j >= 1} v^{4j} T_{4j}(M) / (4j),
//! T_k(M) = sum_{|lambda|_inf > M} lambda^{-k},
//! ```
//!
//! where only powers divisible by four survive the rotation symmetry. The
//! outer sums decay only algebraically in `M`, so the correction is applied
//! rather than relying on a large box.

use std::f64::consts::PI;

use crate::complex::Complex;
use crate::error::{FockError, Result};

/// Tolerance on the estimated remainder of the tail expansion.
pub const TAIL_TOLERANCE: f64 = 1e-12;

const J_MAX: usize = 40;

/// Riemann zeta for real `s > 1` (Euler-Maclaurin, 20 terms + 6 corrections).
pub fn zeta(s: f64) -> f64 {
    const N: usize = 20;
    // B_2 .. B_12
    const BERNOULLI: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|n| (n as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // B_{2k}/(2k)! * s (s+1) ... (s+2k-2) N^{-s-2k+1}
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        sum += b / fact * rising * nf.powf(-s - two_k + 1.0);
        rising *= (s + two_k - 1.0) * (s + two_k);
        fact *= (two_k + 1.0) * (two_k + 2.0);
    }
    sum
}

/// `G_{2k}(i) = sum_{lambda in Z[i] \ 0} lambda^{-2k}` from the q-expansion
/// `2 zeta(2k) + 2 (2 pi i)^{2k} / (2k-1)! sum sigma_{2k-1}(n) q^n`, `q = e^{-2 pi}`.
pub fn eisenstein_gaussian(two_k: u32) -> f64 {
    assert!(
        two_k >= 4 && two_k.is_multiple_of(2),
        "weight must be even and at least 4"
    );
    let k = two_k / 2;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut log_pref = two_k as f64 * (2.0 * PI).ln();
    for j in 2..two_k {
        log_pref -= (j as f64).ln();
    }
    let mut series = 0.0;
    for n in 1..=80u32 {
        let divisor_sum: f64 = (1..=n)
            .filter(|d| n % d == 0)
            .map(|d| (d as f64).powi(two_k as i32 - 1))
            .sum();
        series += divisor_sum * (-2.0 * PI * n as f64).exp();
    }
    2.0 * zeta(two_k as f64) + 2.0 * sign * log_pref.exp() * series
}

/// Compensated (Neumaier) summation.
#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Orbit representatives of `Z[i] \ 0` under rotation by `i` with
/// `max(m, n)` in `(lo, hi]`: `m >= 1, n >= 0`.
fn reps(lo: usize, hi: usize) -> impl Iterator<Item = Complex> {
    (1..=hi as i64).flat_map(move |m| {
        (0..=hi as i64)
            .filter(move |&n| m.max(n) as usize > lo)
            .map(move |n| Complex::new(m as f64, n as f64))
    })
}

/// Outer lattice sums `T_{4j}(M)` for the unit square lattice.
#[derive(Debug, Clone)]
pub struct TailSeries {
    m: usize,
    /// `t[j - 1] = T_{4j}(M)`; all real by conjugation symmetry.
    t: Vec<f64>,
    /// Outer radius of the direct shell sums used for `j >= 3`.
    outer: usize,
}

impl TailSeries {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "truncation index must be at least 1");
        let outer = 4 * m + 40;
        let mut t = vec![0.0; J_MAX];
        // j = 1, 2: full sum minus the box, accurate because T is O(M^-2)
        for (j, slot) in t.iter_mut().enumerate().take(2) {
            let weight = 4 * (j as u32 + 1);
            let mut acc = Neumaier::default();
            for lam in reps(0, m) {
                let w = lam.inv().powu(weight);
                acc.add(4.0 * w.re);
            }
            *slot = eisenstein_gaussian(weight) - acc.value();
        }
        // j >= 3: direct shells, the sums are dominated by the first shell
        let mut sums = vec![0.0; J_MAX];
        for lam in reps(m, outer) {
            let w4 = lam.inv().powu(4);
            let mut p = w4 * w4;
            for s in sums.iter_mut().skip(2) {
                p *= w4;
                *s += 4.0 * p.re;
            }
        }
        t[2..].copy_from_slice(&sums[2..]);
        TailSeries { m, t, outer }
    }

    pub fn truncation_index(&self) -> usize {
        self.m
    }

    /// `T_{4j}(M)` for `j >= 1`.
    pub fn outer_sum(&self, j: usize) -> f64 {
        self.t[j - 1]
    }

    /// Upper bound for `sum_{|lambda|_inf > R} |lambda|^{-k}`, `k >= 3`.
    fn abs_tail_bound(r: usize, k: usize) -> f64 {
        // shell at sup-radius q holds 8q points of modulus >= q
        let r1 = (r + 1) as f64;
        let kf = k as f64;
        8.0 * r1.powf(2.0 - kf) * (1.0 / r1 + 1.0 / (kf - 2.0))
    }

    /// The log-correction `-sum_j v^{4j} T_{4j}(M)/(4j)` for `v` in unit
    /// lattice coordinates.
    pub fn correction(&self, v: Complex) -> Result<Complex> {
        let r = v.norm();
        let m1 = (self.m + 1) as f64;
        if r >= 0.9 * m1 {
            return Err(FockError::TruncationTooSmall {
                m: self.m,
                remainder: f64::INFINITY,
            });
        }
        let v4 = v.powu(4);
        let mut pow = Complex::new(1.0, 0.0);
        let mut acc = Complex::new(0.0, 0.0);
        let r4 = r.powi(4);
        let mut rpow = 1.0;
        // remainder: neglected outer shells for j >= 3 plus the j-truncation
        let mut remainder = 0.0;
        let mut used = 0;
        for j in 1..=J_MAX {
            pow *= v4;
            rpow *= r4;
            acc -= pow * (self.t[j - 1] / (4 * j) as f64);
            if j >= 3 {
                remainder += rpow * Self::abs_tail_bound(self.outer, 4 * j) / (4 * j) as f64;
            }
            used = j;
            let next = rpow * r4 * Self::abs_tail_bound(self.m, 4 * (j + 1)) / (4 * (j + 1)) as f64;
            if next < 1e-20 {
                break;
            }
        }
        if used == J_MAX {
            let r = r4.powi(J_MAX as i32 + 1) * Self::abs_tail_bound(self.m, 4 * (J_MAX + 1));
            remainder += r / (4 * (J_MAX + 1)) as f64;
        }
        if !(remainder <= TAIL_TOLERANCE) {
            return Err(FockError::TruncationTooSmall { m: self.m, remainder });
        }
        Ok(acc)
    }
}
