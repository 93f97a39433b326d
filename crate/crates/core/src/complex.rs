//! Complex scalars and the overflow-safe polar log representation.

use std::f64::consts::{PI, TAU};
use std::ops::{Div, Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};

pub type Complex = num_complex::Complex64;

/// Largest exponent routed through plain `f64` arithmetic.
pub const EXP_OVERFLOW: f64 = 700.0;
/// Exponents at or below this underflow to an exact zero.
pub const EXP_UNDERFLOW: f64 = -745.0;

/// Reduce an angle to `(-pi, pi]`.
pub fn reduce_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// A complex number stored as `exp(log_mag + i*phase)`.
///
/// `log_mag = -inf` encodes an exact zero. The phase is kept in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub log_mag: f64,
    pub phase: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        log_mag: f64::NEG_INFINITY,
        phase: 0.0,
    };
    pub const ONE: LogComplex = LogComplex {
        log_mag: 0.0,
        phase: 0.0,
    };

    pub fn new(log_mag: f64, phase: f64) -> Self {
        if log_mag == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        LogComplex {
            log_mag,
            phase: reduce_phase(phase),
        }
    }

    /// `exp(w)` without evaluating the exponential.
    pub fn exp(w: Complex) -> Self {
        Self::new(w.re, w.im)
    }

    pub fn from_complex(z: Complex) -> Self {
        if z.re == 0.0 && z.im == 0.0 {
            return Self::ZERO;
        }
        Self::new(z.re.hypot(z.im).ln(), z.im.atan2(z.re))
    }

    pub fn from_real(x: f64) -> Self {
        Self::from_complex(Complex::new(x, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.log_mag == f64::NEG_INFINITY
    }

    /// The principal logarithm `log_mag + i*phase`.
    pub fn ln(&self) -> Complex {
        Complex::new(self.log_mag, self.phase)
    }

    pub fn abs(&self) -> f64 {
        self.log_mag.exp()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.log_mag, -self.phase)
    }

    pub fn powi(&self, n: i32) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::ONE } else { Self::ZERO };
        }
        Self::new(self.log_mag * n as f64, self.phase * n as f64)
    }

    /// Multiply by `exp(w)`.
    pub fn mul_exp(&self, w: Complex) -> Self {
        if self.is_zero() {
            return *self;
        }
        Self::new(self.log_mag + w.re, self.phase + w.im)
    }

    /// Convert to a plain complex number, failing on overflow.
    pub fn to_complex(&self) -> Result<Complex> {
        if self.log_mag >= EXP_OVERFLOW {
            return Err(FockError::Overflow { log_mag: self.log_mag });
        }
        Ok(self.to_complex_unchecked())
    }

    fn to_complex_unchecked(self) -> Complex {
        if self.log_mag <= EXP_UNDERFLOW {
            return Complex::new(0.0, 0.0);
        }
        Complex::from_polar(self.log_mag.exp(), self.phase)
    }

    /// `self * exp(-log_scale)` as a plain complex number.
    pub fn scaled(&self, log_scale: f64) -> Complex {
        LogComplex {
            log_mag: self.log_mag - log_scale,
            phase: self.phase,
        }
        .to_complex_unchecked()
    }
}

impl Mul for LogComplex {
    type Output = LogComplex;
    fn mul(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() || rhs.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag + rhs.log_mag, self.phase + rhs.phase)
    }
}

impl Div for LogComplex {
    type Output = LogComplex;
    /// Division by an exact zero yields `log_mag = +inf`.
    fn div(self, rhs: LogComplex) -> LogComplex {
        if self.is_zero() {
            return LogComplex::ZERO;
        }
        LogComplex::new(self.log_mag - rhs.log_mag, self.phase - rhs.phase)
    }
}

impl Neg for LogComplex {
    type Output = LogComplex;
    fn neg(self) -> LogComplex {
        if self.is_zero() {
            return self;
        }
        LogComplex::new(self.log_mag, self.phase + PI)
    }
}

/// Sum of log-domain terms, scaled by the largest magnitude.
///
/// Terms are accumulated in slice order, so the result is reproducible.
pub fn log_sum(terms: &[LogComplex]) -> LogComplex {
    let max = terms.iter().map(|t| t.log_mag).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return LogComplex::ZERO;
    }
    if !max.is_finite() {
        return LogComplex::new(max, 0.0);
    }
    let sum: Complex = terms.iter().map(|t| t.scaled(max)).sum();
    let s = LogComplex::from_complex(sum);
    if s.is_zero() {
        return s;
    }
    LogComplex::new(s.log_mag + max, s.phase)
}

/// `ln(1 - u)` accurate for small `|u|`.
pub fn ln_1m(u: Complex) -> Complex {
    let one_minus = Complex::new(1.0 - u.re, -u.im);
    // |1-u|^2 = 1 - 2 Re u + |u|^2
    let t = -2.0 * u.re + u.norm_sqr();
    Complex::new(0.5 * t.ln_1p(), one_minus.im.atan2(one_minus.re))
}

/// `ln(1 - u) + u + u^2/2`, the regularized Weierstrass remainder.
pub fn weierstrass_remainder(u: Complex) -> Complex {
    if u.norm_sqr() < 0.25 {
        // -sum_{k>=3} u^k / k
        let mut pow = u * u * u;
        let mut acc = Complex::new(0.0, 0.0);
        for k in 3..200 {
            let term = pow / k as f64;
            acc -= term;
            if term.norm_sqr() < 1e-36 * acc.norm_sqr().max(1e-300) {
                break;
            }
            pow *= u;
        }
        acc
    } else {
        ln_1m(u) + u + 0.5 * u * u
    }
}

/// `ln(n!)` for all `n <= max`, by cumulative summation.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=max {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}
