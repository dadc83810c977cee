//! Truncated Taylor-series (jet) arithmetic over complex numbers.
//!
//! A [`Jet`] of order `n` at a point `x0` stores the Taylor coefficients
//! `c[k] = f^(k)(x0) / k!` for `k = 0..=n`. Arithmetic on jets propagates
//! derivatives exactly (to rounding), which is what lets operator
//! coefficients and closed-form profiles be differentiated without any
//! finite-difference error.

#![allow(clippy::needless_range_loop)] // convolution windows read both ends

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Truncated Taylor expansion; `c[k]` is the k-th Taylor coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub c: Vec<Complex64>,
}

impl Jet {
    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut c = vec![Complex64::ZERO; order + 1];
        c[0] = value;
        Jet { c }
    }

    /// The identity function `x` expanded at `x0`.
    pub fn variable(x0: Complex64, order: usize) -> Self {
        let mut c = vec![Complex64::ZERO; order + 1];
        c[0] = x0;
        if order >= 1 {
            c[1] = Complex64::ONE;
        }
        Jet { c }
    }

    /// Value of the underlying function at the expansion point.
    pub fn value(&self) -> Complex64 {
        self.c[0]
    }

    /// k-th derivative at the expansion point (`c[k] * k!`).
    pub fn derivative(&self, k: usize) -> Complex64 {
        let mut fact = 1.0;
        for i in 2..=k {
            fact *= i as f64;
        }
        self.c[k] * fact
    }

    pub fn neg(&self) -> Jet {
        Jet {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.order(), rhs.order());
        Jet {
            c: self
                .c
                .iter()
                .zip(&rhs.c)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.order(), rhs.order());
        Jet {
            c: self
                .c
                .iter()
                .zip(&rhs.c)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Jet {
        Jet {
            c: self.c.iter().map(|a| a * s).collect(),
        }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.order(), rhs.order());
        let n = self.c.len();
        let mut c = vec![Complex64::ZERO; n];
        for k in 0..n {
            let mut acc = Complex64::ZERO;
            for j in 0..=k {
                acc += self.c[j] * rhs.c[k - j];
            }
            c[k] = acc;
        }
        Jet { c }
    }

    /// Series division. The divisor must have a nonzero constant term;
    /// otherwise non-finite entries propagate to the caller.
    pub fn div(&self, rhs: &Jet) -> Jet {
        debug_assert_eq!(self.order(), rhs.order());
        let n = self.c.len();
        let mut c = vec![Complex64::ZERO; n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 0..k {
                acc -= c[j] * rhs.c[k - j];
            }
            c[k] = acc / rhs.c[0];
        }
        Jet { c }
    }

    /// Integer power by repeated squaring; negative exponents go through
    /// the reciprocal.
    pub fn powi(&self, n: i32) -> Jet {
        let order = self.order();
        if n == 0 {
            return Jet::constant(Complex64::ONE, order);
        }
        let base = if n < 0 {
            Jet::constant(Complex64::ONE, order).div(self)
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Jet::constant(Complex64::ONE, order);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        acc
    }

    /// Principal-branch logarithm of the series.
    pub fn ln(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![Complex64::ZERO; n];
        c[0] = self.c[0].ln();
        for k in 1..n {
            let mut acc = self.c[k] * (k as f64);
            for j in 1..k {
                acc -= c[j] * (j as f64) * self.c[k - j];
            }
            c[k] = acc / (k as f64) / self.c[0];
        }
        Jet { c }
    }

    /// Exponential of the series.
    pub fn exp(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![Complex64::ZERO; n];
        c[0] = self.c[0].exp();
        for k in 1..n {
            let mut acc = Complex64::ZERO;
            for j in 1..=k {
                acc += self.c[j] * (j as f64) * c[k - j];
            }
            c[k] = acc / (k as f64);
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn product_rule() {
        // f = x^2, g = 1/x at x0 = 2: (fg) = x, derivative 1.
        let x = Jet::variable(c(2.0), 3);
        let f = x.mul(&x);
        let g = Jet::constant(c(1.0), 3).div(&x);
        let fg = f.mul(&g);
        assert!((fg.value() - c(2.0)).norm() < 1e-15);
        assert!((fg.derivative(1) - c(1.0)).norm() < 1e-15);
        assert!(fg.derivative(2).norm() < 1e-15);
    }

    #[test]
    fn log_derivatives() {
        // d/dx ln(x) = 1/x, second derivative -1/x^2 at x0 = 3.
        let x = Jet::variable(c(3.0), 4);
        let l = x.ln();
        assert!((l.value() - c(3.0f64.ln())).norm() < 1e-15);
        assert!((l.derivative(1) - c(1.0 / 3.0)).norm() < 1e-15);
        assert!((l.derivative(2) - c(-1.0 / 9.0)).norm() < 1e-15);
        assert!((l.derivative(3) - c(2.0 / 27.0)).norm() < 1e-15);
    }

    #[test]
    fn exp_inverts_ln() {
        let x = Jet::variable(c(1.7), 5);
        let back = x.ln().exp();
        for k in 0..=5 {
            assert!((back.c[k] - x.c[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn integer_powers() {
        let x = Jet::variable(c(2.0), 3);
        let p = x.powi(-2);
        // f = x^-2: f(2) = 1/4, f' = -2x^-3 = -1/4, f'' = 6x^-4 = 3/8.
        assert!((p.value() - c(0.25)).norm() < 1e-15);
        assert!((p.derivative(1) - c(-0.25)).norm() < 1e-15);
        assert!((p.derivative(2) - c(0.375)).norm() < 1e-15);
    }
}
