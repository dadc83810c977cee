//! Gauss–Legendre quadrature and the power-law tail correction used by
//! radial pairing integrals.

use crate::linalg::{lstsq, CMat};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
// f64 math via libm in builds without std; the inherent std methods shadow
// the trait whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Fixed-order Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre polynomial.
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_deriv(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_deriv(n, x);
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        GaussLegendre { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> Complex64>(&self, a: f64, b: f64, mut f: F) -> Complex64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = Complex64::ZERO;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + half * x) * *w;
        }
        acc * half
    }

    /// Composite rule over consecutive panels given by `edges`.
    pub fn integrate_panels<F: FnMut(f64) -> Complex64>(
        &self,
        edges: &[f64],
        mut f: F,
    ) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for w in edges.windows(2) {
            acc += self.integrate(w[0], w[1], &mut f);
        }
        acc
    }
}

fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Geometric panel edges on [a, b] (a > 0), clustering panels near `a`.
pub fn geometric_edges(a: f64, b: f64, panels: usize) -> Vec<f64> {
    let ratio = (b / a).powf(1.0 / panels as f64);
    let mut edges = Vec::with_capacity(panels + 1);
    let mut x = a;
    for _ in 0..panels {
        edges.push(x);
        x *= ratio;
    }
    edges.push(b);
    edges
}

/// Fit `g(r) = c2/r^2 + c3/r^3` to samples of the integrand on `[R/2, R]`
/// and return the analytic tail `int_R^inf g = c2/R + c3/(2 R^2)`.
///
/// The residual of the fit is returned alongside so callers can reject
/// integrands that are not yet in their asymptotic regime.
pub fn power_tail_correction<F: FnMut(f64) -> Complex64>(
    big_r: f64,
    mut integrand: F,
) -> (Complex64, f64) {
    const SAMPLES: usize = 24;
    let mut a = CMat::zeros(SAMPLES, 2);
    let mut b = vec![Complex64::ZERO; SAMPLES];
    let mut scale = 0.0f64;
    for k in 0..SAMPLES {
        let r = 0.5 * big_r + 0.5 * big_r * (k as f64 + 0.5) / SAMPLES as f64;
        a[(k, 0)] = Complex64::new(r.powi(-2), 0.0);
        a[(k, 1)] = Complex64::new(r.powi(-3), 0.0);
        b[k] = integrand(r);
        scale = scale.max(b[k].norm());
    }
    let coef = match lstsq(&a, &b) {
        Ok(c) => c,
        Err(_) => return (Complex64::ZERO, f64::INFINITY),
    };
    let mut resid = 0.0f64;
    for k in 0..SAMPLES {
        let model = a[(k, 0)] * coef[0] + a[(k, 1)] * coef[1];
        resid = resid.max((model - b[k]).norm());
    }
    let tail = coef[0] / big_r + coef[1] / (2.0 * big_r * big_r);
    (tail, if scale > 0.0 { resid / scale.max(1e-300) } else { resid })
}
