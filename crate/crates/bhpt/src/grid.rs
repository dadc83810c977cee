//! Radial grids and finite-difference derivatives on arbitrarily spaced
//! nodes (Fornberg weights).

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
// f64 math via libm in builds without std; the inherent std methods shadow
// the trait whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Strictly increasing radial sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub r: Vec<f64>,
}

impl Grid {
    /// Geometric progression from `a` to `b` (inclusive), clustering points
    /// near `a`; the default for near-horizon work.
    pub fn geometric(a: f64, b: f64, n: usize) -> Self {
        debug_assert!(a > 0.0 && b > a && n >= 2);
        let ratio = (b / a).powf(1.0 / (n - 1) as f64);
        let mut r = Vec::with_capacity(n);
        let mut x = a;
        for _ in 0..n - 1 {
            r.push(x);
            x *= ratio;
        }
        r.push(b);
        Grid { r }
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> Self {
        debug_assert!(b > a && n >= 2);
        let h = (b - a) / (n - 1) as f64;
        Grid {
            r: (0..n).map(|i| a + h * i as f64).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
}

/// Finite-difference weights for the `m`-th derivative at `z` from the
/// given nodes (Fornberg's algorithm); exact for polynomials of degree
/// `nodes.len() - 1`.
pub fn fd_weights(nodes: &[f64], z: f64, m: usize) -> Vec<f64> {
    let n = nodes.len();
    debug_assert!(n > m);
    let mut c = vec![0.0f64; n * (m + 1)];
    c[0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i * (m + 1) + k] =
                        c1 * (k as f64 * c[(i - 1) * (m + 1) + k - 1] - c5 * c[(i - 1) * (m + 1) + k]) / c2;
                }
                c[i * (m + 1)] = -c1 * c5 * c[(i - 1) * (m + 1)] / c2;
            }
            for k in (1..=mn).rev() {
                c[j * (m + 1) + k] = (c4 * c[j * (m + 1) + k] - k as f64 * c[j * (m + 1) + k - 1]) / c3;
            }
            c[j * (m + 1)] = c4 * c[j * (m + 1)] / c3;
        }
        c1 = c2;
    }
    (0..n).map(|j| c[j * (m + 1) + m]).collect()
}

/// Stencil width used by a finite-difference scheme tag.
pub fn stencil_width(order: usize) -> usize {
    match order {
        2 => 3,
        _ => 7,
    }
}

/// `m`-th derivative of sampled values on `grid`, using centered windows of
/// `width` nodes (shifted one-sided at the edges).
pub fn differentiate(grid: &Grid, values: &[Complex64], m: usize, width: usize) -> Vec<Complex64> {
    let n = grid.len();
    debug_assert_eq!(values.len(), n);
    debug_assert!(width <= n && width > m);
    let mut out = vec![Complex64::ZERO; n];
    for (i, o) in out.iter_mut().enumerate() {
        let lo = i.saturating_sub(width / 2).min(n - width);
        let w = fd_weights(&grid.r[lo..lo + width], grid.r[i], m);
        let mut acc = Complex64::ZERO;
        for (k, wk) in w.iter().enumerate() {
            acc += values[lo + k] * *wk;
        }
        *o = acc;
    }
    out
}
