//! Closed-form scalar functions of one radial variable.
//!
//! [`Expr`] is a small immutable expression tree over `r` supporting exact
//! evaluation of values and derivatives (via [`Jet`] arithmetic) at real or
//! complex points. Operator coefficients, catalog mode profiles, and master
//! potentials are all built from these, so identity checks can run at the
//! 1e-12 level instead of being limited by finite differencing.

use crate::jet::Jet;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};
use num_complex::Complex64;

#[derive(Debug)]
enum Node {
    Const(Complex64),
    /// The radial variable `r`.
    Var,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    PowI(Expr, i32),
    Ln(Expr),
    /// First derivative of the wrapped function; evaluated by shifting the
    /// wrapped jet one order, so it is exact for every node kind.
    Deriv(Expr),
    /// C^3 polynomial step: 0 for r <= lo, 1 for r >= hi (reversed when
    /// `falling`), `t^4(35 - 84t + 70t^2 - 20t^3)` in between.
    Smoothstep { lo: f64, hi: f64, falling: bool },
}

/// Immutable closed-form function of `r`; cheap to clone and `Send + Sync`.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl Expr {
    fn new(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn var() -> Self {
        Expr::new(Node::Var)
    }

    pub fn num(x: f64) -> Self {
        Expr::new(Node::Const(real(x)))
    }

    pub fn complex(x: Complex64) -> Self {
        Expr::new(Node::Const(x))
    }

    pub fn zero() -> Self {
        Expr::num(0.0)
    }

    pub fn one() -> Self {
        Expr::num(1.0)
    }

    /// Rising (or falling) C^3 smoothstep on `[lo, hi]`.
    pub fn smoothstep(lo: f64, hi: f64, falling: bool) -> Self {
        debug_assert!(hi > lo);
        Expr::new(Node::Smoothstep { lo, hi, falling })
    }

    pub fn powi(&self, n: i32) -> Self {
        match n {
            0 => Expr::one(),
            1 => self.clone(),
            _ => match *self.0 {
                Node::Const(c) => Expr::complex(c.powi(n)),
                _ => Expr::new(Node::PowI(self.clone(), n)),
            },
        }
    }

    pub fn ln(&self) -> Self {
        Expr::new(Node::Ln(self.clone()))
    }

    fn as_const(&self) -> Option<Complex64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Structurally the constant zero (used to keep operator matrices sparse).
    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(Complex64::ZERO)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(Complex64::ONE)
    }

    /// Taylor jet of the function at `r`, truncated at `order`.
    pub fn eval_jet(&self, r: Complex64, order: usize) -> Jet {
        match &*self.0 {
            Node::Const(c) => Jet::constant(*c, order),
            Node::Var => Jet::variable(r, order),
            Node::Add(a, b) => a.eval_jet(r, order).add(&b.eval_jet(r, order)),
            Node::Sub(a, b) => a.eval_jet(r, order).sub(&b.eval_jet(r, order)),
            Node::Mul(a, b) => a.eval_jet(r, order).mul(&b.eval_jet(r, order)),
            Node::Div(a, b) => a.eval_jet(r, order).div(&b.eval_jet(r, order)),
            Node::Neg(a) => a.eval_jet(r, order).neg(),
            Node::PowI(a, n) => a.eval_jet(r, order).powi(*n),
            Node::Ln(a) => a.eval_jet(r, order).ln(),
            Node::Deriv(a) => {
                let inner = a.eval_jet(r, order + 1);
                let mut c = Vec::with_capacity(order + 1);
                for k in 0..=order {
                    c.push(inner.c[k + 1] * ((k + 1) as f64));
                }
                Jet { c }
            }
            Node::Smoothstep { lo, hi, falling } => {
                // Piece selection by the real part; complex arguments are only
                // used on contours that stay inside a single piece.
                let width = hi - lo;
                let t = (r.re - lo) / width;
                let s = if t <= 0.0 {
                    Jet::constant(Complex64::ZERO, order)
                } else if t >= 1.0 {
                    Jet::constant(Complex64::ONE, order)
                } else {
                    let tj = Jet::variable(r, order)
                        .sub(&Jet::constant(real(*lo), order))
                        .scale(real(1.0 / width));
                    // t^4 (35 - 84 t + 70 t^2 - 20 t^3), C^3 at both ends.
                    let mut poly = Jet::constant(real(-20.0), order);
                    for coef in [70.0, -84.0, 35.0] {
                        poly = poly.mul(&tj).add(&Jet::constant(real(coef), order));
                    }
                    poly.mul(&tj.powi(4))
                };
                if *falling {
                    Jet::constant(Complex64::ONE, order).sub(&s)
                } else {
                    s
                }
            }
        }
    }

    pub fn eval(&self, r: Complex64) -> Complex64 {
        self.eval_jet(r, 0).value()
    }

    /// Value of the smoothstep shape at a real argument; the scalar twin of
    /// [`Expr::smoothstep`], replicating the jet evaluation bit for bit.
    pub fn smoothstep_re(lo: f64, hi: f64, falling: bool, r: f64) -> f64 {
        let width = hi - lo;
        let tb = (r - lo) / width;
        let s = if tb <= 0.0 {
            0.0
        } else if tb >= 1.0 {
            1.0
        } else {
            let t = (r - lo) * (1.0 / width);
            let poly = ((-20.0 * t + 70.0) * t - 84.0) * t + 35.0;
            let t2 = t * t;
            poly * (t2 * t2)
        };
        if falling {
            1.0 - s
        } else {
            s
        }
    }

    /// Value at a real radius.
    pub fn eval_re(&self, r: f64) -> Complex64 {
        self.eval(real(r))
    }

    /// k-th derivative at a real radius.
    pub fn deriv_re(&self, r: f64, k: usize) -> Complex64 {
        self.eval_jet(real(r), k).derivative(k)
    }

    /// Derivative as an expression, folding the cases where the result is
    /// immediate; everything else defers to jet evaluation via [`Node::Deriv`].
    pub fn diff(&self) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::zero(),
            Node::Var => Expr::one(),
            Node::Add(a, b) => a.diff() + b.diff(),
            Node::Sub(a, b) => a.diff() - b.diff(),
            Node::Neg(a) => -a.diff(),
            _ => Expr::new(Node::Deriv(self.clone())),
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::complex(a + b);
        }
        Expr::new(Node::Add(self, rhs))
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_zero() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::complex(a - b);
        }
        if self.is_zero() {
            return -rhs;
        }
        Expr::new(Node::Sub(self, rhs))
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::complex(a * b);
        }
        Expr::new(Node::Mul(self, rhs))
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        if rhs.is_one() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Expr::complex(a / b);
        }
        Expr::new(Node::Div(self, rhs))
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        if let Some(a) = self.as_const() {
            return Expr::complex(-a);
        }
        Expr::new(Node::Neg(self))
    }
}

macro_rules! ref_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $trait::$method(self.clone(), rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $trait::$method(self.clone(), rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $trait::$method(self, rhs.clone())
            }
        }
    };
}

ref_binop!(Add, add);
ref_binop!(Sub, sub);
ref_binop!(Mul, mul);
ref_binop!(Div, div);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}
