//! Stationary sector operators as exact ODE systems in the radius.
//!
//! A mode with time dependence `e^{-i sigma t}` and a fixed spherical-harmonic
//! sector turns every geometric operator on the black-hole exterior into a
//! small matrix of ordinary differential operators in `r`. This module
//! assembles those matrices symbolically: each entry is a closed-form
//! coefficient ([`Expr`]) multiplying a power of `d/dr`, with `d/dt` replaced
//! by `-i sigma` at construction time. Nothing is discretized during assembly,
//! so operator identities (route equalities, compositions that must vanish)
//! can be checked at the 1e-12 level rather than at a scheme order.
//!
//! Constructors build operators in the [`TimeFunctionKind::Static`] chart,
//! where the background splits into `<dt>` and `<dr>` blocks with the metric
//! function `mu = 1 - 2 mass / r`. [`RadialOperator::conjugate_time`] moves an
//! operator to another time function exactly (the shift is a function of `r`
//! alone, so the conjugation stays polynomial in `d/dr`). Application to
//! radial profiles supports exact differentiation of closed forms and
//! finite-difference schemes on sampled data.

use crate::background::{self, BlackHoleParams, TimeFunctionKind};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::grid::{self, Grid};
use crate::harmonics::{Parity, Sector};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

/// Differentiation scheme used by [`RadialOperator::apply`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffScheme {
    /// Second-order finite differences (3-point stencils).
    Fd2,
    /// Fourth-order finite differences (5-point stencils).
    Fd4,
    /// Exact derivatives of closed-form profiles; no grid error at all.
    ClosedFormDiff,
}

impl DiffScheme {
    pub(crate) fn stencil_width(self) -> usize {
        match self {
            DiffScheme::Fd2 => 3,
            DiffScheme::Fd4 => 5,
            DiffScheme::ClosedFormDiff => 0,
        }
    }
}

// ---------------------------------------------------------------------------
// Matrix polynomials in d/dr with closed-form coefficients.
// ---------------------------------------------------------------------------

/// `coef[k]` holds the row-major matrix multiplying `(d/dr)^k`.
#[derive(Clone, Debug)]
struct OpMatrix {
    rows: usize,
    cols: usize,
    coef: Vec<Vec<Expr>>,
}

fn binom(k: usize, p: usize) -> f64 {
    let mut out = 1.0;
    for i in 0..p {
        out = out * (k - i) as f64 / (i + 1) as f64;
    }
    out
}

impl OpMatrix {
    fn zeros(rows: usize, cols: usize) -> Self {
        OpMatrix {
            rows,
            cols,
            coef: vec![vec![Expr::zero(); rows * cols]],
        }
    }

    fn identity(n: usize) -> Self {
        let mut m = OpMatrix::zeros(n, n);
        for i in 0..n {
            m.coef[0][i * n + i] = Expr::one();
        }
        m
    }

    fn layers(&self) -> usize {
        self.coef.len()
    }

    /// Highest derivative order with a structurally nonzero coefficient.
    fn order(&self) -> usize {
        for k in (0..self.layers()).rev() {
            if self.coef[k].iter().any(|e| !e.is_zero()) {
                return k;
            }
        }
        0
    }

    fn at(&self, k: usize, i: usize, j: usize) -> Expr {
        if k < self.layers() {
            self.coef[k][i * self.cols + j].clone()
        } else {
            Expr::zero()
        }
    }

    fn add_to(&mut self, k: usize, i: usize, j: usize, e: Expr) {
        if e.is_zero() {
            return;
        }
        while self.layers() <= k {
            self.coef.push(vec![Expr::zero(); self.rows * self.cols]);
        }
        let slot = &mut self.coef[k][i * self.cols + j];
        *slot = slot.clone() + e;
    }

    fn plus(&self, other: &OpMatrix) -> OpMatrix {
        debug_assert!(self.rows == other.rows && self.cols == other.cols);
        let mut out = self.clone();
        for k in 0..other.layers() {
            for i in 0..other.rows {
                for j in 0..other.cols {
                    out.add_to(k, i, j, other.at(k, i, j));
                }
            }
        }
        out
    }

    fn scaled(&self, s: Expr) -> OpMatrix {
        let mut out = self.clone();
        for layer in &mut out.coef {
            for e in layer.iter_mut() {
                *e = e.clone() * s.clone();
            }
        }
        out
    }

    /// Operator composition `self . rhs` via the Leibniz rule:
    /// `D^k (b u) = sum_p C(k, p) b^(k-p) D^p u`.
    fn compose(&self, rhs: &OpMatrix) -> OpMatrix {
        debug_assert!(self.cols == rhs.rows);
        let mut out = OpMatrix::zeros(self.rows, rhs.cols);
        for k in 0..self.layers() {
            for i in 0..self.rows {
                for mid in 0..self.cols {
                    let a = self.at(k, i, mid);
                    if a.is_zero() {
                        continue;
                    }
                    for l in 0..rhs.layers() {
                        for j in 0..rhs.cols {
                            let b = rhs.at(l, mid, j);
                            if b.is_zero() {
                                continue;
                            }
                            let mut db = b;
                            for p in (0..=k).rev() {
                                // db = b^(k-p) when the loop reaches p.
                                out.add_to(
                                    p + l,
                                    i,
                                    j,
                                    a.clone() * Expr::num(binom(k, p)) * db.clone(),
                                );
                                if p > 0 {
                                    db = db.diff();
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Apply to closed-form components, differentiating exactly.
    fn apply_exprs(&self, u: &[Expr]) -> Vec<Expr> {
        debug_assert!(u.len() == self.cols);
        // Component derivatives up to the operator order.
        let mut derivs: Vec<Vec<Expr>> = vec![u.to_vec()];
        for k in 1..self.layers() {
            let prev = &derivs[k - 1];
            derivs.push(prev.iter().map(Expr::diff).collect());
        }
        let mut out = vec![Expr::zero(); self.rows];
        for (k, dk) in derivs.iter().enumerate() {
            for (i, slot) in out.iter_mut().enumerate() {
                for (j, dkj) in dk.iter().enumerate() {
                    let a = self.at(k, i, j);
                    if a.is_zero() {
                        continue;
                    }
                    *slot = slot.clone() + a * dkj.clone();
                }
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Background scalars.
// ---------------------------------------------------------------------------

struct Geom {
    m: f64,
    r: Expr,
    mu: Expr,
    mu1: Expr,
    mu2: Expr,
}

impl Geom {
    fn new(params: &BlackHoleParams) -> Self {
        let m = params.mass();
        let r = Expr::var();
        Geom {
            m,
            mu: Expr::one() - Expr::num(2.0 * m) / &r,
            mu1: Expr::num(2.0 * m) * r.powi(-2),
            mu2: Expr::num(-4.0 * m) * r.powi(-3),
            r,
        }
    }

    fn inv(&self, k: i32) -> Expr {
        self.r.powi(-k)
    }
}

fn tau(sigma: Complex64) -> Expr {
    // d/dt acting on an e^{-i sigma t} mode.
    Expr::complex(Complex64::new(0.0, -1.0) * sigma)
}

// ---------------------------------------------------------------------------
// Slot bookkeeping.
// ---------------------------------------------------------------------------

/// Every component name that may label a matrix row or column, including the
/// internal 2-form slots used by the first-order factorization of the wave
/// operator on 1-forms.
const KNOWN_SLOTS: [&str; 14] = [
    "u", "T_t", "T_r", "L", "ftilde_tt", "ftilde_tr", "ftilde_rr", "f_t", "f_r", "H_L", "H_T",
    "N", "a_t", "a_r",
];

#[derive(Clone, Debug)]
struct Slots {
    names: Vec<&'static str>,
}

impl Slots {
    fn sector(sector: &Sector) -> Self {
        Slots {
            names: sector.components().names().to_vec(),
        }
    }

    /// Slots of the 2-form sector paired with the rank-1 sector of the same
    /// parity and degree: `N` multiplies the aspherical area form, `a`
    /// multiplies mixed products with the harmonic 1-form, and `P` multiplies
    /// the spherical area form.
    fn two_form(sector: &Sector) -> Self {
        let names = match sector.parity() {
            Parity::Scalar => {
                if sector.l() == 0 {
                    vec!["N"]
                } else {
                    vec!["N", "a_t", "a_r"]
                }
            }
            Parity::Vector => vec!["a_t", "a_r", "P"],
        };
        Slots { names }
    }

    fn len(&self) -> usize {
        self.names.len()
    }

    fn idx(&self, name: &str) -> Option<usize> {
        debug_assert!(KNOWN_SLOTS.contains(&name) || name == "P");
        self.names.iter().position(|n| *n == name)
    }
}

/// Accumulates matrix entries by slot name; entries whose row or column slot
/// is absent in the current sector (degenerate low degrees) are dropped, which
/// is exactly the restriction of the operator to the surviving components.
struct Builder {
    rows: Slots,
    cols: Slots,
    m: OpMatrix,
}

impl Builder {
    fn new(rows: Slots, cols: Slots) -> Self {
        let m = OpMatrix::zeros(rows.len(), cols.len());
        Builder { rows, cols, m }
    }

    fn add(&mut self, k: usize, row: &str, col: &str, e: Expr) {
        if let (Some(i), Some(j)) = (self.rows.idx(row), self.cols.idx(col)) {
            self.m.add_to(k, i, j, e);
        }
    }

    fn finish(self) -> OpMatrix {
        self.m
    }
}

fn ll_of(sector: &Sector) -> f64 {
    (sector.l() as f64) * (sector.l() as f64 + 1.0)
}

// ---------------------------------------------------------------------------
// Operators on the 1+1-dimensional static factor.
// ---------------------------------------------------------------------------

/// One block operator on the static `(t, r)` factor, acting between the
/// splittings `<dt> + <dr>` (1-forms) and `<dt^2> + <2 dt dr> + <dr^2>`
/// (symmetric 2-tensors), with `d/dt` already replaced by `-i sigma`.
#[derive(Clone, Debug)]
pub struct HatOperator {
    mat: OpMatrix,
}

impl HatOperator {
    pub fn rows(&self) -> usize {
        self.mat.rows
    }

    pub fn cols(&self) -> usize {
        self.mat.cols
    }

    /// Highest power of `d/dr` carried by the operator.
    pub fn order(&self) -> usize {
        self.mat.order()
    }

    /// Coefficient of `(d/dr)^k` in entry `(i, j)`, evaluated at radius `r`.
    pub fn coefficient(&self, k: usize, i: usize, j: usize, r: f64) -> Complex64 {
        self.mat.at(k, i, j).eval_re(r)
    }

    /// Apply to closed-form components (exact differentiation).
    pub fn apply(&self, input: &[Expr]) -> Result<Vec<Expr>> {
        if input.len() != self.mat.cols {
            return Err(Error::SectorMismatch);
        }
        Ok(self.mat.apply_exprs(input))
    }

    /// Operator composition `self . rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &HatOperator) -> HatOperator {
        debug_assert!(self.cols() == rhs.rows());
        HatOperator {
            mat: self.mat.compose(&rhs.mat),
        }
    }

    /// Entry-wise sum.
    pub fn plus(&self, rhs: &HatOperator) -> Result<HatOperator> {
        if self.rows() != rhs.rows() || self.cols() != rhs.cols() {
            return Err(Error::SectorMismatch);
        }
        Ok(HatOperator {
            mat: self.mat.plus(&rhs.mat),
        })
    }
}

/// The standard operator blocks on the static factor. `wave*` are the wave
/// operators on functions, 1-forms, and symmetric 2-tensors; `d*` the
/// exterior derivatives; `div*` the (negative) divergences; `sym_grad` the
/// symmetric gradient on 1-forms; `contract*` the contraction with the
/// radial conormal `dr`; `transport*` the covariant derivative along its
/// metric dual; `trace2` the metric trace; `star*` the Hodge star.
pub struct HatOperators {
    pub wave0: HatOperator,
    pub wave1: HatOperator,
    pub wave2: HatOperator,
    pub d0: HatOperator,
    pub d1: HatOperator,
    pub div1: HatOperator,
    pub div2: HatOperator,
    pub div_two_form: HatOperator,
    pub sym_grad: HatOperator,
    pub contract1: HatOperator,
    pub contract2: HatOperator,
    pub transport0: HatOperator,
    pub transport2: HatOperator,
    pub trace2: HatOperator,
    pub star0: HatOperator,
    pub star1: HatOperator,
    pub star2: HatOperator,
}

fn hat_wave0(g: &Geom, sigma: Complex64) -> OpMatrix {
    // -mu^-1 d_t^2 + d_r mu d_r
    let t = tau(sigma);
    let mut m = OpMatrix::zeros(1, 1);
    m.add_to(2, 0, 0, g.mu.clone());
    m.add_to(1, 0, 0, g.mu1.clone());
    m.add_to(0, 0, 0, -(t.clone() * t) / &g.mu);
    m
}

fn hat_d0(sigma: Complex64) -> OpMatrix {
    let mut m = OpMatrix::zeros(2, 1);
    m.add_to(0, 0, 0, tau(sigma));
    m.add_to(1, 1, 0, Expr::one());
    m
}

fn hat_div1(g: &Geom, sigma: Complex64) -> OpMatrix {
    // (-mu^-1 d_t, d_r mu)
    let mut m = OpMatrix::zeros(1, 2);
    m.add_to(0, 0, 0, -tau(sigma) / &g.mu);
    m.add_to(1, 0, 1, g.mu.clone());
    m.add_to(0, 0, 1, g.mu1.clone());
    m
}

fn hat_sym_grad(g: &Geom, sigma: Complex64) -> OpMatrix {
    let t = tau(sigma);
    let half = Expr::num(0.5);
    let mut m = OpMatrix::zeros(3, 2);
    m.add_to(0, 0, 0, t.clone());
    m.add_to(0, 0, 1, -(half.clone() * &g.mu * &g.mu1));
    // (1/2) mu d_r mu^-1 = (1/2)(d_r - mu'/mu)
    m.add_to(1, 1, 0, half.clone());
    m.add_to(0, 1, 0, -(half.clone() * &g.mu1 / &g.mu));
    m.add_to(0, 1, 1, half * t);
    // mu^-1/2 d_r mu^1/2 = d_r + mu'/(2 mu)
    m.add_to(1, 2, 1, Expr::one());
    m.add_to(0, 2, 1, Expr::num(0.5) * &g.mu1 / &g.mu);
    m
}

fn hat_contract1(g: &Geom) -> OpMatrix {
    let mut m = OpMatrix::zeros(1, 2);
    m.add_to(0, 0, 1, -g.mu.clone());
    m
}

fn hat_contract2(g: &Geom) -> OpMatrix {
    let mut m = OpMatrix::zeros(2, 3);
    m.add_to(0, 0, 1, -g.mu.clone());
    m.add_to(0, 1, 2, -g.mu.clone());
    m
}

fn hat_transport0(g: &Geom) -> OpMatrix {
    let mut m = OpMatrix::zeros(1, 1);
    m.add_to(1, 0, 0, -g.mu.clone());
    m
}

fn hat_transport2(g: &Geom) -> OpMatrix {
    // diag(-mu^2 d_r mu^-1, -mu d_r, -d_r mu)
    let mut m = OpMatrix::zeros(3, 3);
    m.add_to(1, 0, 0, -g.mu.clone());
    m.add_to(0, 0, 0, g.mu1.clone());
    m.add_to(1, 1, 1, -g.mu.clone());
    m.add_to(1, 2, 2, -g.mu.clone());
    m.add_to(0, 2, 2, -g.mu1.clone());
    m
}

fn hat_div2(g: &Geom, sigma: Complex64) -> OpMatrix {
    let t = tau(sigma);
    let mut m = OpMatrix::zeros(2, 3);
    m.add_to(0, 0, 0, -t.clone() / &g.mu);
    m.add_to(1, 0, 1, g.mu.clone());
    m.add_to(0, 0, 1, g.mu1.clone());
    m.add_to(0, 1, 0, Expr::num(0.5) * &g.mu1 / (g.mu.clone() * &g.mu));
    m.add_to(0, 1, 1, -t / &g.mu);
    // mu^-1/2 d_r mu^3/2 = mu d_r + (3/2) mu'
    m.add_to(1, 1, 2, g.mu.clone());
    m.add_to(0, 1, 2, Expr::num(1.5) * &g.mu1);
    m
}

fn hat_wave2(g: &Geom, sigma: Complex64) -> OpMatrix {
    let t = tau(sigma);
    let mut m = OpMatrix::zeros(3, 3);
    let base0 = -(t.clone() * t.clone()) / &g.mu;
    for i in 0..3 {
        m.add_to(2, i, i, g.mu.clone());
        m.add_to(0, i, i, base0.clone());
    }
    let mu12 = g.mu1.clone() * &g.mu1;
    m.add_to(1, 0, 0, -g.mu1.clone());
    m.add_to(0, 0, 0, Expr::num(0.5) * &mu12 / &g.mu - &g.mu2);
    m.add_to(0, 0, 1, Expr::num(2.0) * &g.mu1 * &t);
    m.add_to(0, 0, 2, Expr::num(-0.5) * &g.mu * &mu12);
    m.add_to(0, 1, 0, g.mu1.clone() * &t / (g.mu.clone() * &g.mu));
    m.add_to(1, 1, 1, g.mu1.clone());
    m.add_to(0, 1, 1, -(mu12.clone() / &g.mu));
    m.add_to(0, 1, 2, g.mu1.clone() * &t);
    m.add_to(0, 2, 0, Expr::num(-0.5) * &mu12 / (g.mu.clone() * &g.mu * &g.mu));
    m.add_to(0, 2, 1, Expr::num(2.0) * &g.mu1 * &t / (g.mu.clone() * &g.mu));
    m.add_to(1, 2, 2, Expr::num(3.0) * &g.mu1);
    m.add_to(0, 2, 2, Expr::num(0.5) * &mu12 / &g.mu + &g.mu2);
    m
}

/// Wave operator on 1-forms of the static factor; fixed against the identity
/// `d div + div d = wave + (mu''/2)` (the factor has Gauss curvature mu''/2).
fn hat_wave1(g: &Geom, sigma: Complex64) -> OpMatrix {
    let t = tau(sigma);
    let mut m = OpMatrix::zeros(2, 2);
    let base0 = -(t.clone() * t.clone()) / &g.mu;
    for i in 0..2 {
        m.add_to(2, i, i, g.mu.clone());
        m.add_to(0, i, i, base0.clone());
    }
    m.add_to(0, 0, 0, Expr::num(-0.5) * &g.mu2);
    m.add_to(0, 0, 1, g.mu1.clone() * &t);
    m.add_to(0, 1, 0, g.mu1.clone() * &t / (g.mu.clone() * &g.mu));
    m.add_to(1, 1, 1, Expr::num(2.0) * &g.mu1);
    m.add_to(0, 1, 1, Expr::num(0.5) * &g.mu2);
    m
}

fn hat_d1(sigma: Complex64) -> OpMatrix {
    // (d omega)_{t r} = d_t omega_r - d_r omega_t
    let mut m = OpMatrix::zeros(1, 2);
    m.add_to(1, 0, 0, Expr::num(-1.0));
    m.add_to(0, 0, 1, tau(sigma));
    m
}

fn hat_div_two_form(g: &Geom, sigma: Complex64) -> OpMatrix {
    // On N dt^dr: (-mu d_r N, -mu^-1 d_t N)
    let mut m = OpMatrix::zeros(2, 1);
    m.add_to(1, 0, 0, -g.mu.clone());
    m.add_to(0, 1, 0, -tau(sigma) / &g.mu);
    m
}

fn hat_trace2(g: &Geom) -> OpMatrix {
    let mut m = OpMatrix::zeros(1, 3);
    m.add_to(0, 0, 0, Expr::one() / &g.mu);
    m.add_to(0, 0, 2, -g.mu.clone());
    m
}

fn hat_star0() -> OpMatrix {
    OpMatrix::identity(1)
}

fn hat_star1(g: &Geom) -> OpMatrix {
    // star dt = -mu^-1 dr, star dr = -mu dt; star^2 = +1 on 1-forms.
    let mut m = OpMatrix::zeros(2, 2);
    m.add_to(0, 0, 1, -g.mu.clone());
    m.add_to(0, 1, 0, -(Expr::one() / &g.mu));
    m
}

fn hat_star2() -> OpMatrix {
    let mut m = OpMatrix::zeros(1, 1);
    m.add_to(0, 0, 0, Expr::num(-1.0));
    m
}

/// The operator blocks on the static factor for a non-rotating background,
/// with `d/dt` replaced by `-i sigma`.
pub fn hat_operators(params: &BlackHoleParams, sigma: Complex64) -> Result<HatOperators> {
    params.require_static()?;
    let g = Geom::new(params);
    let wrap = |mat: OpMatrix| HatOperator { mat };
    Ok(HatOperators {
        wave0: wrap(hat_wave0(&g, sigma)),
        wave1: wrap(hat_wave1(&g, sigma)),
        wave2: wrap(hat_wave2(&g, sigma)),
        d0: wrap(hat_d0(sigma)),
        d1: wrap(hat_d1(sigma)),
        div1: wrap(hat_div1(&g, sigma)),
        div2: wrap(hat_div2(&g, sigma)),
        div_two_form: wrap(hat_div_two_form(&g, sigma)),
        sym_grad: wrap(hat_sym_grad(&g, sigma)),
        contract1: wrap(hat_contract1(&g)),
        contract2: wrap(hat_contract2(&g)),
        transport0: wrap(hat_transport0(&g)),
        transport2: wrap(hat_transport2(&g)),
        trace2: wrap(hat_trace2(&g)),
        star0: wrap(hat_star0()),
        star1: wrap(hat_star1(&g)),
        star2: wrap(hat_star2()),
    })
}

// ---------------------------------------------------------------------------
// Sector-restricted factor operators.
// ---------------------------------------------------------------------------

fn rank_slots(sector: &Sector, rank: u8) -> Result<Slots> {
    let s = Sector::new(sector.parity(), sector.l(), rank)?;
    Ok(Slots::sector(&s))
}

/// Exterior derivative, rank 0 to rank 1.
fn op_d0(sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let mut b = Builder::new(rank_slots(sector, 1)?, rank_slots(sector, 0)?);
    b.add(0, "T_t", "u", tau(sigma));
    b.add(1, "T_r", "u", Expr::one());
    b.add(0, "L", "u", Expr::one());
    Ok(b.finish())
}

/// Divergence, rank 1 to rank 0 (scalar parity; the vector-parity divergence
/// vanishes identically).
fn op_div1(g: &Geom, sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let ll = ll_of(sector);
    let mut b = Builder::new(rank_slots(sector, 0)?, rank_slots(sector, 1)?);
    b.add(0, "u", "T_t", -tau(sigma) / &g.mu);
    b.add(1, "u", "T_r", g.mu.clone());
    b.add(0, "u", "T_r", g.mu1.clone() + Expr::num(2.0) * &g.mu / &g.r);
    b.add(0, "u", "L", Expr::num(-ll) * g.inv(2));
    Ok(b.finish())
}

/// Exterior derivative, rank 1 to the 2-form slots.
fn op_d1(g: &Geom, sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let _ = g;
    let ll = ll_of(sector);
    let t = tau(sigma);
    let mut b = Builder::new(Slots::two_form(sector), rank_slots(sector, 1)?);
    match sector.parity() {
        Parity::Scalar => {
            b.add(0, "N", "T_r", t.clone());
            b.add(1, "N", "T_t", Expr::num(-1.0));
            b.add(0, "a_t", "L", t);
            b.add(0, "a_t", "T_t", Expr::num(-1.0));
            b.add(1, "a_r", "L", Expr::one());
            b.add(0, "a_r", "T_r", Expr::num(-1.0));
        }
        Parity::Vector => {
            b.add(0, "a_t", "L", t);
            b.add(1, "a_r", "L", Expr::one());
            b.add(0, "P", "L", Expr::num(ll));
        }
    }
    Ok(b.finish())
}

/// Divergence, 2-form slots to rank 1.
fn op_div_two_form(g: &Geom, sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let ll = ll_of(sector);
    let t = tau(sigma);
    let mut b = Builder::new(rank_slots(sector, 1)?, Slots::two_form(sector));
    match sector.parity() {
        Parity::Scalar => {
            b.add(1, "T_t", "N", -g.mu.clone());
            b.add(0, "T_t", "N", Expr::num(-2.0) * &g.mu / &g.r);
            b.add(0, "T_t", "a_t", Expr::num(ll) * g.inv(2));
            b.add(0, "T_r", "N", -t.clone() / &g.mu);
            b.add(0, "T_r", "a_r", Expr::num(ll) * g.inv(2));
            b.add(0, "L", "a_t", -t / &g.mu);
            b.add(1, "L", "a_r", g.mu.clone());
            b.add(0, "L", "a_r", g.mu1.clone());
        }
        Parity::Vector => {
            b.add(0, "L", "a_t", -t / &g.mu);
            b.add(1, "L", "a_r", g.mu.clone());
            b.add(0, "L", "a_r", g.mu1.clone());
            b.add(0, "L", "P", -g.inv(2));
        }
    }
    Ok(b.finish())
}

/// Symmetric gradient, rank 1 to rank 2.
fn op_sym_grad(g: &Geom, sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let ll = ll_of(sector);
    let t = tau(sigma);
    let half = Expr::num(0.5);
    let mut b = Builder::new(rank_slots(sector, 2)?, rank_slots(sector, 1)?);
    // Aspherical block: symmetric gradient on the static factor.
    b.add(0, "ftilde_tt", "T_t", t.clone());
    b.add(0, "ftilde_tt", "T_r", Expr::num(-0.5) * &g.mu * &g.mu1);
    b.add(1, "ftilde_tr", "T_t", half.clone());
    b.add(0, "ftilde_tr", "T_t", Expr::num(-0.5) * &g.mu1 / &g.mu);
    b.add(0, "ftilde_tr", "T_r", half.clone() * &t);
    b.add(1, "ftilde_rr", "T_r", Expr::one());
    b.add(0, "ftilde_rr", "T_r", half.clone() * &g.mu1 / &g.mu);
    // Mixed block: (1/2) T + (1/2) r^2 d (r^-2 L).
    b.add(0, "f_t", "T_t", half.clone());
    b.add(0, "f_t", "L", half.clone() * &t);
    b.add(0, "f_r", "T_r", half.clone());
    b.add(1, "f_r", "L", half);
    b.add(0, "f_r", "L", -(Expr::one() / &g.r));
    // Spherical block: -r g-slash iota_pi T + sym-grad-slash L.
    b.add(0, "H_L", "T_r", g.mu.clone() * &g.r);
    b.add(0, "H_L", "L", Expr::num(-0.5 * ll));
    b.add(0, "H_T", "L", Expr::one());
    Ok(b.finish())
}

/// Divergence of the trace reversal, rank 2 to rank 1.
fn op_div_trace_reversed(g: &Geom, sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let ll = ll_of(sector);
    let t = tau(sigma);
    let mut b = Builder::new(rank_slots(sector, 1)?, rank_slots(sector, 2)?);
    // T_t row.
    b.add(0, "T_t", "ftilde_tt", Expr::num(-0.5) * &t / &g.mu);
    b.add(1, "T_t", "ftilde_tr", g.mu.clone());
    b.add(
        0,
        "T_t",
        "ftilde_tr",
        g.mu1.clone() + Expr::num(2.0) * &g.mu / &g.r,
    );
    b.add(0, "T_t", "ftilde_rr", Expr::num(-0.5) * &g.mu * &t);
    b.add(0, "T_t", "f_t", Expr::num(-ll) * g.inv(2));
    b.add(0, "T_t", "H_L", -t.clone() * g.inv(2));
    // T_r row; the zeroth-order tt contributions cancel exactly.
    b.add(1, "T_r", "ftilde_tt", Expr::num(0.5) / &g.mu);
    b.add(0, "T_r", "ftilde_tr", -t.clone() / &g.mu);
    b.add(1, "T_r", "ftilde_rr", Expr::num(0.5) * &g.mu);
    b.add(
        0,
        "T_r",
        "ftilde_rr",
        g.mu1.clone() + Expr::num(2.0) * &g.mu / &g.r,
    );
    b.add(0, "T_r", "f_r", Expr::num(-ll) * g.inv(2));
    b.add(1, "T_r", "H_L", -g.inv(2));
    // L row; the trace slot drops out entirely.
    b.add(0, "L", "ftilde_tt", Expr::num(0.5) / &g.mu);
    b.add(0, "L", "ftilde_rr", Expr::num(-0.5) * &g.mu);
    b.add(0, "L", "f_t", -t / &g.mu);
    b.add(1, "L", "f_r", g.mu.clone());
    b.add(
        0,
        "L",
        "f_r",
        g.mu1.clone() + Expr::num(2.0) * &g.mu / &g.r,
    );
    b.add(0, "L", "H_T", Expr::num(-0.5 * (ll - 2.0)) * g.inv(2));
    Ok(b.finish())
}

/// Wave operator on rank-2 sectors.
fn op_wave2(g: &Geom, sector: &Sector, sigma: Complex64) -> Result<OpMatrix> {
    let ll = ll_of(sector);
    let slots = rank_slots(sector, 2)?;
    let mut b = Builder::new(slots.clone(), slots);
    let t = tau(sigma);
    let base0 = -(t.clone() * t.clone()) / &g.mu;
    let mu12 = g.mu1.clone() * &g.mu1;

    // Diagonal wave part: -mu^-1 d_t^2 + mu d_r^2 on every slot, plus the
    // angular eigenvalue, plus the block-dependent first-order terms.
    let asph = ["ftilde_tt", "ftilde_tr", "ftilde_rr"];
    let mixed = ["f_t", "f_r"];
    let sph = ["H_L", "H_T"];
    for name in asph.iter().chain(&mixed).chain(&sph) {
        b.add(2, name, name, g.mu.clone());
        b.add(0, name, name, base0.clone());
    }
    // Angular eigenvalues per block: plain on the aspherical slots, shifted by
    // the 1-form and trace-free Hessian eigenvalue shifts elsewhere.
    for name in &asph {
        b.add(0, name, name, Expr::num(-ll) * g.inv(2));
    }
    for name in &mixed {
        b.add(0, name, name, Expr::num(-(ll - 1.0)) * g.inv(2));
    }
    b.add(0, "H_L", "H_L", Expr::num(-ll) * g.inv(2));
    b.add(0, "H_T", "H_T", Expr::num(-(ll - 4.0)) * g.inv(2));

    // Aspherical block: first-order matrix of the static-factor wave operator
    // on symmetric 2-tensors.
    b.add(1, "ftilde_tt", "ftilde_tt", -g.mu1.clone());
    b.add(
        0,
        "ftilde_tt",
        "ftilde_tt",
        Expr::num(0.5) * &mu12 / &g.mu - &g.mu2,
    );
    b.add(0, "ftilde_tt", "ftilde_tr", Expr::num(2.0) * &g.mu1 * &t);
    b.add(0, "ftilde_tt", "ftilde_rr", Expr::num(-0.5) * &g.mu * &mu12);
    b.add(
        0,
        "ftilde_tr",
        "ftilde_tt",
        g.mu1.clone() * &t / (g.mu.clone() * &g.mu),
    );
    b.add(1, "ftilde_tr", "ftilde_tr", g.mu1.clone());
    b.add(0, "ftilde_tr", "ftilde_tr", -(mu12.clone() / &g.mu));
    b.add(0, "ftilde_tr", "ftilde_rr", g.mu1.clone() * &t);
    b.add(
        0,
        "ftilde_rr",
        "ftilde_tt",
        Expr::num(-0.5) * &mu12 / (g.mu.clone() * &g.mu * &g.mu),
    );
    b.add(
        0,
        "ftilde_rr",
        "ftilde_tr",
        Expr::num(2.0) * &g.mu1 * &t / (g.mu.clone() * &g.mu),
    );
    b.add(1, "ftilde_rr", "ftilde_rr", Expr::num(3.0) * &g.mu1);
    b.add(
        0,
        "ftilde_rr",
        "ftilde_rr",
        Expr::num(0.5) * &mu12 / &g.mu + &g.mu2,
    );
    // Aspherical block: -2/r transport along the radial conormal plus the
    // 4/r^2 conormal contraction.
    let two_over_r = Expr::num(2.0) / &g.r;
    b.add(1, "ftilde_tt", "ftilde_tt", two_over_r.clone() * &g.mu);
    b.add(0, "ftilde_tt", "ftilde_tt", -(two_over_r.clone() * &g.mu1));
    b.add(1, "ftilde_tr", "ftilde_tr", two_over_r.clone() * &g.mu);
    b.add(
        0,
        "ftilde_tr",
        "ftilde_tr",
        Expr::num(-2.0) * &g.mu * g.inv(2),
    );
    b.add(1, "ftilde_rr", "ftilde_rr", two_over_r.clone() * &g.mu);
    b.add(0, "ftilde_rr", "ftilde_rr", two_over_r.clone() * &g.mu1);
    b.add(
        0,
        "ftilde_rr",
        "ftilde_rr",
        Expr::num(-4.0) * &g.mu * g.inv(2),
    );

    // Mixed block: static-factor wave operator on 1-forms, the conormal
    // contraction, and the scalar shift -(wave r)/r - mu/r^2.
    b.add(0, "f_t", "f_t", Expr::num(-0.5) * &g.mu2);
    b.add(0, "f_t", "f_r", g.mu1.clone() * &t);
    b.add(0, "f_r", "f_t", g.mu1.clone() * &t / (g.mu.clone() * &g.mu));
    b.add(1, "f_r", "f_r", Expr::num(2.0) * &g.mu1);
    b.add(0, "f_r", "f_r", Expr::num(0.5) * &g.mu2);
    b.add(0, "f_r", "f_r", Expr::num(-4.0) * &g.mu * g.inv(2));
    let scalar_shift = -(g.mu1.clone() / &g.r) - g.mu.clone() * g.inv(2);
    for name in &mixed {
        b.add(0, name, name, scalar_shift.clone());
    }

    // Spherical block: scalar wave first-order term, 2/r transport, -2 mu'/r.
    for name in &sph {
        b.add(1, name, name, g.mu1.clone());
        b.add(1, name, name, Expr::num(-2.0) * &g.mu / &g.r);
        b.add(0, name, name, Expr::num(-2.0) * &g.mu1 / &g.r);
    }

    // Off-diagonal couplings.
    b.add(0, "ftilde_tr", "f_t", Expr::num(2.0 * ll) * g.inv(3));
    b.add(0, "ftilde_rr", "f_r", Expr::num(4.0 * ll) * g.inv(3));
    b.add(0, "ftilde_rr", "H_L", Expr::num(4.0) * g.inv(4));
    b.add(0, "f_t", "ftilde_tr", Expr::num(2.0) * &g.mu / &g.r);
    b.add(0, "f_r", "ftilde_rr", Expr::num(2.0) * &g.mu / &g.r);
    b.add(0, "f_r", "H_L", Expr::num(-2.0) * g.inv(3));
    b.add(0, "f_r", "H_T", Expr::num(ll - 2.0) * g.inv(3));
    b.add(0, "H_L", "ftilde_rr", Expr::num(2.0) * &g.mu * &g.mu);
    b.add(0, "H_L", "f_r", Expr::num(-2.0 * ll) * &g.mu / &g.r);
    b.add(0, "H_T", "f_r", Expr::num(4.0) * &g.mu / &g.r);
    Ok(b.finish())
}

/// Twice the curvature term of the linearized Ricci operator.
fn op_curvature2(g: &Geom, sector: &Sector) -> Result<OpMatrix> {
    let slots = rank_slots(sector, 2)?;
    let mut b = Builder::new(slots.clone(), slots);
    let two_mu1_r = Expr::num(2.0) * &g.mu1 / &g.r;
    // Aspherical block: 2 mu'' (trace reversal) + 2 mu'/r.
    b.add(0, "ftilde_tt", "ftilde_tt", g.mu2.clone() + &two_mu1_r);
    b.add(0, "ftilde_tt", "ftilde_rr", g.mu2.clone() * &g.mu * &g.mu);
    b.add(
        0,
        "ftilde_tr",
        "ftilde_tr",
        Expr::num(2.0) * &g.mu2 + &two_mu1_r,
    );
    b.add(
        0,
        "ftilde_rr",
        "ftilde_tt",
        g.mu2.clone() / (g.mu.clone() * &g.mu),
    );
    b.add(0, "ftilde_rr", "ftilde_rr", g.mu2.clone() + &two_mu1_r);
    // Aspherical-spherical coupling through the spherical trace.
    b.add(
        0,
        "ftilde_tt",
        "H_L",
        Expr::num(2.0) * &g.mu1 * &g.mu * g.inv(3),
    );
    b.add(
        0,
        "ftilde_rr",
        "H_L",
        Expr::num(-2.0) * &g.mu1 / &g.mu * g.inv(3),
    );
    // Mixed block: scalar multiple of the identity (equal to mu'/r).
    let mixed_scalar = Expr::num(0.5) * &g.mu2
        + (g.mu.clone() - Expr::one()) * g.inv(2)
        + Expr::num(3.0) * &g.mu1 / &g.r;
    b.add(0, "f_t", "f_t", mixed_scalar.clone());
    b.add(0, "f_r", "f_r", mixed_scalar);
    // Spherical-aspherical coupling through the static-factor trace.
    b.add(0, "H_L", "ftilde_tt", g.mu1.clone() * &g.r / &g.mu);
    b.add(0, "H_L", "ftilde_rr", -(g.mu1.clone() * &g.r * &g.mu));
    // Spherical block.
    b.add(0, "H_L", "H_L", two_mu1_r.clone());
    b.add(
        0,
        "H_T",
        "H_T",
        two_mu1_r + Expr::num(4.0) * (g.mu.clone() - Expr::one()) * g.inv(2),
    );
    Ok(b.finish())
}

/// Zeroth-order damping modification of the symmetric gradient: with the
/// damping 1-form `c = chi(r) (dt0 - v dr)`, maps `w` to
/// `2 gamma c sym w - gamma g^-1(c, w) g`. The cutoff `chi` is 1 near the
/// horizon and vanishes beyond 3 mass.
fn op_damping(g: &Geom, sector: &Sector, gamma: f64, v: f64) -> Result<OpMatrix> {
    let mut b = Builder::new(rank_slots(sector, 2)?, rank_slots(sector, 1)?);
    if gamma == 0.0 {
        return Ok(b.finish());
    }
    let chi = Expr::smoothstep(2.5 * g.m, 3.0 * g.m, true);
    let ga = Expr::num(gamma);
    let ct = ga.clone() * &chi;
    let cr = ga * chi * (Expr::one() / &g.mu - Expr::num(v));
    b.add(0, "ftilde_tt", "T_t", ct.clone());
    b.add(0, "ftilde_tt", "T_r", cr.clone() * &g.mu * &g.mu);
    b.add(0, "ftilde_tr", "T_t", cr.clone());
    b.add(0, "ftilde_tr", "T_r", ct.clone());
    b.add(0, "ftilde_rr", "T_t", ct.clone() / (g.mu.clone() * &g.mu));
    b.add(0, "ftilde_rr", "T_r", cr.clone());
    b.add(0, "f_t", "L", ct.clone());
    b.add(0, "f_r", "L", cr.clone());
    b.add(0, "H_L", "T_t", ct * g.r.clone() * &g.r / &g.mu);
    b.add(0, "H_L", "T_r", -(cr * &g.mu * &g.r * &g.r));
    Ok(b.finish())
}

// ---------------------------------------------------------------------------
// Public operator type.
// ---------------------------------------------------------------------------

/// A sector-restricted stationary operator: a matrix of ODE operators in `r`
/// acting on the named components of `sector_in` and producing components of
/// `sector_out`, relative to a fixed time function and mode frequency.
#[derive(Clone, Debug)]
pub struct RadialOperator {
    params: BlackHoleParams,
    sector_in: Sector,
    sector_out: Sector,
    time_gauge: TimeFunctionKind,
    sigma: Complex64,
    mat: OpMatrix,
}

impl RadialOperator {
    pub fn sector_in(&self) -> Sector {
        self.sector_in
    }

    pub fn sector_out(&self) -> Sector {
        self.sector_out
    }

    pub fn time_gauge(&self) -> TimeFunctionKind {
        self.time_gauge
    }

    pub fn sigma(&self) -> Complex64 {
        self.sigma
    }

    /// Highest power of `d/dr` (structural; compositions that vanish only
    /// numerically keep their formal order).
    pub fn order(&self) -> usize {
        self.mat.order()
    }

    pub fn rows(&self) -> usize {
        self.mat.rows
    }

    pub fn cols(&self) -> usize {
        self.mat.cols
    }

    /// Coefficient of `(d/dr)^k` in entry `(i, j)`, evaluated at radius `r`;
    /// zero beyond the operator order.
    pub fn coefficient(&self, k: usize, i: usize, j: usize, r: f64) -> Complex64 {
        self.mat.at(k, i, j).eval_re(r)
    }

    fn same_frame(&self, other: &RadialOperator) -> Result<()> {
        if self.params != other.params || self.sigma != other.sigma {
            return Err(Error::Invalid(
                "operator algebra requires equal background and frequency",
            ));
        }
        if self.time_gauge != other.time_gauge {
            return Err(Error::GaugeMismatch);
        }
        Ok(())
    }

    /// Entry-wise sum; sectors, gauge, background, and frequency must agree.
    pub fn plus(&self, other: &RadialOperator) -> Result<RadialOperator> {
        self.same_frame(other)?;
        if self.sector_in != other.sector_in || self.sector_out != other.sector_out {
            return Err(Error::SectorMismatch);
        }
        Ok(RadialOperator {
            mat: self.mat.plus(&other.mat),
            ..self.clone()
        })
    }

    pub fn minus(&self, other: &RadialOperator) -> Result<RadialOperator> {
        self.plus(&other.scaled(Complex64::new(-1.0, 0.0)))
    }

    /// Multiply by a constant.
    pub fn scaled(&self, s: Complex64) -> RadialOperator {
        RadialOperator {
            mat: self.mat.scaled(Expr::complex(s)),
            ..self.clone()
        }
    }

    /// Operator composition `self . inner` (apply `inner` first). The inner
    /// output sector must equal this operator's input sector.
    pub fn compose(&self, inner: &RadialOperator) -> Result<RadialOperator> {
        self.same_frame(inner)?;
        if inner.sector_out != self.sector_in {
            return Err(Error::SectorMismatch);
        }
        Ok(RadialOperator {
            params: self.params,
            sector_in: inner.sector_in,
            sector_out: self.sector_out,
            time_gauge: self.time_gauge,
            sigma: self.sigma,
            mat: self.mat.compose(&inner.mat),
        })
    }

    /// Apply to a profile. Sampled output lives on the profile grid (or on
    /// [`default_grid`] when a closed form meets a finite-difference scheme);
    /// `ClosedFormDiff` keeps closed forms closed.
    pub fn apply(&self, profile: &RadialProfile, scheme: DiffScheme) -> Result<RadialProfile> {
        if profile.sector != self.sector_in {
            return Err(Error::SectorMismatch);
        }
        if profile.time_gauge != self.time_gauge {
            return Err(Error::GaugeMismatch);
        }
        match (&profile.repr, scheme) {
            (Repr::ClosedForm(c), DiffScheme::ClosedFormDiff) => Ok(RadialProfile {
                sector: self.sector_out,
                time_gauge: self.time_gauge,
                repr: Repr::ClosedForm(self.mat.apply_exprs(c)),
            }),
            (Repr::Sampled { .. }, DiffScheme::ClosedFormDiff) => Err(Error::NotApplicable(
                "exact differentiation needs a closed-form profile",
            )),
            (Repr::ClosedForm(_), _) => {
                let sampled = profile.sample(&default_grid(&self.params))?;
                self.apply(&sampled, scheme)
            }
            (Repr::Sampled { grid, values }, _) => {
                let width = scheme.stencil_width();
                let order = self.mat.order();
                if order >= width {
                    return Err(Error::Invalid(
                        "stencil too narrow for the operator order",
                    ));
                }
                if grid.len() < width {
                    return Err(Error::Invalid("grid shorter than the stencil"));
                }
                // derivs[k][j] is the k-th derivative of component j.
                let mut derivs: Vec<Vec<Vec<Complex64>>> = vec![values.clone()];
                for k in 1..=order {
                    let dk = values
                        .iter()
                        .map(|v| grid::differentiate(grid, v, k, width))
                        .collect();
                    derivs.push(dk);
                }
                let n = grid.len();
                let mut out = vec![vec![Complex64::ZERO; n]; self.mat.rows];
                for (k, dk) in derivs.iter().enumerate() {
                    for (i, row) in out.iter_mut().enumerate() {
                        for (j, dkj) in dk.iter().enumerate() {
                            let a = self.mat.at(k, i, j);
                            if a.is_zero() {
                                continue;
                            }
                            for (idx, rn) in grid.r.iter().enumerate() {
                                row[idx] += a.eval_re(*rn) * dkj[idx];
                            }
                        }
                    }
                }
                Ok(RadialProfile {
                    sector: self.sector_out,
                    time_gauge: self.time_gauge,
                    repr: Repr::Sampled {
                        grid: grid.clone(),
                        values: out,
                    },
                })
            }
        }
    }

    /// Express the operator relative to another time function. Exact: the
    /// shift between time functions depends on `r` alone, so `d/dr` picks up
    /// `-i sigma` times the shift slope and the component frames mix by a
    /// triangular matrix. Application results transform covariantly, i.e.
    /// conjugation commutes with [`RadialOperator::apply`] on converted
    /// profiles.
    pub fn conjugate_time(&self, target: TimeFunctionKind) -> Result<RadialOperator> {
        if target == self.time_gauge {
            return Ok(self.clone());
        }
        let w = offset_slope(target, &self.params)? - offset_slope(self.time_gauge, &self.params)?;
        // Substitute d/dr -> d/dr - i sigma w into the matrix polynomial.
        // powers[k] holds the scalar expansion of (d/dr - i sigma w)^k.
        let shift = Expr::complex(Complex64::new(0.0, -1.0) * self.sigma) * &w;
        let max_k = self.mat.layers();
        let mut powers: Vec<Vec<Expr>> = vec![vec![Expr::one()]];
        for k in 1..max_k {
            let prev = &powers[k - 1];
            let mut next = vec![Expr::zero(); k + 1];
            for (j, c) in prev.iter().enumerate() {
                next[j + 1] = next[j + 1].clone() + c.clone();
                next[j] = next[j].clone() + c.diff() + shift.clone() * c.clone();
            }
            powers.push(next);
        }
        let mut sub = OpMatrix::zeros(self.mat.rows, self.mat.cols);
        for (k, pk) in powers.iter().enumerate().take(self.mat.layers()) {
            for i in 0..self.mat.rows {
                for j in 0..self.mat.cols {
                    let a = self.mat.at(k, i, j);
                    if a.is_zero() {
                        continue;
                    }
                    for (p, c) in pk.iter().enumerate() {
                        sub.add_to(p, i, j, a.clone() * c.clone());
                    }
                }
            }
        }
        let s_out = frame_matrix(&self.sector_out, &w);
        let s_in_inv = frame_matrix(&self.sector_in, &(-w.clone()));
        Ok(RadialOperator {
            time_gauge: target,
            mat: s_out.compose(&sub).compose(&s_in_inv),
            ..self.clone()
        })
    }
}

/// Component mixing under the chart change `t_new = t_old + F(r)` with
/// `F' = w`: `dt_old = dt_new - w dr`, so lower `t`-legs shed `w` times the
/// corresponding `r`-leg. `frame_matrix(s, -w)` is the exact inverse.
fn frame_matrix(sector: &Sector, w: &Expr) -> OpMatrix {
    let slots = Slots::sector(sector);
    let mut b = Builder::new(slots.clone(), slots.clone());
    for name in &slots.names {
        b.add(0, name, name, Expr::one());
    }
    b.add(0, "T_r", "T_t", -w.clone());
    b.add(0, "ftilde_tr", "ftilde_tt", -w.clone());
    b.add(0, "ftilde_rr", "ftilde_tt", w.clone() * w.clone());
    b.add(0, "ftilde_rr", "ftilde_tr", Expr::num(-2.0) * w.clone());
    b.add(0, "f_r", "f_t", -w.clone());
    b.finish()
}

/// Derivative in `r` of the offset from the static time function.
fn offset_slope(kind: TimeFunctionKind, params: &BlackHoleParams) -> Result<Expr> {
    params.require_static()?;
    let g = Geom::new(params);
    let m = g.m;
    Ok(match kind {
        TimeFunctionKind::Static => Expr::zero(),
        TimeFunctionKind::Null0 => Expr::one() / &g.mu,
        TimeFunctionKind::ChiRegular => {
            let chi0 = Expr::smoothstep(3.0 * m, 4.0 * m, false);
            (Expr::one() - chi0) / &g.mu
        }
        TimeFunctionKind::Star => {
            let chi = Expr::smoothstep(3.0 * m, 4.0 * m, true);
            let rstar = g.r.clone() + Expr::num(2.0 * m) * (g.r.clone() - Expr::num(2.0 * m)).ln();
            Expr::num(2.0) * chi.diff() * rstar
                + (Expr::num(2.0) * chi - Expr::one()) / &g.mu
        }
    })
}

/// Default radial grid: geometric progression from just outside the horizon
/// to the wave zone, clustering points where coefficients vary fastest.
pub fn default_grid(params: &BlackHoleParams) -> Grid {
    let m = params.mass();
    Grid::geometric(2.0 * m * (1.0 + 1e-6), 1e4 * m, 512)
}

// ---------------------------------------------------------------------------
// Profiles.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Repr {
    ClosedForm(Vec<Expr>),
    Sampled {
        grid: Grid,
        values: Vec<Vec<Complex64>>,
    },
}

/// Radial mode data for one sector: one function of `r` per component slot,
/// either closed-form or sampled on a grid, tagged with the time function its
/// components refer to.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    sector: Sector,
    time_gauge: TimeFunctionKind,
    repr: Repr,
}

impl RadialProfile {
    pub fn closed_form(
        sector: Sector,
        time_gauge: TimeFunctionKind,
        components: Vec<Expr>,
    ) -> Result<Self> {
        if components.len() != sector.component_count() {
            return Err(Error::SectorMismatch);
        }
        Ok(RadialProfile {
            sector,
            time_gauge,
            repr: Repr::ClosedForm(components),
        })
    }

    pub fn sampled(
        sector: Sector,
        time_gauge: TimeFunctionKind,
        grid: Grid,
        values: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if values.len() != sector.component_count() {
            return Err(Error::SectorMismatch);
        }
        if grid.len() < 2 || !grid.r.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Invalid("grid must be strictly increasing"));
        }
        if values.iter().any(|v| v.len() != grid.len()) {
            return Err(Error::Invalid("component length must match the grid"));
        }
        Ok(RadialProfile {
            sector,
            time_gauge,
            repr: Repr::Sampled { grid, values },
        })
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn time_gauge(&self) -> TimeFunctionKind {
        self.time_gauge
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, Repr::ClosedForm(_))
    }

    pub fn grid(&self) -> Option<&Grid> {
        match &self.repr {
            Repr::Sampled { grid, .. } => Some(grid),
            Repr::ClosedForm(_) => None,
        }
    }

    pub fn values(&self) -> Option<&[Vec<Complex64>]> {
        match &self.repr {
            Repr::Sampled { values, .. } => Some(values),
            Repr::ClosedForm(_) => None,
        }
    }

    pub fn exprs(&self) -> Option<&[Expr]> {
        match &self.repr {
            Repr::ClosedForm(c) => Some(c),
            Repr::Sampled { .. } => None,
        }
    }

    /// Components at one radius (closed forms only).
    pub fn evaluate(&self, r: f64) -> Result<Vec<Complex64>> {
        match &self.repr {
            Repr::ClosedForm(c) => Ok(c.iter().map(|e| e.eval_re(r)).collect()),
            Repr::Sampled { .. } => Err(Error::NotApplicable(
                "pointwise evaluation needs a closed-form profile",
            )),
        }
    }

    /// Sample a closed form onto a grid.
    pub fn sample(&self, grid: &Grid) -> Result<Self> {
        match &self.repr {
            Repr::ClosedForm(c) => {
                let values = c
                    .iter()
                    .map(|e| grid.r.iter().map(|r| e.eval_re(*r)).collect())
                    .collect();
                RadialProfile::sampled(self.sector, self.time_gauge, grid.clone(), values)
            }
            Repr::Sampled { .. } => Err(Error::NotApplicable(
                "sampling starts from a closed-form profile",
            )),
        }
    }

    /// Largest component magnitude over the sample grid.
    pub fn max_abs(&self) -> Option<f64> {
        match &self.repr {
            Repr::Sampled { values, .. } => Some(
                values
                    .iter()
                    .flat_map(|v| v.iter().map(|z| z.norm()))
                    .fold(0.0, f64::max),
            ),
            Repr::ClosedForm(_) => None,
        }
    }

    /// Re-express the profile relative to another time function, for the mode
    /// frequency `sigma`: components mix by the frame matrix and pick up the
    /// phase `e^{i sigma F}` with `F` the offset between the time functions.
    /// Closed forms convert only at `sigma = 0` (the phase is not rational);
    /// sampled profiles convert pointwise for any frequency.
    pub fn convert_time_gauge(
        &self,
        target: TimeFunctionKind,
        params: &BlackHoleParams,
        sigma: Complex64,
    ) -> Result<Self> {
        if target == self.time_gauge {
            return Ok(self.clone());
        }
        let w = offset_slope(target, params)? - offset_slope(self.time_gauge, params)?;
        let frame = frame_matrix(&self.sector, &w);
        match &self.repr {
            Repr::ClosedForm(c) => {
                if sigma != Complex64::ZERO {
                    return Err(Error::NotApplicable(
                        "closed-form gauge conversion needs sigma = 0",
                    ));
                }
                Ok(RadialProfile {
                    sector: self.sector,
                    time_gauge: target,
                    repr: Repr::ClosedForm(frame.apply_exprs(c)),
                })
            }
            Repr::Sampled { grid, values } => {
                let n = grid.len();
                let k = values.len();
                let mut out = vec![vec![Complex64::ZERO; n]; k];
                for (idx, rn) in grid.r.iter().enumerate() {
                    let f = background::time_function_offset(
                        target,
                        self.time_gauge,
                        params,
                        *rn,
                    )?;
                    let phase = (Complex64::new(0.0, 1.0) * sigma * f).exp();
                    for (i, row) in out.iter_mut().enumerate().take(k) {
                        let mut acc = Complex64::ZERO;
                        for (j, v) in values.iter().enumerate() {
                            let c = frame.at(0, i, j);
                            if c.is_zero() {
                                continue;
                            }
                            acc += c.eval_re(*rn) * v[idx];
                        }
                        row[idx] = acc * phase;
                    }
                }
                RadialProfile::sampled(self.sector, target, grid.clone(), out)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Public constructors.
// ---------------------------------------------------------------------------

fn operator(
    params: &BlackHoleParams,
    sector_in: Sector,
    sector_out: Sector,
    sigma: Complex64,
    mat: OpMatrix,
) -> RadialOperator {
    RadialOperator {
        params: *params,
        sector_in,
        sector_out,
        time_gauge: TimeFunctionKind::Static,
        sigma,
        mat,
    }
}

/// Tensor wave operator on a sector of the given rank. Built from the
/// first-order factorization through the exterior derivative and divergence
/// for ranks 0 and 1, and from the block decomposition on symmetric
/// 2-tensors for rank 2.
pub fn wave_operator(
    params: &BlackHoleParams,
    rank: u8,
    sector: &Sector,
    sigma: Complex64,
) -> Result<RadialOperator> {
    params.require_static()?;
    if rank != sector.rank() {
        return Err(Error::SectorMismatch);
    }
    let g = Geom::new(params);
    let mat = match rank {
        0 => op_div1(&g, sector, sigma)?.compose(&op_d0(sector, sigma)?),
        1 => {
            let dd = op_div_two_form(&g, sector, sigma)?.compose(&op_d1(&g, sector, sigma)?);
            match sector.parity() {
                Parity::Scalar => {
                    dd.plus(&op_d0(sector, sigma)?.compose(&op_div1(&g, sector, sigma)?))
                }
                Parity::Vector => dd,
            }
        }
        2 => op_wave2(&g, sector, sigma)?,
        _ => return Err(Error::InvalidSector("rank capped at 2")),
    };
    Ok(operator(params, *sector, *sector, sigma, mat))
}

/// Linearized Ricci operator on a rank-2 sector: half the wave operator,
/// minus the symmetric gradient of the trace-reversed divergence, plus the
/// curvature term.
pub fn linearized_ricci(
    params: &BlackHoleParams,
    sector: &Sector,
    sigma: Complex64,
) -> Result<RadialOperator> {
    params.require_static()?;
    if sector.rank() != 2 {
        return Err(Error::NotApplicable(
            "linearized Ricci acts on rank-2 sectors",
        ));
    }
    let g = Geom::new(params);
    let half_wave = op_wave2(&g, sector, sigma)?.scaled(Expr::num(0.5));
    let gauge_part =
        op_sym_grad(&g, sector, sigma)?.compose(&op_div_trace_reversed(&g, sector, sigma)?);
    let curv = op_curvature2(&g, sector)?.scaled(Expr::num(0.5));
    let mat = half_wave
        .plus(&gauge_part.scaled(Expr::num(-1.0)))
        .plus(&curv);
    Ok(operator(params, *sector, *sector, sigma, mat))
}

/// Gauge-fixed linearization with constraint damping: the wave operator plus
/// twice the curvature term plus twice the damping modification composed with
/// the trace-reversed divergence. At `gamma = 0` this is twice the linearized
/// Ricci operator plus twice the symmetric gradient of the trace-reversed
/// divergence.
pub fn gauge_fixed(
    params: &BlackHoleParams,
    sector: &Sector,
    sigma: Complex64,
    gamma: f64,
    v: f64,
) -> Result<RadialOperator> {
    params.require_static()?;
    if sector.rank() != 2 {
        return Err(Error::NotApplicable(
            "the gauge-fixed operator acts on rank-2 sectors",
        ));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain("damping strength must be nonnegative"));
    }
    let g = Geom::new(params);
    let mut mat = op_wave2(&g, sector, sigma)?.plus(&op_curvature2(&g, sector)?);
    if gamma != 0.0 {
        let e = op_damping(&g, sector, gamma, v)?;
        mat = mat.plus(
            &e.compose(&op_div_trace_reversed(&g, sector, sigma)?)
                .scaled(Expr::num(2.0)),
        );
    }
    Ok(operator(params, *sector, *sector, sigma, mat))
}

/// Constraint propagation operator on a rank-1 sector: twice the
/// trace-reversed divergence composed with the damped symmetric gradient. At
/// `gamma = 0` it coincides with the wave operator on 1-forms.
pub fn constraint_propagation(
    params: &BlackHoleParams,
    sector: &Sector,
    sigma: Complex64,
    gamma: f64,
    v: f64,
) -> Result<RadialOperator> {
    params.require_static()?;
    if sector.rank() != 1 {
        return Err(Error::NotApplicable(
            "constraint propagation acts on rank-1 sectors",
        ));
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain("damping strength must be nonnegative"));
    }
    let g = Geom::new(params);
    let rank2 = Sector::new(sector.parity(), sector.l(), 2)?;
    let damped = op_sym_grad(&g, sector, sigma)?.plus(&op_damping(&g, sector, gamma, v)?);
    let mat = op_div_trace_reversed(&g, &rank2, sigma)?
        .compose(&damped)
        .scaled(Expr::num(2.0));
    Ok(operator(params, *sector, *sector, sigma, mat))
}

/// Divergence of the trace reversal, rank 2 to rank 1.
pub fn div_trace_reversed(
    params: &BlackHoleParams,
    sector: &Sector,
    sigma: Complex64,
) -> Result<RadialOperator> {
    params.require_static()?;
    if sector.rank() != 2 {
        return Err(Error::NotApplicable(
            "the trace-reversed divergence acts on rank-2 sectors",
        ));
    }
    let g = Geom::new(params);
    let out = Sector::new(sector.parity(), sector.l(), 1)?;
    let mat = op_div_trace_reversed(&g, sector, sigma)?;
    Ok(operator(params, *sector, out, sigma, mat))
}

/// Symmetric gradient, rank 1 to rank 2.
pub fn symmetric_gradient(
    params: &BlackHoleParams,
    sector: &Sector,
    sigma: Complex64,
) -> Result<RadialOperator> {
    params.require_static()?;
    if sector.rank() != 1 {
        return Err(Error::NotApplicable(
            "the symmetric gradient acts on rank-1 sectors",
        ));
    }
    let g = Geom::new(params);
    let out = Sector::new(sector.parity(), sector.l(), 2)?;
    let mat = op_sym_grad(&g, sector, sigma)?;
    Ok(operator(params, *sector, out, sigma, mat))
}
