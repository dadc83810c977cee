//! Tensor spherical-harmonic sectors on the unit sphere.
//!
//! Fields on the product of an aspherical half-plane with the sphere split
//! into scalar-type and vector-type pieces built from degree-l harmonics S
//! (eigenfunctions of the positive Laplacian with eigenvalue l(l+1)) and
//! their Hodge duals V = star(dS). A [`Sector`] names one such piece
//! together with the tensor rank of the spacetime field; its finitely many
//! aspherical coefficient functions are the component slots that the radial
//! operator layer acts on.
//!
//! The sphere-operator algebra on these building blocks closes with exact
//! integer constants (l(l+1) is always even, so every half-integer constant
//! in the calculus is an integer); [`sphere_eigen`] returns them.
//! [`verify_sphere_identities`] re-derives the whole identity table
//! numerically with finite-difference covariant derivatives on a staggered
//! latitude grid, as an independent floating-point cross-check.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
// f64 math via libm in builds without std; the inherent std methods shadow
// the trait whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Parity class of a spherical-harmonic sector.
///
/// Scalar-type tensors are built from a degree-l harmonic S and its
/// gradient; vector-type tensors from the divergence-free dual V = star(dS).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Built from S and dS.
    Scalar,
    /// Built from V and sym-grad V; requires l >= 1.
    Vector,
}

/// One spherical-harmonic sector: parity class, harmonic degree, and the
/// tensor rank of the spacetime field being decomposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Sector {
    parity: Parity,
    l: u32,
    rank: u8,
}

impl Sector {
    /// Validates and builds a sector. Vector parity requires l >= 1;
    /// rank-0 (functions) exists only in scalar parity; rank <= 2.
    pub fn new(parity: Parity, l: u32, rank: u8) -> Result<Self> {
        if rank > 2 {
            return Err(Error::InvalidSector("vector parity needs l >= 1 and rank >= 1; rank capped at 2"));
        }
        if parity == Parity::Vector && (l == 0 || rank == 0) {
            return Err(Error::InvalidSector("vector parity needs l >= 1 and rank >= 1; rank capped at 2"));
        }
        Ok(Self { parity, l, rank })
    }

    /// Scalar-parity sector of degree `l` and rank `rank`.
    pub fn scalar(l: u32, rank: u8) -> Result<Self> {
        Self::new(Parity::Scalar, l, rank)
    }

    /// Vector-parity sector of degree `l` and rank `rank`.
    pub fn vector(l: u32, rank: u8) -> Result<Self> {
        Self::new(Parity::Vector, l, rank)
    }

    /// Parity class.
    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Harmonic degree l.
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Tensor rank of the spacetime field (0, 1, or 2).
    pub fn rank(&self) -> u8 {
        self.rank
    }

    /// The squared angular wavenumber: l(l+1) for scalar parity,
    /// l(l+1) - 1 for vector parity.
    pub fn k_squared(&self) -> i64 {
        let ll = self.l as i64 * (self.l as i64 + 1);
        match self.parity {
            Parity::Scalar => ll,
            Parity::Vector => ll - 1,
        }
    }

    /// Number of aspherical coefficient functions carried by this sector.
    pub fn component_count(&self) -> usize {
        self.components().len()
    }

    /// The ordered component slots for this sector.
    pub fn components(&self) -> SectorComponents {
        let names: Vec<&'static str> = match (self.parity, self.rank) {
            (Parity::Scalar, 0) => vec!["u"],
            (Parity::Scalar, 1) => {
                if self.l == 0 {
                    vec!["T_t", "T_r"]
                } else {
                    vec!["T_t", "T_r", "L"]
                }
            }
            (Parity::Scalar, 2) => match self.l {
                0 => vec!["ftilde_tt", "ftilde_tr", "ftilde_rr", "H_L"],
                1 => vec!["ftilde_tt", "ftilde_tr", "ftilde_rr", "f_t", "f_r", "H_L"],
                _ => vec![
                    "ftilde_tt",
                    "ftilde_tr",
                    "ftilde_rr",
                    "f_t",
                    "f_r",
                    "H_L",
                    "H_T",
                ],
            },
            (Parity::Vector, 1) => vec!["L"],
            (Parity::Vector, 2) => {
                if self.l == 1 {
                    vec!["f_t", "f_r"]
                } else {
                    vec!["f_t", "f_r", "H_T"]
                }
            }
            // Constructor rules out Vector rank 0 and rank > 2.
            _ => vec![],
        };
        SectorComponents { names }
    }
}

/// Ordered list of named aspherical coefficient slots of a sector.
///
/// The order is canonical and shared with the radial operator layer:
/// aspherical block (tt, tr, rr for rank 2; t, r for rank 1), then the
/// mixed block (t, r), then the spherical block (trace, then trace-free).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectorComponents {
    names: Vec<&'static str>,
}

impl SectorComponents {
    /// Slot names in canonical order.
    pub fn names(&self) -> &[&'static str] {
        &self.names
    }

    /// Number of slots.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// True when the sector carries no slots (never, for valid sectors).
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Index of a named slot, if present.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }
}

/// Sphere-operator whose exact constants [`sphere_eigen`] reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereOp {
    /// Tensor Laplacian (positive convention) on each harmonic block.
    Laplacian,
    /// Divergence of the symmetric gradient on the sector's 1-form block.
    DivOfSymGrad,
    /// Divergence of the trace-free Hessian block (scalar parity, l >= 2).
    DivOfTraceFreeHess,
    /// Coefficients of sym-grad dS on the (trace, trace-free) blocks.
    SymGradSplit,
}

/// Exact integer constants of the sphere-operator calculus.
///
/// All constants are integers because l(l+1) is even, so the half-integer
/// expressions in the identity table are exact in integer arithmetic.
///
/// Per operation:
/// - `Laplacian`: one eigenvalue per harmonic block of the sector, in
///   canonical block order. Scalar rank 0: `[l(l+1)]`. Scalar rank 1:
///   `[l(l+1), l(l+1)-1]` for the aspherical and gradient blocks (the
///   gradient entry is dropped at l = 0). Scalar rank 2:
///   `[l(l+1), l(l+1)-1, l(l+1), l(l+1)-4]` for the aspherical, mixed,
///   trace, and trace-free blocks (the mixed entry is dropped at l = 0,
///   the trace-free entry at l <= 1). Vector rank 1: `[l(l+1)-1]`.
///   Vector rank 2: `[l(l+1)-1, l(l+1)-4]` (trace-free dropped at l = 1).
/// - `DivOfSymGrad`: `[(l(l+1)-2)/2]` on V; `[l(l+1)-1]` on dS.
/// - `DivOfTraceFreeHess`: `[(l(l+1)-2)/2]`, scalar parity rank 2, l >= 2.
/// - `SymGradSplit`: `[-l(l+1)/2, 1]` as coefficients of the trace and
///   trace-free blocks in sym-grad dS (scalar parity rank 1, l >= 1; the
///   trace-free coefficient is dropped at l = 1 where that block vanishes).
pub fn sphere_eigen(op: SphereOp, sector: Sector) -> Result<Vec<i64>> {
    let l = sector.l() as i64;
    let ll = l * (l + 1);
    match op {
        SphereOp::Laplacian => Ok(match (sector.parity(), sector.rank()) {
            (Parity::Scalar, 0) => vec![ll],
            (Parity::Scalar, 1) => {
                if l == 0 {
                    vec![ll]
                } else {
                    vec![ll, ll - 1]
                }
            }
            (Parity::Scalar, 2) => match l {
                0 => vec![ll, ll],
                1 => vec![ll, ll - 1, ll],
                _ => vec![ll, ll - 1, ll, ll - 4],
            },
            (Parity::Vector, 1) => vec![ll - 1],
            (Parity::Vector, 2) => {
                if l == 1 {
                    vec![ll - 1]
                } else {
                    vec![ll - 1, ll - 4]
                }
            }
            _ => return Err(Error::InvalidSector("unreachable sector shape")),
        }),
        SphereOp::DivOfSymGrad => match (sector.parity(), sector.rank()) {
            (Parity::Vector, 1) => Ok(vec![(ll - 2) / 2]),
            (Parity::Scalar, 1) if l >= 1 => Ok(vec![ll - 1]),
            _ => Err(Error::NotApplicable("no such operator block in this sector")),
        },
        SphereOp::DivOfTraceFreeHess => match (sector.parity(), sector.rank()) {
            (Parity::Scalar, 2) if l >= 2 => Ok(vec![(ll - 2) / 2]),
            _ => Err(Error::NotApplicable("no such operator block in this sector")),
        },
        SphereOp::SymGradSplit => match (sector.parity(), sector.rank()) {
            (Parity::Scalar, 1) if l >= 2 => Ok(vec![-ll / 2, 1]),
            (Parity::Scalar, 1) if l == 1 => Ok(vec![-ll / 2]),
            _ => Err(Error::NotApplicable("no such operator block in this sector")),
        },
    }
}

/// One line of the numerical identity check: identity name and the maximum
/// absolute residual over the grid.
#[derive(Clone, Debug)]
pub struct IdentityResidual {
    /// Stable identity name.
    pub name: &'static str,
    /// Max-norm residual over all grid nodes and tensor components.
    pub residual: f64,
}

/// Residual report of [`verify_sphere_identities`].
#[derive(Clone, Debug)]
pub struct SphereIdentityReport {
    /// Harmonic degree checked.
    pub l: u32,
    /// Number of latitude nodes.
    pub resolution: usize,
    /// Per-identity max residuals.
    pub residuals: Vec<IdentityResidual>,
}

impl SphereIdentityReport {
    /// Largest residual in the report.
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.residual))
    }

    /// Residual of a named identity, if present.
    pub fn residual(&self, name: &str) -> Option<f64> {
        self.residuals
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.residual)
    }
}

/// Axisymmetric tensor field on the latitude grid: one value array per
/// component multi-index (slot bit 0 = theta, 1 = phi; the first slot is
/// the highest bit).
struct Field {
    rank: usize,
    comp: Vec<Vec<f64>>,
}

impl Field {
    fn zeros(rank: usize, n: usize) -> Self {
        Self {
            rank,
            comp: vec![vec![0.0; n]; 1 << rank],
        }
    }
}

/// Staggered latitude grid (no pole nodes) with the trigonometric arrays
/// and finite-difference stencils the covariant calculus needs.
struct LatGrid {
    theta: Vec<f64>,
    sin: Vec<f64>,
    cos: Vec<f64>,
    h: f64,
}

impl LatGrid {
    fn new(n: usize) -> Self {
        let h = core::f64::consts::PI / n as f64;
        let theta: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        let sin = theta.iter().map(|t| t.sin()).collect();
        let cos = theta.iter().map(|t| t.cos()).collect();
        Self { theta, sin, cos, h }
    }

    fn len(&self) -> usize {
        self.theta.len()
    }

    /// First derivative in theta via centered sixth-order stencils.
    ///
    /// The staggered grid mirrors exactly across both poles, and coordinate
    /// components of smooth axisymmetric tensors are even or odd there
    /// (parity -1 per theta slot), so ghost nodes close the stencil at the
    /// ends without one-sided differences. High uniform pointwise order
    /// keeps nested applications at least second-order accurate even where
    /// Christoffel factors grow like the squared inverse pole distance.
    fn deriv(&self, v: &[f64], parity: f64) -> Vec<f64> {
        let n = self.len();
        let at = |j: isize| -> f64 {
            if j < 0 {
                parity * v[(-1 - j) as usize]
            } else if j as usize >= n {
                parity * v[2 * n - 1 - j as usize]
            } else {
                v[j as usize]
            }
        };
        let mut out = vec![0.0; n];
        for (j, o) in out.iter_mut().enumerate() {
            let j = j as isize;
            *o = (-at(j - 3) + 9.0 * at(j - 2) - 45.0 * at(j - 1) + 45.0 * at(j + 1)
                - 9.0 * at(j + 2)
                + at(j + 3))
                / (60.0 * self.h);
        }
        out
    }
}

/// Reflection parity of a component across the poles: -1 per theta slot.
fn pole_parity(rank: usize, idx: usize) -> f64 {
    let theta_slots = rank - (idx.count_ones() as usize);
    if theta_slots % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Covariant derivative: prepends the derivative slot. Axisymmetry kills
/// phi-derivatives but not the Christoffel terms sourced by the phi slot.
fn cov_deriv(g: &LatGrid, t: &Field) -> Field {
    let n = g.len();
    let k = t.rank;
    let mut out = Field::zeros(k + 1, n);
    for idx in 0..(1usize << k) {
        // Partial derivative part: only the theta row of the new slot.
        out.comp[idx] = g.deriv(&t.comp[idx], pole_parity(k, idx));
        // Christoffel corrections: Gamma^theta_{phi phi} = -sin cos,
        // Gamma^phi_{theta phi} = Gamma^phi_{phi theta} = cos/sin.
        for b in 0..2usize {
            let dst = (b << k) | idx;
            for s in 0..k {
                let bit = k - 1 - s;
                let a = (idx >> bit) & 1;
                // -Gamma^d_{b a} T[... slot s = d ...]
                for d in 0..2usize {
                    let coeff_nonzero = (d == 0 && b == 1 && a == 1)
                        || (d == 1 && b == 0 && a == 1)
                        || (d == 1 && b == 1 && a == 0);
                    if !coeff_nonzero {
                        continue;
                    }
                    let src = (idx & !(1 << bit)) | (d << bit);
                    for j in 0..n {
                        let gamma = if d == 0 {
                            -g.sin[j] * g.cos[j]
                        } else {
                            g.cos[j] / g.sin[j]
                        };
                        out.comp[dst][j] -= gamma * t.comp[src][j];
                    }
                }
            }
        }
    }
    out
}

/// Contracts the first two slots with the inverse metric.
fn trace_first_two(g: &LatGrid, t: &Field) -> Field {
    let n = g.len();
    let k = t.rank - 2;
    let mut out = Field::zeros(k, n);
    for idx in 0..(1usize << k) {
        let tt = &t.comp[idx];
        let pp = &t.comp[(0b11 << k) | idx];
        for j in 0..n {
            out.comp[idx][j] = tt[j] + pp[j] / (g.sin[j] * g.sin[j]);
        }
    }
    out
}

/// Positive tensor Laplacian: minus the traced second covariant derivative.
fn laplacian(g: &LatGrid, t: &Field) -> Field {
    let mut out = trace_first_two(g, &cov_deriv(g, &cov_deriv(g, t)));
    for c in &mut out.comp {
        for v in c {
            *v = -*v;
        }
    }
    out
}

/// Divergence with the negative-divergence sign convention: contracts the
/// derivative slot with the first tensor slot.
fn delta(g: &LatGrid, t: &Field) -> Field {
    let mut out = trace_first_two(g, &cov_deriv(g, t));
    for c in &mut out.comp {
        for v in c {
            *v = -*v;
        }
    }
    out
}

/// Symmetric gradient of a 1-form.
fn sym_grad(g: &LatGrid, w: &Field) -> Field {
    let grad = cov_deriv(g, w);
    let n = g.len();
    let mut out = Field::zeros(2, n);
    for a in 0..2usize {
        for b in 0..2usize {
            for j in 0..n {
                out.comp[(a << 1) | b][j] =
                    0.5 * (grad.comp[(a << 1) | b][j] + grad.comp[(b << 1) | a][j]);
            }
        }
    }
    out
}

/// Exterior derivative of a 1-form (antisymmetrized covariant derivative).
fn ext_deriv(g: &LatGrid, w: &Field) -> Field {
    let grad = cov_deriv(g, w);
    let n = g.len();
    let mut out = Field::zeros(2, n);
    for a in 0..2usize {
        for b in 0..2usize {
            for j in 0..n {
                out.comp[(a << 1) | b][j] =
                    grad.comp[(a << 1) | b][j] - grad.comp[(b << 1) | a][j];
            }
        }
    }
    out
}

/// Metric trace of a rank-2 field.
fn trace2(g: &LatGrid, t: &Field) -> Field {
    trace_first_two(g, t)
}

/// a*x + b*y, componentwise.
fn lin_comb(a: f64, x: &Field, b: f64, y: &Field) -> Field {
    let mut out = Field::zeros(x.rank, x.comp[0].len());
    for (i, c) in out.comp.iter_mut().enumerate() {
        for (j, v) in c.iter_mut().enumerate() {
            *v = a * x.comp[i][j] + b * y.comp[i][j];
        }
    }
    out
}

/// Scalar function times the round metric, as a rank-2 field.
fn times_metric(g: &LatGrid, u: &Field) -> Field {
    let n = g.len();
    let mut out = Field::zeros(2, n);
    for j in 0..n {
        out.comp[0b00][j] = u.comp[0][j];
        out.comp[0b11][j] = u.comp[0][j] * g.sin[j] * g.sin[j];
    }
    out
}

fn max_abs(t: &Field) -> f64 {
    t.comp
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Legendre polynomial P_l and its derivative, the grid representatives of
/// the degree-l harmonic (axisymmetric normalization P_l(cos theta)).
fn legendre(l: u32, c: f64) -> (f64, f64) {
    match l {
        0 => (1.0, 0.0),
        1 => (c, 1.0),
        2 => (1.5 * c * c - 0.5, 3.0 * c),
        3 => (2.5 * c * c * c - 1.5 * c, 7.5 * c * c - 1.5),
        _ => unreachable!("degree capped by verify_sphere_identities"),
    }
}

/// Re-derives the sphere-operator identity table numerically on a staggered
/// latitude grid with finite-difference covariant derivatives, for the
/// axisymmetric degree-l representatives S = P_l(cos theta) and
/// V = star(dS). Returns per-identity max residuals; identities whose
/// objects vanish identically at the given l are skipped.
///
/// Requires l <= 3 and at least 32 latitude nodes. Residuals of the
/// non-trivial identities shrink at second order in the grid spacing.
pub fn verify_sphere_identities(l: u32, resolution: usize) -> Result<SphereIdentityReport> {
    if l > 3 {
        return Err(Error::Domain("harmonic degree capped at 3 for grid checks"));
    }
    if resolution < 32 {
        return Err(Error::Domain("grid verification needs at least 32 nodes"));
    }
    let g = LatGrid::new(resolution);
    let n = g.len();
    let ll = (l * (l + 1)) as f64;

    // Representatives: scalar S, its gradient dS = S'(theta) d theta, and
    // the dual V = star(dS) with phi component sin(theta)^2 P_l'(cos).
    let mut s_fld = Field::zeros(0, n);
    let mut ds = Field::zeros(1, n);
    let mut v_fld = Field::zeros(1, n);
    for j in 0..n {
        let (p, dp) = legendre(l, g.cos[j]);
        s_fld.comp[0][j] = p;
        ds.comp[0b0][j] = -g.sin[j] * dp;
        v_fld.comp[0b1][j] = g.sin[j] * g.sin[j] * dp;
    }

    let mut out = Vec::new();
    let mut push = |name: &'static str, r: f64| out.push(IdentityResidual { name, residual: r });

    // Laplacian eigenvalue on S.
    push(
        "laplacian_scalar",
        max_abs(&lin_comb(1.0, &laplacian(&g, &s_fld), -ll, &s_fld)),
    );
    // Gradient of the constant harmonic vanishes.
    if l == 0 {
        push("gradient_l0", max_abs(&cov_deriv(&g, &s_fld)));
    }
    // Divergence of the pure-trace tensor S g.
    push(
        "div_of_trace_tensor",
        max_abs(&lin_comb(
            1.0,
            &delta(&g, &times_metric(&g, &s_fld)),
            1.0,
            &ds,
        )),
    );
    // Laplacian commutes with multiplication by the parallel metric.
    push(
        "laplacian_pure_trace",
        max_abs(&lin_comb(
            1.0,
            &laplacian(&g, &times_metric(&g, &s_fld)),
            -ll,
            &times_metric(&g, &s_fld),
        )),
    );

    if l >= 1 {
        // Tensor Laplacian eigenvalues on the two 1-form types.
        push(
            "laplacian_grad",
            max_abs(&lin_comb(1.0, &laplacian(&g, &ds), -(ll - 1.0), &ds)),
        );
        push(
            "laplacian_vector",
            max_abs(&lin_comb(1.0, &laplacian(&g, &v_fld), -(ll - 1.0), &v_fld)),
        );
        // V is divergence-free; dS recovers the scalar eigenvalue.
        push("coclosed_vector", max_abs(&delta(&g, &v_fld)));
        push(
            "div_of_grad",
            max_abs(&lin_comb(1.0, &delta(&g, &ds), -ll, &s_fld)),
        );
        // Trace of the symmetric gradient of dS.
        push(
            "sym_grad_trace",
            max_abs(&lin_comb(
                1.0,
                &trace2(&g, &sym_grad(&g, &ds)),
                ll,
                &s_fld,
            )),
        );
        // Divergence of the symmetric gradient of V.
        push(
            "div_sym_grad_vector",
            max_abs(&lin_comb(
                1.0,
                &delta(&g, &sym_grad(&g, &v_fld)),
                -(ll - 2.0) / 2.0,
                &v_fld,
            )),
        );
        // Hodge vs tensor Laplacian on both 1-form types: the tensor
        // Laplacian is d delta + delta d minus the Ricci term (identity 1).
        for (name, w) in [("hodge_grad", &ds), ("hodge_vector", &v_fld)] {
            let hodge = lin_comb(
                1.0,
                &cov_deriv(&g, &delta(&g, w)),
                1.0,
                &delta(&g, &ext_deriv(&g, w)),
            );
            let resid = lin_comb(1.0, &hodge, -1.0, &lin_comb(1.0, &laplacian(&g, w), 1.0, w));
            push(name, max_abs(&resid));
        }
    }

    if l >= 2 {
        // Trace-free Hessian block: sym-grad dS plus half the metric times
        // the scalar eigenvalue times S.
        let hess0 = lin_comb(
            1.0,
            &sym_grad(&g, &ds),
            0.5 * ll,
            &times_metric(&g, &s_fld),
        );
        push("trace_free_hessian_traceless", max_abs(&trace2(&g, &hess0)));
        push(
            "div_of_trace_free_hessian",
            max_abs(&lin_comb(
                1.0,
                &delta(&g, &hess0),
                -(ll - 2.0) / 2.0,
                &ds,
            )),
        );
        push(
            "laplacian_trace_free_hessian",
            max_abs(&lin_comb(1.0, &laplacian(&g, &hess0), -(ll - 4.0), &hess0)),
        );
        push(
            "laplacian_sym_grad_vector",
            max_abs(&lin_comb(
                1.0,
                &laplacian(&g, &sym_grad(&g, &v_fld)),
                -(ll - 4.0),
                &sym_grad(&g, &v_fld),
            )),
        );
    } else if l == 1 {
        // Degree-1 duals are Killing 1-forms.
        push("killing_vector_l1", max_abs(&sym_grad(&g, &v_fld)));
    }

    Ok(SphereIdentityReport {
        l,
        resolution,
        residuals: out,
    })
}
