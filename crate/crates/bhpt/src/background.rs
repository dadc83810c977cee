//! Closed-form rotating black-hole backgrounds: metric components in the
//! Boyer-Lindquist and horizon-regular charts, conversions between the
//! stationary time functions, and first-order variations of the metric
//! family in mass and spin.
//!
//! Geometric units G = c = 1 throughout; signature (+,-,-,-).

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::linalg::invert4;
use crate::quad::GaussLegendre;
use core::f64::consts::PI;
use num_complex::Complex64;
// f64 math via libm in builds without std; the inherent std methods shadow
// the trait whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Mass and specific angular momentum of a subextremal black hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackHoleParams {
    mass: f64,
    spin: f64,
}

impl BlackHoleParams {
    /// Validates 0 < mass (finite) and 0 <= spin < mass.
    pub fn new(mass: f64, spin: f64) -> Result<Self> {
        if !mass.is_finite() || mass <= 0.0 {
            return Err(Error::Domain("mass must be positive and finite"));
        }
        if !spin.is_finite() || spin < 0.0 {
            return Err(Error::Domain("spin must be nonnegative and finite"));
        }
        if spin >= mass {
            return Err(Error::Superextremal { mass, spin });
        }
        Ok(BlackHoleParams { mass, spin })
    }

    /// Non-rotating background of the given mass.
    pub fn schwarzschild(mass: f64) -> Result<Self> {
        Self::new(mass, 0.0)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spin(&self) -> f64 {
        self.spin
    }

    /// Larger root of Δ: mass + sqrt(mass² − spin²).
    pub fn horizon_radius(&self) -> f64 {
        self.mass + (self.mass * self.mass - self.spin * self.spin).sqrt()
    }

    /// Δ(r) = r² − 2·mass·r + spin².
    pub fn delta(&self, r: f64) -> f64 {
        r * r - 2.0 * self.mass * r + self.spin * self.spin
    }

    /// ϱ²(r,θ) = r² + spin²·cos²θ.
    pub fn rho_squared(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        r * r + self.spin * self.spin * c * c
    }

    pub fn is_static(&self) -> bool {
        self.spin == 0.0
    }

    pub(crate) fn require_static(&self) -> Result<()> {
        if self.is_static() {
            Ok(())
        } else {
            Err(Error::SpinNotZero)
        }
    }
}

/// Stationary time functions on the extended exterior, all of the form
/// t + f(r). Offsets between any two kinds depend on r only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeFunctionKind {
    /// Time of the static chart; its level sets do not reach the horizon.
    Static,
    /// t + r_*; regular across the horizon, with null differential.
    Null0,
    /// Equals t + r_* + const below 3·mass and t beyond 4·mass.
    ChiRegular,
    /// Equals t + r_* below 3·mass and t − r_* beyond 4·mass.
    Star,
}

/// Radial cutoff shape used by the horizon-regular chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// Identically zero: the fully null-shifted chart.
    Zero,
    /// C³ smoothstep rising from 0 below `lo` to 1 above `hi`; requires lo < hi.
    Rising { lo: f64, hi: f64 },
}

impl Cutoff {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Cutoff::Zero => 0.0,
            Cutoff::Rising { lo, hi } => Expr::smoothstep_re(lo, hi, false, r),
        }
    }

    /// Standard transition zone [3·mass, 4·mass].
    pub fn standard(params: &BlackHoleParams) -> Self {
        Cutoff::Rising {
            lo: 3.0 * params.mass(),
            hi: 4.0 * params.mass(),
        }
    }
}

/// Coordinate chart in which metric components are reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Chart {
    /// Stationary chart (t, r, θ, φ); valid only outside the horizon.
    BoyerLindquist,
    /// Chart obtained by shifting t and φ along ingoing null directions
    /// wherever the cutoff differs from 1; smooth across the horizon when
    /// the cutoff vanishes there.
    Regularized { cutoff: Cutoff },
}

/// Point of evaluation; metric components depend on r and θ only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SpacetimePoint {
    pub fn at(r: f64, theta: f64) -> Self {
        SpacetimePoint {
            t: 0.0,
            r,
            theta,
            phi: 0.0,
        }
    }
}

/// Metric and inverse-metric components at one point, in the coordinate
/// order (t-like, r, θ, φ).
#[derive(Debug, Clone, Copy)]
pub struct MetricSample {
    pub chart: Chart,
    pub point: SpacetimePoint,
    pub g: [[f64; 4]; 4],
    pub g_inv: [[f64; 4]; 4],
}

/// μ(r) = 1 − 2·mass/r for a non-rotating background.
pub fn mu(params: &BlackHoleParams, r: f64) -> Result<f64> {
    params.require_static()?;
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain("radius must be positive"));
    }
    Ok(1.0 - 2.0 * params.mass() / r)
}

/// Tortoise coordinate r_* = r + 2·mass·log(r − 2·mass), real branch,
/// defined outside the horizon of a non-rotating background.
pub fn tortoise(params: &BlackHoleParams, r: f64) -> Result<f64> {
    params.require_static()?;
    let m = params.mass();
    if !r.is_finite() || r <= 2.0 * m {
        return Err(Error::Domain("tortoise coordinate requires r > 2·mass"));
    }
    Ok(r + 2.0 * m * (r - 2.0 * m).ln())
}

/// Metric and inverse components at a point, in the requested chart.
pub fn metric_components(
    params: &BlackHoleParams,
    point: &SpacetimePoint,
    chart: Chart,
) -> Result<MetricSample> {
    let (r, theta) = (point.r, point.theta);
    if !theta.is_finite() || theta <= 0.0 || theta >= PI {
        return Err(Error::Domain("polar chart is degenerate on the axis"));
    }
    let a = params.spin();
    let delta = params.delta(r);
    let rho2 = params.rho_squared(r, theta);
    let sth = theta.sin();
    let s2 = sth * sth;
    let r2a2 = r * r + a * a;
    let mut g = [[0.0_f64; 4]; 4];
    // Blocks shared by both charts (the t-φ sector and the sphere part).
    g[0][0] = (delta - a * a * s2) / rho2;
    let gtp = a * s2 * (r2a2 - delta) / rho2;
    g[0][3] = gtp;
    g[3][0] = gtp;
    g[2][2] = -rho2;
    g[3][3] = (delta * a * a * s2 * s2 - r2a2 * r2a2 * s2) / rho2;
    let g_inv;
    match chart {
        Chart::BoyerLindquist => {
            if !r.is_finite() || r <= params.horizon_radius() {
                return Err(Error::Domain(
                    "Boyer-Lindquist chart requires r beyond the horizon",
                ));
            }
            g[1][1] = -rho2 / delta;
            // Closed-form dual; the product identity is enforced by tests.
            let mut gi = [[0.0_f64; 4]; 4];
            gi[0][0] = r2a2 * r2a2 / (delta * rho2) - a * a * s2 / rho2;
            let gitp = a * r2a2 / (delta * rho2) - a / rho2;
            gi[0][3] = gitp;
            gi[3][0] = gitp;
            gi[1][1] = -delta / rho2;
            gi[2][2] = -1.0 / rho2;
            gi[3][3] = a * a / (delta * rho2) - 1.0 / (rho2 * s2);
            g_inv = gi;
        }
        Chart::Regularized { cutoff } => {
            if !r.is_finite() || r <= 0.0 {
                return Err(Error::Domain("radius must be positive"));
            }
            let c = cutoff.eval(r);
            if c != 0.0 && delta <= 0.0 {
                return Err(Error::Domain(
                    "cutoff must vanish where the chart crosses the horizon",
                ));
            }
            g[0][1] = -(1.0 - c);
            g[1][0] = -(1.0 - c);
            g[1][3] = (1.0 - c) * a * s2;
            g[3][1] = (1.0 - c) * a * s2;
            if c != 0.0 {
                g[1][1] = -c * (2.0 - c) * rho2 / delta;
            }
            let (gi, _det) = invert4(&g).ok_or(Error::SingularMatrix)?;
            let mut gi_sym = gi;
            for i in 0..4 {
                for j in 0..4 {
                    gi_sym[i][j] = 0.5 * (gi[i][j] + gi[j][i]);
                }
            }
            g_inv = gi_sym;
        }
    }
    Ok(MetricSample {
        chart,
        point: *point,
        g,
        g_inv,
    })
}

/// First-order variation of the metric family in (mass, spin) at a
/// non-rotating background, reported in the fully null-shifted chart
/// (the frame in which the components are smooth across the horizon).
/// The spin axis is the polar axis of the coordinates.
pub fn linearized_kerr(
    params: &BlackHoleParams,
    mdot: f64,
    adot: f64,
    point: &SpacetimePoint,
) -> Result<[[f64; 4]; 4]> {
    params.require_static()?;
    let r = point.r;
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain("radius must be positive"));
    }
    let m = params.mass();
    let sth = point.theta.sin();
    let s2 = sth * sth;
    let mut h = [[0.0_f64; 4]; 4];
    h[0][0] = -2.0 * m / r * mdot;
    let tphi = adot * (2.0 * m / r) * s2;
    h[0][3] = tphi;
    h[3][0] = tphi;
    h[1][3] = adot * s2;
    h[3][1] = adot * s2;
    Ok(h)
}

/// Offset τ₁ − τ₂ between two time functions, as a function of r alone;
/// antisymmetric under swapping the kinds. Non-rotating background only.
pub fn time_function_offset(
    kind1: TimeFunctionKind,
    kind2: TimeFunctionKind,
    params: &BlackHoleParams,
    r: f64,
) -> Result<f64> {
    params.require_static()?;
    if !r.is_finite() || r <= 2.0 * params.mass() {
        return Err(Error::Domain("time-function offsets require r > 2·mass"));
    }
    Ok(offset_to_static(kind1, params, r) - offset_to_static(kind2, params, r))
}

fn offset_to_static(kind: TimeFunctionKind, params: &BlackHoleParams, r: f64) -> f64 {
    let m = params.mass();
    let rstar = |s: f64| s + 2.0 * m * (s - 2.0 * m).ln();
    match kind {
        TimeFunctionKind::Static => 0.0,
        TimeFunctionKind::Null0 => rstar(r),
        TimeFunctionKind::Star => {
            let chi = Expr::smoothstep_re(3.0 * m, 4.0 * m, true, r);
            (2.0 * chi - 1.0) * rstar(r)
        }
        TimeFunctionKind::ChiRegular => {
            let (lo, hi) = (3.0 * m, 4.0 * m);
            if r >= hi {
                return 0.0;
            }
            let gl = GaussLegendre::new(48);
            // (1 − χ₀)/μ is analytic on the open transition zone, so a single
            // fixed-order panel reaches machine precision.
            let f = |s: f64| {
                let chi0 = Expr::smoothstep_re(lo, hi, false, s);
                Complex64::new((1.0 - chi0) / (1.0 - 2.0 * m / s), 0.0)
            };
            if r > lo {
                -gl.integrate(r, hi, f).re
            } else {
                rstar(r) - rstar(lo) - gl.integrate(lo, hi, f).re
            }
        }
    }
}
