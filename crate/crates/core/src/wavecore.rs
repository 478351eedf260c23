//! Complex-power calculus for `psi = z^c`.
//!
//! For fixed `z > 0` the map `c -> z^c = exp(c ln z)` is entire, so `u` and `v`
//! satisfy the Cauchy-Riemann and Laplace equations in `(x, y)` and contour
//! integrals over `c` vanish. The checks here measure those identities with
//! finite differences and trapezoidal quadrature rather than assuming them.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default central-difference step for first derivatives.
pub const FIRST_ORDER_STEP: f64 = 1e-5;
/// Default central-difference step for second derivatives.
pub const SECOND_ORDER_STEP: f64 = 1e-4;
/// Default number of contour nodes.
pub const DEFAULT_CONTOUR_POINTS: usize = 1024;
/// Below this node count a contour result carries a low-resolution flag.
pub const MIN_ACCURATE_CONTOUR_POINTS: usize = 64;

/// A strictly positive, finite real number. The base `z` of `z^c`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct PositiveReal(f64);

impl PositiveReal {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value.is_finite() {
            Ok(Self(value))
        } else {
            Err(Error::Domain(format!("z must be a positive finite real (ln z on the real branch), got {value}")))
        }
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn ln(self) -> f64 {
        self.0.ln()
    }
}

impl TryFrom<f64> for PositiveReal {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl<'de> Deserialize<'de> for PositiveReal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = f64::deserialize(deserializer)?;
        Self::new(raw).map_err(serde::de::Error::custom)
    }
}

/// The complex exponent `c = x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CParam {
    pub x: f64,
    pub y: f64,
}

impl CParam {
    /// `c = 1 + 2i`, the exponent used by the vortex solutions.
    pub const VORTEX: CParam = CParam { x: 1.0, y: 2.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn conjugate(self) -> Self {
        Self { x: self.x, y: -self.y }
    }

    pub fn modulus_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// `w / c` written as `w c* / |c|^2`. Fails for `c = 0`.
    pub fn divide(self, w: Complex64) -> Result<Complex64> {
        let m = self.modulus_sq();
        if m == 0.0 {
            return Err(Error::Domain("division by c = 0".into()));
        }
        Ok(w * self.conjugate().to_complex() / m)
    }
}

impl Default for CParam {
    fn default() -> Self {
        Self::VORTEX
    }
}

impl From<Complex64> for CParam {
    fn from(c: Complex64) -> Self {
        Self { x: c.re, y: c.im }
    }
}

/// A point value `psi = u + iv`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WaveValue {
    pub u: f64,
    pub v: f64,
}

impl WaveValue {
    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn magnitude(self) -> f64 {
        self.u.hypot(self.v)
    }

    pub fn phase(self) -> f64 {
        self.v.atan2(self.u)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }

    pub fn scale(self, factor: f64) -> Self {
        Self { u: self.u * factor, v: self.v * factor }
    }
}

impl From<Complex64> for WaveValue {
    fn from(w: Complex64) -> Self {
        Self { u: w.re, v: w.im }
    }
}

impl fmt::Display for WaveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}i", self.u, if self.v < 0.0 { '-' } else { '+' }, self.v.abs())
    }
}

/// `z^c = z^x [cos(y ln z) + i sin(y ln z)]`.
pub fn eval_psi(z: PositiveReal, c: CParam) -> WaveValue {
    let ln_z = z.ln();
    let modulus = z.get().powf(c.x);
    let (sin, cos) = (c.y * ln_z).sin_cos();
    WaveValue { u: modulus * cos, v: modulus * sin }
}

/// Analytic partials of `u` and `v` with respect to the components of `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrPartials {
    pub du_dx: f64,
    pub dv_dy: f64,
    pub du_dy: f64,
    pub dv_dx: f64,
}

pub fn partials_uv(z: PositiveReal, c: CParam) -> CrPartials {
    let ln_z = z.ln();
    let scale = z.get().powf(c.x) * ln_z;
    let (sin, cos) = (c.y * ln_z).sin_cos();
    CrPartials { du_dx: scale * cos, dv_dy: scale * cos, du_dy: -scale * sin, dv_dx: scale * sin }
}

fn check_step(h: f64, upper: f64) -> Result<()> {
    if h > 0.0 && h < upper {
        Ok(())
    } else {
        Err(Error::Precondition(format!("step size must satisfy 0 < h < {upper}, got {h}")))
    }
}

/// Central-difference partials of `psi` over `x` and `y` at fixed `z`.
fn fd_partials(z: PositiveReal, c: CParam, h: f64) -> CrPartials {
    let at = |dx: f64, dy: f64| eval_psi(z, CParam::new(c.x + dx, c.y + dy));
    let (xp, xm) = (at(h, 0.0), at(-h, 0.0));
    let (yp, ym) = (at(0.0, h), at(0.0, -h));
    let inv = 0.5 / h;
    CrPartials {
        du_dx: (xp.u - xm.u) * inv,
        dv_dx: (xp.v - xm.v) * inv,
        du_dy: (yp.u - ym.u) * inv,
        dv_dy: (yp.v - ym.v) * inv,
    }
}

/// Residuals `(|u_x - v_y|, |u_y + v_x|)` from central differences with step `h`.
pub fn check_cauchy_riemann(z: PositiveReal, c: CParam, h: f64) -> Result<(f64, f64)> {
    check_step(h, 0.1)?;
    let p = fd_partials(z, c, h);
    Ok(((p.du_dx - p.dv_dy).abs(), (p.du_dy + p.dv_dx).abs()))
}

/// `d psi / dc = (ln z) psi`.
pub fn dpsi_dc(z: PositiveReal, c: CParam) -> WaveValue {
    eval_psi(z, c).scale(z.ln())
}

/// `d^2 psi / dc^2 = (ln z)^2 psi`.
pub fn d2psi_dc2(z: PositiveReal, c: CParam) -> WaveValue {
    let ln_z = z.ln();
    eval_psi(z, c).scale(ln_z * ln_z)
}

/// Five-point Laplacians of `u` and `v` over `(x, y)` at fixed `z`.
pub fn laplace_residual(z: PositiveReal, c: CParam, h: f64) -> Result<(f64, f64)> {
    check_step(h, 0.1)?;
    let at = |dx: f64, dy: f64| eval_psi(z, CParam::new(c.x + dx, c.y + dy));
    let centre = at(0.0, 0.0);
    let sum = [at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h)]
        .iter()
        .fold(WaveValue::default(), |acc, w| WaveValue::new(acc.u + w.u, acc.v + w.v));
    let inv = 1.0 / (h * h);
    Ok(((sum.u - 4.0 * centre.u) * inv, (sum.v - 4.0 * centre.v) * inv))
}

/// Result of a trapezoidal contour quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourIntegral {
    pub value: WaveValue,
    /// Largest `|psi|` seen on the contour nodes.
    pub max_modulus: f64,
    pub n_points: usize,
    /// Set when fewer than [`MIN_ACCURATE_CONTOUR_POINTS`] nodes were used.
    pub low_resolution: bool,
}

/// Nodes `c_j = centre + r e^{i theta_j}` with `theta_j = 2 pi j / n`.
fn circle_nodes(center: CParam, radius: f64, n: usize) -> impl Iterator<Item = (Complex64, Complex64)> {
    let centre = center.to_complex();
    (0..n).map(move |j| {
        let theta = 2.0 * PI * (j as f64) / (n as f64);
        let offset = Complex64::from_polar(radius, theta);
        (centre + offset, offset)
    })
}

fn check_contour(radius: f64, n_points: usize) -> Result<()> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Precondition(format!("contour radius must be positive, got {radius}")));
    }
    if n_points < 3 {
        return Err(Error::Precondition(format!("need at least 3 contour nodes, got {n_points}")));
    }
    Ok(())
}

/// Trapezoidal approximation of the closed integral of `psi(c) dc` around a circle.
pub fn contour_integral(z: PositiveReal, center: CParam, radius: f64, n_points: usize) -> Result<ContourIntegral> {
    check_contour(radius, n_points)?;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut max_modulus: f64 = 0.0;
    for (c, offset) in circle_nodes(center, radius, n_points) {
        let psi = eval_psi(z, c.into());
        max_modulus = max_modulus.max(psi.magnitude());
        // dc = i (c - centre) d theta
        acc += psi.to_complex() * Complex64::i() * offset;
    }
    let value = acc * (2.0 * PI / n_points as f64);
    Ok(ContourIntegral {
        value: value.into(),
        max_modulus,
        n_points,
        low_resolution: n_points < MIN_ACCURATE_CONTOUR_POINTS,
    })
}

/// Reconstructs `psi(a)` from `(1 / 2 pi i)` times the contour integral of `psi(c) / (c - a)`.
pub fn cauchy_formula(z: PositiveReal, a: CParam, center: CParam, radius: f64, n_points: usize) -> Result<WaveValue> {
    check_contour(radius, n_points)?;
    let a_c = a.to_complex();
    let dist = (a_c - center.to_complex()).norm();
    if dist.is_nan() || dist >= radius {
        return Err(Error::Precondition(format!(
            "point a must lie strictly inside the contour (|a - centre| = {dist}, radius = {radius})"
        )));
    }
    // (1/2 pi i) * sum psi/(c-a) * i offset * (2 pi / n) = (1/n) sum psi * offset / (c - a)
    let acc: Complex64 = circle_nodes(center, radius, n_points)
        .map(|(c, offset)| eval_psi(z, c.into()).to_complex() * offset / (c - a_c))
        .sum();
    Ok((acc / n_points as f64).into())
}

/// Whether `|psi|^2 = e^{2x ln z}` is integrable over a half line in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormalizabilityDomain {
    /// `z < 1, x > 0` or `z > 1, x < 0`.
    HalfLineConvergent,
    /// `x` must be restricted to a finite domain `D`, supplied by the caller.
    Restricted { bounds: Option<(f64, f64)> },
}

impl NormalizabilityDomain {
    pub fn is_convergent(&self) -> bool {
        matches!(self, Self::HalfLineConvergent)
    }

    /// Attach a finite domain to a restricted result. Convergent results are unchanged.
    pub fn with_bounds(self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::Precondition(format!("invalid finite domain [{lo}, {hi}]")));
        }
        Ok(match self {
            Self::HalfLineConvergent => self,
            Self::Restricted { .. } => Self::Restricted { bounds: Some((lo, hi)) },
        })
    }
}

/// `z = 1` is degenerate (constant integrand) and classified as restricted.
pub fn normalizability(z: PositiveReal, x: f64) -> NormalizabilityDomain {
    let z = z.get();
    if (z < 1.0 && x > 0.0) || (z > 1.0 && x < 0.0) {
        NormalizabilityDomain::HalfLineConvergent
    } else {
        NormalizabilityDomain::Restricted { bounds: None }
    }
}
