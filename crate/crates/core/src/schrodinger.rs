//! Schrodinger residuals for `psi = z^c` with `z = z(r_x, r_y, t)`.
//!
//! Substituting the chain-rule derivatives of `psi` into
//! `i hbar psi_t = -(hbar^2 / 2m) (psi_xx + psi_yy) + U psi` and dividing by
//! `c psi / z` leaves an equation in `z` alone:
//!
//! ```text
//! i hbar z_t + (hbar^2/2m) [z_xx + z_yy + ((c - 1)/z)(z_x^2 + z_y^2)] - (z/c) U = 0
//! ```
//!
//! Its real part (R) and imaginary part (I) are reported separately in the
//! unscaled form above. [`Scaling::Reduced`] multiplies R by `2m/hbar^2` and I by
//! `m/hbar^2`, which for `c = 1 + 2i` gives the familiar reduced pair.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::EnergyLadder;
use crate::error::{Error, Result};
use crate::wavecore::{eval_psi, CParam, PositiveReal, FIRST_ORDER_STEP, SECOND_ORDER_STEP};

/// `hbar` and `m`. Natural units by default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct PhysicalParams {
    hbar: f64,
    mass: f64,
}

#[derive(Deserialize)]
struct RawParams {
    #[serde(default = "one")]
    hbar: f64,
    #[serde(default = "one")]
    mass: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawParams> for PhysicalParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Self::new(raw.hbar, raw.mass)
    }
}

impl PhysicalParams {
    pub const NATURAL: PhysicalParams = PhysicalParams { hbar: 1.0, mass: 1.0 };

    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("mass", mass)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self { hbar, mass })
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// `beta = hbar / m`.
    pub fn beta(&self) -> f64 {
        self.hbar / self.mass
    }

    /// `hbar^2 / 2m`.
    pub fn kinetic_coefficient(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.mass)
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::NATURAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTime {
    pub rx: f64,
    pub ry: f64,
    pub t: f64,
}

impl SpaceTime {
    pub const fn new(rx: f64, ry: f64, t: f64) -> Self {
        Self { rx, ry, t }
    }
}

/// Value and partial derivatives of `z` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZDerivatives {
    pub z: f64,
    pub z_t: f64,
    pub z_x: f64,
    pub z_y: f64,
    pub z_xx: f64,
    pub z_yy: f64,
}

impl ZDerivatives {
    pub fn grad_sq(&self) -> f64 {
        self.z_x * self.z_x + self.z_y * self.z_y
    }

    pub fn laplacian(&self) -> f64 {
        self.z_xx + self.z_yy
    }
}

/// A positive scalar field `z(r_x, r_y, t)`.
pub trait ZField: Send + Sync {
    fn value(&self, p: SpaceTime) -> f64;

    /// Closed-form partials, when the field knows them.
    fn analytic(&self, _p: SpaceTime) -> Option<ZDerivatives> {
        None
    }
}

impl<F: ZField + ?Sized> ZField for &F {
    fn value(&self, p: SpaceTime) -> f64 {
        (**self).value(p)
    }

    fn analytic(&self, p: SpaceTime) -> Option<ZDerivatives> {
        (**self).analytic(p)
    }
}

impl<F: ZField + ?Sized> ZField for Arc<F> {
    fn value(&self, p: SpaceTime) -> f64 {
        (**self).value(p)
    }

    fn analytic(&self, p: SpaceTime) -> Option<ZDerivatives> {
        (**self).analytic(p)
    }
}

/// `z = exp(kx r_x + ky r_y + rate t)`.
///
/// Every closed-form solution in this crate has this shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialField {
    pub kx: f64,
    pub ky: f64,
    pub rate: f64,
}

impl ExponentialField {
    pub const fn new(kx: f64, ky: f64, rate: f64) -> Self {
        Self { kx, ky, rate }
    }

    pub fn exponent(&self, p: SpaceTime) -> f64 {
        self.kx * p.rx + self.ky * p.ry + self.rate * p.t
    }
}

impl ZField for ExponentialField {
    fn value(&self, p: SpaceTime) -> f64 {
        self.exponent(p).exp()
    }

    fn analytic(&self, p: SpaceTime) -> Option<ZDerivatives> {
        let z = self.value(p);
        Some(ZDerivatives {
            z,
            z_t: self.rate * z,
            z_x: self.kx * z,
            z_y: self.ky * z,
            z_xx: self.kx * self.kx * z,
            z_yy: self.ky * self.ky * z,
        })
    }
}

type ValueFn = dyn Fn(SpaceTime) -> f64 + Send + Sync;
type PartialsFn = dyn Fn(SpaceTime) -> ZDerivatives + Send + Sync;

/// A field built from closures.
#[derive(Clone)]
pub struct FnField {
    value: Arc<ValueFn>,
    partials: Option<Arc<PartialsFn>>,
}

impl FnField {
    pub fn new(value: impl Fn(SpaceTime) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(value), partials: None }
    }

    pub fn with_analytic(mut self, partials: impl Fn(SpaceTime) -> ZDerivatives + Send + Sync + 'static) -> Self {
        self.partials = Some(Arc::new(partials));
        self
    }
}

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("analytic", &self.partials.is_some()).finish()
    }
}

impl ZField for FnField {
    fn value(&self, p: SpaceTime) -> f64 {
        (self.value)(p)
    }

    fn analytic(&self, p: SpaceTime) -> Option<ZDerivatives> {
        self.partials.as_ref().map(|d| d(p))
    }
}

/// Central-difference steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSteps {
    pub first: f64,
    pub second: f64,
}

impl Default for FdSteps {
    fn default() -> Self {
        Self { first: FIRST_ORDER_STEP, second: SECOND_ORDER_STEP }
    }
}

/// How the partials of `z` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Differentiation {
    #[default]
    Analytic,
    FiniteDifference(FdSteps),
}

impl Differentiation {
    pub fn finite_difference() -> Self {
        Self::FiniteDifference(FdSteps::default())
    }
}

fn finite_difference_partials(field: &dyn ZField, p: SpaceTime, steps: FdSteps) -> ZDerivatives {
    let f = |dx: f64, dy: f64, dt: f64| field.value(SpaceTime::new(p.rx + dx, p.ry + dy, p.t + dt));
    let (h1, h2) = (steps.first, steps.second);
    let z = f(0.0, 0.0, 0.0);
    ZDerivatives {
        z,
        z_t: (f(0.0, 0.0, h1) - f(0.0, 0.0, -h1)) / (2.0 * h1),
        z_x: (f(h1, 0.0, 0.0) - f(-h1, 0.0, 0.0)) / (2.0 * h1),
        z_y: (f(0.0, h1, 0.0) - f(0.0, -h1, 0.0)) / (2.0 * h1),
        z_xx: (f(h2, 0.0, 0.0) - 2.0 * z + f(-h2, 0.0, 0.0)) / (h2 * h2),
        z_yy: (f(0.0, h2, 0.0) - 2.0 * z + f(0.0, -h2, 0.0)) / (h2 * h2),
    }
}

/// Value and partials of `z` at `p`; fails unless `z(p) > 0`.
pub fn z_derivatives(field: &dyn ZField, p: SpaceTime, mode: Differentiation) -> Result<ZDerivatives> {
    let d = match mode {
        Differentiation::Analytic => field.analytic(p).ok_or(Error::MissingAnalyticPartials)?,
        Differentiation::FiniteDifference(steps) => {
            if !(steps.first > 0.0 && steps.second > 0.0) {
                return Err(Error::Precondition("finite-difference steps must be positive".into()));
            }
            finite_difference_partials(field, p, steps)
        }
    };
    if !(d.z > 0.0 && d.z.is_finite()) {
        return Err(Error::Domain(format!(
            "z must be positive at (r_x={}, r_y={}, t={}), got {}",
            p.rx, p.ry, p.t, d.z
        )));
    }
    Ok(d)
}

/// Potential energy `U(r_x, r_y)`.
#[derive(Clone)]
pub enum Potential {
    Fixed(f64),
    /// The step potential `U(E)` of a ladder at energy `E`.
    Ladder {
        ladder: EnergyLadder,
        energy: f64,
    },
    Custom(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Potential {
    pub fn value_at(&self, rx: f64, ry: f64) -> Result<f64> {
        match self {
            Self::Fixed(u) => Ok(*u),
            Self::Ladder { ladder, energy } => ladder.potential_of_energy(*energy),
            Self::Custom(f) => Ok(f(rx, ry)),
        }
    }
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(u) => f.debug_tuple("Fixed").field(u).finish(),
            Self::Ladder { ladder, energy } => {
                f.debug_struct("Ladder").field("ladder", ladder).field("energy", energy).finish()
            }
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// The chain-rule derivatives of `psi = z^c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiPartials {
    pub psi: Complex64,
    pub dt: Complex64,
    pub dx: Complex64,
    pub dy: Complex64,
    pub dxx: Complex64,
    pub dyy: Complex64,
}

fn psi_partials_from(d: &ZDerivatives, c: CParam) -> Result<PsiPartials> {
    let psi = eval_psi(PositiveReal::new(d.z)?, c).to_complex();
    let cc = c.to_complex();
    let first = cc / d.z * psi;
    let curvature = (cc * cc - cc) / (d.z * d.z) * psi;
    Ok(PsiPartials {
        psi,
        dt: first * d.z_t,
        dx: first * d.z_x,
        dy: first * d.z_y,
        dxx: first * d.z_xx + curvature * (d.z_x * d.z_x),
        dyy: first * d.z_yy + curvature * (d.z_y * d.z_y),
    })
}

pub fn psi_partials(field: &dyn ZField, c: CParam, p: SpaceTime, mode: Differentiation) -> Result<PsiPartials> {
    psi_partials_from(&z_derivatives(field, p, mode)?, c)
}

/// Residual of the full `z`-equation, evaluated in complex arithmetic.
pub fn complex_residual(
    field: &dyn ZField,
    c: CParam,
    params: &PhysicalParams,
    potential: &Potential,
    p: SpaceTime,
    mode: Differentiation,
) -> Result<Complex64> {
    let d = z_derivatives(field, p, mode)?;
    let u = potential.value_at(p.rx, p.ry)?;
    let z_over_c = c.divide(Complex64::new(d.z, 0.0))?;
    let cc = c.to_complex();
    let bracket = d.laplacian() + (cc - 1.0) / d.z * d.grad_sq();
    Ok(Complex64::i() * params.hbar() * d.z_t + params.kinetic_coefficient() * bracket - z_over_c * u)
}

fn check_exponent(c: CParam) -> Result<f64> {
    let m = c.modulus_sq();
    if m == 0.0 {
        Err(Error::Domain("division by c = 0".into()))
    } else {
        Ok(m)
    }
}

/// Real part (R): `(hbar^2/2m)[lap z + ((x-1)/z)|grad z|^2] - z x U / (x^2+y^2)`.
pub fn real_residual(
    field: &dyn ZField,
    c: CParam,
    params: &PhysicalParams,
    potential: &Potential,
    p: SpaceTime,
    mode: Differentiation,
) -> Result<f64> {
    let m = check_exponent(c)?;
    let d = z_derivatives(field, p, mode)?;
    let u = potential.value_at(p.rx, p.ry)?;
    Ok(real_part(&d, c, m, params, u))
}

/// Imaginary part (I): `hbar z_t + (hbar^2/2m)(y/z)|grad z|^2 + z y U / (x^2+y^2)`.
pub fn imag_residual(
    field: &dyn ZField,
    c: CParam,
    params: &PhysicalParams,
    potential: &Potential,
    p: SpaceTime,
    mode: Differentiation,
) -> Result<f64> {
    let m = check_exponent(c)?;
    let d = z_derivatives(field, p, mode)?;
    let u = potential.value_at(p.rx, p.ry)?;
    Ok(imag_part(&d, c, m, params, u))
}

fn real_part(d: &ZDerivatives, c: CParam, modulus_sq: f64, params: &PhysicalParams, u: f64) -> f64 {
    params.kinetic_coefficient() * (d.laplacian() + (c.x - 1.0) / d.z * d.grad_sq()) - d.z * c.x * u / modulus_sq
}

fn imag_part(d: &ZDerivatives, c: CParam, modulus_sq: f64, params: &PhysicalParams, u: f64) -> f64 {
    params.hbar() * d.z_t + params.kinetic_coefficient() * c.y / d.z * d.grad_sq() + d.z * c.y * u / modulus_sq
}

/// Residual of the original `psi` equation:
/// `i hbar psi_t + (hbar^2/2m)(psi_xx + psi_yy) - U psi`.
///
/// Equal to `(c psi / z)` times [`complex_residual`].
pub fn psi_equation_residual(
    field: &dyn ZField,
    c: CParam,
    params: &PhysicalParams,
    potential: &Potential,
    p: SpaceTime,
    mode: Differentiation,
) -> Result<Complex64> {
    let d = psi_partials(field, c, p, mode)?;
    let u = potential.value_at(p.rx, p.ry)?;
    Ok(Complex64::i() * params.hbar() * d.dt + params.kinetic_coefficient() * (d.dxx + d.dyy) - d.psi * u)
}

/// Presentation of the R/I residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    #[default]
    Unscaled,
    /// R times `2m/hbar^2`, I times `m/hbar^2`.
    Reduced,
}

impl Scaling {
    pub fn factors(self, params: &PhysicalParams) -> (f64, f64) {
        match self {
            Self::Unscaled => (1.0, 1.0),
            Self::Reduced => {
                let inv = params.mass() / (params.hbar() * params.hbar());
                (2.0 * inv, inv)
            }
        }
    }
}

/// Uniform samples `start, ..., end` (inclusive). One sample sits at `start`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub start: f64,
    pub end: f64,
    pub samples: usize,
}

impl GridAxis {
    pub const fn new(start: f64, end: f64, samples: usize) -> Self {
        Self { start, end, samples }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.samples {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let step = (self.end - self.start) / (n - 1) as f64;
                (0..n).map(|i| if i == n - 1 { self.end } else { self.start + step * i as f64 }).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rx: GridAxis,
    pub ry: GridAxis,
    pub t: GridAxis,
}

impl GridSpec {
    pub fn points(&self) -> Vec<SpaceTime> {
        let (xs, ys, ts) = (self.rx.values(), self.ry.values(), self.t.values());
        let mut out = Vec::with_capacity(xs.len() * ys.len() * ts.len());
        for &rx in &xs {
            for &ry in &ys {
                for &t in &ts {
                    out.push(SpaceTime::new(rx, ry, t));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub rx: f64,
    pub ry: f64,
    pub t: f64,
    pub residual_real: f64,
    pub residual_imag: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub points: usize,
    pub max_abs_real: f64,
    pub max_abs_imag: f64,
    pub mean_abs_real: f64,
    pub mean_abs_imag: f64,
    pub scaling: Scaling,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub rows: Vec<ResidualRow>,
    pub summary: GridSummary,
}

impl GridReport {
    pub const CSV_HEADER: &'static str = "r_x,r_y,t,residual_real,residual_imag";

    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::CSV_HEADER)?;
        for r in &self.rows {
            crate::output::write_csv_row(&mut w, &[r.rx, r.ry, r.t, r.residual_real, r.residual_imag])?;
        }
        Ok(())
    }
}

/// Evaluates R and I residuals on every grid point. Row order follows
/// [`GridSpec::points`] regardless of how the work is scheduled.
pub fn evaluate_grid(
    field: &dyn ZField,
    c: CParam,
    params: &PhysicalParams,
    potential: &Potential,
    grid: &GridSpec,
    mode: Differentiation,
    scaling: Scaling,
) -> Result<GridReport> {
    let modulus_sq = check_exponent(c)?;
    let (sr, si) = scaling.factors(params);
    let rows = grid
        .points()
        .into_par_iter()
        .map(|p| {
            let d = z_derivatives(field, p, mode)?;
            let u = potential.value_at(p.rx, p.ry)?;
            Ok(ResidualRow {
                rx: p.rx,
                ry: p.ry,
                t: p.t,
                residual_real: sr * real_part(&d, c, modulus_sq, params, u),
                residual_imag: si * imag_part(&d, c, modulus_sq, params, u),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = rows.len();
    let (mut max_r, mut max_i, mut sum_r, mut sum_i) = (0.0f64, 0.0f64, 0.0, 0.0);
    for r in &rows {
        max_r = max_r.max(r.residual_real.abs());
        max_i = max_i.max(r.residual_imag.abs());
        sum_r += r.residual_real.abs();
        sum_i += r.residual_imag.abs();
    }
    let denom = n.max(1) as f64;
    Ok(GridReport {
        summary: GridSummary {
            points: n,
            max_abs_real: max_r,
            max_abs_imag: max_i,
            mean_abs_real: sum_r / denom,
            mean_abs_imag: sum_i / denom,
            scaling,
            grid: *grid,
        },
        rows,
    })
}
