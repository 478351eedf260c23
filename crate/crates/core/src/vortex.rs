//! Closed-form vortex solutions for `c = 1 + 2i`.
//!
//! With a fixed potential `U_f` and `k = sqrt(2 m U_f / (5 hbar^2))` the
//! imaginary equation is solved by `z = exp(+-k s - 3 k^2 beta t)`, where
//! `s = r_x + r_y` and `beta = hbar / m`. The `+` branch reaches `z = 1` at
//! `t* = s / (3 k beta)` and `psi` collapses to `1` (a 1-vortex); the `-` branch
//! decays to `0` only as `t -> inf` (a 0-vortex).

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::schrodinger::{ExponentialField, PhysicalParams};
use crate::wavecore::CParam;

/// Default collapse threshold for 0-vortices: `z <= 1e-6` counts as collapsed.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `+k` branch, collapses to `psi = 1`.
    OneVortex,
    /// `-k` branch, collapses to the origin.
    ZeroVortex,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Self::OneVortex => 1.0,
            Self::ZeroVortex => -1.0,
        }
    }

    pub fn swapped(self) -> Self {
        match self {
            Self::OneVortex => Self::ZeroVortex,
            Self::ZeroVortex => Self::OneVortex,
        }
    }

    /// The bit left behind after collapse.
    pub fn collapse_bit(self) -> u8 {
        match self {
            Self::OneVortex => 1,
            Self::ZeroVortex => 0,
        }
    }

    /// Branch of an exponential field by the sign of its spatial growth along `r_x + r_y`.
    pub fn classify(field: &ExponentialField) -> Option<Self> {
        let growth = field.kx + field.ky;
        if growth > 0.0 {
            Some(Self::OneVortex)
        } else if growth < 0.0 {
            Some(Self::ZeroVortex)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn value(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

/// `k = sqrt(2 m U_f / (5 hbar^2))`.
pub fn k_from_potential(u_f: f64, params: &PhysicalParams) -> Result<f64> {
    ensure_finite("U_f", u_f)?;
    if u_f < 0.0 {
        return Err(Error::Domain(format!("potential U_f must be non-negative, got {u_f}")));
    }
    Ok((2.0 * params.mass() * u_f / (5.0 * params.hbar() * params.hbar())).sqrt())
}

/// Time-independent solution of the real equation: `z = exp(+-(k/sqrt 2)(r_x + r_y))`.
pub fn real_solution(u_f: f64, params: &PhysicalParams, sign: Sign) -> Result<ExponentialField> {
    let kk = sign.value() * k_from_potential(u_f, params)? / SQRT_2;
    Ok(ExponentialField::new(kk, kk, 0.0))
}

/// Vortex solution of the imaginary equation at spatial sum `s`.
pub fn imag_solution(branch: Branch, u_f: f64, params: &PhysicalParams, s: f64) -> Result<VortexSolution> {
    let k = k_from_potential(u_f, params)?;
    if k == 0.0 {
        return Err(Error::Domain("U_f = 0 gives k = 0, a static field with no vortex".into()));
    }
    VortexSolution::new(branch, k, s, params.beta())
}

/// One point on a vortex trajectory in the `(u, v)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub radius: f64,
    pub gradient_radius: f64,
}

impl TrajectoryPoint {
    pub const CSV_HEADER: &'static str = "t,u,v,radius,gradient_radius";
}

/// A vortex located at `s = r_x + r_y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VortexSolution {
    branch: Branch,
    k: f64,
    s: f64,
    beta: f64,
}

impl VortexSolution {
    /// Negative `s` is canonicalised by negating it and swapping the branch.
    pub fn new(branch: Branch, k: f64, s: f64, beta: f64) -> Result<Self> {
        for (name, v) in [("k", k), ("beta", beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        ensure_finite("s", s)?;
        if s == 0.0 {
            return Err(Error::Domain("s = r_x + r_y must be non-zero; both branches coincide at s = 0".into()));
        }
        let (branch, s) = if s < 0.0 { (branch.swapped(), -s) } else { (branch, s) };
        Ok(Self { branch, k, s, beta })
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `ln z(t) = +-k s - 3 k^2 beta t`.
    pub fn exponent(&self, t: f64) -> f64 {
        self.branch.sign() * self.k * self.s - 3.0 * self.k * self.k * self.beta * t
    }

    pub fn z(&self, t: f64) -> f64 {
        self.exponent(t).exp()
    }

    /// The field over the whole plane, `z = exp(+-k (r_x + r_y) - 3 k^2 beta t)`.
    pub fn field(&self) -> ExponentialField {
        let kk = self.branch.sign() * self.k;
        ExponentialField::new(kk, kk, -3.0 * self.k * self.k * self.beta)
    }

    /// `psi = z^{1+2i} = e^{a} (cos 2a + i sin 2a)` with `a = ln z(t)`.
    pub fn point(&self, t: f64) -> TrajectoryPoint {
        let a = self.exponent(t);
        let radius = a.exp();
        let (sin, cos) = (CParam::VORTEX.y * a).sin_cos();
        TrajectoryPoint { t, u: radius * cos, v: radius * sin, radius, gradient_radius: self.k * radius * SQRT_2 }
    }

    pub fn trajectory(&self, times: &[f64]) -> Vec<TrajectoryPoint> {
        times.iter().map(|&t| self.point(t)).collect()
    }

    /// `s / (3 k beta)` for 1-vortices, infinite for 0-vortices.
    pub fn collapse_time(&self) -> f64 {
        match self.branch {
            Branch::OneVortex => self.s / (3.0 * self.k * self.beta),
            Branch::ZeroVortex => f64::INFINITY,
        }
    }

    pub fn collapse_bit(&self) -> u8 {
        self.branch.collapse_bit()
    }

    /// Time for a 0-vortex to fall to `z = epsilon`; the collapse time for 1-vortices.
    pub fn lifetime(&self, epsilon: f64) -> Result<f64> {
        match self.branch {
            Branch::OneVortex => Ok(self.collapse_time()),
            Branch::ZeroVortex => zero_vortex_lifetime(self.k, self.s, self.beta, epsilon),
        }
    }

    /// Constant `A` with `A^2 * integral |psi|^2 dt = 1` over the branch lifetime.
    ///
    /// `A_0 = e^{ks} k sqrt(6 beta)` and `A_1 = k sqrt(6 beta) (e^{2ks} - 1)^{-1/2}`.
    pub fn normalization_constant(&self) -> Result<f64> {
        let ks = self.k * self.s;
        let base = self.k * (6.0 * self.beta).sqrt();
        let a = match self.branch {
            Branch::ZeroVortex => base * ks.exp(),
            Branch::OneVortex => {
                let growth = (2.0 * ks).exp_m1();
                if !(growth > 0.0 && growth.is_finite()) {
                    return Err(Error::NumericGuard(format!("e^(2ks) - 1 = {growth} for ks = {ks}")));
                }
                base / growth.sqrt()
            }
        };
        if a > 0.0 && a.is_finite() {
            Ok(a)
        } else {
            Err(Error::NumericGuard(format!("normalisation constant {a} for ks = {ks}")))
        }
    }

    pub fn descriptor(&self) -> SolutionDescriptor {
        let t = self.collapse_time();
        SolutionDescriptor {
            branch: self.branch,
            k: self.k,
            s: self.s,
            beta: self.beta,
            collapse_time: t.is_finite().then_some(t),
        }
    }
}

/// JSON view of a solution; `collapse_time` is `null` for 0-vortices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionDescriptor {
    pub branch: Branch,
    pub k: f64,
    pub s: f64,
    pub beta: f64,
    pub collapse_time: Option<f64>,
}

/// `t0(eps) = (ln(1/eps) - k s) / (3 k^2 beta)`; fails unless positive.
pub fn zero_vortex_lifetime(k: f64, s: f64, beta: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Config(format!("collapse threshold must lie in (0, 1), got {epsilon}")));
    }
    let t0 = (-epsilon.ln() - k * s) / (3.0 * k * k * beta);
    if t0 > 0.0 && t0.is_finite() {
        Ok(t0)
    } else {
        Err(Error::Config(format!(
            "threshold {epsilon} >= e^(-ks) = {}: the 0-vortex starts below its collapse threshold",
            (-k * s).exp()
        )))
    }
}

/// `e^{4ks} - e^{2ks}`, the predicted ratio of 0-vortices to 1-vortices.
/// Equal to `(A_0 / A_1)^2`; meaningful for `k s > 0`.
pub fn vortex_ratio(k: f64, s: f64) -> f64 {
    let two_ks = 2.0 * k * s;
    two_ks.exp() * two_ks.exp_m1()
}

/// A point of the map `(dz/dr_x, dz/dr_y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientPoint {
    pub dz_dx: f64,
    pub dz_dy: f64,
    pub z: f64,
}

impl GradientPoint {
    pub const fn new(dz_dx: f64, dz_dy: f64, z: f64) -> Self {
        Self { dz_dx, dz_dy, z }
    }
}

fn check_branch_domain(branch: Branch, z: f64) -> Result<()> {
    let ok = match branch {
        Branch::OneVortex => z >= 1.0 && z.is_finite(),
        Branch::ZeroVortex => z > 0.0 && z <= 1.0,
    };
    if ok {
        Ok(())
    } else {
        let domain = match branch {
            Branch::OneVortex => "[1, inf)",
            Branch::ZeroVortex => "(0, 1]",
        };
        Err(Error::Precondition(format!("z = {z} outside the {branch:?} domain {domain}")))
    }
}

/// `(+-k z, +-k z, z)`: the 1-vortex ray leaves `(k, k, 1)`, the 0-vortex ray runs
/// from `(-k, -k, 1)` into the origin.
pub fn gradient_map_point(branch: Branch, k: f64, z: f64) -> Result<GradientPoint> {
    check_branch_domain(branch, z)?;
    let g = branch.sign() * k * z;
    Ok(GradientPoint::new(g, g, z))
}

/// `samples` points evenly spaced in `z` over `[z_start, z_end]`.
pub fn gradient_map_segment(
    branch: Branch,
    k: f64,
    z_start: f64,
    z_end: f64,
    samples: usize,
) -> Result<Vec<GradientPoint>> {
    check_branch_domain(branch, z_start)?;
    check_branch_domain(branch, z_end)?;
    crate::schrodinger::GridAxis::new(z_start, z_end, samples)
        .values()
        .into_iter()
        .map(|z| gradient_map_point(branch, k, z))
        .collect()
}

fn check_on_line(p: GradientPoint, k: f64, sign: f64) -> Result<()> {
    let expected = sign * k * p.z;
    let tol = 1e-9 * expected.abs().max(1.0);
    if (p.dz_dx - expected).abs() > tol || (p.dz_dy - expected).abs() > tol {
        return Err(Error::Precondition(format!(
            "point ({}, {}, {}) is not on the line ({sign}kz, {sign}kz, z) for k = {k}",
            p.dz_dx, p.dz_dy, p.z
        )));
    }
    Ok(())
}

/// Maps `(kz, kz, z)` with `z > 1` to `(-k/z, -k/z, 1/z)` on the 0-vortex line.
pub fn segment_involution(p: GradientPoint, k: f64) -> Result<GradientPoint> {
    if p.z.is_nan() || p.z <= 1.0 {
        return Err(Error::Precondition(format!("involution needs z > 1, got {}", p.z)));
    }
    check_on_line(p, k, 1.0)?;
    let w = 1.0 / p.z;
    Ok(GradientPoint::new(-k * w, -k * w, w))
}

/// Maps `(-kz, -kz, z)` with `0 < z < 1` back to `(k/z, k/z, 1/z)`.
pub fn segment_involution_inverse(p: GradientPoint, k: f64) -> Result<GradientPoint> {
    if !(p.z > 0.0 && p.z < 1.0) {
        return Err(Error::Precondition(format!("inverse involution needs 0 < z < 1, got {}", p.z)));
    }
    check_on_line(p, k, -1.0)?;
    let w = 1.0 / p.z;
    Ok(GradientPoint::new(k * w, k * w, w))
}

/// `(k^2 z^2, k^2 z^2, z^2)`; the same expression on both branches, so the two
/// segments join into a single ray from the origin.
pub fn squared_map(branch: Branch, k: f64, z: f64) -> Result<GradientPoint> {
    check_branch_domain(branch, z)?;
    let g = k * k * z * z;
    Ok(GradientPoint::new(g, g, z * z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    const NATURAL: PhysicalParams = PhysicalParams::NATURAL;

    #[test]
    fn k_from_potential_values() {
        assert_eq!(k_from_potential(0.0, &NATURAL).unwrap(), 0.0);
        assert_relative_eq!(k_from_potential(2.5, &NATURAL).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(k_from_potential(10.0, &NATURAL).unwrap(), 2.0, max_relative = 1e-15);
        assert!(k_from_potential(-1.0, &NATURAL).is_err());
        assert!(k_from_potential(f64::NAN, &NATURAL).is_err());
    }

    #[test]
    fn real_solution_at_zero_potential_is_one() {
        let f = real_solution(0.0, &NATURAL, Sign::Plus).unwrap();
        assert_eq!(f, ExponentialField::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn imag_solution_rejects_static_field() {
        assert!(imag_solution(Branch::OneVortex, 0.0, &NATURAL, 1.0).is_err());
        let zero = imag_solution(Branch::ZeroVortex, 2.5, &NATURAL, 1.0).unwrap();
        assert_relative_eq!(zero.k(), 1.0, max_relative = 1e-15);
        assert_eq!(zero.branch(), Branch::ZeroVortex);
        assert_eq!(zero.field().kx, -zero.k());
    }

    #[test]
    fn negative_sum_swaps_branch() {
        let v = VortexSolution::new(Branch::OneVortex, 1.0, -2.0, 1.0).unwrap();
        assert_eq!(v.branch(), Branch::ZeroVortex);
        assert_eq!(v.s(), 2.0);
        // z is unchanged by the canonicalisation
        assert_eq!(v.z(0.7), (1.0f64 * -2.0 - 3.0 * 0.7).exp());
        assert!(VortexSolution::new(Branch::OneVortex, 1.0, 0.0, 1.0).is_err());
        assert!(VortexSolution::new(Branch::OneVortex, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn collapse_times() {
        let one = VortexSolution::new(Branch::OneVortex, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(one.collapse_time(), 1.0 / 3.0, max_relative = 1e-15);
        let one = VortexSolution::new(Branch::OneVortex, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(one.collapse_time(), 0.5);
        let zero = VortexSolution::new(Branch::ZeroVortex, 2.0, 3.0, 1.0).unwrap();
        assert_eq!(zero.collapse_time(), f64::INFINITY);
        assert_eq!(zero.descriptor().collapse_time, None);
    }

    #[test]
    fn collapse_bits_round_trip_through_field_sign() {
        for branch in [Branch::OneVortex, Branch::ZeroVortex] {
            let v = VortexSolution::new(branch, 0.7, 1.3, 1.0).unwrap();
            assert_eq!(Branch::classify(&v.field()), Some(branch));
            assert_eq!(v.collapse_bit(), if branch == Branch::OneVortex { 1 } else { 0 });
        }
        assert_eq!(Branch::classify(&ExponentialField::new(0.0, 0.0, -1.0)), None);
    }

    #[test]
    fn trajectory_radius_at_start_and_collapse() {
        let one = VortexSolution::new(Branch::OneVortex, 1.0, 1.0, 1.0).unwrap();
        let pts = one.trajectory(&[0.0, one.collapse_time()]);
        assert_relative_eq!(pts[0].radius, E, max_relative = 1e-15);
        assert_relative_eq!(pts[1].radius, 1.0, max_relative = 1e-15);
        assert_relative_eq!(pts[1].u, 1.0, max_relative = 1e-15);
        assert!(pts[1].v.abs() < 1e-15);
        assert_relative_eq!(pts[0].gradient_radius, E * SQRT_2, max_relative = 1e-15);
    }

    #[test]
    fn zero_vortex_radius_decreases_to_zero() {
        let zero = VortexSolution::new(Branch::ZeroVortex, 1.0, 1.0, 1.0).unwrap();
        let times: Vec<f64> = (0..200).map(|i| i as f64 * 0.25).collect();
        let pts = zero.trajectory(&times);
        assert!(pts.windows(2).all(|w| w[1].radius < w[0].radius));
        assert!(pts.last().unwrap().radius < 1e-60);
    }

    #[test]
    fn normalization_constants() {
        // closed forms evaluated with mpmath
        let zero = VortexSolution::new(Branch::ZeroVortex, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(zero.normalization_constant().unwrap(), 6.658403456804334, max_relative = 1e-14);
        let one = VortexSolution::new(Branch::OneVortex, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(one.normalization_constant().unwrap(), 0.9690747424724235, max_relative = 1e-14);
        let near = VortexSolution::new(Branch::ZeroVortex, 1.0, 1e-12, 1.0).unwrap();
        assert_relative_eq!(near.normalization_constant().unwrap(), 6f64.sqrt(), max_relative = 1e-11);
    }

    #[test]
    fn normalization_guard_trips_on_overflow() {
        let huge = VortexSolution::new(Branch::ZeroVortex, 1.0, 800.0, 1.0).unwrap();
        assert!(matches!(huge.normalization_constant(), Err(Error::NumericGuard(_))));
        let huge = VortexSolution::new(Branch::OneVortex, 1.0, 800.0, 1.0).unwrap();
        assert!(matches!(huge.normalization_constant(), Err(Error::NumericGuard(_))));
        let tiny = VortexSolution::new(Branch::OneVortex, 1e-200, 1e-200, 1.0).unwrap();
        assert!(matches!(tiny.normalization_constant(), Err(Error::NumericGuard(_))));
    }

    #[test]
    fn vortex_ratio_values() {
        assert_relative_eq!(vortex_ratio(1.0, 1.0), 47.20909393421359, max_relative = 1e-14);
        assert_relative_eq!(vortex_ratio(0.5, 1.0), 4.670774270471605, max_relative = 1e-14);
        assert!(vortex_ratio(1e-9, 1e-9) < 1e-17);
    }

    #[test]
    fn zero_vortex_lifetime_threshold() {
        let t0 = zero_vortex_lifetime(1.0, 1.0, 1.0, 1e-6).unwrap();
        assert_relative_eq!(t0, 4.271836852654758, max_relative = 1e-14);
        assert!(zero_vortex_lifetime(1.0, 1.0, 1.0, 0.5).is_err());
        assert!(zero_vortex_lifetime(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(zero_vortex_lifetime(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn gradient_endpoints_and_domains() {
        assert_eq!(gradient_map_point(Branch::OneVortex, 1.0, 1.0).unwrap(), GradientPoint::new(1.0, 1.0, 1.0));
        assert_eq!(gradient_map_point(Branch::ZeroVortex, 1.0, 1.0).unwrap(), GradientPoint::new(-1.0, -1.0, 1.0));
        let near_origin = gradient_map_point(Branch::ZeroVortex, 1.0, 1e-12).unwrap();
        assert!(near_origin.dz_dx.abs() < 1e-11 && near_origin.z < 1e-11);
        assert!(gradient_map_point(Branch::OneVortex, 1.0, 0.5).is_err());
        assert!(gradient_map_point(Branch::ZeroVortex, 1.0, 2.0).is_err());
        assert!(gradient_map_point(Branch::ZeroVortex, 1.0, 0.0).is_err());
        assert!(gradient_map_segment(Branch::OneVortex, 1.0, 0.5, 2.0, 10).is_err());
        assert_eq!(gradient_map_segment(Branch::OneVortex, 1.0, 1.0, 2.0, 5).unwrap().len(), 5);
    }

    #[test]
    fn involution_example() {
        let img = segment_involution(GradientPoint::new(2.0, 2.0, 2.0), 1.0).unwrap();
        assert_eq!(img, GradientPoint::new(-0.5, -0.5, 0.5));
        let back = segment_involution_inverse(img, 1.0).unwrap();
        assert_eq!(back, GradientPoint::new(2.0, 2.0, 2.0));
        assert!(segment_involution(GradientPoint::new(1.0, 1.0, 1.0), 1.0).is_err());
        assert!(segment_involution(GradientPoint::new(3.0, 2.0, 2.0), 1.0).is_err());
        let far = segment_involution(GradientPoint::new(1e12, 1e12, 1e12), 1.0).unwrap();
        assert!(far.z < 1e-11 && far.dz_dx.abs() < 1e-11);
    }

    #[test]
    fn squared_map_values() {
        for b in [Branch::OneVortex, Branch::ZeroVortex] {
            assert_eq!(squared_map(b, 1.0, 1.0).unwrap(), GradientPoint::new(1.0, 1.0, 1.0));
        }
        assert_eq!(squared_map(Branch::OneVortex, 2.0, 1.5).unwrap(), GradientPoint::new(9.0, 9.0, 2.25));
        // both branches land on the ray (k^2 w, k^2 w, w)
        let a = squared_map(Branch::ZeroVortex, 1.0, 0.5).unwrap();
        let b = squared_map(Branch::OneVortex, 1.0, 3.0).unwrap();
        assert_eq!(a.dz_dx / a.z, b.dz_dx / b.z);
    }
}
