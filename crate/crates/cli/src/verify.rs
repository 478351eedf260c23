//! The `verify` command: analyticity checks on a `(z, x, y)` grid and equation
//! residuals of the closed-form fields on a space-time grid.

use serde::{Deserialize, Serialize};
use zvortex::schrodinger::{
    evaluate_grid, Differentiation, ExponentialField, FnField, GridAxis, GridSpec, Potential, Scaling, SpaceTime,
    ZDerivatives, ZField,
};
use zvortex::vortex::{imag_solution, real_solution, Branch, Sign};
use zvortex::wavecore::{cauchy_formula, check_cauchy_riemann, contour_integral, eval_psi, laplace_residual};
use zvortex::{CParam, PhysicalParams, PositiveReal};

use crate::{json_body, CliError, Context, Format, Rendered, TOLERANCE_ENV};

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyParams {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub cr_step: f64,
    pub laplace_step: f64,
    pub contour_points: usize,
    pub contour_radius: f64,
    pub cauchy_points: usize,
    pub residual_grid: GridSpec,
    pub u_f: f64,
    /// Adds `perturbation * t` to every residual field; any non-zero value breaks them.
    pub perturbation: f64,
    pub tolerance_scale: Option<f64>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            z: vec![0.5, 0.8, 1.0, 1.5, 2.0],
            x: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            y: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            cr_step: 1e-5,
            laplace_step: 1e-4,
            contour_points: 1024,
            contour_radius: 1.0,
            cauchy_points: 2048,
            residual_grid: GridSpec {
                rx: GridAxis::new(-1.0, 1.0, 10),
                ry: GridAxis::new(-1.0, 1.0, 10),
                t: GridAxis::new(0.0, 1.0, 10),
            },
            u_f: 2.5,
            perturbation: 0.0,
            tolerance_scale: None,
            hbar: None,
            mass: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub samples: usize,
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    passed: bool,
    tolerance_scale: f64,
    hbar: f64,
    mass: f64,
    checks: Vec<CheckResult>,
}

fn check(name: &'static str, value: f64, threshold: f64, samples: usize) -> CheckResult {
    CheckResult { name, value, threshold, passed: value < threshold, samples }
}

fn tolerance_scale(flag: Option<f64>, file: Option<f64>) -> Result<f64, CliError> {
    let scale = match flag.or(file) {
        Some(s) => s,
        None => match std::env::var(TOLERANCE_ENV) {
            Ok(text) => text
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("{TOLERANCE_ENV} is not a number: {text:?}")))?,
            Err(_) => 1.0,
        },
    };
    if scale > 0.0 && scale.is_finite() {
        Ok(scale)
    } else {
        Err(CliError::Usage(format!("tolerance scale must be positive and finite, got {scale}")))
    }
}

fn validate(p: &VerifyParams) -> Result<Vec<PositiveReal>, CliError> {
    let usage = |msg: String| CliError::Usage(msg);
    if p.z.is_empty() || p.x.is_empty() || p.y.is_empty() {
        return Err(usage("z, x and y grids must be non-empty".into()));
    }
    if p.x.iter().chain(&p.y).any(|v| !v.is_finite()) {
        return Err(usage("x and y grids must be finite".into()));
    }
    for (name, h) in [("cr_step", p.cr_step), ("laplace_step", p.laplace_step)] {
        if !(h > 0.0 && h < 0.1) {
            return Err(usage(format!("{name} must lie in (0, 0.1), got {h}")));
        }
    }
    if !(p.contour_radius > 0.0 && p.contour_radius.is_finite()) {
        return Err(usage(format!("contour_radius must be positive, got {}", p.contour_radius)));
    }
    if p.contour_points < 3 || p.cauchy_points < 3 {
        return Err(usage("contour_points and cauchy_points must be at least 3".into()));
    }
    if !p.perturbation.is_finite() || !p.u_f.is_finite() {
        return Err(usage("u_f and perturbation must be finite".into()));
    }
    p.z.iter().map(|&z| PositiveReal::new(z).map_err(|e| usage(format!("z grid: {e}")))).collect()
}

fn perturbed(base: ExponentialField, delta: f64) -> FnField {
    FnField::new(move |p: SpaceTime| base.value(p) + delta * p.t).with_analytic(move |p: SpaceTime| {
        let d = base.analytic(p).expect("exponential fields carry analytic partials");
        ZDerivatives { z: d.z + delta * p.t, z_t: d.z_t + delta, ..d }
    })
}

fn analyticity_checks(p: &VerifyParams, zs: &[PositiveReal], scale: f64) -> Result<Vec<CheckResult>, CliError> {
    let mut cases = Vec::new();
    for &z in zs {
        for &x in &p.x {
            for &y in &p.y {
                cases.push((z, CParam::new(x, y)));
            }
        }
    }
    let n = cases.len();
    let (mut cr, mut lap, mut contour, mut formula) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let r = p.contour_radius;
    for &(z, c) in &cases {
        let (a, b) = check_cauchy_riemann(z, c, p.cr_step)?;
        cr = cr.max(a).max(b);
        let (u, v) = laplace_residual(z, c, p.laplace_step)?;
        lap = lap.max(u.abs().max(v.abs()) / z.get().powf(c.x));
        let integral = contour_integral(z, c, r, p.contour_points)?;
        contour = contour.max(integral.value.magnitude() / integral.max_modulus);
        // an interior point off the centre
        let a = CParam::new(c.x + 0.4 * r, c.y - 0.3 * r);
        let rebuilt = cauchy_formula(z, a, c, r, p.cauchy_points)?;
        let exact = eval_psi(z, a);
        formula = formula.max((rebuilt.to_complex() - exact.to_complex()).norm() / exact.magnitude());
    }
    Ok(vec![
        check("cauchy_riemann", cr, 1e-8 * scale, n),
        check("laplace", lap, 1e-6 * scale, n),
        check("cauchy_theorem", contour, 1e-10 * scale, n),
        check("cauchy_formula", formula, 1e-8 * scale, n),
    ])
}

fn residual_checks(p: &VerifyParams, params: &PhysicalParams, scale: f64) -> Result<Vec<CheckResult>, CliError> {
    let c = CParam::VORTEX;
    let potential = Potential::Fixed(p.u_f);
    let real = real_solution(p.u_f, params, Sign::Plus)?;
    let one = imag_solution(Branch::OneVortex, p.u_f, params, 1.0)?;
    let zero = imag_solution(Branch::ZeroVortex, p.u_f, params, 1.0)?;
    let k = one.k();
    let delta = p.perturbation;
    let grid = &p.residual_grid;
    let eval = |field: ExponentialField, mode| {
        evaluate_grid(&perturbed(field, delta), c, params, &potential, grid, mode, Scaling::Unscaled)
    };
    let fd = Differentiation::finite_difference();
    let an = Differentiation::Analytic;

    let real_an = eval(real, an)?;
    let real_fd = eval(real, fd)?;
    let one_an = eval(one.field(), an)?;
    let one_fd = eval(one.field(), fd)?;
    let zero_an = eval(zero.field(), an)?;
    let zero_fd = eval(zero.field(), fd)?;
    let n = real_an.summary.points;

    // the residual a solution of one equation leaves in the other
    let h2m = params.hbar() * params.hbar() / params.mass();
    let mut cross_imag: f64 = 0.0;
    for (row, pt) in real_an.rows.iter().zip(grid.points()) {
        let expect = 2.0 * h2m * k * k * real.value(pt);
        cross_imag = cross_imag.max((row.residual_imag - expect).abs() / expect);
    }
    let mut cross_real: f64 = 0.0;
    for (row, pt) in one_an.rows.iter().zip(grid.points()) {
        let expect = 0.5 * h2m * k * k * one.field().value(pt);
        cross_real = cross_real.max((row.residual_real - expect).abs() / expect);
    }

    Ok(vec![
        check("real_solution_real_residual", real_an.summary.max_abs_real, 1e-10 * scale, n),
        check("one_vortex_imag_residual", one_an.summary.max_abs_imag, 1e-10 * scale, n),
        check("zero_vortex_imag_residual", zero_an.summary.max_abs_imag, 1e-10 * scale, n),
        check("real_solution_real_residual_fd", real_fd.summary.max_abs_real, 1e-5 * scale, n),
        check("one_vortex_imag_residual_fd", one_fd.summary.max_abs_imag, 1e-5 * scale, n),
        check("zero_vortex_imag_residual_fd", zero_fd.summary.max_abs_imag, 1e-5 * scale, n),
        check("real_solution_imag_cross", cross_imag, 1e-8 * scale, n),
        check("one_vortex_real_cross", cross_real, 1e-8 * scale, n),
    ])
}

pub fn run(ctx: &Context, flag_scale: Option<f64>) -> Result<Rendered, CliError> {
    let p: VerifyParams = ctx.load_or_default()?;
    let scale = tolerance_scale(flag_scale, p.tolerance_scale)?;
    let params = ctx.physical(p.hbar, p.mass)?;
    let zs = validate(&p)?;

    let mut checks = analyticity_checks(&p, &zs, scale)?;
    checks.extend(residual_checks(&p, &params, scale)?);
    let passed = checks.iter().all(|c| c.passed);

    let body = match ctx.format_or(Format::Json) {
        Format::Json => json_body(&VerifyReport {
            passed,
            tolerance_scale: scale,
            hbar: params.hbar(),
            mass: params.mass(),
            checks,
        })?,
        Format::Csv => {
            let mut out = String::from("check,value,threshold,passed,samples\n");
            for c in &checks {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    c.name,
                    zvortex::output::fmt_f64(c.value),
                    zvortex::output::fmt_f64(c.threshold),
                    c.passed,
                    c.samples
                ));
            }
            out.into_bytes()
        }
    };
    Ok(Rendered { body, passed })
}
