use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use zvortex::energy::{k_jump_trace, EnergyLadder, Jump, TracePoint};
use zvortex::ensemble::{equalization_from_run, simulate, EnsembleConfig};
use zvortex::output::{fmt_f64, write_csv_row};
use zvortex::schrodinger::GridAxis;
use zvortex::vortex::{
    gradient_map_segment, k_from_potential, segment_involution, squared_map, Branch, GradientPoint, SolutionDescriptor,
    TrajectoryPoint, VortexSolution,
};

use crate::{json_body, CliError, Context, Format, Rendered};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryParams {
    pub branch: Branch,
    pub k: Option<f64>,
    pub u_f: Option<f64>,
    pub s: f64,
    #[serde(default)]
    pub t_start: f64,
    pub t_end: Option<f64>,
    /// Number of intervals between `t_start` and `t_end`.
    pub steps: Option<usize>,
    /// Explicit sample times; replaces `t_start`/`t_end`/`steps`.
    pub times: Option<Vec<f64>>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
}

#[derive(Serialize)]
struct TrajectoryOutput {
    solution: SolutionDescriptor,
    normalization_constant: Option<f64>,
    points: Vec<TrajectoryPoint>,
}

fn sample_times(p: &TrajectoryParams, solution: &VortexSolution) -> Result<Vec<f64>, CliError> {
    let times = match (&p.times, p.steps) {
        (Some(_), Some(_)) => return Err(CliError::Usage("give either times or steps, not both".into())),
        (Some(times), None) => times.clone(),
        (None, steps) => {
            let t_end = match p.t_end {
                Some(t) => t,
                None if solution.collapse_time().is_finite() => solution.collapse_time(),
                None => return Err(CliError::Usage("t_end is required for a 0-vortex".into())),
            };
            GridAxis::new(p.t_start, t_end, steps.unwrap_or(100) + 1).values()
        }
    };
    if times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::Usage("sample times must be finite".into()));
    }
    Ok(times)
}

pub fn trajectory(ctx: &Context) -> Result<Rendered, CliError> {
    let p: TrajectoryParams = ctx.load_required()?;
    let params = ctx.physical(p.hbar, p.mass)?;
    let k = match (p.k, p.u_f) {
        (Some(k), None) => k,
        (None, Some(u_f)) => k_from_potential(u_f, &params)?,
        _ => return Err(CliError::Usage("give exactly one of k and u_f".into())),
    };
    let solution = VortexSolution::new(p.branch, k, p.s, params.beta())?;
    let times = sample_times(&p, &solution)?;
    let points = solution.trajectory(&times);

    let body = match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut out = format!("{}\n", TrajectoryPoint::CSV_HEADER).into_bytes();
            for q in &points {
                write_csv_row(&mut out, &[q.t, q.u, q.v, q.radius, q.gradient_radius])?;
            }
            out
        }
        Format::Json => json_body(&TrajectoryOutput {
            solution: solution.descriptor(),
            normalization_constant: solution.normalization_constant().ok(),
            points,
        })?,
    };
    Ok(Rendered::ok(body))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderParams {
    pub eigenvalues: Vec<f64>,
    pub schedule: Vec<f64>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
}

#[derive(Serialize)]
struct LadderOutput {
    points: Vec<TracePoint>,
    jumps: Vec<Jump>,
}

pub fn ladder(ctx: &Context) -> Result<Rendered, CliError> {
    let p: LadderParams = ctx.load_required()?;
    let params = ctx.physical(p.hbar, p.mass)?;
    let ladder = EnergyLadder::new(p.eigenvalues).map_err(|e| CliError::Usage(e.to_string()))?;
    let trace = k_jump_trace(&ladder, &p.schedule, &params)?;
    let body = match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut out = Vec::new();
            trace.write_csv(&mut out)?;
            out
        }
        Format::Json => json_body(&LadderOutput { jumps: trace.jumps(), points: trace.points })?,
    };
    Ok(Rendered::ok(body))
}

pub fn ensemble(ctx: &Context, bits: Option<&Path>) -> Result<Rendered, CliError> {
    let mut config: EnsembleConfig = ctx.load_required()?;
    if let Some(seed) = ctx.seed {
        config.seed = seed;
    }
    if ctx.hbar.is_some() || ctx.mass.is_some() {
        config.beta = ctx.physical(None, None)?.beta();
    }
    let run = simulate(&config)?;
    if let Some(path) = bits {
        let mut text = run.bit_string();
        text.push('\n');
        fs::write(path, text).map_err(|e| CliError::Failure(format!("cannot write {}: {e}", path.display())))?;
    }
    let body = match ctx.format_or(Format::Json) {
        Format::Csv => {
            let mut out = Vec::new();
            run.write_series_csv(&mut out)?;
            out
        }
        Format::Json => {
            let eq = equalization_from_run(&config, &run)?;
            let mut value = serde_json::to_value(&run.report).map_err(|e| CliError::Failure(e.to_string()))?;
            let mut analysis = serde_json::to_value(&eq).map_err(|e| CliError::Failure(e.to_string()))?;
            if let Some(obj) = analysis.as_object_mut() {
                obj.remove("report");
            }
            value["config"] = serde_json::to_value(&config).map_err(|e| CliError::Failure(e.to_string()))?;
            value["equalization"] = analysis;
            json_body(&value)?
        }
    };
    Ok(Rendered::ok(body))
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub z_start: f64,
    pub z_end: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryParams {
    pub k: f64,
    pub one_vortex: Range,
    pub zero_vortex: Range,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            one_vortex: Range { z_start: 1.0, z_end: 4.0, samples: 16 },
            zero_vortex: Range { z_start: 0.25, z_end: 1.0, samples: 16 },
        }
    }
}

#[derive(Serialize)]
struct GeometryRow {
    kind: &'static str,
    branch: Branch,
    #[serde(flatten)]
    point: GradientPoint,
}

fn geometry_rows(p: &GeometryParams) -> Result<Vec<GeometryRow>, CliError> {
    if !(p.k > 0.0 && p.k.is_finite()) {
        return Err(CliError::Failure(format!("k must be positive and finite, got {}", p.k)));
    }
    let mut rows = Vec::new();
    let one =
        gradient_map_segment(Branch::OneVortex, p.k, p.one_vortex.z_start, p.one_vortex.z_end, p.one_vortex.samples)?;
    let zero = gradient_map_segment(
        Branch::ZeroVortex,
        p.k,
        p.zero_vortex.z_start,
        p.zero_vortex.z_end,
        p.zero_vortex.samples,
    )?;
    for (branch, seg) in [(Branch::OneVortex, &one), (Branch::ZeroVortex, &zero)] {
        rows.extend(seg.iter().map(|&point| GeometryRow { kind: "segment", branch, point }));
    }
    for q in one.iter().filter(|q| q.z > 1.0) {
        let point = segment_involution(*q, p.k)?;
        rows.push(GeometryRow { kind: "involution", branch: Branch::ZeroVortex, point });
    }
    for (branch, seg) in [(Branch::ZeroVortex, &zero), (Branch::OneVortex, &one)] {
        for q in seg.iter() {
            let point = squared_map(branch, p.k, q.z)?;
            rows.push(GeometryRow { kind: "squared", branch, point });
        }
    }
    Ok(rows)
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::OneVortex => "one_vortex",
        Branch::ZeroVortex => "zero_vortex",
    }
}

pub fn geometry(ctx: &Context) -> Result<Rendered, CliError> {
    let p: GeometryParams = ctx.load_or_default()?;
    let rows = geometry_rows(&p)?;
    let body = match ctx.format_or(Format::Csv) {
        Format::Csv => {
            let mut out = String::from("kind,branch,dz_dx,dz_dy,z\n");
            for r in &rows {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.kind,
                    branch_name(r.branch),
                    fmt_f64(r.point.dz_dx),
                    fmt_f64(r.point.dz_dy),
                    fmt_f64(r.point.z)
                ));
            }
            out.into_bytes()
        }
        Format::Json => json_body(&rows)?,
    };
    Ok(Rendered::ok(body))
}
