use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn zvortex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zvortex"))
        .args(args)
        .env_remove("ZVORTEX_TOLERANCE_SCALE")
        .output()
        .expect("binary runs")
}

fn write_params(dir: &TempDir, name: &str, json: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn verify_default_grid_passes() {
    let out = zvortex(&["verify"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["passed"], Value::Bool(true));
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 12);
    assert!(checks.iter().all(|c| c["passed"] == Value::Bool(true)));
}

#[test]
fn verify_rejects_zero_in_grid() {
    let dir = TempDir::new().unwrap();
    let params = write_params(&dir, "v.json", r#"{"z": [0.0, 1.0]}"#);
    let out = zvortex(&["verify", "--params", &params]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage error"));
}

#[test]
fn verify_flags_perturbed_field() {
    let dir = TempDir::new().unwrap();
    let params = write_params(&dir, "v.json", r#"{"perturbation": 0.1}"#);
    let out = zvortex(&["verify", "--params", &params]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let checks = report["checks"].as_array().unwrap();
    let imag = checks.iter().find(|c| c["name"] == "one_vortex_imag_residual").unwrap();
    assert!(imag["value"].as_f64().unwrap() > 1e-3);
    assert_eq!(imag["passed"], Value::Bool(false));
    // the analyticity checks do not involve the field
    let cr = checks.iter().find(|c| c["name"] == "cauchy_riemann").unwrap();
    assert_eq!(cr["passed"], Value::Bool(true));
}

#[test]
fn verify_tolerance_scale_precedence() {
    let tight = |extra: &[&str], env: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_zvortex"));
        cmd.arg("verify").args(extra).env_remove("ZVORTEX_TOLERANCE_SCALE");
        if let Some(v) = env {
            cmd.env("ZVORTEX_TOLERANCE_SCALE", v);
        }
        cmd.output().unwrap()
    };
    // 1e-9 makes the Laplace bound 1e-15, which finite differences cannot reach
    assert_eq!(tight(&[], Some("1e-9")).status.code(), Some(1));
    assert_eq!(tight(&["--tolerance-scale", "1"], Some("1e-9")).status.code(), Some(0));
    assert_eq!(tight(&["--tolerance-scale", "-1"], None).status.code(), Some(2));
    assert_eq!(tight(&[], Some("abc")).status.code(), Some(2));
}

#[test]
fn malformed_params_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let params = write_params(&dir, "bad.json", "{ not json");
    assert_eq!(zvortex(&["verify", "--params", &params]).status.code(), Some(2));
    let unknown = write_params(&dir, "unknown.json", r#"{"zz": [1.0]}"#);
    assert_eq!(zvortex(&["verify", "--params", &unknown]).status.code(), Some(2));
    assert_eq!(zvortex(&["trajectory"]).status.code(), Some(2));
    assert_eq!(zvortex(&["bogus"]).status.code(), Some(2));
}

#[test]
fn trajectory_reaches_unit_radius_at_collapse() {
    let dir = TempDir::new().unwrap();
    let params = write_params(
        &dir,
        "t.json",
        r#"{"branch": "one_vortex", "k": 1.0, "s": 1.0, "t_end": 0.3333333333333333, "steps": 100}"#,
    );
    let out = zvortex(&["trajectory", "--params", &params]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("t,u,v,radius,gradient_radius"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 101);
    let last: f64 = rows.last().unwrap()[3].parse().unwrap();
    assert!((last - 1.0).abs() < 1e-12);
    let first: f64 = rows[0][3].parse().unwrap();
    assert!((first - std::f64::consts::E).abs() < 1e-12);
}

#[test]
fn zero_vortex_radius_strictly_decreases() {
    let dir = TempDir::new().unwrap();
    let params =
        write_params(&dir, "t.json", r#"{"branch": "zero_vortex", "k": 1.0, "s": 1.0, "t_end": 0.3333333333333333}"#);
    let out = zvortex(&["trajectory", "--params", &params]);
    let radii: Vec<f64> = csv_rows(&stdout(&out)).iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(radii.len() > 2);
    assert!(radii.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn trajectory_edge_cases() {
    let dir = TempDir::new().unwrap();
    let empty = write_params(&dir, "e.json", r#"{"branch": "zero_vortex", "k": 1.0, "s": 1.0, "times": []}"#);
    let out = zvortex(&["trajectory", "--params", &empty]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "t,u,v,radius,gradient_radius\n");

    let degenerate = write_params(&dir, "k0.json", r#"{"branch": "one_vortex", "k": 0.0, "s": 1.0}"#);
    let out = zvortex(&["trajectory", "--params", &degenerate]);
    assert_eq!(out.status.code(), Some(1));

    let from_potential = write_params(&dir, "u.json", r#"{"branch": "one_vortex", "u_f": 2.5, "s": 1.0, "steps": 4}"#);
    let out = zvortex(&["trajectory", "--params", &from_potential, "--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["solution"]["k"].as_f64(), Some(1.0));
    assert_eq!(doc["solution"]["collapse_time"].as_f64(), Some(1.0 / 3.0));
    assert_eq!(doc["points"].as_array().unwrap().len(), 5);
}

#[test]
fn ladder_trace_and_below_ground() {
    let dir = TempDir::new().unwrap();
    let params = write_params(&dir, "l.json", r#"{"eigenvalues": [1, 3, 7], "schedule": [1, 2, 3, 5, 7]}"#);
    let out = zvortex(&["ladder", "--params", &params]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("step,E,j,k"));
    let levels: Vec<String> = csv_rows(&text).iter().map(|r| r[2].clone()).collect();
    assert_eq!(levels, ["0", "0", "1", "1", "2"]);

    let out = zvortex(&["ladder", "--params", &params, "--format", "json"]);
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let first_jump = doc["jumps"][0]["delta_k"].as_f64().unwrap();
    let expect = (1.0f64 / 6.0).sqrt() * (3f64.sqrt() - 1.0);
    assert!((first_jump - expect).abs() < 1e-12);

    let below = write_params(&dir, "b.json", r#"{"eigenvalues": [1, 3, 7], "schedule": [0.5]}"#);
    let out = zvortex(&["ladder", "--params", &below]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("below the ground level"));
}

#[test]
fn ensemble_report_and_bits() {
    let dir = TempDir::new().unwrap();
    let params = write_params(
        &dir,
        "e.json",
        r#"{"pair_production_rate": 50, "ratio_zero_to_one": 1, "k": 1, "s": 1, "horizon": 40, "samples": 4}"#,
    );
    let bits = dir.path().join("bits.txt");
    let out = zvortex(&["ensemble", "--params", &params, "--seed", "11", "--bits", bits.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["config"]["seed"].as_u64(), Some(11));
    let emitted = doc["bits_emitted"]["zeros"].as_u64().unwrap() + doc["bits_emitted"]["ones"].as_u64().unwrap();
    let produced = doc["produced"]["zeros"].as_u64().unwrap() + doc["produced"]["ones"].as_u64().unwrap();
    let live = doc["live_zero"].as_u64().unwrap() + doc["live_one"].as_u64().unwrap();
    assert_eq!(produced, emitted + live);
    let bit_text = fs::read_to_string(&bits).unwrap();
    assert_eq!(bit_text.trim_end().len() as u64, emitted);
    assert!(bit_text.trim_end().chars().all(|c| c == '0' || c == '1'));

    let out = zvortex(&["ensemble", "--params", &params, "--format", "csv"]);
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("t,live_0,live_1,emitted_0,emitted_1"));
    assert_eq!(csv_rows(&text).len(), 4);
}

#[test]
fn ensemble_invalid_epsilon_fails() {
    let dir = TempDir::new().unwrap();
    let params = write_params(
        &dir,
        "e.json",
        r#"{"pair_production_rate": 1, "ratio_zero_to_one": 1, "k": 1, "s": 1, "horizon": 10, "epsilon": 0.0}"#,
    );
    assert_eq!(zvortex(&["ensemble", "--params", &params]).status.code(), Some(1));
}

#[test]
fn geometry_rows_and_domain_error() {
    let out = zvortex(&["geometry"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("kind,branch,dz_dx,dz_dy,z"));
    let rows = csv_rows(&text);
    let first = &rows[0];
    assert_eq!((first[0].as_str(), first[1].as_str()), ("segment", "one_vortex"));
    assert_eq!(first[2].parse::<f64>().unwrap(), 1.0);
    for r in rows.iter().filter(|r| r[0] == "involution") {
        let (g, z): (f64, f64) = (r[2].parse().unwrap(), r[4].parse().unwrap());
        assert!((g + z).abs() < 1e-12, "image off the 0-vortex line: {r:?}");
    }
    assert!(rows.iter().any(|r| r[0] == "squared"));

    let dir = TempDir::new().unwrap();
    let bad = write_params(&dir, "g.json", r#"{"zero_vortex": {"z_start": 0.5, "z_end": 2.0, "samples": 3}}"#);
    assert_eq!(zvortex(&["geometry", "--params", &bad]).status.code(), Some(1));
}

#[test]
fn identical_params_give_identical_output() {
    let dir = TempDir::new().unwrap();
    let ens = write_params(
        &dir,
        "e.json",
        r#"{"pair_production_rate": 20, "ratio_zero_to_one": 2, "k": 1, "s": 1, "horizon": 30, "seed": 5}"#,
    );
    let traj = write_params(&dir, "t.json", r#"{"branch": "one_vortex", "k": 1.3, "s": 0.7, "steps": 50}"#);
    for args in [
        vec!["ensemble", "--params", ens.as_str()],
        vec!["ensemble", "--params", ens.as_str(), "--format", "csv"],
        vec!["trajectory", "--params", traj.as_str()],
        vec!["verify", "--format", "csv"],
        vec!["geometry", "--format", "json"],
    ] {
        assert_eq!(zvortex(&args).stdout, zvortex(&args).stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("geometry.csv");
    let out = zvortex(&["geometry", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(Path::new(&target).exists());
    assert_eq!(fs::read(&target).unwrap(), zvortex(&["geometry"]).stdout);
}

#[test]
fn csv_floats_have_seventeen_significant_digits() {
    let out = zvortex(&["geometry"]);
    let text = stdout(&out);
    let field = &csv_rows(&text)[1][2];
    let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{field}");
}

#[test]
fn hbar_and_mass_flags_override_params() {
    let dir = TempDir::new().unwrap();
    let params =
        write_params(&dir, "t.json", r#"{"branch": "one_vortex", "u_f": 2.5, "s": 1.0, "steps": 2, "hbar": 2.0}"#);
    let json = |extra: &[&str]| -> Value {
        let mut args = vec!["trajectory", "--params", params.as_str(), "--format", "json"];
        args.extend_from_slice(extra);
        serde_json::from_str(&stdout(&zvortex(&args))).unwrap()
    };
    // k = sqrt(2 m U / 5) / hbar
    assert_eq!(json(&[])["solution"]["k"].as_f64(), Some(0.5));
    assert_eq!(json(&["--hbar", "1"])["solution"]["k"].as_f64(), Some(1.0));
    let heavy = json(&["--hbar", "1", "--mass", "4"]);
    assert_eq!(heavy["solution"]["k"].as_f64(), Some(2.0));
    assert_eq!(heavy["solution"]["beta"].as_f64(), Some(0.25));
}
