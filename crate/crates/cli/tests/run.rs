use std::path::Path;

use dkt_cli::run::{run_file, run_manifest, Overrides};
use serde_json::Value;

const MONOPOLE: &str = r#"
version = 1

[numerics]
circle_points = 16
sphere_theta = 16
sphere_phi = 32

[manifolds.s2]
factors = [{ kind = "sphere2", radius = 1.0 }]

[bundles.h3]
kind = "monopole"
manifold = "s2"
degree = 3

[[requests]]
op = "chern_integral"
out = "flux"
args = { bundle = "h3" }
"#;

fn report(text: &str, ov: &Overrides) -> (i32, Value) {
    let r = run_manifest(text, ov).expect("manifest is valid");
    (r.exit_code, serde_json::from_str(&r.render(true)).unwrap())
}

fn value(v: &Value) -> f64 {
    v.as_f64().or_else(|| v.as_str().and_then(|s| s.parse().ok())).unwrap()
}

#[test]
fn empty_request_list() {
    let (code, rep) = report("version = 1\n", &Overrides::default());
    assert_eq!(code, 0);
    assert_eq!(rep["requests"].as_array().unwrap().len(), 0);
    assert_eq!(rep["schema"], "dkt-report/1");
}

#[test]
fn monopole_flux_is_three() {
    let (code, rep) = report(MONOPOLE, &Overrides::default());
    assert_eq!(code, 0);
    let r = &rep["requests"][0];
    assert_eq!(r["status"], "ok");
    let v = value(&r["values"]["integral"]["value"]["-2"]);
    assert!((v - 3.0).abs() < 1e-8, "{v}");
    let conv = &r["convergence"][0];
    assert!((value(&conv["coarse"]) - 3.0).abs() < 1e-8);
    assert!(rep["grid_levels"]["coarse"]["sphere_theta"] == 8);
}

#[test]
fn dangling_bundle_reference_is_a_validation_error() {
    let text = MONOPOLE.replace("bundle = \"h3\"", "bundle = \"h4\"");
    let err = run_manifest(&text, &Overrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("h4"), "{err}");
    let text = MONOPOLE.replace("manifold = \"s2\"", "manifold = \"t2\"");
    let err = run_manifest(&text, &Overrides::default()).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    assert!(err.to_string().contains("bundles.h3"), "{err}");
}

#[test]
fn strict_schema() {
    let unknown = MONOPOLE.replace("degree = 3", "degree = 3\ncolour = 1");
    assert_eq!(run_manifest(&unknown, &Overrides::default()).unwrap_err().exit_code(), 2);
    let bad_arg = MONOPOLE.replace("bundle = \"h3\"", "bundle = \"h3\", power = 2");
    assert_eq!(run_manifest(&bad_arg, &Overrides::default()).unwrap_err().exit_code(), 2);
    assert_eq!(run_manifest("version = [", &Overrides::default()).unwrap_err().exit_code(), 2);
    let numerics = MONOPOLE.replace("circle_points = 16", "circle_points = 1");
    assert_eq!(run_manifest(&numerics, &Overrides::default()).unwrap_err().exit_code(), 3);
    assert_eq!(run_manifest("version = 7\n", &Overrides::default()).unwrap_err().exit_code(), 3);
}

#[test]
fn tolerance_breach_and_numerical_failure() {
    // two polar nodes per panel cannot integrate the curvature to 1e-6
    let (code, rep) = report(MONOPOLE, &Overrides { quad: Some(4), ..Default::default() });
    assert_eq!(code, 5);
    assert_eq!(rep["requests"][0]["status"], "tolerance");
    assert!(value(&rep["requests"][0]["values"]["integral"]["residual"]) > 1e-6);
    let odd = MONOPOLE.to_string()
        + r#"
[classes.x]
manifold = "s2"
degree = 0
generators = [{ bundle = "h3" }]

[[requests]]
op = "reduced_eta"
out = "eta"
args = { class = "x" }
"#;
    let (code, rep) = report(&odd, &Overrides::default());
    assert_eq!(code, 4);
    assert_eq!(rep["requests"][1]["status"], "error");
    assert_eq!(rep["requests"][0]["status"], "ok");
}

const MIXED: &str = r#"
version = 1

[numerics]
circle_points = 32
sphere_theta = 12
sphere_phi = 24

[manifolds.s1]
factors = [{ kind = "circle", length = 1.0 }]
[manifolds.s2]
factors = [{ kind = "sphere2", radius = 1.0 }]
[manifolds.t2]
factors = [{ kind = "circle", length = 1.0 }, { kind = "circle", length = 1.0 }]

[bundles.l]
kind = "flat_line"
manifold = "s1"
theta = [0.3]
[bundles.one]
kind = "trivial"
manifold = "s1"
rank = 1
[bundles.p]
kind = "poincare"
manifold = "t2"
flux = 1

[classes.flat]
manifold = "s1"
degree = 0
generators = [{ bundle = "l", phi = [{ u_degree = -2, coords = [0], amplitude = 0.25 }] }]

[classes.zero]
manifold = "s1"
degree = 0

[classes.g]
manifold = "s1"
degree = -1
parity = "odd"
generators = [{ bundle = "one", aut = { kind = "phase", windings = [2] } }]

[classes.pt]
manifold = "t2"
degree = 2
generators = [{ bundle = "p" }]

[[requests]]
op = "reduced_eta"
out = "eta"
args = { class = "flat" }

[[requests]]
op = "circle_eta"
out = "circle"
args = { theta = 0.3 }

[[requests]]
op = "holonomy"
out = "hol"
args = { bundle = "l", coord = 0, point = [0.0] }

[[requests]]
op = "observable"
out = "obs"
args = { class = "g" }

[[requests]]
op = "suspension_round_trip"
out = "ds"
args = { class = "g" }

[[requests]]
op = "fiber_index"
out = "index"
args = { class = "pt", complex_spheres = true }

[[requests]]
op = "odd_fiber_index"
out = "odd"
args = { class = "flat", a = 2.0 }

[[requests]]
op = "index_theorem"
out = "family"
args = { fiber = "s2", e1 = "zero", e2 = "flat" }
"#;

#[test]
fn mixed_manifest_values() {
    let (code, rep) = report(MIXED, &Overrides::default());
    let reqs = rep["requests"].as_array().unwrap();
    for r in reqs {
        assert_eq!(r["status"], "ok", "{r:#}");
    }
    assert_eq!(code, 0);
    let eta = |i: usize, k: &str| value(&reqs[i]["values"][k]["value"]["value_mod_1"]);
    assert!((eta(0, "eta") - 0.45).abs() < 1e-9);
    assert_eq!(reqs[0]["values"]["eta"]["value"]["u_degree"], -1);
    assert!((eta(1, "eta") - 0.2).abs() < 1e-12);
    assert!((value(&reqs[2]["values"]["arg_over_2pi"]["value"]) - 0.3).abs() < 1e-9);
    assert_eq!(reqs[3]["values"]["observable"]["value"]["rank"], 0);
    assert_eq!(reqs[5]["values"]["index"]["value"], 1);
    assert!((eta(6, "odd_index") - 0.45).abs() < 1e-9);
    assert!((eta(7, "eta_base") - 0.45).abs() < 1e-9);
    assert!((eta(7, "eta_total_space") - 0.45).abs() < 1e-9);
}

#[test]
fn reports_do_not_depend_on_the_thread_count() {
    let one = run_manifest(MIXED, &Overrides { threads: Some(1), ..Default::default() }).unwrap();
    let four = run_manifest(MIXED, &Overrides { threads: Some(4), ..Default::default() }).unwrap();
    assert_eq!(one.render(false), four.render(false));
    assert!(one.render(true).contains("wall_time_s"));
    assert!(!one.render(false).contains("wall_time_s"));
}

#[test]
fn run_file_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.toml");
    std::fs::write(&m, MONOPOLE).unwrap();
    let out = dir.path().join("report.json");
    let (code, _) = run_file(&m, Some(&out), &Overrides::default());
    assert_eq!(code, 0);
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(rep["exit_code"], 0);
    let (code, msg) = run_file(Path::new("/nonexistent/m.toml"), None, &Overrides::default());
    assert_eq!(code, 2);
    assert!(msg.contains("nonexistent"));
}
