use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

use gelfand_cli::{run, validate_config, RunOptions};
use gelfand_core::spaces::{raster_from_shape, RasterSidecar};
use gelfand_core::{Complex64, RasterRegion, Shape};

const SMALL: &str = r#"{
  "seed": 7,
  "algebras": { "c2": { "preset": "pointwise_2" } },
  "spaces": {
    "x3": { "line": [0.0, 0.25, 1.0] },
    "annulus_r16": { "raster": { "shape": { "annulus": { "center": [0, 0], "inner": 0.5, "outer": 1.0 } }, "resolution": 16 } }
  },
  "systems": {
    "c_x3": { "kind": "cxe", "space": "x3", "algebra": "complex" },
    "c2_x3": { "kind": "cxe", "space": "x3", "algebra": "c2" },
    "affine": { "kind": "poly", "space": "x3", "algebra": "complex", "degree": 1 }
  },
  "quadruples": { "cxe_demo": { "space": "x3", "algebra": "c2", "scalar": "c_x3", "vector": "c2_x3" } },
  "run": [
    { "command": "characters", "target": "dual_numbers" },
    { "command": "hull", "target": "annulus_r16" },
    { "command": "shilov", "target": "affine" },
    { "command": "verify-product", "target": "cxe_demo" },
    { "command": "peaker", "target": "cxe_demo", "point": 2 }
  ]
}"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn report(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.report.json"))).unwrap()).unwrap()
}

fn pair(v: &Value) -> Complex64 {
    Complex64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn run_small() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    run(&config, &RunOptions { output_dir: Some(out.clone()), seed: None, quiet: true }).unwrap();
    (dir, out)
}

#[test]
fn shipped_demo_config_validates() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.json");
    let report = validate_config(&path).unwrap();
    assert!(report.passed(), "{report:?}");
}

#[test]
fn dangling_reference_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(r#""scalar": "c_x3""#, r#""scalar": "nowhere""#);
    let report = validate_config(&write_config(dir.path(), &text)).unwrap();
    assert!(!report.passed());
    let failure = report.failures().next().unwrap();
    assert_eq!(failure.name, "quadruples.cxe_demo");
    assert!(failure.detail.contains("`nowhere`"), "{}", failure.detail);
}

#[test]
fn inverted_annulus_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(r#""inner": 0.5, "outer": 1.0"#, r#""inner": 1.0, "outer": 0.5"#);
    let report = validate_config(&write_config(dir.path(), &text)).unwrap();
    let failure = report.failures().next().expect("shape failure");
    assert_eq!(failure.name, "spaces.annulus_r16");
    assert!(failure.detail.contains("annulus_r16"));
}

#[test]
fn parse_errors_carry_position() {
    let dir = tempfile::tempdir().unwrap();
    let report = validate_config(&write_config(dir.path(), "{\n  \"run\": [\n    {\"command\": }\n]}")).unwrap();
    let failure = report.failures().next().unwrap();
    assert_eq!(failure.name, "parse");
    assert_eq!(failure.indices[0], 3);
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(r#""seed": 7,"#, r#""seed": 7, "sead": 8,"#);
    assert!(!validate_config(&write_config(dir.path(), &text)).unwrap().passed());
}

#[test]
fn characters_of_dual_numbers() {
    let (_dir, out) = run_small();
    let r = report(&out, "characters_dual_numbers");
    assert_eq!(r["command"], "characters");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["config_sha256"].as_str().unwrap().len(), 64);
    let chars = r["result"]["characters"].as_array().unwrap();
    assert_eq!(chars.len(), 1);
    assert_eq!(pair(&chars[0]["values"][0]), Complex64::new(1.0, 0.0));
    assert_eq!(pair(&chars[0]["values"][1]), Complex64::new(0.0, 0.0));
    let radical = r["result"]["radical"].as_array().unwrap();
    assert_eq!(radical.len(), 1);
    assert_eq!(pair(&radical[0][0]).norm(), 0.0);
    assert!((pair(&radical[0][1]).norm() - 1.0).abs() < 1e-12);
}

#[test]
fn hull_output_equals_disk_raster() {
    let (_dir, out) = run_small();
    let r = report(&out, "hull_annulus_r16");
    let sidecar: RasterSidecar = serde_json::from_value(r["result"]["sidecar"].clone()).unwrap();
    let hull = RasterRegion::from_pgm(&std::fs::read_to_string(out.join("hull_annulus_r16.pgm")).unwrap(), &sidecar).unwrap();
    let disk = raster_from_shape(&Shape::Disk { center: Complex64::new(0.0, 0.0), radius: 1.0 }, 16.0).unwrap();
    assert_eq!(hull, disk);
    assert_eq!(r["result"]["holes"], 1);
    let boundary = std::fs::read_to_string(out.join("hull_annulus_r16.csv")).unwrap();
    assert!(boundary.starts_with("x,y\n") && boundary.lines().count() > 10);
}

#[test]
fn certificates_reverify_from_json_alone() {
    let (_dir, out) = run_small();
    let r = report(&out, "shilov_affine");
    let values: Vec<Vec<Complex64>> =
        r["result"]["values"].as_array().unwrap().iter().map(|row| row.as_array().unwrap().iter().map(pair).collect()).collect();
    let certs = r["result"]["estimate"]["certificates"].as_array().unwrap();
    let mut peaks = 0;
    for cert in certs {
        if cert["status"] != "certified_peak" {
            continue;
        }
        peaks += 1;
        let target = cert["target"].as_u64().unwrap() as usize;
        let coeffs: Vec<Complex64> = cert["coefficients"].as_array().unwrap().iter().map(pair).collect();
        let vals: Vec<Complex64> = values.iter().map(|row| row.iter().zip(&coeffs).map(|(a, b)| a * b).sum()).collect();
        assert!((vals[target] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        let sep = cert["separation"].as_f64().unwrap();
        for (k, v) in vals.iter().enumerate() {
            if k != target {
                assert!(v.norm() <= 1.0 - sep + 1e-12);
            }
        }
    }
    // endpoints of the segment peak for affine functions, the midpoint does not
    assert_eq!(peaks, 2);
    let csv = std::fs::read_to_string(out.join("shilov_affine.csv")).unwrap();
    assert!(csv.lines().nth(2).unwrap().ends_with(&format!("certified_not_peak,{}", certs[1]["optimum"])));
}

#[test]
fn product_report_has_empty_difference() {
    let (_dir, out) = run_small();
    let r = report(&out, "verify_product_cxe_demo");
    let cmp = &r["result"]["comparison"];
    assert_eq!(cmp["missing"].as_array().unwrap().len(), 0);
    assert_eq!(cmp["extra"].as_array().unwrap().len(), 0);
    assert_eq!(cmp["certified"].as_array().unwrap().len(), 6);
    assert_eq!(r["result"]["passed"], true);

    let g = report(&out, "peaker_cxe_demo");
    assert_eq!(g["result"]["peaker"]["report"]["checks"].as_array().unwrap().iter().filter(|c| c["passed"] == false).count(), 0);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out = dir.path().join("o");
    run(&config, &RunOptions { output_dir: Some(out.clone()), seed: Some(99), quiet: true }).unwrap();
    assert_eq!(report(&out, "characters_dual_numbers")["seed"], 99);
}

#[test]
fn binary_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace(r#""target": "annulus_r16""#, r#""target": "missing_raster""#);
    let config = write_config(dir.path(), &text);
    let output = Command::new(env!("CARGO_BIN_EXE_gelfand"))
        .args(["--config", config.to_str().unwrap(), "--quiet", "--output-dir"])
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!output.status.success());
    let body: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(body["error"]["kind"], "schema");
    assert!(body["error"]["message"].as_str().unwrap().contains("missing_raster"));

    // an operational failure: the midpoint of a segment is not a peak point
    let text = SMALL
        .replace(r#""scalar": "c_x3""#, r#""scalar": "affine""#)
        .replace(r#"{ "command": "peaker", "target": "cxe_demo", "point": 2 }"#, r#"{ "command": "peaker", "target": "cxe_demo", "point": 1 }"#);
    let config = write_config(dir.path(), &text);
    let output = Command::new(env!("CARGO_BIN_EXE_gelfand"))
        .args(["--config", config.to_str().unwrap(), "--quiet", "--output-dir"])
        .arg(dir.path().join("out2"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    let body: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(body["error"]["kind"], "precondition");
    assert_eq!(body["error"]["command"], "peaker_cxe_demo");
}
