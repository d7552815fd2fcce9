use std::process::{Command, Output};

use serde_json::Value;

fn qphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qphase")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = qphase(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Header row and data rows of a CSV document.
fn csv(args: &[&str]) -> (Vec<String>, Vec<Vec<f64>>) {
    let out = qphase(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap();
    rows.iter().map(|r| r[i]).collect()
}

#[test]
fn quartic_ground_state() {
    let doc = json(&["quantize", "--potential", "4:0.5", "--levels", "0", "--method", "qlm"]);
    let e = doc["eigenvalues"][0]["E"].as_f64().unwrap();
    assert_eq!(format!("{e:.5}"), "0.53018");
    assert_eq!(doc["config"]["potential"], "4:0.5");
    assert_eq!(doc["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn harmonic_wkb_is_exact() {
    let (header, rows) = csv(&["quantize", "--potential", "2:0.5", "--levels", "0-5", "--method", "wkb", "--format", "csv"]);
    assert_eq!(header, ["n", "E"]);
    for (n, r) in rows.iter().enumerate() {
        assert!((r[1] - (n as f64 + 0.5)).abs() < 1e-10);
    }
}

#[test]
fn dunham_with_terminant() {
    let doc = json(&["quantize", "--potential", "4:0.5", "--levels", "0", "--method", "dunham", "--kmax", "3", "--terminant", "stieltjes"]);
    let e = doc["eigenvalues"][0]["E"].as_f64().unwrap();
    assert!((e - 0.483).abs() < 5e-4, "{e}");
}

#[test]
fn harmonic_phase_slope_at_origin() {
    let (header, rows) = csv(&["phase", "--potential", "harmonic", "--energy", "0.5", "--bc", "harmonic", "--format", "csv"]);
    assert_eq!(header[..6], ["x", "sigma", "dsigma", "alpha", "re_M", "im_M"]);
    let d = column(&header, &rows, "dsigma");
    assert!((d[0] - 2.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
}

#[test]
fn quantum_phase_keeps_accumulating_past_the_turning_point() {
    let (header, rows) = csv(&["phase", "--potential", "quartic", "--energy", "0.5301810452", "--with-semiclassical", "--format", "csv"]);
    let x = column(&header, &rows, "x");
    let sigma = column(&header, &rows, "sigma");
    let wkb = column(&header, &rows, "sigma_wkb");
    let t2 = (4.0f64 * 0.5301810452).powf(0.25);
    let beyond = x.iter().position(|&v| v > 1.5 * t2).unwrap();
    assert!(sigma[beyond] - sigma[x.iter().position(|&v| v > t2).unwrap()] > 0.01);
    assert!(sigma.last().unwrap() > wkb.last().unwrap());
}

#[test]
fn airy_dip_is_deeper_for_the_octic() {
    let dip = |potential: &str| {
        let e = json(&["quantize", "--potential", potential, "--levels", "0"])["eigenvalues"][0]["E"]
            .as_f64()
            .unwrap()
            .to_string();
        let (header, rows) = csv(&["phase", "--potential", potential, "--energy", &e, "--with-semiclassical", "--format", "csv"]);
        let d = column(&header, &rows, "dsigma_airy");
        let peak = d.iter().cloned().fold(0.0, f64::max);
        1.0 - d[0] / peak
    };
    let (quartic, octic) = (dip("quartic"), dip("octic"));
    assert!(octic > 0.1 && octic > quartic, "{quartic} {octic}");
}

#[test]
fn amplitude_derivative_columns() {
    let (header, rows) = csv(&["phase", "--potential", "sextic", "--energy", "10.8571", "--bc", "wkb", "--alpha-derivatives", "--format", "csv"]);
    assert_eq!(header[header.len() - 2..], ["d5_alpha", "d6_alpha"]);
    assert!(rows.iter().all(|r| r.iter().all(|c| c.is_finite())));
}

#[test]
fn decadic_family_sweep() {
    let (header, rows) = csv(&[
        "sweep", "--lambdas", "0.001,1,1000", "--emin", "1", "--emax", "4", "--samples", "6", "--with-semiclassical", "--format", "csv", "--mode", "parallel",
    ]);
    assert_eq!(header, ["lambda", "E", "ntilde", "nsc"]);
    assert_eq!(rows.len(), 18);
    for k in 0..6 {
        assert!(rows[k][2] > rows[6 + k][2] && rows[6 + k][2] > rows[12 + k][2]);
    }
}

#[test]
fn sweep_json_schema() {
    let doc = json(&["sweep", "--potential", "harmonic", "--bc", "harmonic", "--emin", "0.1", "--emax", "2.2", "--samples", "8"]);
    let t = &doc["tables"][0];
    assert_eq!(t["bc_method"], "harmonic_exact");
    assert_eq!(t["grid"].as_array().unwrap().len(), 8);
    assert_eq!(t["ntilde"].as_array().unwrap().len(), 8);
    assert_eq!(t["eigenvalues"][1]["n"], 1);
    assert!((t["eigenvalues"][1]["E"].as_f64().unwrap() - 1.5).abs() < 1e-10);
    assert_eq!(t["diagnostics"]["iterations"].as_array().unwrap().len(), 8);
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--potential", "quartic", "--emin", "0.3", "--emax", "3", "--samples", "6", "--format", "csv", "--mode", "parallel"];
    let a = qphase(&[&args[..], &["--jobs", "1"]].concat());
    let b = qphase(&[&args[..], &["--jobs", "4"]].concat());
    assert!(a.status.success());
    let strip = |o: &Output| String::from_utf8_lossy(&o.stdout).lines().filter(|l| !l.starts_with("# config")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(qphase(&args).stdout, qphase(&args).stdout);
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "potential = \"harmonic\"\nlevels = \"0-2\"\nmethod = \"wkb\"\n").unwrap();
    let out = dir.path().join("levels.json");
    let status = qphase(&["quantize", "--config", cfg.to_str().unwrap(), "--method", "oracle", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["config"]["method"], "oracle");
    assert_eq!(doc["eigenvalues"].as_array().unwrap().len(), 3);
}

#[test]
fn oracle_and_compare() {
    let doc = json(&["oracle", "--potential", "harmonic", "--levels", "0-3"]);
    for l in doc["eigenvalues"].as_array().unwrap() {
        assert!((l["E"].as_f64().unwrap() - l["exact"].as_f64().unwrap()).abs() < 1e-10);
    }
    let (header, rows) = csv(&["compare", "--potential", "octic", "--levels", "0", "--format", "csv"]);
    assert_eq!(header, ["n", "wkb", "airy", "dunham", "qlm", "oracle"]);
    let r = &rows[0];
    assert!((r[4] - r[5]).abs() < 1e-8);
    assert!(r[1] < r[2] && r[2] < r[5]);
}

#[test]
fn exit_codes() {
    let bad = qphase(&["quantize", "--potential", "3:1"]);
    assert_eq!(bad.status.code(), Some(2));
    let record: Value = serde_json::from_slice(&bad.stderr).unwrap();
    assert_eq!(record["error"], "config");
    assert_eq!(qphase(&["phase", "--potential", "quartic"]).status.code(), Some(2));
    assert_eq!(qphase(&["quantize", "--bogus"]).status.code(), Some(2));
    let stuck = qphase(&["quantize", "--potential", "quartic", "--tol", "1e-30"]);
    assert_eq!(stuck.status.code(), Some(3));
    let record: Value = serde_json::from_slice(&stuck.stderr).unwrap();
    assert_eq!(record["error"], "solver");
}
