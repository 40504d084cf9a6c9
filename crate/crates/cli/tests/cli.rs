use std::process::{Command, Output};

use serde_json::Value;

fn qdisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdisk")).args(args).env_remove("QDISK_DIM").output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn write(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn lift_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        &dir,
        "lift.json",
        r#"{"b":{"dim":8,"entries":[{"k":1,"l":0,"re":-1,"im":0}]},"c":{"dim":8,"entries":[{"k":0,"l":1,"re":1,"im":0}]}}"#,
    );
    let v = json_of(&qdisk(&["lift", "--input", &input]));
    let coeffs = v["f"]["coeffs"].as_array().unwrap();
    assert_eq!(coeffs.len(), 1);
    assert_eq!((coeffs[0]["n"].as_i64(), coeffs[0]["re"].as_f64()), (Some(0), Some(-1.0)));
    let entries = v["alpha_tilde"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!((entries[0]["k"].as_u64(), entries[0]["l"].as_u64(), entries[0]["re"].as_f64()), (Some(0), Some(0), Some(1.0)));
    assert_eq!(v["residuals"]["commutator_u"].as_f64(), Some(0.0));
}

#[test]
fn mobius_first_column() {
    let v = json_of(&qdisk(&["mobius", "--alpha-re", "1.25", "--beta-re", "0.75", "--dim", "64"]));
    let f0 = v["f0"].as_array().unwrap();
    assert!((f0[0][0].as_f64().unwrap() - 0.8).abs() < 1e-15);
    assert!((f0[1][0].as_f64().unwrap() + 0.48).abs() < 1e-15);
    assert!(v["isometry_residual"].as_f64().unwrap() < 1e-8);
}

#[test]
fn norms_of_unit_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(&dir, "p03.json", r#"{"dim":8,"entries":[{"k":0,"l":3,"re":1,"im":0}]}"#);
    let v = json_of(&qdisk(&["norms", "--input", &input, "--M", "2", "--N", "1"]));
    let mn = v.as_array().unwrap().iter().find(|r| r["kind"] == "MN" && r["M"] == 2 && r["N"] == 1).unwrap();
    assert_eq!(mn["value"].as_f64(), Some(64.0));

    let v = json_of(&qdisk(&["norms", "--input", &input, "--M", "2", "--N", "1", "--all-inequalities"]));
    assert!(v["inequalities"].as_array().unwrap().iter().all(|c| c["holds"] == true));
}

#[test]
fn unknown_suite_is_rejected() {
    let out = qdisk(&["suite", "--suites", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn suite_report_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = qdisk(&["suite", "--suites", "index,mobius", "--cases", "10", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["config"]["max_MN"], 3);
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn suite_csv_has_one_row_per_check() {
    let out = qdisk(&["suite", "--suites", "sequences", "--cases", "5", "--format", "csv"]);
    assert!(out.status.success());
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap().iter().take(3).collect::<Vec<_>>(), ["suite", "name", "paper_anchor"]);
    assert_eq!(rdr.records().count(), 6);
}

#[test]
fn index_modules() {
    let odd = json_of(&qdisk(&["index", "--module", "odd-circle", "--dim", "32"]));
    assert_eq!(odd["index"], -1);
    let even = json_of(&qdisk(&["index", "--module", "even-K", "--dim", "32"]));
    assert_eq!((even["pairing_p00"]["index"].as_i64(), even["pairing_i"]["index"].as_i64()), (Some(1), Some(0)));
    assert_eq!(json_of(&qdisk(&["index", "--module", "weighted-shift", "--dim", "32"]))["index"], 1);
    assert_eq!(json_of(&qdisk(&["index", "--module", "even-circle"]))["index"], 1);
    assert_eq!(json_of(&qdisk(&["index", "--module", "spectral-D", "--dim", "32"]))["scaling"]["index"], 1);

    let dir = tempfile::tempdir().unwrap();
    let z2 = write(&dir, "z2.json", r#"{"coeffs":[{"n":2,"re":1,"im":0}]}"#);
    assert_eq!(json_of(&qdisk(&["index", "--module", "index-map", "--input", &z2, "--dim", "32"]))["index"], -2);
}

#[test]
fn calculus_functions_match_oracles() {
    let dir = tempfile::tempdir().unwrap();
    let h = write(
        &dir,
        "h.json",
        r#"{"dim":8,"entries":[{"k":0,"l":0,"re":0.3,"im":0},{"k":1,"l":0,"re":0.2,"im":0.1},{"k":0,"l":1,"re":0.2,"im":-0.1}]}"#,
    );
    for f in ["exp", "inverse-shift", "square"] {
        let v = json_of(&qdisk(&["calculus", "--input", &h, "--function", f]));
        assert!(v["residual"].as_f64().unwrap() < 1e-10, "{f}: {v}");
    }
    let sine = write(&dir, "sin.json", r#"{"coeffs":[{"n":1,"re":0,"im":-0.5},{"n":-1,"re":0,"im":0.5}]}"#);
    let v = json_of(&qdisk(&["calculus", "--input", &h, "--function", "fourier", "--L", "4", "--fourier", &sine]));
    assert!(v["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(qdisk(&["calculus", "--input", &h, "--function", "fourier"]).status.code(), Some(2));
}
