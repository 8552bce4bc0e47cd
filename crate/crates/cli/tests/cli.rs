use std::process::{Command, Output};

fn tension(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tension"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn intercepts_of_string_ot() {
    let o = tension(&["intercepts", "--catalog", "string-ot", "--L", "2"]);
    assert!(o.status.success());
    let r = &json(&o)["result"];
    for (k, v) in [("tx", 3.0), ("ty", 3.0), ("tz", 4.0)] {
        assert!((r[k].as_f64().unwrap() - v).abs() < 1e-9, "{k}");
    }
}

#[test]
fn intercepts_of_uniform_common_csv() {
    let o = tension(&[
        "--format",
        "csv",
        "intercepts",
        "--catalog",
        "uniform-common",
        "--k",
        "4",
    ]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "tx,ty,tz,gk,mutual_information,resolvable\n0,0,0,2,2,true\n"
    );
}

#[test]
fn file_input_matches_constructor() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("z25.json");
    let show = tension(&["catalog", "show", "z-source", "--p", "0.25"]);
    let entry = json(&show);
    std::fs::write(&path, entry["joint"].to_string()).unwrap();
    let from_file = tension(&["intercepts", "--file", path.to_str().unwrap()]);
    let built = tension(&["intercepts", "--catalog", "z-source", "--p", "0.25"]);
    assert_eq!(json(&from_file)["result"], json(&built)["result"]);
}

#[test]
fn trace_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let o = tension(&[
            "trace",
            "--catalog",
            "bit-ot",
            "--directions",
            "4",
            "--restarts",
            "4",
            "--seed",
            "7",
            "--workers",
            workers,
            "--output",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn rate_bound_string_ot_to_bit_ots() {
    let o = tension(&[
        "rate-bound",
        "--setup",
        "string-ot:L=2",
        "--target",
        "two-bit-ot",
    ]);
    assert!(o.status.success());
    let bound = json(&o)["result"]["bound"].as_f64().unwrap();
    assert!((bound - 1.0).abs() < 1e-9);
}

#[test]
fn rate_bound_self_sampling() {
    let o = tension(&["rate-bound", "--setup", "bit-ot", "--target", "bit-ot"]);
    assert!(o.status.success());
    assert!(json(&o)["result"]["bound"].as_f64().unwrap() >= 1.0 - 1e-6);
}

#[test]
fn rate_bound_resolvable_target_is_infinite() {
    let o = tension(&[
        "rate-bound",
        "--setup",
        "bit-ot",
        "--target",
        "uniform-common:k=2",
    ]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["result"]["bound"], "inf");
    assert!(r["result"]["caveats"][0]
        .as_str()
        .unwrap()
        .contains("perfectly resolvable"));
}

#[test]
fn refusal_exit_code() {
    let o = tension(&["rate-bound", "--setup", "bit-ot", "--target", "z-source"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("refused"));
}

#[test]
fn invalid_input_exit_code() {
    let o = tension(&["intercepts", "--catalog", "z-source", "--p", "0.7"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tension(&["intercepts", "--catalog", "string-ot", "--L", "9"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tension(&["intercepts"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_guard_refuses() {
    let o = tension(&["oracle", "--catalog", "bit-ot"]);
    assert_eq!(o.status.code(), Some(3));
    let o = tension(&[
        "--format",
        "csv",
        "oracle",
        "--catalog",
        "z-source",
        "--steps",
        "4",
        "--directions",
        "2",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn slice_of_resolvable_input_is_one_row() {
    let o = tension(&[
        "--format",
        "csv",
        "slice",
        "--catalog",
        "uniform-common",
        "--k",
        "2",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "alpha,r1,r2,residual,caveat\n0.5,0,0,0,\n");
}

#[test]
fn slice_csv_columns() {
    let o = tension(&[
        "--format",
        "csv",
        "slice",
        "--catalog",
        "bit-ot",
        "--grid",
        "3",
        "--restarts",
        "8",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let mid = &rows[1];
    let sum: f64 = mid[1].parse::<f64>().unwrap() + mid[2].parse::<f64>().unwrap();
    assert!((sum - 1.0).abs() < 0.02, "{text}");
    assert!(!text.contains("NaN"));
}

#[test]
fn catalog_listing() {
    let o = tension(&["catalog", "list"]);
    assert!(o.status.success());
    let names: Vec<String> = json(&o)
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap().to_string())
        .collect();
    assert!(names.contains(&"bit-ot".to_string()) && names.contains(&"string-ot".to_string()));
}
