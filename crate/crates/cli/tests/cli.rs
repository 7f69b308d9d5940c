use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str], config: Option<&str>) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_frobtr"));
    cmd.args(args);
    if let Some(text) = config {
        let p: PathBuf = dir.path().join("run.json");
        std::fs::write(&p, text).unwrap();
        cmd.arg("--config").arg(&p);
    }
    (cmd.output().unwrap(), dir)
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn airy_one_one_is_one_eighth() {
    let (o, _d) = run(&["recursion"], Some(r#"{"cover": {"family": "airy"}, "cases": [[1, 1]]}"#));
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let row = &v["rows"][0];
    assert_eq!(row["value"], "1/8");
    assert_eq!(row["quantity"], "omega_{1,1} [dt/(t-p1)^4]");
    for key in ["paper_anchor", "value", "provenance", "tolerance"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = r#"{"cover": {"family": "raw", "num": [0, "-1/2", 0, "1/6"]}, "cases": [[0, 3], [1, 1]]}"#;
    let (a, _d1) = run(&["recursion", "--format", "csv"], Some(cfg));
    let (b, _d2) = run(&["recursion", "--format", "csv"], Some(cfg));
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn curve_info_examples() {
    let (o, _d) = run(&["curve-info"], Some(r#"{"cover": {"family": "airy"}, "orders": {"bergman": 2}}"#));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    let get = |q: &str| rows.iter().find(|r| r["quantity"] == q).map(|r| r["value"].clone());
    assert_eq!(get("N").unwrap(), "1");
    assert_eq!(get("u1").unwrap(), "0");
    assert!(rows.iter().all(|r| r["paper_anchor"] != "beta matrix"));

    let (o, _d) = run(&["curve-info"], Some(r#"{"cover": {"family": "case1", "s1": -1, "s2": 0}, "orders": {"chart": 12, "bergman": 1}}"#));
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    let get = |q: &str| rows.iter().find(|r| r["quantity"] == q).unwrap()["value"].as_str().unwrap().to_string();
    assert!(get("u1").starts_with("0.6666666666"));
    assert!(get("u2").starts_with("-0.6666666666"));
    assert!(get("beta12").ends_with("0.125i"));
}

#[test]
fn fault_injection_names_the_eynard_criterion() {
    let (o, _d) = run(&["verify", "--inject-fault", "sign-flip", "--format", "csv"], Some(r#"{"suite": [4, 5]}"#));
    assert_eq!(o.status.code(), Some(3));
    let out = String::from_utf8(o.stdout).unwrap();
    assert!(out.contains("symplectic condition,criterion 4,PASS"), "{out}");
    let line = out.lines().find(|l| l.contains("criterion 5,")).unwrap();
    assert!(line.starts_with("eynard identity") && line.contains("FAIL"), "{line}");
}

#[test]
fn exact_suite_passes() {
    let (o, _d) = run(&["verify", "--backend", "exact"], None);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let verdicts: Vec<_> = v["rows"].as_array().unwrap().iter().filter(|r| r["tolerance"] == "-").collect();
    assert_eq!(verdicts.len(), 3);
    assert!(verdicts.iter().all(|r| r["value"] == "PASS"));
}

#[test]
fn error_exit_codes() {
    let (o, _d) = run(&["recursion"], Some("{\n  \"cover\": {\"family\": \"airy\"},\n  \"colour\": 1\n}"));
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");
    let (o, _d) = run(&["recursion"], Some(r#"{"cover": {"family": "airy"}, "cases": [[4, 1]]}"#));
    assert_eq!(o.status.code(), Some(2));
    let (o, _d) = run(&["recursion", "--backend", "bigfloat:3"], Some(r#"{"cover": {"family": "airy"}}"#));
    assert_eq!(o.status.code(), Some(2));
    let (o, _d) = run(&["curve-info"], Some(r#"{"cover": {"family": "raw", "num": [0, 0, 0, 1]}}"#));
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8(o.stderr).unwrap().contains("non-generic cover"));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k.csv");
    let cfg = dir.path().join("k.json");
    std::fs::write(&cfg, r#"{"classify": {"case": 2, "n_min": 0, "n_max": 1}}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_frobtr"))
        .args(["classify-2d", "--format", "csv", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("paper_anchor,quantity,value,provenance,tolerance"));
    assert!(text.lines().count() > 1 && text.contains("case 2 n=0 D=1/1"), "{text}");
}
