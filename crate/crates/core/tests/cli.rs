use std::path::Path;
use std::process::{Command, Output};

fn intergrow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intergrow")).args(args).env_remove("INTERGROW_PRECISION_OVERRIDE").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn expsum_csv_rows_per_checkpoint() {
    let o = intergrow(&["expsum", "--c", "0.3", "--shifts", "1,0", "--alphas", "1,-1", "--dyadic", "6..10", "--no-timing"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "N,re,im,modulus_over_N,precision_bits,wall_ms");
    let ns: Vec<u64> = lines[1..].iter().map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ns, vec![64, 128, 256, 512, 1024]);
    assert!(lines[1..].iter().all(|l| l.ends_with(",0")));
}

#[test]
fn bad_c_is_an_error_with_json() {
    let o = intergrow(&["expsum", "--c", "0.6", "--shifts", "0", "--alphas", "1", "--N", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["error"]["kind"], "domain");
    assert!(v["error"]["message"].as_str().unwrap().contains("c out of (0,1/2)"));
}

#[test]
fn missing_option_and_unknown_flag() {
    let o = intergrow(&["expsum", "--c", "0.3", "--alphas", "1", "--N", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("missing --shifts"));
    let o = intergrow(&["expsum", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"input\""));
}

#[test]
fn threshold_failure_exits_two() {
    let o = intergrow(&["expsum", "--c", "0.3", "--shifts", "0", "--alphas", "1", "--N", "1", "--threshold", "0.5"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("[FAIL]"));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(intergrow(&["--help"]).status.code(), Some(0));
    assert_eq!(intergrow(&["--version"]).status.code(), Some(0));
}

#[test]
fn json_report_reruns_from_its_own_config() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["weyl", "--c", "0.25", "--shifts", "0,2", "--k", "1,-2", "--N", "3000", "--format", "json", "--no-timing"];
    let mut first: Vec<&str> = args.to_vec();
    first.extend(["--out", a.to_str().unwrap()]);
    assert_eq!(intergrow(&first).status.code(), Some(0));
    let o = intergrow(&["weyl", "--config", a.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let va: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let vb: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(va["result"], vb["result"]);
    let mut ca = va["config"].clone();
    ca.as_object_mut().unwrap().remove("out");
    let mut cb = vb["config"].clone();
    cb.as_object_mut().unwrap().remove("out");
    assert_eq!(ca, cb);
}

#[test]
fn flags_win_over_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"c":0.3,"shifts":[0],"alphas":["1"],"N":50,"no_timing":true}"#).unwrap();
    let o = intergrow(&["expsum", "--config", cfg.to_str().unwrap(), "--N", "70"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("70,"));
    std::fs::write(&cfg, r#"{"c":0.3,"typo":1}"#).unwrap();
    let o = intergrow(&["expsum", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"json\""));
}

#[test]
fn outputs_are_byte_stable_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let p = dir.path().join(name);
        let o = intergrow(&[
            "expsum", "--c", "0.3", "--shifts", "2,0,-1", "--alphas", "1,sqrt(2),-1/3", "--floor", "--N", "20000", "--threads", threads,
            "--no-timing", "--out", p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
        std::fs::read(p).unwrap()
    };
    assert_eq!(run("a.csv", "1"), run("b.csv", "3"));
}

#[test]
fn precision_override_is_reported() {
    let o = Command::new(env!("CARGO_BIN_EXE_intergrow"))
        .args(["expsum", "--c", "0.3", "--shifts", "0", "--alphas", "1", "--N", "100", "--format", "json"])
        .env("INTERGROW_PRECISION_OVERRIDE", "320")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"][0]["precision_bits"], 320);
    assert!(stderr(&o).contains("INTERGROW_PRECISION_OVERRIDE"));
}

#[test]
fn equi_csv_writes_histograms_next_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("equi.csv");
    let o = intergrow(&[
        "equi", "--c", "0.3", "--shifts", "0", "--N", "3000", "--moduli", "3", "--format", "csv", "--out", p.to_str().unwrap(),
    ]);
    assert!(matches!(o.status.code(), Some(0) | Some(2)), "{}", stdout(&o));
    assert!(std::fs::read_to_string(&p).unwrap().starts_with("N,Dstar\n"));
    let hist = Path::new(&format!("{}.residues_q3_h0.csv", p.display())).to_path_buf();
    let text = std::fs::read_to_string(hist).unwrap();
    let total: u64 = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 3000);
}

#[test]
fn fingerprint_budget_error() {
    let o = intergrow(&["fingerprint", "--seq", "a", "--c", "0.3", "--H", "3", "--E", "2", "--N", "100"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"budget\""));
}

#[test]
fn fitdecay_reads_an_expsum_series() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let o = intergrow(&["expsum", "--c", "0.3", "--shifts", "1,0", "--alphas", "1,-1", "--dyadic", "8..14", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = intergrow(&["fitdecay", "--c", "0.3", "--input", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["result"]["points"], 7);
}

#[test]
fn skewdemo_rational_orbit_matches() {
    let o = intergrow(&["skewdemo", "--alpha", "2/7", "--m", "1", "--shifts", "0,1", "--N", "7000", "--threshold", "1e-9"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
