use std::process::{Command, Output};

fn hoairy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hoairy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn parse(o: &Output) -> f64 {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    stdout(o).parse().expect("bare number")
}

#[test]
fn zero_lambda_determinant_is_one() {
    let o = hoairy(&["det", "--n", "1", "--t", "0", "--lambda", "0", "--weight", "fermi:alpha=1"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1.0");
}

#[test]
fn hierarchy_text_matches_golden() {
    let o = hoairy(&["hierarchy", "--kind", "pii", "--n", "2", "--format", "text"]);
    assert!(o.status.success());
    let golden = include_str!("../../hoairy/tests/golden/pii_n2.txt");
    assert_eq!(stdout(&o), golden.trim());
}

#[test]
fn hierarchy_json_parses() {
    let o = hoairy(&["hierarchy", "--kind", "mkdv", "--n", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn identity_row_is_consistent() {
    let o = hoairy(&["identity", "--n", "1", "--weight", "fermi:alpha=1", "--t", "0"]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["t", "u_x_ref", "q", "log_d_tw", "log_d_det", "diff"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 1);
    let diff: f64 = rows[0][5].parse().unwrap();
    assert!(diff.abs() < 1e-4, "diff {diff}");
}

#[test]
fn det_range_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let o = hoairy(&["det", "--t-from", "-1", "--t-to", "1", "--t-step", "1", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let dets: Vec<f64> = rdr.records().map(|r| r.unwrap()[4].parse().unwrap()).collect();
    assert_eq!(dets.len(), 3);
    assert!(dets.windows(2).all(|w| w[0] < w[1]));
    assert!(dets.iter().all(|d| (0.0..=1.0).contains(d)));
}

#[test]
fn config_values_apply_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"n": 2, "t": 1.0, "lambda": 1.0}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_cfg = parse(&hoairy(&["det", "--config", cfg]));
    let direct = parse(&hoairy(&["det", "--n", "2", "--t", "1"]));
    assert_eq!(from_cfg, direct);
    let overridden = parse(&hoairy(&["det", "--config", cfg, "--t", "0"]));
    let direct0 = parse(&hoairy(&["det", "--n", "2", "--t", "0"]));
    assert_eq!(overridden, direct0);
    assert_ne!(overridden, from_cfg);
}

#[test]
fn airy_value_at_origin() {
    // Ai(0) = 3^(-2/3) / Gamma(2/3)
    let v = parse(&hoairy(&["ai", "--n", "1", "--x", "0"]));
    assert!((v - 0.355028053887817).abs() < 1e-13);
}

#[test]
fn bad_input_exits_nonzero() {
    let o = hoairy(&["det", "--lambda", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda"));
    let o = hoairy(&["bogus"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hoairy(&["det", "--config", "/nonexistent/c.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn quick_selftest_passes() {
    let o = hoairy(&["selftest", "--quick"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 7);
    assert!(text.ends_with("7 of 7 criteria passed"));
}
