use serde_json::Value;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_selberg-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

#[test]
fn degree_of_zeta_is_one() {
    let o = run(&["degree", "zeta"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "1\n");
    assert_eq!(stdout(&run(&["degree", "delta"])), "2\n");
    let path = specs_dir().join("zeta.json");
    assert_eq!(stdout(&run(&["degree", path.to_str().unwrap()])), "1\n");
}

#[test]
fn classify_odd_part_of_zeta() {
    let o = run(&["classify", "zeta_odd"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["config_sha256"].as_str().unwrap().len() == 64);
    let r = &v["result"]["result"];
    assert_eq!(r["period_q"], 2);
    let comps = r["decomposition"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0]["primitive"]["modulus"], 1);
    let p = comps[0]["polynomial"].as_array().unwrap();
    assert_eq!(p.len(), 2);
    assert_eq!(p[0][0], 1);
    assert!((p[0][1][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(p[1][0], 2);
    assert!((p[1][1][0].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn classify_degree_zero_polynomial() {
    let path = specs_dir().join("two_term_polynomial.json");
    let v = json(&run(&["classify", path.to_str().unwrap()]));
    assert_eq!(v["result"]["degree"], "0");
    assert_eq!(v["result"]["result"]["consistent"], true);
}

#[test]
fn detect_gap_shrinks() {
    let o = run(&["detect", "zeta", "-a", "1", "-T", "500,1000,2000,4000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,T,re_value,im_value,re_closed_form,im_closed_form,abs_gap,config_sha256");
    assert_eq!(lines.len(), 5);
    let gap = |l: &str| l.split(',').nth(6).unwrap().parse::<f64>().unwrap();
    assert!(gap(lines[4]) < gap(lines[1]));
    assert!(text.contains("\r\n"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let args = ["detect", "l_chi4", "-a", "0.25,0.5", "-T", "500,1000"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let z = ["zeros", "zeta", "--rectangle", "0,1,0,40"];
    assert_eq!(run(&z).stdout, run(&z).stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["detect", "zeta", "-T", "10"]).status.code(), Some(4));
    assert_eq!(run(&["degree", "/nonexistent/spec.json"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["classify", "delta"]).status.code(), Some(4));
    let err: Value = serde_json::from_slice(&run(&["detect", "zeta", "-T", "10"]).stderr).unwrap();
    assert_eq!(err["exit_code"], 4);
}

#[test]
fn validation_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("half.json");
    std::fs::write(
        &spec,
        r#"{"coefficients": {"kind": "explicit", "coeffs": [[1.0, 0.0]], "terminates": true},
            "fe": {"Q": 1.0, "omega": [1.0, 0.0], "numerator": [{"lambda": "1/4", "mu": ["0", "0"]}],
                   "denominator": [], "poles": []},
            "abscissa": 1.0}"#,
    )
    .unwrap();
    let o = run(&["validate", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    let codes: Vec<&str> =
        v["result"][0]["violations"].as_array().unwrap().iter().map(|x| x["code"].as_str().unwrap()).collect();
    assert!(codes.contains(&"empty-degree"));
    assert_eq!(run(&["validate", "zeta", "l_chi4"]).status.code(), Some(0));
}

#[test]
fn config_file_runs_and_output_embeds_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "eval", "specs": ["zeta"], "t": [0.0], "output": "out.csv"}"#).unwrap();
    let o = run(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = std::fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().ends_with(",config_sha256"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!((row[1].parse::<f64>().unwrap() + 1.4603545088095868).abs() < 1e-6);
    assert_eq!(row.last().unwrap().len(), 64);

    std::fs::write(&cfg, r#"{"command": "degree", "specs": ["zeta"], "output": "deg.json"}"#).unwrap();
    assert!(run(&["run", cfg.to_str().unwrap()]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("deg.json")).unwrap()).unwrap();
    assert_eq!(v["result"], "1");
    assert_eq!(v["config_sha256"].as_str().unwrap().len(), 64);

    std::fs::write(&cfg, r#"{"command": "degree", "specs": ["zeta"], "bogus": 1}"#).unwrap();
    assert_eq!(run(&["run", cfg.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn hash_depends_on_config() {
    let a = json(&run(&["gamma-sets", "zeta"]));
    let b = json(&run(&["gamma-sets", "l_chi4"]));
    assert_ne!(a["config_sha256"], b["config_sha256"]);
    assert_eq!(a["result"]["numerator_poles"]["density"], "1/2");
}

#[test]
fn zeros_and_comparison() {
    let v = json(&run(&["zeros", "zeta", "--rectangle", "0,1,0,50"]));
    assert_eq!(v["result"]["zero_count"], 10);
    let c = json(&run(&["compare-zeros", "zeta", "l_chi4"]));
    assert!(c["result"]["unmatched"].as_array().unwrap().len() >= 5);
    let csv = stdout(&run(&["zeros", "zeta", "--rectangle", "0,1,10,22", "--format", "csv"]));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn probe_and_gamma_asym() {
    let v = json(&run(&["probe-primitivity", "zeta_l_chi4", "--q-max", "8", "--horizon", "300"]));
    assert!(v["result"]["best_residual"].as_f64().unwrap() < 1e-10);
    let csv = stdout(&run(&["gamma-asym", "zeta"]));
    assert_eq!(csv.lines().count(), 51);
    let j = json(&run(&["gamma-asym", "l_chi4", "--format", "json"]));
    assert!((j["result"]["b_const"].as_f64().unwrap() + std::f64::consts::FRAC_PI_4).abs() < 1e-6);
}
