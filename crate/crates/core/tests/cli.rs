//! End-to-end runs of the `lpadic` binary: exit codes, output formats and caches.

use std::path::Path;
use std::process::{Command, Output};

use lpadic::harness::VerificationReport;

fn lpadic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpadic")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> VerificationReport {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not a report ({e}); stderr: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

#[test]
fn lp_trivial_zero_at_seven() {
    let out = lpadic(&["lp", "--p", "7", "--char", "quad3", "--m", "1", "--s", "0", "--routes", "both"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    assert_eq!(r.rows.len(), 2);
    for row in &r.rows {
        assert!(row.value_digits.starts_with("O(7^"), "{}", row.value_digits);
        assert!(row.certified_prec >= 19);
    }
    assert!(r.checks.iter().all(|c| c.passed));
}

#[test]
fn lp_several_points() {
    let out = lpadic(&["lp", "--p", "5", "--char", "quad4", "--m", "1", "--s", "0,1/2,-3", "--routes", "measure"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let s: Vec<&str> = r.rows.iter().map(|row| row.s.as_str()).collect();
    assert_eq!(s, ["0", "1/2", "-3"]);
}

#[test]
fn config_errors_exit_two() {
    for args in [
        &["lp", "--p", "4", "--char", "quad3"][..],
        &["lp", "--p", "7", "--char", "nonsense"],
        &["lp", "--p", "7", "--char", "quad3", "--prec", "1"],
        &["lp", "--p", "7", "--char", "quad3", "--routes", "sideways"],
        &["lp", "--p", "7", "--char", "quad3", "--s", "1/0"],
        &["verify", "--criteria", "11"],
        &["tate", "--p", "5", "--j", "5"],
        &["classify", "--data", "/nonexistent/data.json"],
    ] {
        let out = lpadic(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn scan_finds_the_trivial_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("scan.csv");
    let out = lpadic(&["scan", "--N", "12", "--p", "13", "--out", csv_path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_path(&csv_path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[0], "p");
    assert_eq!(&headers[1], "N");
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let key = |r: &csv::StringRecord| (r[0].to_string(), r[2].to_string());
    let keys: Vec<_> = rows.iter().map(key).collect();
    assert!(keys.contains(&("7".into(), "3.1".into())));
    assert!(keys.contains(&("13".into(), "3.1".into())));
    // quad3 at 5 and 11 has η(p) = -1: no trivial zero there
    assert!(!keys.contains(&("5".into(), "3.1".into())));
    assert!(!keys.contains(&("11".into(), "3.1".into())));
    for r in &rows {
        assert!(r[5].starts_with("O("), "value {} is not zero", &r[5]);
        assert_eq!(&r[9], "true");
        assert!(!r[10].is_empty(), "missing L-invariant");
    }
}

#[test]
fn json_output_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lp.json");
    let out = lpadic(&["lp", "--p", "11", "--char", "quad4", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let r: VerificationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(r.suite, "lp");
    assert_eq!(r.to_json(), text);
}

#[test]
fn output_is_deterministic_across_job_counts() {
    let run = |jobs: &str| {
        let out = lpadic(&["--jobs", jobs, "scan", "--N", "8", "--p", "13"]);
        assert_eq!(code(&out), 0);
        report(&out).to_json_without_timestamp()
    };
    assert_eq!(run("1"), run("3"));
}

#[test]
fn injected_sign_flip_fails_verification() {
    let out = lpadic(&["verify", "--inject-sign-flip", "--criteria", "5", "--N", "5", "--p", "7"]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("criterion 5 (measure integrity): FAIL"), "{stderr}");
}

fn verify_with_cache(dir: &Path) -> (Output, VerificationReport) {
    let out = lpadic(&["--cache-dir", dir.to_str().unwrap(), "verify", "--criteria", "7"]);
    let r = report(&out);
    (out, r)
}

#[test]
fn corrupted_bernoulli_cache_is_rebuilt() {
    let dir = tempfile::tempdir().unwrap();
    let (out, r) = verify_with_cache(dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(r.checks[0].detail, "Created");

    let path = dir.path().join("bernoulli.json");
    let text = std::fs::read_to_string(&path).unwrap();
    // B_2 = 1/6 becomes 1/7; the checksum no longer matches
    std::fs::write(&path, text.replacen("\"6\"", "\"7\"", 1)).unwrap();
    let (out, r) = verify_with_cache(dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(r.checks[0].detail, "Recomputed");
    assert!(r.checks[0].passed);

    std::fs::write(&path, "{ truncated").unwrap();
    let (out, r) = verify_with_cache(dir.path());
    assert_eq!(code(&out), 0);
    assert_eq!(r.checks[0].detail, "Recomputed");

    let (_, r) = verify_with_cache(dir.path());
    assert_eq!(r.checks[0].detail, "Loaded");
}

#[test]
fn classify_builtin_fixtures() {
    let out = lpadic(&["classify"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert!(r.passed());
    assert!(!r.checks.is_empty());
}

#[test]
fn classify_user_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(
        &path,
        r#"{"level": 15, "weight": 2, "p": 5, "a_p": 1, "eps_p": 0, "ord_p_cond_eps": 0, "label": "demo"}"#,
    )
    .unwrap();
    let out = lpadic(&["classify", "--data", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("demo"));
}

#[test]
fn tate_single_and_random() {
    let out = lpadic(&["tate", "--p", "5", "--j", "1/5"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = lpadic(&["tate", "--p", "7", "--samples", "4", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    assert!(report(&out).passed());
}
