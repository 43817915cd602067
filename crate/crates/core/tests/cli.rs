use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn untilt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_untilt")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn passing_suites_exit_zero() {
    for suite in ["theta-check", "ansatz", "witt-selftest"] {
        let out = untilt(&[suite, "--canonical"]);
        assert_eq!(out.status.code(), Some(0), "{suite}");
        let v = json(&out);
        assert_eq!(v["suite"], suite);
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
        assert!(v.get("elapsed_ms").is_none());
    }
}

#[test]
fn check_records_have_expected_fields() {
    let v = json(&untilt(&["ansatz", "--base", "t^{1/4}", "--canonical"]));
    for c in v["checks"].as_array().unwrap() {
        for k in ["id", "ref", "status", "witness"] {
            assert!(c.get(k).is_some(), "missing {k}");
        }
    }
    assert_eq!(v["data"]["profile"], serde_json::json!(["1/4", "1"]));
    assert_eq!(v["config"]["base"], "t^{1/4}");
}

#[test]
fn equality_case_is_expected_false() {
    let out = untilt(&["pilot-bound", "--ell", "3", "--canonical"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["data"]["bound"]["verdict"], false);
    assert_eq!(v["data"]["bound"]["pilot_sum"], "1/6");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["bogus"],
        vec!["theta-check", "--p", "5", "--ell", "5"],
        vec!["theta-check", "--ell", "9"],
        vec!["theta-check", "--p", "4"],
        vec!["pilot-bound", "--vq", "-1"],
        vec!["pilot-bound", "--rho-grid", "1,x"],
        vec!["ansatz", "--base", "banana"],
        vec!["ansatz", "--base", "t^0"],
        vec!["all", "--format", "yaml"],
    ] {
        let out = untilt(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failing_report_exits_one() {
    use untilt::report::{Check, Report, Status};
    let r = Report {
        suite: "x".into(),
        checks: vec![Check {
            id: "x.fails".into(),
            reference: "none".into(),
            status: Status::Fail,
            witness: Value::Null,
        }],
        config: Value::Null,
        data: Value::Null,
        version: None,
        elapsed_ms: None,
    };
    assert_eq!(r.exit_code(), 1);
}

#[test]
fn table_csv() {
    let out = untilt(&["pilot-bound", "--table", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ell,ell_star,vq,pilot_sum,rhs,margin,verdict,sign_test,normalized_lhs,normalized_rhs");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[1], "3,1,1,1/6,1/6,0,false,false,1/6,1/6");
    assert_eq!(lines[3], "7,3,1,1/9,3/14,13/126,true,true,1/27,1/14");
}

#[test]
fn text_mode_uses_fractions() {
    let out = untilt(&["ansatz", "--ell", "7", "--format", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"1/9\",\"4/9\",\"1\""), "{text}");
    assert!(text.ends_with("4/4 checks passed\n"));
}

#[test]
fn config_file_flags_win() {
    let dir = std::env::temp_dir();
    let path = dir.join(format!("untilt-cfg-{}.conf", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "# test config\nell = 7\nvq = 2\nbase = canonical").unwrap();
    drop(f);
    let p = path.to_str().unwrap();
    let v = json(&untilt(&["ansatz", "--config", p, "--canonical"]));
    assert_eq!(v["config"]["ell"], 7);
    assert_eq!(v["data"]["profile"], serde_json::json!(["1", "4", "9"]));
    let v = json(&untilt(&["ansatz", "--config", p, "--ell", "5", "--canonical"]));
    assert_eq!(v["config"]["ell"], 5);
    assert_eq!(v["config"]["vq"], "2");
    std::fs::remove_file(&path).unwrap();
    assert_eq!(untilt(&["ansatz", "--config", "/nonexistent/untilt.conf"]).status.code(), Some(2));
}
