use std::process::{Command, Output};

fn procoh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_procoh")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn jordan_table_text_and_json() {
    let o = procoh(&["jordan-table", "--p", "3", "--k", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "dim H^n(Z/3; J^3) for n = 0..6\n1,0,0,0,0,0,0\n");
    let o = procoh(&["jordan-table", "--p", "5", "--k", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["dims"], serde_json::json!([1, 1, 1, 1, 1, 1, 1]));
}

#[test]
fn invalid_input_exits_with_two() {
    for args in [
        &["jordan-table", "--p", "5", "--k", "6"][..],
        &["jordan-table", "--p", "4", "--k", "1"],
        &["e2", "--scenario", "gl2", "--p", "9"],
        &["e2", "--scenario", "no-such-scenario"],
        &["run", "--scenario", "gl2", "--p", "5", "--window", "3"],
    ] {
        let o = procoh(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
}

#[test]
fn verify_exit_codes() {
    assert_eq!(procoh(&["run", "--scenario", "gl2", "--p", "3", "--verify"]).status.code(), Some(0));
    let o = procoh(&["run", "--scenario", "extraspecial3", "--verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).ends_with("FAIL\n"));
    // without --verify nothing is compared
    assert_eq!(procoh(&["run", "--scenario", "extraspecial3"]).status.code(), Some(0));
}

#[test]
fn json_report_shape() {
    let o = procoh(&["run", "--scenario", "gl2", "--p", "5", "--format", "json", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p"], 5);
    assert_eq!(v["differentials"]["mode"], "finiteness");
    assert_eq!(v["differentials"]["constraint"], "alpha != 0");
    assert_eq!(v["duality"]["top_degree"], 4);
    assert!(v["verification"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn scenario_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("procoh-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gl2_5.json");
    let text = procoh::scenario::gl2(5).unwrap().to_json();
    std::fs::write(&path, text).unwrap();
    let from_file = procoh(&["e2", "--scenario", path.to_str().unwrap()]);
    let builtin = procoh(&["e2", "--scenario", "gl2", "--p", "5"]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(from_file.stdout, builtin.stdout);
    std::fs::write(&path, "{ not json").unwrap();
    assert_eq!(procoh(&["e2", "--scenario", path.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["run", "--scenario", "gl2", "--p", "3"][..],
        &["run", "--scenario", "gl2", "--p", "5", "--format", "json"],
        &["e2", "--scenario", "extraspecial3"],
        &["stable", "--scenario", "gl2", "--p", "7"],
    ] {
        let a = procoh(args);
        let b = procoh(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}
