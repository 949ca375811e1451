mod common;

use std::fs;

use common::{json, scratch, walklab};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn dist_reports_envelope() {
    let out = walklab(&["--seed", "3", "dist", "--graph", "halfline:20", "--horizon", "10"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "dist");
    assert_eq!(v["seed"], 3);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].is_array());
    assert!(v["report"].is_object());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(walklab(&["dist", "--graph", "blob:3"]).status.code(), Some(2));
    assert_eq!(walklab(&["dist", "--graph", "halfline:5", "--bogus"]).status.code(), Some(2));
    assert_eq!(walklab(&["nosuchcommand"]).status.code(), Some(2));
    assert_eq!(walklab(&["dist", "--graph", "halfline:5", "--v", "99"]).status.code(), Some(2));
}

#[test]
fn failed_checks_exit_one_only_when_strict() {
    // horizon beyond the truncation radius is flagged as inexact
    let args = ["dist", "--graph", "halfline:10", "--horizon", "40"];
    let lax = walklab(&args);
    assert_eq!(lax.status.code(), Some(0));
    assert_eq!(json(&lax)["pass"], false);
    let mut strict = vec!["--strict"];
    strict.extend(args);
    assert_eq!(walklab(&strict).status.code(), Some(1));
}

#[test]
fn resource_guard_exits_three() {
    let out = walklab(&["collide", "--preset", "small", "--trials", "10", "--step-budget", "100"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("exceeds the configured limit"));
}

#[test]
fn config_errors_name_the_line() {
    let dir = scratch("cli-config");
    let cfg = dir.join("bad.cfg");
    fs::write(&cfg, "command=dist\ngraph=halfline:10\nhorizn=5\n").unwrap();
    let out = walklab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.cfg:3: unknown key 'horizn'"), "{}", stderr(&out));

    fs::write(&cfg, "command=dist\njust some words\n").unwrap();
    let out = walklab(&["--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.cfg:2:"), "{}", stderr(&out));
}

#[test]
fn command_line_overrides_config() {
    let dir = scratch("cli-override");
    let cfg = dir.join("run.cfg");
    fs::write(&cfg, "command=dist\ngraph=halfline:30\nhorizon=5\nseed=9\n").unwrap();
    let out = walklab(&["--config", cfg.to_str().unwrap(), "--horizon", "8"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v = json(&out);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["report"]["horizon"], 8);
}

#[test]
fn corrupted_edge_lists_are_rejected_by_name() {
    let dir = scratch("cli-edges");
    let cases = [
        ("dup.txt", "3 3\n0 1\n1 2\n0 1\n", "validation"),
        ("disconnected.txt", "4 2\n0 1\n2 3\n", "validation"),
        ("range.txt", "3 2\n0 1\n1 7\n", "line 3"),
        ("count.txt", "3 3\n0 1\n1 2\n", "parse error"),
        ("junk.txt", "3 2\n0 x\n1 2\n", "invalid endpoint"),
    ];
    for (file, body, needle) in cases {
        let path = dir.join(file);
        fs::write(&path, body).unwrap();
        let spec = format!("file:{}", path.display());
        let out = walklab(&["dist", "--graph", &spec, "--v", "0", "--horizon", "4"]);
        assert_eq!(out.status.code(), Some(2), "{file}");
        assert!(stderr(&out).contains(needle), "{file}: {}", stderr(&out));
    }
}

#[test]
fn construct_round_trips_through_edge_list() {
    let dir = scratch("cli-construct");
    let out = walklab(&["--format", "csv", "--out", dir.to_str().unwrap(), "construct", "--graph", "full:4:64"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let files: Vec<String> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    let edges = files.iter().find(|f| f.ends_with(".edges") || f.ends_with(".txt")).expect("edge list written");
    let spec = format!("file:{}", dir.join(edges).display());
    let out = walklab(&["dist", "--graph", &spec, "--v", "0", "--horizon", "6"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn csv_output_goes_to_out_directory() {
    let dir = scratch("cli-csv");
    let out = walklab(&["--format", "csv", "--out", dir.to_str().unwrap(), "dist", "--graph", "segment:20", "--horizon", "6"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let body = fs::read_to_string(fs::read_dir(&dir).unwrap().next().unwrap().unwrap().path()).unwrap();
    assert!(body.starts_with("t,p,s,hazard\n"), "{body}");
}
