use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lacunary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lacunary"))
        .args(args)
        .env_remove("LACUNARY_OUT_DIR")
        .output()
        .expect("spawn lacunary")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_prints_erdos_fortet_solutions() {
    let o = lacunary(&["count", "--seq", "erdos-fortet", "--N", "10", "--a", "1", "--b", "2", "--c", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "9");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec!["count", "--eps", "1.5"],
        vec!["count", "--no-such-flag"],
        vec!["bogus-command"],
        vec!["count", "--seq", "geometric", "--q", "2", "--N", "10", "--c", "x"],
        vec!["profile", "--seq", "geometric", "--q", "2", "--N", "100", "--budget", "10"],
    ] {
        let o = lacunary(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn failed_checks_exit_one() {
    let o = lacunary(&["erdos-fortet-check", "--N", "20", "--trials", "5", "--tolerance=-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = lacunary(&["erdos-fortet-check", "--N", "20", "--trials", "5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(lacunary(&["--help"]).status.code(), Some(0));
    let v = lacunary(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains(lacunary::stats::VERSION));
}

#[test]
fn profile_csv_has_header_and_rows() {
    let o = lacunary(&["profile", "--seq", "paper", "--R", "4", "--eps", "1/2", "--a", "2", "--b", "1", "--blocks", "1..5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with(&format!("# lacunary {} config={{", lacunary::stats::VERSION)));
    assert_eq!(lines.next().unwrap(), "N,a,b,c_star,L_star,ratio");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("4,2,1,"));
}

#[test]
fn header_echoes_resolved_config() {
    let o = lacunary(&["generate", "--seq", "geometric", "--q", "3", "--N", "4"]);
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    let json = first.split_once("config=").unwrap().1;
    let cfg: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(cfg["command"], "generate");
    assert_eq!(cfg["sequence"]["kind"], "geometric");
    assert_eq!(cfg["sequence"]["q"], 3);
    assert_eq!(cfg["ns"], serde_json::json!([4]));
    assert!(text.contains("\n4,81\n") || text.ends_with("4,81\n"));
}

#[test]
fn config_file_is_merged_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "[sequence]\nseq = erdos-fortet\n\n[equation]\nN = 10\na = 1\nb = 2\nc = 1\n").unwrap();
    let path = cfg.to_str().unwrap();
    let o = lacunary(&["count", "--config", path]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).trim(), "9");
    // flags win over the file
    let o = lacunary(&["count", "--config", path, "--N", "5"]);
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[run]\nN = 10\ncolour = blue\n").unwrap();
    let o = lacunary(&["count", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    full.extend(["--out", &out_str]);
    let o = lacunary(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    fs::read(out).unwrap()
}

#[test]
fn seeded_runs_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["clt", "--seq", "erdos-fortet", "--f", "erdos-fortet", "--N", "32", "--M", "2000", "--seed", "4", "--format", "csv"];
    let a = run_to(dir.path(), "a.csv", &args);
    let b = run_to(dir.path(), "a.csv", &args);
    assert_eq!(a, b);
    let mut more = args.to_vec();
    more.extend(["--workers", "3"]);
    let c = run_to(dir.path(), "a.csv", &more);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("# lacunary "));
    assert_eq!(text.lines().count(), 2 + 2000);
}

#[test]
fn json_reports_parse() {
    let o = lacunary(&["gaposhkin", "--weights", "equal:16", "--M", "2000", "--seed", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["header"]["lacunary"], lacunary::stats::VERSION);
    assert_eq!(v["result"]["experiment"], "gaposhkin");
    assert!(v["result"]["statistics"]["kolmogorov_normal"].as_f64().unwrap() < 0.1);
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lacunary"))
        .args(["spectrum", "--seq", "erdos-fortet", "--N", "4", "--a", "1", "--b", "2"])
        .env("LACUNARY_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    assert!(text.contains("c,count\n1,3\n"));
}

#[test]
fn every_subcommand_runs() {
    let cases: &[&[&str]] = &[
        &["generate", "--seq", "paper", "--R", "4", "--eps", "1/2", "--d", "2", "--N", "30"],
        &["count", "--seq", "geometric", "--q", "2", "--N", "50", "--a", "1", "--b", "1", "--c", "0"],
        &["spectrum", "--seq", "geometric", "--q", "3", "--N", "20", "--a", "2", "--b", "1"],
        &["profile", "--seq", "erdos-fortet", "--N", "10,100", "--a", "2", "--b", "1"],
        &["clt", "--seq", "geometric", "--q", "2", "--f", "poly:1", "--N", "16", "--M", "500"],
        &["gaposhkin", "--weights", "equal:4", "--M", "500"],
        &["lil", "--seq", "geometric", "--q", "2", "--f", "poly:1", "--N", "2^4,2^8", "--M", "10"],
        &["decompose", "--R", "4", "--eps", "1/2", "--d", "2", "--i", "3", "--trials", "5"],
        &["erdos-fortet-check", "--N", "30", "--trials", "5"],
        &["blockprob", "--R", "4", "--eps", "1/2", "--d", "2", "--i", "2", "--M", "200"],
        &["periodicity", "--R", "4", "--eps", "1/2", "--d", "2", "--blocks", "2..3", "--trials", "3"],
    ];
    for args in cases {
        let o = lacunary(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty(), "{args:?}");
    }
}
