use std::process::{Command, Output};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pilf_station.csv");

fn gevmdpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gevmdpd")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn empty_file_reports_empty_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    std::fs::write(&path, "").unwrap();
    let o = gevmdpd(&["--format", "json", "fit", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["category"], "EmptySeries");
    assert_eq!(err["schema_version"], 1);
}

#[test]
fn missing_file_is_a_data_error() {
    let o = gevmdpd(&["fit", "/nonexistent/x.csv"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FileUnreadable"));
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--n", "3", "--seed", "7", "--mu", "0", "--sigma", "1", "--xi", "0.1"];
    let a = gevmdpd(&args);
    let b = gevmdpd(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 3);
}

#[test]
fn w1_prints_distances() {
    let o = gevmdpd(&["w1", "--first", "0,1,0", "--second", "1,1,0"]);
    assert_eq!(stdout(&o).trim(), "1.000000");
    let o = gevmdpd(&["w1", "--first", "0.5,2,0.2", "--second", "0.5,2,0.2"]);
    assert_eq!(stdout(&o).trim().parse::<f64>().unwrap(), 0.0);
    let o = gevmdpd(&["--format", "json", "w1", "--first", "0,1,0", "--second", "0,2,0", "--method", "cdf"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["w1"].as_f64().unwrap() - 1.015_983_533_692_573).abs() < 1e-8);
}

#[test]
fn influence_csv_has_one_triple_per_alpha() {
    let o = gevmdpd(&["--format", "csv", "influence", "--xi", "-0.3", "--alphas", "0,0.1,0.25,0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 1 + 3 * 4);
    assert!(lines.all(|l| l.split(',').count() == 13));
}

#[test]
fn influence_reports_region_violation_per_alpha() {
    let o = gevmdpd(&["--format", "csv", "influence", "--xi", "-0.55", "--alphas", "0,0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert!(row[1..4].iter().all(|c| c.is_empty()));
    assert!(row[4..7].iter().all(|c| c.parse::<f64>().is_ok()));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha = 0"));
}

#[test]
fn asymvar_marks_out_of_region_cells() {
    let o = gevmdpd(&["--format", "csv", "asymvar", "--xi-grid", "-0.55,-0.45", "--alphas", "0,0.5"]);
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    // xi = -0.55: ML undefined, alpha = 0.5 defined
    assert_eq!(rows[0][5], "IntegrabilityViolation");
    assert!(rows[0][2].is_empty());
    assert_eq!(rows[1][5], "ok");
    assert_eq!(rows[2][5], "ok");
}

#[test]
fn fit_table_and_machine_formats() {
    let o = gevmdpd(&["fit", FIXTURE, "--alphas", "0,0.1,0.3", "--drop-below", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("MLE (without PILFs)") && text.contains("MDPDE (α = 0.3)"));
    // notes go to stderr only
    assert!(!text.contains("note:"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("removed 2 values"));

    let o = gevmdpd(&["--format", "csv", "fit", FIXTURE, "--alphas", "0,0.1,0.3"]);
    assert_eq!(stdout(&o).lines().count(), 4);

    let o = gevmdpd(&["--format", "json", "--strict", "fit", FIXTURE]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["n"], 32);
    assert_eq!(v["models"].as_array().unwrap().len(), 3);
    assert!(v["models"][2]["sigma"]["se"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.toml");
    std::fs::write(
        &cfg,
        "seed = 3\n[[scenario]]\nid = \"a\"\nepsilon = 0.1\nbase = { mu = 0.0, sigma = 1.0, xi = 0.1 }\n\
         contaminant = { mu = 0.0, sigma = 3.0, xi = 0.1 }\nn = 40\nreplicates = 6\nalphas = [0.0, 0.1]\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_gevmdpd"))
        .args(["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("GEVMDPD_WORKERS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);

    std::fs::write(&cfg, "[[scenario]]\nid = 1\n").unwrap();
    let o = gevmdpd(&["simulate", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(gevmdpd(&["sample", "--n", "3"]).status.code(), Some(2));
    assert_eq!(gevmdpd(&["sample", "--n", "3", "--seed", "1", "--xi", "0", "--sigma", "-1"]).status.code(), Some(2));
    assert_eq!(gevmdpd(&["fit", FIXTURE, "--alphas", "-0.1"]).status.code(), Some(2));
}
