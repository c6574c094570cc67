use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cifc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cifc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(table: &[Vec<String>], name: &str) -> Vec<String> {
    let idx = table[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    table[1..].iter().map(|r| r[idx].clone()).collect()
}

fn numbers(table: &[Vec<String>], name: &str) -> Vec<f64> {
    column(table, name).iter().map(|v| v.parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn symmetric_grid_verifies_at_capacity() {
    let out = cifc(&["ldc-verify", "--nd", "0:4", "--ni", "0:4", "--k", "2:5"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t = rows(&out);
    assert_eq!(t[0], ["nd", "ni", "k", "sum_rate", "outer_bound", "verified", "mode"]);
    assert_eq!(t.len(), 1 + 5 * 5 * 4);
    assert!(column(&t, "verified").iter().all(|v| v == "true"));
    assert_eq!(column(&t, "sum_rate"), column(&t, "outer_bound"));
}

#[test]
fn gains_file_for_the_two_one_channel() {
    let dir = tempfile::tempdir().unwrap();
    let gains = write(dir.path(), "fig.txt", "2 1 1\n1 2 1\n1 1 2\n");
    let out = cifc(&["ldc-verify", "--gains", &gains]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert_eq!(column(&t, "sum_rate"), ["5"]);
    assert_eq!(column(&t, "nd"), ["2"]);

    // asymmetric three-user gains go through the generic construction
    let gains = write(dir.path(), "generic.txt", "3 1 2\n0 2 1\n1 2 3\n");
    let out = cifc(&["ldc-verify", "--gains", &gains]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert_eq!(column(&t, "nd"), [""]);
    assert_eq!(column(&t, "sum_rate"), column(&t, "outer_bound"));
}

#[test]
fn empty_grid_writes_only_the_header() {
    let out = cifc(&["ldc-verify", "--nd", ""]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(rows(&out).len(), 1);
}

#[test]
fn outer_bound_rows() {
    let dir = tempfile::tempdir().unwrap();
    let gains = write(dir.path(), "sym.txt", "2 1 1\n1 2 1\n1 1 2\n");
    let out = cifc(&["ldc-outer", "--gains", &gains, "--trials", "200"]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert_eq!(column(&t, "outer"), ["5"]);
    assert_eq!(column(&t, "case_label"), ["r3>0"]);
    assert_eq!(column(&t, "dominance_checked"), ["pass"]);

    let zero = write(dir.path(), "zero.txt", "0 0 0\n0 0 0\n0 0 0\n");
    let t = rows(&cifc(&["ldc-outer", "--gains", &zero]));
    assert_eq!(column(&t, "outer"), ["0"]);

    let out = cifc(&["ldc-outer", "--samples", "100", "--seed", "3", "--trials", "100"]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert_eq!(t.len(), 101);
    assert!(column(&t, "dominance_checked").iter().all(|v| v == "pass"));
    let total: Vec<u64> = column(&t, "outer").iter().map(|v| v.parse().unwrap()).collect();
    let parts: Vec<u64> = (1..=3)
        .map(|i| column(&t, &format!("term{i}")))
        .fold(vec![0; 100], |acc, c| acc.iter().zip(c).map(|(a, v)| a + v.parse::<u64>().unwrap()).collect());
    assert_eq!(total, parts);
}

#[test]
fn analytic_gap_within_constant() {
    let out = cifc(&["gaussian-gap", "--k", "3", "--snr-db", "20", "--alpha", "0:3:0.25"]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert!(numbers(&t, "gap_analytic_observed").iter().all(|&g| g <= 6.0 + 1e-6));
    assert!(column(&t, "inner_opt").iter().all(String::is_empty));

    let out = cifc(&["gaussian-gap", "--k", "3:6", "--snr-db", "0,30,60", "--alpha", "0:3:0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    let ks = numbers(&t, "k");
    for (r, k) in numbers(&t, "mult_ratio").iter().zip(ks) {
        assert!(*r <= k + 1e-9);
    }
}

#[test]
fn numeric_columns_with_a_budget() {
    let out = cifc(&["gaussian-gap", "--k", "3", "--snr-db", "20", "--alpha", "0.5,2", "--budget", "60"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let t = rows(&out);
    let (inner, outer) = (numbers(&t, "inner_opt"), numbers(&t, "outer_opt"));
    let analytic = numbers(&t, "outer_analytic");
    let closed = numbers(&t, "inner_closed");
    for i in 0..2 {
        assert!(inner[i] >= closed[i] - 1e-9);
        assert!(outer[i] <= analytic[i] + 1e-9);
        assert!(inner[i] <= outer[i] + 1e-3);
    }
}

#[test]
fn gdof_ordering_and_normalization() {
    let out = cifc(&["gdof-curves", "--k", "3", "--alpha", "0:3:0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert_eq!(t.len(), 1 + 3 * 61);
    let d = numbers(&t, "d");
    let models = column(&t, "model");
    let at = |m: &str, i: usize| d[models.iter().position(|x| x == m).unwrap() + i];
    for i in 0..61 {
        assert!(at("IFC", i) <= at("CMS", i) && at("CMS", i) <= at("BC", i));
    }

    let t = rows(&cifc(&["gdof-curves", "--k", "2,5", "--alpha", "0"]));
    assert!(numbers(&t, "d_normalized").iter().all(|&d| d == 1.0));
}

#[test]
fn gdof_discontinuity_and_fitted_slopes() {
    let out = cifc(&["gdof-curves", "--models", "cms", "--k", "3", "--alpha", "0.5,1,2", "--snr-db", "40:80:10", "--discontinuity"]);
    assert_eq!(out.status.code(), Some(0));
    let t = rows(&out);
    assert_eq!(column(&t, "d_discontinuity"), ["", "1", ""]);
    assert_eq!(column(&t, "empirical_outer_slope")[1], "");
    let d = numbers(&t, "d");
    for name in ["empirical_outer_slope", "empirical_inner_slope"] {
        let s = column(&t, name);
        for i in [0, 2] {
            let v: f64 = s[i].parse().unwrap();
            assert!((v - d[i]).abs() < 0.05, "{name} {v} vs {}", d[i]);
        }
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv").display().to_string();
    let b = dir.path().join("b.csv").display().to_string();
    for path in [&a, &b] {
        let out = cifc(&["ldc-outer", "--samples", "20", "--seed", "11", "--trials", "50", "--out", path]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "run.cfg", "# sweep\nk = 3\nsnr_db = 20\nalpha = 0:1:0.5\n");
    let t = rows(&cifc(&["gaussian-gap", "--config", &cfg]));
    assert_eq!(column(&t, "alpha"), ["0", "0.5", "1"]);
    let t = rows(&cifc(&["gaussian-gap", "--config", &cfg, "--alpha", "2"]));
    assert_eq!(column(&t, "alpha"), ["2"]);
    assert_eq!(column(&t, "snr_db"), ["20"]);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "k = 3\nalpha = 0:1\n");
    let out = cifc(&["gaussian-gap", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:2"), "{err}");

    let gains = write(dir.path(), "ragged.txt", "1 2\n3\n");
    let out = cifc(&["ldc-verify", "--gains", &gains]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ragged.txt:2"));

    assert_eq!(cifc(&["gaussian-gap", "--k", "2"]).status.code(), Some(2));
    assert_eq!(cifc(&["gaussian-gap", "--alpha", "1:0:0.1"]).status.code(), Some(2));
    assert_eq!(cifc(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(cifc(&["ldc-verify", "--out", ""]).status.code(), Some(2));
    assert_eq!(cifc(&["--help"]).status.code(), Some(0));
}
