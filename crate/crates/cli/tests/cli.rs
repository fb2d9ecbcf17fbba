use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polyergo(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyergo"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("POLYERGO_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path, verb: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{verb}.manifest.json"))).unwrap()).unwrap()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(dir.path(), &["avg", "--help"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("Usage: polyergo avg"));
}

#[test]
fn gauss_lists_every_reduced_sum() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(dir.path(), &["gauss", "--k", "1", "--n0", "2", "--qmax", "64"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("gauss.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,a,re,im,abs"));
    // Reduced pairs (a1, a2) mod q number q^2 prod_{p | q} (1 - p^-2).
    let expected: usize = (1..=64u64)
        .map(|q| {
            let mut n = q * q;
            let mut m = q;
            let mut p = 2;
            while m > 1 {
                if m % p == 0 {
                    n = n / (p * p) * (p * p - 1);
                    while m % p == 0 {
                        m /= p;
                    }
                }
                p += 1;
            }
            n as usize
        })
        .sum();
    assert_eq!(lines.count(), expected);
    // Modulo a prime the quadratic sum has modulus q^{-1/2} when a_2 is a unit
    // and vanishes when only the linear coefficient survives.
    for row in text.lines().skip(1).filter(|l| l.starts_with("7,")) {
        let cells: Vec<&str> = row.split(',').collect();
        let abs: f64 = cells[4].parse().unwrap();
        let expected = if cells[1].ends_with(";7") { 0.0 } else { 7f64.powf(-0.5) };
        assert!((abs - expected).abs() < 1e-12, "{row}");
    }
}

#[test]
fn identical_config_gives_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = polyergo(dir.path(), &["multiplier", "--kind", "nu", "--grid", "16", "--n", "128", "--error"]);
        assert!(o.status.success());
        let o = polyergo(dir.path(), &["avg", "--n", "1,3,5", "--seed", "9", "--method", "transform"]);
        assert!(o.status.success());
    }
    for file in ["multiplier.csv", "avg.csv"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file} differs"
        );
    }
    let m = manifest(a.path(), "avg");
    assert_eq!(m["seed"], 9);
    assert_eq!(m["command"], "avg");
    assert!(m["timings_secs"]["total"].as_f64().is_some());
}

#[test]
fn decay_feeds_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(dir.path(), &["decay", "--odd", "--qmax", "63"]);
    assert!(o.status.success());
    let delta = manifest(dir.path(), "decay")["results"]["delta_hat"].as_f64().unwrap();
    assert!((delta - 0.5).abs() < 1e-9);
    let m = dir.path().join("decay.manifest.json");
    let o = polyergo(
        dir.path(),
        &["schedule", "--lambda", "2", "--delta-manifest", m.to_str().unwrap(), "--j-max", "8"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = manifest(dir.path(), "schedule");
    assert_eq!(s["results"]["delta_hat"].as_f64(), Some(delta));
    assert_eq!(s["results"]["t"], 3);
    let csv = fs::read_to_string(dir.path().join("schedule.csv")).unwrap();
    assert_eq!(csv.lines().nth(1), Some("0,full"));
}

#[test]
fn config_file_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"qmax": 5, "seed": 11}"#).unwrap();
    let o = polyergo(dir.path(), &["gauss", "--qmax", "40", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success());
    let m = manifest(dir.path(), "gauss");
    assert_eq!(m["config"]["qmax"], 5);
    assert_eq!(m["seed"], 11);

    fs::write(&cfg, r#"{"q_max": 5}"#).unwrap();
    let o = polyergo(dir.path(), &["gauss", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q_max"));
}

#[test]
fn invalid_parameters_name_the_precondition() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(dir.path(), &["arcs", "--alpha", "0.2", "--beta", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("4(α + β)"));
    let o = polyergo(dir.path(), &["variation", "--r", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = polyergo(dir.path(), &["verify", "nonexistent"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_polyergo"))
        .args(["gamma", "--k", "2", "--n0", "1", "--out"])
        .arg(dir.path())
        .env("POLYERGO_THREADS", "3")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(manifest(dir.path(), "gamma")["threads"], 3);
    let o = Command::new(env!("CARGO_BIN_EXE_polyergo"))
        .args(["gamma", "--out"])
        .arg(dir.path())
        .env("POLYERGO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_variation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(dir.path(), &["verify", "variation"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 2);
    let csv = fs::read_to_string(dir.path().join("verify.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains(",pass,")));
}

#[test]
fn gamma_lifts_a_polynomial() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(dir.path(), &["gamma", "--poly", "5n^2+3n"]);
    assert!(o.status.success());
    let lift = fs::read_to_string(dir.path().join("gamma.lift.csv")).unwrap();
    assert_eq!(lift, "component,y^1,y^2\n1,3,5\n");
}

#[test]
fn variation_reads_a_sequence_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("seq.csv");
    fs::write(&input, "# index,value\n1,0\n2,3\n3,1\n4,4\n").unwrap();
    let o = polyergo(dir.path(), &["variation", "--input", input.to_str().unwrap(), "--r", "1,2"]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("variation.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // V_1 = 3 + 2 + 3 = 8; V_2 = sqrt(9 + 4 + 9).
    assert!(rows[0].starts_with("1.0000000000000000e0,plain,8.0000000000000000e0,1;2;3;4"));
    let v2: f64 = rows[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!((v2 - 22f64.sqrt()).abs() < 1e-12);
}

#[test]
fn ergodic_cyclic_indicator_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let o = polyergo(
        dir.path(),
        &["ergodic", "--system", "cyclic", "--modulus", "8", "--observable", "indicator", "--point", "0", "--n-lo", "3", "--n-hi", "6"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    // Squares mod 8 vanish exactly when 4 | n, a quarter of any multiple of 8 consecutive n.
    let csv = fs::read_to_string(dir.path().join("ergodic.csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    assert!(first.starts_with("0,8,2.5000000000000000e-1,"));
}
