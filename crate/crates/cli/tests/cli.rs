use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kpotts(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kpotts"))
        .current_dir(dir)
        .env_remove("KPOTTS_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).expect("error JSON on stderr")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn without_timestamp(text: &str) -> String {
    text.lines()
        .filter(|l| !l.starts_with("# generated_unix") && !l.contains("\"generated_unix\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn small_coupling_series_through_fourth_order() {
    let d = tempfile::tempdir().unwrap();
    let o = kpotts(d.path(), &["pcut-series", "--regime", "small", "--order", "4", "--out-dir", "out"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&d.path().join("out/pcut-series.json"));
    let coeffs: Vec<&str> = doc["result"]["series"]["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(coeffs, ["-2/3", "0/1", "-2/1", "-1/1", "-17/2"]);
    assert_eq!(doc["header"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(doc["header"]["config_hash"].as_str().unwrap().starts_with("sha256:"));
}

#[test]
fn mapping_check_passes() {
    let d = tempfile::tempdir().unwrap();
    let o = kpotts(d.path(), &["map-verify", "--J", "1", "--K", "1", "--lambda", "0.3", "--out-dir", "."]);
    assert!(o.status.success());
    let doc = read_json(&d.path().join("map-verify.json"));
    assert_eq!(doc["result"]["pass"], true);
}

#[test]
fn meanfield_kink() {
    let d = tempfile::tempdir().unwrap();
    let o = kpotts(
        d.path(),
        &["meanfield-scan", "--xmax", "0.3", "--expect-kink", "0.115", "--out-dir", "."],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(d.path().join("meanfield-scan.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x,energy,d_energy_dx,branch");
    assert_eq!(rows.len(), 302);
    // 12 significant digits
    let e = rows[100].split(',').nth(1).unwrap();
    assert_eq!(e.split('e').next().unwrap().trim_start_matches('-').len(), 13);
}

#[test]
fn outputs_are_reproducible_and_thread_independent() {
    let d = tempfile::tempdir().unwrap();
    let run = |out: &str, threads: &str| {
        let args = ["gme-scan", "--points", "31", "--restarts", "4"];
        let o = kpotts(d.path(), &[&args[..], &["--threads", threads, "--out-dir", out]].concat());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let dir = d.path().join(out);
        (
            without_timestamp(&fs::read_to_string(dir.join("gme-scan.csv")).unwrap()),
            without_timestamp(&fs::read_to_string(dir.join("gme-scan.json")).unwrap()),
        )
    };
    let a = run("a", "1");
    let b = run("b", "4");
    let c = run("c", "4");
    assert_eq!(a, b);
    assert_eq!(b, c);
}

#[test]
fn dry_run_validates_without_writing() {
    let d = tempfile::tempdir().unwrap();
    for cmd in [
        "map-verify",
        "degeneracy",
        "clusters",
        "pcut-series",
        "gap",
        "dispersion",
        "extrapolate",
        "merge-energy",
        "meanfield-scan",
        "gme-scan",
        "series-vs-ed",
    ] {
        let o = kpotts(d.path(), &[cmd, "--dry-run", "--out-dir", "out"]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let plan: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(plan["command"], cmd);
        assert!(!plan["outputs"].as_array().unwrap().is_empty());
    }
    assert!(!d.path().join("out").exists());
    let o = kpotts(d.path(), &["pcut-series", "--order", "99", "--dry-run"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exit_codes_and_error_json() {
    let d = tempfile::tempdir().unwrap();
    let o = kpotts(d.path(), &["gme-scan", "--n", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stderr_json(&o)["error"], "validation");

    let o = kpotts(d.path(), &["map-verify", "--L", "4"]);
    assert_eq!(o.status.code(), Some(2));

    let o = kpotts(d.path(), &["merge-energy", "--theta-min", "0.6", "--theta-max", "1.0", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"], "numerical");

    let o = kpotts(d.path(), &["degeneracy", "--d", "2", "--expect", "3", "--out-dir", "."]);
    assert_eq!(o.status.code(), Some(4));
    assert_eq!(stderr_json(&o)["exit_code"], 4);

    let o = kpotts(d.path(), &["clusters", "--no-such-flag"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("run.json"),
        r#"{"command": "degeneracy", "d": 2, "expect": 9, "out_dir": "from-config"}"#,
    )
    .unwrap();
    // the config alone expects the wrong count
    let o = kpotts(d.path(), &["--config", "run.json"]);
    assert_eq!(o.status.code(), Some(4));
    let o = kpotts(d.path(), &["degeneracy", "--config", "run.json", "--expect", "4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = read_json(&d.path().join("from-config/degeneracy.json"));
    assert_eq!(doc["result"]["count"], 4);
    assert_eq!(doc["header"]["config"]["d"], 2);

    fs::write(d.path().join("bad.json"), "[1, 2]").unwrap();
    let o = kpotts(d.path(), &["gap", "--config", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_kpotts"))
        .current_dir(d.path())
        .env("KPOTTS_OUT_DIR", "envdir")
        .args(["clusters", "--max-size", "3"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let doc = read_json(&d.path().join("envdir/clusters.json"));
    assert!(!doc["result"]["clusters"].as_array().unwrap().is_empty());
}

#[test]
fn analysis_commands_produce_curves() {
    let d = tempfile::tempdir().unwrap();
    let o = kpotts(d.path(), &["extrapolate", "--out-dir", "."]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x_c = read_json(&d.path().join("extrapolate.json"))["result"]["gap_closure"]["report"]["value"]
        .as_f64()
        .unwrap();
    assert!((0.114..=0.144).contains(&x_c), "{x_c}");

    let o = kpotts(d.path(), &["merge-energy", "--out-dir", "."]);
    assert!(o.status.success());
    let t = read_json(&d.path().join("merge-energy.json"))["result"]["report"]["value"]
        .as_f64()
        .unwrap();
    assert!((0.45..=0.60).contains(&t), "{t}");

    let o = kpotts(d.path(), &["dispersion", "--nk", "8", "--out-dir", "."]);
    assert!(o.status.success());
    let k = &read_json(&d.path().join("dispersion.json"))["result"]["k_min"];
    assert_eq!(k[0].as_f64(), Some(0.0));
    assert_eq!(k[1].as_f64(), Some(0.0));

    let o = kpotts(d.path(), &["series-vs-ed", "--grid", "2,2", "--order", "3", "--min-slope", "3.5", "--out-dir", "."]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
