use std::path::Path;
use std::process::{Command, Output};

use kasner_lab::fixtures::FIXTURES;
use serde_json::Value;

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kasner-lab"))
        .args(args)
        .env("KASNER_LAB_OUT", out)
        .current_dir(out)
        .output()
        .expect("spawn kasner-lab")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = lab(out, args);
    assert!(
        o.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout).unwrap()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn fixtures_list_is_stable() {
    let tmp = tempfile::tempdir().unwrap();
    let a = ok(tmp.path(), &["fixtures"]);
    let b = ok(tmp.path(), &["fixtures"]);
    assert_eq!(a, b);
    assert!(a.lines().count() >= 8);
    for f in FIXTURES {
        assert!(a.lines().any(|l| l.starts_with(f.name)), "{}", f.name);
    }
}

#[test]
fn fixture_show_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let json = ok(tmp.path(), &["fixtures", "--show", "taub-nut"]);
    let path = tmp.path().join("taub.json");
    std::fs::write(&path, &json).unwrap();
    let parsed = kasner_lab::Scenario::from_file(&path).unwrap();
    assert_eq!(
        parsed,
        (kasner_lab::fixtures::find("taub-nut").unwrap().scenario)()
    );
}

#[test]
fn kasner_fixture_scores_vanish() {
    let tmp = tempfile::tempdir().unwrap();
    let stdout = ok(tmp.path(), &["run", "kasner-fixture"]);
    assert!(stdout.contains("Kasner"));
    let dir = tmp.path().join("kasner-fixture");
    for row in read_csv(&dir.join("scores.csv")) {
        assert!(row[2].abs() < 1e-12, "kasner score {}", row[2]);
    }
    let r = report(&dir);
    assert_eq!(r["regime"]["classification"], "kasner");
    assert_eq!(r["source"], "family");
    for f in [
        "trajectory.jsonl",
        "fn_table.csv",
        "volume.csv",
        "volume_slopes.csv",
        "orbit.csv",
    ] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    assert!(!dir.join("wh.csv").exists());
}

#[test]
fn every_fixture_runs() {
    let tmp = tempfile::tempdir().unwrap();
    for f in FIXTURES {
        ok(tmp.path(), &["run", f.name]);
        let r = report(&tmp.path().join(f.name));
        assert_eq!(r["scenario"], f.name);
        assert!(r["sup_curvature"].as_f64().unwrap().is_finite());
    }
}

#[test]
fn mixmaster_fraction_falls() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["run", "mixmaster-period2"]);
    let dir = tmp.path().join("mixmaster-period2");
    let table = read_csv(&dir.join("fn_table.csv"));
    let ratio = |n: usize| table[n - 1][2];
    assert!(ratio(32) >= ratio(64) && ratio(64) >= ratio(128) && ratio(128) >= ratio(256));
    assert_eq!(report(&dir)["regime"]["classification"], "mixmaster");
    // Orbit stays near the unit disk.
    let orbit = read_csv(&dir.join("orbit.csv"));
    assert!(orbit.iter().all(|r| r[1] * r[1] + r[2] * r[2] < 1.0 + 1e-6));
    assert!(dir.join("wh.csv").is_file());
}

#[test]
fn runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    ok(a.path(), &["run", "taub-nut"]);
    ok(b.path(), &["run", "taub-nut"]);
    let (da, db) = (a.path().join("taub-nut"), b.path().join("taub-nut"));
    let mut names: Vec<_> = std::fs::read_dir(&da)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 7);
    for n in names {
        assert_eq!(
            std::fs::read(da.join(&n)).unwrap(),
            std::fs::read(db.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn missing_field_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name": "bad", "source": {"kind": "wh", "initial": {"sigma_plus": 1.0, "sigma_minus": 0.0, "n": [0, 0, 0]}}}"#,
    )
    .unwrap();
    let o = lab(tmp.path(), &["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("tau_span"), "{err}");
}

#[test]
fn unknown_field_and_fixture_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("typo.json");
    std::fs::write(&path, r#"{"name": "x", "source": {"kind": "family", "family": {"family": "cone"}}, "detectr": {}}"#)
        .unwrap();
    let o = lab(tmp.path(), &["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("detectr"));

    let o = lab(tmp.path(), &["run", "no-such-fixture"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scenario_file_with_relative_output() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("ks.json");
    std::fs::write(
        &path,
        r#"{"name": "ks", "output_dir": "elsewhere",
            "source": {"kind": "family", "family": {"family": "kantowski_sachs", "params": {"mass": 2.0}},
                       "grid": {"t_min": 1e-6, "t_max": 1.0, "count": 300, "spacing": "log"}},
            "detector": {"eps": 0.1, "N": 8}}"#,
    )
    .unwrap();
    // Without the environment override the scenario's own directory is used.
    let o = Command::new(env!("CARGO_BIN_EXE_kasner-lab"))
        .args(["run", "ks.json"])
        .env_remove("KASNER_LAB_OUT")
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&tmp.path().join("elsewhere/ks"));
    assert_eq!(r["regime"]["config"]["eps"], 0.1);
    assert_eq!(r["regime"]["fn_table"].as_array().unwrap().len(), 8);
}

#[test]
fn simulate_wh_accepts_sign_aliases() {
    let tmp = tempfile::tempdir().unwrap();
    // Bianchi II data on the constraint surface.
    let n1 = 0.2_f64;
    let r = (1.0 - 0.75 * n1 * n1).sqrt();
    let (sp, sm) = (format!("{}", r * 0.6), format!("{}", -r * 0.8));
    let args = [
        "simulate-wh",
        "--sigma+",
        &sp,
        "--sigma-",
        &sm,
        "--n1",
        "0.2",
        "--n2",
        "0",
        "--n3",
        "0",
        "--tau-span",
        "30",
    ];
    ok(tmp.path(), &args);
    let dir = tmp.path().join("simulate-wh");
    let r = report(&dir);
    assert_eq!(r["source"], "wh");
    assert!(r["max_constraint_residual"].as_f64().unwrap() < 1e-9);
    assert!(dir.join("wh.csv").is_file());
}

#[test]
fn simulate_wh_rejects_off_constraint_data() {
    let tmp = tempfile::tempdir().unwrap();
    let args = [
        "simulate-wh",
        "--sigma-plus",
        "0.5",
        "--sigma-minus",
        "0",
        "--n1",
        "0.1",
        "--n2",
        "0",
        "--n3",
        "0",
        "--tau-span",
        "5",
    ];
    let o = lab(tmp.path(), &args);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("constraint"));
}

#[test]
fn detect_on_a_written_trajectory() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["run", "cone"]);
    let traj = tmp.path().join("cone/trajectory.jsonl");
    let stdout = ok(
        tmp.path(),
        &[
            "detect",
            traj.to_str().unwrap(),
            "--eps",
            "0.05",
            "--N",
            "4",
        ],
    );
    assert!(stdout.contains("Milne"), "{stdout}");
    let r = report(&tmp.path().join("detect-trajectory"));
    assert_eq!(r["source"], "trajectory");
    assert_eq!(r["regime"]["classification"], "milne");
    assert_eq!(r["regime"]["fn_table"].as_array().unwrap().len(), 4);
}
