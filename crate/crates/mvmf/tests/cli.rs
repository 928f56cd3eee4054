use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mvmf::formats::{EstimateSummary, PlanFile};
use mvmf::CliError;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn mvmf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mvmf"))
        .args(args)
        .output()
        .expect("run mvmf")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn plan_of(dir: &Path) -> PlanFile {
    serde_json::from_slice(&std::fs::read(dir.join("plan.json")).unwrap()).unwrap()
}

#[test]
fn single_vessel_baseline_plans_a_650_s_makespan() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("single_vessel.toml");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(dir.path()),
        "plan",
        "--oracle-check",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let p = plan_of(dir.path());
    assert!((p.makespan - 650.0).abs() < 1e-6, "{}", p.makespan);
    assert!(p.oracle.unwrap().matches);

    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(dir.path()),
        "simulate",
        "--plan",
        s(&dir.path().join("plan.json")),
    ]);
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["tardiness"]["max_pick"], 0.0);
    for f in [
        "log.json",
        "events.jsonl",
        "trajectories.csv",
        "mission.geojson",
    ] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
}

#[test]
fn seeded_reruns_give_identical_plans_and_other_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("baseline.toml");
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = mvmf(&[
            "--scenario",
            s(&sc),
            "--out-dir",
            s(&out),
            "--seed",
            seed,
            "plan",
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("plan.json")).unwrap()
    };
    assert_eq!(run("a", "4"), run("b", "4"));
    assert_ne!(run("a", "4"), run("c", "5"));
}

#[test]
fn tiny_instance_matches_the_exhaustive_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("wake_crossing.toml");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(dir.path()),
        "plan",
        "--oracle-check",
    ]);
    assert_eq!(code(&o), 0);
    let oracle = plan_of(dir.path()).oracle.unwrap();
    assert!(oracle.matches, "{oracle:?}");
    assert_eq!(oracle.ratio, 1.0);
}

#[test]
fn synthesized_estimate_passes_the_divergence_check() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("baseline.toml");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(dir.path()),
        "estimate",
        "--synthesize",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary: EstimateSummary =
        serde_json::from_slice(&std::fs::read(dir.path().join("estimate.json")).unwrap()).unwrap();
    assert!(summary.divergence_check.passed);
    assert!(summary.divergence_check.max_abs_divergence < 1e-6);
    assert_eq!(summary.tracks, ["d0", "d1", "d2"]);
    for f in ["field.json", "covariance.json", "tracks.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }

    // the written tracks feed back in and reproduce the fit
    let again = dir.path().join("again");
    let tracks = dir.path().join("tracks.csv");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(&again),
        "estimate",
        "--tracks",
        s(&tracks),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(again.join("field.json")).unwrap(),
        std::fs::read(dir.path().join("field.json")).unwrap()
    );
}

#[test]
fn a_single_track_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let tracks = dir.path().join("one.csv");
    let mut csv = String::from("drifter_id,time_s,x_m,y_m,received\n");
    for k in 0..600 {
        csv.push_str(&format!("d0,{k},{},{},1\n", 100.0 + 0.1 * k as f64, 195.0));
    }
    std::fs::write(&tracks, csv).unwrap();
    let sc = scenarios().join("baseline.toml");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(dir.path()),
        "estimate",
        "--tracks",
        s(&tracks),
    ]);
    assert_eq!(code(&o), CliError::INPUT_EXIT);
    assert!(String::from_utf8_lossy(&o.stderr).contains("at least 2 tracks"));
}

#[test]
fn exit_codes_separate_input_errors_from_infeasibility() {
    let dir = tempfile::tempdir().unwrap();
    let base = std::fs::read_to_string(scenarios().join("single_vessel.toml")).unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    };
    let out = dir.path().join("out");

    let typo = write("typo.toml", &base.replace("capacity = 1", "capacty = 1"));
    let o = mvmf(&["--scenario", s(&typo), "--out-dir", s(&out), "plan"]);
    assert_eq!(code(&o), CliError::INPUT_EXIT);

    let o = mvmf(&[
        "--scenario",
        s(&dir.path().join("missing.toml")),
        "--out-dir",
        s(&out),
        "plan",
    ]);
    assert_eq!(code(&o), CliError::INPUT_EXIT);

    let o = mvmf(&["plan"]);
    assert_eq!(code(&o), CliError::INPUT_EXIT);

    // the float would drift out through the east edge before its pick
    let escaping = write(
        "escape.toml",
        &base.replace("drops = [[100.0, 0.0]]", "drops = [[150.0, 0.0]]"),
    );
    let o = mvmf(&["--scenario", s(&escaping), "--out-dir", s(&out), "plan"]);
    assert_eq!(
        code(&o),
        CliError::INFEASIBLE_EXIT,
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );

    let sc = scenarios().join("single_vessel.toml");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(&out),
        "simulate",
        "--plan",
        s(&dir.path().join("none.json")),
    ]);
    assert_eq!(code(&o), CliError::INPUT_EXIT);
}

#[test]
fn a_plan_for_another_fleet_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("single_vessel.toml");
    let o = mvmf(&["--scenario", s(&sc), "--out-dir", s(dir.path()), "plan"]);
    assert_eq!(code(&o), 0);
    let other = dir.path().join("other.toml");
    std::fs::write(
        &other,
        std::fs::read_to_string(&sc)
            .unwrap()
            .replace("speed = 2.0", "speed = 3.0"),
    )
    .unwrap();
    let o = mvmf(&[
        "--scenario",
        s(&other),
        "--out-dir",
        s(dir.path()),
        "simulate",
        "--plan",
        s(&dir.path().join("plan.json")),
    ]);
    assert_eq!(code(&o), CliError::INPUT_EXIT);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fleet"));
}

#[test]
fn evaluate_recomputes_the_simulated_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("wake_crossing.toml");
    let d = dir.path();
    assert_eq!(
        code(&mvmf(&["--scenario", s(&sc), "--out-dir", s(d), "plan"])),
        0
    );
    let plan = d.join("plan.json");
    assert_eq!(
        code(&mvmf(&[
            "--scenario",
            s(&sc),
            "--out-dir",
            s(d),
            "simulate",
            "--plan",
            s(&plan)
        ])),
        0
    );
    let simulated = std::fs::read(d.join("report.json")).unwrap();
    let eval = d.join("eval");
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(&eval),
        "evaluate",
        "--plan",
        s(&plan),
        "--log",
        s(&d.join("log.json")),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(eval.join("report.json")).unwrap(), simulated);
}

#[test]
fn geojson_carries_the_declared_origin() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenarios().join("baseline.toml");
    let d = dir.path();
    assert_eq!(
        code(&mvmf(&["--scenario", s(&sc), "--out-dir", s(d), "plan"])),
        0
    );
    let o = mvmf(&[
        "--scenario",
        s(&sc),
        "--out-dir",
        s(d),
        "simulate",
        "--plan",
        s(&d.join("plan.json")),
        "--wake",
        "off",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.join("mission.geojson")).unwrap()).unwrap();
    assert_eq!(g["type"], "FeatureCollection");
    assert_eq!(g["local_origin"]["lat"], 36.6);
    let first = &g["features"][0]["geometry"]["coordinates"][0];
    let lon = first[0].as_f64().unwrap();
    assert!((lon - -121.9).abs() < 0.01, "{lon}");
}
