//! End-to-end checks of the command-line surface: file outputs, exit codes
//! and byte stability.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn cfp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cfp"))
}

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn cfp");
    assert!(
        out.status.success(),
        "command failed: {:?}\nstdout: {}\nstderr: {}",
        cmd,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn run_writes_trajectory_and_metrics() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(cfp()
        .arg("run")
        .arg("--scenario")
        .arg(scenario_path("head_on.json"))
        .args(["--mode", "cf", "--horizon", "0.5", "--dt", "1e-3"])
        .arg("--out")
        .arg(dir.path()));

    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    // header + horizon/dt + 1 samples
    assert_eq!(rows.len(), 1 + 501, "row count");
    assert!(rows[0].starts_with("t,x,y,z,vx,vy,vz,R,S,eps,Vb,"));

    let metrics: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    for key in ["length_m", "duration_s", "min_dist_m", "comp_time_us"] {
        assert!(metrics.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn outputs_are_byte_stable_for_a_fixed_seed() {
    let read = |dir: &Path| {
        std::fs::read(dir.join("trajectory.csv")).unwrap()
    };
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        run_ok(cfp()
            .arg("run")
            .arg("--scenario")
            .arg(scenario_path("head_on.json"))
            .args(["--mode", "disturbed", "--z-max", "0.05", "--horizon", "0.5", "--seed", "7"])
            .arg("--out")
            .arg(dir.path()));
        outputs.push(read(dir.path()));
    }
    assert_eq!(outputs[0], outputs[1], "trajectory bytes differ across runs");
}

#[test]
fn invalid_scenario_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let json = std::fs::read_to_string(scenario_path("head_on.json")).unwrap();
    std::fs::write(&bad, json.replacen("\"seed\"", "\"wind\": 1, \"seed\"", 1)).unwrap();
    let out = cfp()
        .arg("run")
        .arg("--scenario")
        .arg(&bad)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn collision_exits_with_code_three() {
    // a vanishing avoidance gain sends the robot straight through the point
    let dir = tempfile::tempdir().unwrap();
    let json = std::fs::read_to_string(scenario_path("head_on.json")).unwrap();
    let neutered = json.replace("\"k_cf\": 0.25", "\"k_cf\": 1e-12");
    let path = dir.path().join("through.json");
    std::fs::write(&path, neutered).unwrap();
    let out = cfp()
        .arg("run")
        .arg("--scenario")
        .arg(&path)
        .args(["--mode", "cf"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn phase_grid_matches_reduced_derivatives() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(cfp()
        .arg("phase")
        .args(["--grid", "-5,5,0.5", "--v-norm", "1", "--k-cf", "1"])
        .arg("--out")
        .arg(dir.path()));
    let csv = std::fs::read_to_string(dir.path().join("phase.csv")).unwrap();
    let mut found = false;
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect();
        if v[0] == 0.0 && v[1] == 1.0 {
            assert_eq!(v[2], 1.0, "dR at (0,1)");
            assert_eq!(v[3], 0.0, "dS at (0,1)");
            found = true;
        }
    }
    assert!(found, "grid point (0,1) missing");
    let ray = std::fs::read_to_string(dir.path().join("collision_ray.csv")).unwrap();
    // S = -cR on the overlay
    for line in ray.lines().skip(1).take(5) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] + v[0]).abs() < 1e-12);
    }
}

#[test]
fn verify_subcommand_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run_ok(cfp()
        .arg("verify")
        .args(["--claims", "ratio_bound", "--n", "2000", "--seed", "5"])
        .arg("--out")
        .arg(&report));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("ratio_bound"), "{stdout}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["all_passed"], serde_json::Value::Bool(true));
}

#[test]
fn agents_writes_tree_and_best_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(cfp()
        .arg("agents")
        .arg("--scenario")
        .arg(scenario_path("gauntlet.json"))
        .args(["--dt-pred", "1e-2", "--weights", "1,1"])
        .arg("--out")
        .arg(dir.path()));
    let tree: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("agent_tree.json")).unwrap(),
    )
    .unwrap();
    assert!(tree["agents"].as_array().unwrap().len() >= 2);
    assert!(tree["best"].is_u64());
    assert!(dir.path().join("best_trajectory.csv").exists());
}

#[test]
fn compare_apf_prints_table() {
    let out = run_ok(cfp()
        .arg("compare-apf")
        .arg("--scenario")
        .arg(scenario_path("u_trap.json"))
        .args(["--eta", "0.05", "--rho0", "0.5"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("Planner"), "{stdout}");
    assert!(stdout.contains("Failed"), "baseline should fail in the trap: {stdout}");
    assert!(stdout.contains("CFP"), "{stdout}");
}
