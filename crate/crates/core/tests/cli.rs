use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tfg_slam::harness::{cmd_verify_with, jacobian_suite, JacobianSet};
use tfg_slam::slam::factor::{measurement_jacobians, odometry_jacobians};
use tfg_slam::slam::Pose2;

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn tfgslam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfgslam"))
        .args(args)
        .output()
        .unwrap()
}

/// The room scenario cut down to a few stages.
fn short_room(dir: &Path, stages: usize) -> PathBuf {
    let text = fs::read_to_string(scenarios().join("room.toml")).unwrap();
    let text = text.replace("stages = 40", &format!("stages = {stages}"));
    assert!(text.contains(&format!("stages = {stages}")));
    let path = dir.join("room_short.toml");
    fs::write(&path, text).unwrap();
    path
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn malformed_scenario_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[world]\nbounds = [0.0, 0.0]\n").unwrap();
    let out = dir.path().join("out");
    let o = tfgslam(&[
        "run",
        "--scenario",
        bad.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!o.stderr.is_empty());

    let missing = dir.path().join("nope.toml");
    let o = tfgslam(&[
        "run",
        "--scenario",
        missing.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = tfgslam(&["infomap", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failed_run_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(scenarios().join("room.toml"))
        .unwrap()
        .replace("start = [1.5, 3.0, 0.0]", "start = [0.1, 3.0, 0.0]");
    let path = dir.path().join("wall_start.toml");
    fs::write(&path, text).unwrap();
    let out = dir.path().join("out");
    let o = tfgslam(&[
        "run",
        "--scenario",
        path.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seeds",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains('3'), "diagnostic names the seed: {err}");
}

#[test]
fn four_seeds_write_four_logs_and_one_report() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_room(dir.path(), 3);
    let out = dir.path().join("out");
    let o = tfgslam(&[
        "run",
        "--scenario",
        sc.to_str().unwrap(),
        "--seeds",
        "1,2,3,4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let names = listing(&out);
    assert_eq!(names.iter().filter(|n| n.ends_with(".log")).count(), 4);
    assert_eq!(names.iter().filter(|n| n.starts_with("report_")).count(), 1);
    assert_eq!(names.len(), 5);

    // The report's MEAN row is the mean of its SEED rows.
    let report = fs::read_to_string(out.join("report_active_tfg.txt")).unwrap();
    assert_eq!(String::from_utf8_lossy(&o.stdout), report);
    let rows: Vec<Vec<f64>> = report
        .lines()
        .filter(|l| l.starts_with("SEED "))
        .map(|l| {
            l.split_whitespace()
                .skip(4)
                .map(|v| v.parse().unwrap())
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 4);
    let mean: Vec<f64> = report
        .lines()
        .find(|l| l.starts_with("MEAN "))
        .unwrap()
        .split_whitespace()
        .skip(1)
        .map(|v| v.parse().unwrap())
        .collect();
    for (k, m) in mean.iter().enumerate() {
        let expect = rows.iter().map(|r| r[k]).sum::<f64>() / 4.0;
        assert!(
            (m - expect).abs() <= 1e-12 * (1.0 + expect.abs()),
            "column {k}: {m} vs {expect}"
        );
    }
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let sc = short_room(dir.path(), 2);
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let o = tfgslam(&[
            "run",
            "--scenario",
            sc.to_str().unwrap(),
            "--policy",
            "nearest-frontier",
            "--seeds",
            "5,6",
            "--out",
            out.to_str().unwrap(),
            "--dump-graph",
            "--dump-roadmap",
            "--dump-scores",
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        outputs.push(out);
    }
    let names = listing(&outputs[0]);
    assert_eq!(names, listing(&outputs[1]));
    for ext in [".log", ".graph", ".tfg", ".roadmap", ".scores"] {
        assert_eq!(
            names.iter().filter(|n| n.ends_with(ext)).count(),
            2,
            "{ext}"
        );
    }
    for n in &names {
        assert_eq!(
            fs::read(outputs[0].join(n)).unwrap(),
            fs::read(outputs[1].join(n)).unwrap(),
            "{n}"
        );
    }
    let graph = fs::read_to_string(outputs[0].join("nearest_frontier_seed5.graph")).unwrap();
    assert!(tfg_slam::slam::read_graph(&graph).is_ok());
    let tfg = fs::read_to_string(outputs[0].join("nearest_frontier_seed5.tfg")).unwrap();
    assert!(tfg_slam::tfg::io::read_tfg(&tfg).is_ok());
}

#[test]
fn infomap_writes_a_score_table() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("scores.txt");
    let sc = scenarios().join("infomap_demo.toml");
    let o = tfgslam(&[
        "infomap",
        "--scenario",
        sc.to_str().unwrap(),
        "--step",
        "0.5",
        "--sigma-u",
        "high",
        "--out",
        table.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(&table).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert!(rows.len() > 100);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert!((r[2] + r[3] - r[4]).abs() < 1e-9 * (1.0 + r[4].abs()));
        assert!(r[2] >= -1e-9 && r[3] >= -1e-9);
    }
    let argmax = text.lines().find(|l| l.starts_with("# argmax")).unwrap();
    let best = rows
        .iter()
        .filter(|r| r[5] == 1.0)
        .map(|r| r[4])
        .fold(f64::NEG_INFINITY, f64::max);
    let (ax, ay): (f64, f64) = {
        let v: Vec<f64> = argmax
            .split_whitespace()
            .skip(2)
            .map(|v| v.parse().unwrap())
            .collect();
        (v[0], v[1])
    };
    let at = rows.iter().find(|r| r[0] == ax && r[1] == ay).unwrap();
    assert_eq!(at[4], best);

    // A scenario without a partial map cannot be scored.
    let o = tfgslam(&[
        "infomap",
        "--scenario",
        scenarios().join("room.toml").to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn verify_passes() {
    let o = tfgslam(&["verify"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PASS ")).count(),
        5,
        "{text}"
    );
}

#[test]
fn help_and_bad_arguments() {
    assert_eq!(tfgslam(&["--help"]).status.code(), Some(0));
    assert_eq!(tfgslam(&["run"]).status.code(), Some(2));
    assert_eq!(tfgslam(&["frobnicate"]).status.code(), Some(2));
}

fn bent_odometry(a: &Pose2, b: &Pose2) -> (nalgebra::Matrix3<f64>, nalgebra::Matrix3<f64>) {
    let (mut ja, jb) = odometry_jacobians(a, b);
    ja[(0, 2)] += 1e-2;
    (ja, jb)
}

fn bent_measurement(
    x: &Pose2,
    l: &nalgebra::Vector2<f64>,
) -> (nalgebra::Matrix2x3<f64>, nalgebra::Matrix2<f64>) {
    let (jx, mut jl) = measurement_jacobians(x, l);
    jl[(1, 0)] += 1e-2;
    (jx, jl)
}

/// A Jacobian bent by 1e-2 in one entry is caught by the finite-difference
/// suite while the correct one passes.
#[test]
fn verify_catches_a_perturbed_jacobian() {
    assert!(jacobian_suite(&JacobianSet::default(), 11).passed);
    for jac in [
        JacobianSet {
            odometry: bent_odometry,
            measurement: measurement_jacobians,
        },
        JacobianSet {
            odometry: odometry_jacobians,
            measurement: bent_measurement,
        },
    ] {
        let results = cmd_verify_with(&jac);
        let j = results
            .iter()
            .find(|r| r.name == jacobian_suite(&jac, 0).name)
            .unwrap();
        assert!(!j.passed, "{}", j.detail);
        assert!(results
            .iter()
            .filter(|r| r.name != j.name)
            .all(|r| r.passed));
    }
}
