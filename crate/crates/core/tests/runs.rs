use tfg_slam::planner::GoalPolicy;
use tfg_slam::sim::{
    run_active_slam, run_nearest_frontier, run_policy, total_entropy, write_run_log, RunConfig,
    RunStatus, Scenario,
};

fn room(noise: &str, stages: usize) -> Scenario {
    Scenario::parse(&format!(
        r#"
name = "room"
[world]
bounds = [0.0, 0.0, 8.0, 6.0]
landmark_spacing = 1.0
polygons = [[[0.0, 0.0], [8.0, 0.0], [8.0, 6.0], [0.0, 6.0]]]
[robot]
start = [1.5, 3.0, 0.0]
[noise]
{noise}
[sensor]
range = 4.0
[exploration]
sigma_u = 4.0
density = 1.0
[run]
stages = {stages}
"#
    ))
    .unwrap()
}

const NOISY: &str = "odometry_std = [0.02, 0.02, 0.01]\nmeasurement_std = [0.05, 0.05]";
const NOISELESS: &str = "odometry_std = [0.0, 0.0, 0.0]\nmeasurement_std = [0.0, 0.0]";

#[test]
fn noiseless_run_recovers_the_true_map() {
    let sc = room(NOISELESS, 12);
    let log = run_active_slam(&sc, 1).unwrap();
    assert!(log.stages.len() > 2);
    for l in log.graph.landmarks().values() {
        let truth = sc.world.true_landmarks[&l.id];
        assert!(
            (l.position - truth).norm() < 1e-6,
            "landmark {} off by {}",
            l.id,
            (l.position - truth).norm()
        );
    }
    for s in &log.stages {
        assert!(s.position_error < 1e-6);
    }
    for w in log.stages.windows(2) {
        assert!(
            w[1].entropy_after <= w[0].entropy_after + 1e-9,
            "{} -> {}",
            w[0].entropy_after,
            w[1].entropy_after
        );
    }
}

#[test]
fn stage_entropies_match_recomputation_from_snapshots() {
    let sc = room(NOISY, 6);
    let log = run_active_slam(&sc, 2).unwrap();
    assert_eq!(log.snapshots.len(), log.stages.len());
    for (s, g) in log.stages.iter().zip(&log.snapshots) {
        let h = total_entropy(g, log.true_landmarks, log.sigma_u).unwrap();
        assert!(
            (h - s.entropy_after).abs() <= 1e-8 * (1.0 + h.abs()),
            "stage {}: {h} vs {}",
            s.stage,
            s.entropy_after
        );
        assert_eq!(g.landmarks().len(), s.landmarks_mapped);
    }
}

#[test]
fn same_seed_gives_identical_logs() {
    let sc = room(NOISY, 5);
    for policy in [GoalPolicy::InformationGain, GoalPolicy::NearestFrontier] {
        let cfg = RunConfig {
            policy,
            seed: 7,
            keep_plans: false,
        };
        let a = write_run_log(&run_policy(&sc, cfg).unwrap());
        let b = write_run_log(&run_policy(&sc, cfg).unwrap());
        assert_eq!(a, b);
    }
    let a = write_run_log(&run_active_slam(&sc, 7).unwrap());
    let c = write_run_log(&run_active_slam(&sc, 8).unwrap());
    assert_ne!(a, c);
}

#[test]
fn empty_world_stops_at_the_first_stage() {
    let sc = Scenario::parse(
        r#"
[world]
bounds = [0.0, 0.0, 10.0, 10.0]
landmarks = []
[robot]
start = [5.0, 5.0, 0.0]
[sensor]
range = 4.0
[exploration]
sigma_u = 4.0
density = 1.0
"#,
    )
    .unwrap();
    let log = run_active_slam(&sc, 1).unwrap();
    assert_eq!(log.status, RunStatus::GainBelowEpsilon);
    assert_eq!(log.stages.len(), 1);
    assert_eq!(log.final_stage().landmarks_mapped, 0);
}

#[test]
fn fully_observed_world_leaves_the_baseline_nothing_to_explore() {
    let sc = Scenario::parse(
        r#"
[world]
bounds = [0.0, 0.0, 4.0, 4.0]
polygons = [[[0.0, 0.0], [4.0, 0.0], [4.0, 4.0], [0.0, 4.0]]]
[robot]
start = [2.0, 2.0, 0.0]
[sensor]
range = 6.0
[exploration]
sigma_u = 4.0
density = 1.0
"#,
    )
    .unwrap();
    let log = run_nearest_frontier(&sc, 1).unwrap();
    assert_eq!(log.status, RunStatus::FrontierExhausted);
    assert_eq!(log.stages.len(), 1);
    assert_eq!(log.final_stage().coverage, 1.0);
}

#[test]
fn start_inside_a_wall_is_rejected() {
    let mut sc = room(NOISY, 3);
    sc.start = tfg_slam::slam::Pose2::new(0.1, 3.0, 0.0);
    assert!(matches!(
        run_active_slam(&sc, 1),
        Err(tfg_slam::Error::CollisionWithTruth { .. })
    ));
}

#[test]
fn room_is_explored() {
    let sc = room(NOISY, 40);
    let log = run_active_slam(&sc, 1).unwrap();
    let last = log.final_stage();
    assert!(last.coverage >= 0.95, "coverage {}", last.coverage);
    assert!(log.position_rmse() < 0.2);
    assert!(log.final_landmark_rmse < 0.2);
    let text = write_run_log(&log);
    assert_eq!(
        text.lines().filter(|l| l.starts_with("STAGE ")).count(),
        log.stages.len()
    );
    assert_eq!(
        text.lines().filter(|l| l.starts_with("PATH ")).count(),
        log.stages.len()
    );
}
