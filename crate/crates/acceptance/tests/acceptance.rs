//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use tfg_slam::harness::{
    collision_suite, entropy_suite, infomap, jacobian_suite, schur_suite, sigma_for_level,
    JacobianSet, SigmaLevel,
};
use tfg_slam::info_gain::{
    delta_h, exact_delta_h, exact_delta_h_with_new_landmarks, gain_terms, visible_set,
    ExplorationPrior,
};
use tfg_slam::sim::{run_active_slam, run_nearest_frontier, write_run_log, RunLog, Scenario};
use tfg_slam::tfg::geometry::Segment;
use tfg_slam::tfg::{point_segment_distance, Frontier, TopologicalFeatureGraph};

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn scenario(name: &str) -> Scenario {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name);
    Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let elapsed = start.elapsed();
    v.detail = format!(
        "{}; {:.1} s (limit {} s)",
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    v.passed &= elapsed < limit;
    v
}

fn oracle_equivalence() -> Verdict {
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let s = common::random_scene(seed, 10, 5);
        let tfg = TopologicalFeatureGraph::from_graph(&s.graph, []).unwrap();
        let prior = ExplorationPrior::isotropic(100.0, s.sensing.measurement_information, 0.0);
        let terms = gain_terms(&tfg, &s.goal, &s.sensing, &prior, &[]).unwrap();
        let (dh_o, _) = delta_h(&terms, 0.0, &prior).unwrap();
        let vis = visible_set(&tfg, &s.goal, &s.sensing);
        let exact = exact_delta_h(&s.graph, &s.goal, &vis, &s.sensing).unwrap();
        worst = worst.max((dh_o - exact).abs());
    }
    verdict(
        worst <= 1e-8,
        format!("100 scenes, worst |dH_o - exact| = {worst:.2e} (limit 1e-8)"),
    )
}

fn approximation_quality() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut within = 0;
    for seed in 0..50u64 {
        let s = common::random_scene(1000 + seed, 10, 5);
        let tfg = TopologicalFeatureGraph::from_graph(&s.graph, []).unwrap();
        let vis = visible_set(&tfg, &s.goal, &s.sensing);
        let variance = 100.0 * tfg.marginal().max_variance().unwrap();
        let frontier = Frontier {
            left_landmark_id: vis[0],
            right_landmark_id: vis[0],
            angular_width: 1.0,
            arc_length: 8.0,
            start_bearing: 0.7 * seed as f64,
            right_range: 3.0,
            left_range: 4.0,
        };
        let count = 1 + (seed as usize % 3);
        let prior = ExplorationPrior::isotropic(
            variance,
            s.sensing.measurement_information,
            count as f64 / 8.0,
        );
        let terms = gain_terms(
            &tfg,
            &s.goal,
            &s.sensing,
            &prior,
            std::slice::from_ref(&frontier),
        )
        .unwrap();
        let (dh_o, dh_u) = delta_h(&terms, terms.n_x, &prior).unwrap();
        let pts = frontier.sample_points(&s.goal.translation(), count);
        let exact = exact_delta_h_with_new_landmarks(
            &s.graph,
            &s.goal,
            &vis,
            &pts,
            &(Matrix2::identity() * variance),
            &s.sensing,
        )
        .unwrap();
        let rel = ((dh_o + dh_u) - exact).abs() / exact;
        within += (rel <= 0.05) as usize;
        worst = worst.max(rel);
    }
    verdict(
        worst <= 0.05,
        format!("50 scenes at 100x variance, worst relative error {:.1}% (limit 5%), {within}/50 within", 100.0 * worst),
    )
}

fn explore_exploit_flip() -> Verdict {
    let sc = scenario("infomap_demo.toml");
    let gap = Segment::new(
        nalgebra::Vector2::new(8.0, 0.0),
        nalgebra::Vector2::new(8.0, 6.0),
    );
    let range = sc.sensing.range;
    let argmax = |level| {
        let sigma = sigma_for_level(&sc, level).unwrap();
        let map = infomap(&sc, 0.25, sigma).unwrap();
        let a = map.argmax().unwrap();
        (a.x, a.y)
    };
    let high = argmax(SigmaLevel::High);
    let low = argmax(SigmaLevel::Low);
    let d_high = point_segment_distance(&nalgebra::Vector2::new(high.0, high.1), &gap);
    let d_low = point_segment_distance(&nalgebra::Vector2::new(low.0, low.1), &gap);
    let frontier_adjacent = d_high <= range;
    let observed_dense = d_low > range && low.0 < gap.a.x;
    let regression = high == (9.0, 3.0) && low == (2.5, 3.0);
    verdict(
        frontier_adjacent && observed_dense && regression,
        format!(
            "high argmax {high:?} {d_high:.2} m from gap; low argmax {low:?} {d_low:.2} m from gap (range {range}); regression cells (9, 3) and (2.5, 3) {}",
            if regression { "match" } else { "differ" }
        ),
    )
}

fn estimator_correctness() -> Verdict {
    let sc = Scenario::parse(
        &std::fs::read_to_string(
            Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/room.toml"),
        )
        .unwrap()
        .replace(
            "odometry_std = [0.02, 0.02, 0.01]",
            "odometry_std = [0.0, 0.0, 0.0]",
        )
        .replace(
            "measurement_std = [0.05, 0.05]",
            "measurement_std = [0.0, 0.0]",
        ),
    )
    .unwrap();
    let log = run_active_slam(&sc, 1).unwrap();
    let worst = log
        .graph
        .landmarks()
        .values()
        .map(|l| (l.position - sc.world.true_landmarks[&l.id]).norm())
        .fold(0.0, f64::max);
    let jac = jacobian_suite(&JacobianSet::default(), 1);
    verdict(
        worst <= 1e-6 && jac.passed && !log.graph.landmarks().is_empty(),
        format!(
            "noiseless run mapped {} landmarks, worst error {worst:.1e} m; jacobians: {}",
            log.graph.landmarks().len(),
            jac.detail
        ),
    )
}

fn schur_and_entropy() -> Verdict {
    let schur = schur_suite(1).unwrap();
    let entropy = entropy_suite(1).unwrap();
    verdict(
        schur.passed && entropy.passed,
        format!("{}; {}", schur.detail, entropy.detail),
    )
}

fn chance_constraint() -> Verdict {
    let c = collision_suite(1).unwrap();
    verdict(c.passed, c.detail)
}

fn benchmark(active: &[RunLog], baseline: &[RunLog]) -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    let baseline_mean = baseline
        .iter()
        .map(|l| l.final_stage().entropy_after)
        .sum::<f64>()
        / baseline.len() as f64;
    for log in active {
        let reached = log
            .stages
            .iter()
            .find(|s| s.coverage >= 0.95)
            .map(|s| s.stage);
        let (pos, dr) = (log.position_rmse(), log.dead_reckoning_rmse());
        let h = log.final_stage().entropy_after;
        ok &= reached.is_some() && pos < dr && h < baseline_mean;
        lines.push(format!(
            "seed {}: coverage 0.95 at stage {}, rmse {pos:.3} vs dead reckoning {dr:.3}, entropy {h:.1}",
            log.seed,
            reached.map_or("never".to_string(), |s| s.to_string())
        ));
    }
    verdict(
        ok,
        format!(
            "{}; baseline mean entropy {baseline_mean:.1}",
            lines.join("; ")
        ),
    )
}

/// First stage that re-observes initial landmarks after at least one stage
/// that saw none of them.
fn closure_stage(log: &RunLog) -> Option<usize> {
    let s = &log.stages;
    (2..s.len())
        .find(|&k| s[k].initial_reobserved > 0 && s[1..k].iter().any(|p| p.initial_reobserved == 0))
}

fn loop_closure(logs: &[RunLog]) -> Verdict {
    let mut ok = true;
    let mut lines = Vec::new();
    for log in logs {
        match closure_stage(log) {
            Some(k) => {
                let (before, at) = (&log.stages[k - 1], &log.stages[k]);
                let drop = 1.0 - at.position_error / before.position_error;
                let entropy_drops = at.entropy_after < before.entropy_after;
                ok &= entropy_drops && drop >= 0.25;
                lines.push(format!(
                    "seed {}: closure at stage {k}, position error {:.3} -> {:.3} ({:.0}% drop), entropy {:.1} -> {:.1}",
                    log.seed,
                    before.position_error,
                    at.position_error,
                    100.0 * drop,
                    before.entropy_after,
                    at.entropy_after
                ));
            }
            None => {
                ok = false;
                lines.push(format!("seed {}: no loop closure", log.seed));
            }
        }
    }
    verdict(ok, lines.join("; "))
}

fn determinism(first: &RunLog) -> Verdict {
    let sc = scenario("two_room.toml");
    let again = run_active_slam(&sc, first.seed).unwrap();
    let same = write_run_log(first) == write_run_log(&again);
    verdict(
        same,
        format!(
            "two_room seed {} run twice: logs {}",
            first.seed,
            if same { "identical" } else { "differ" }
        ),
    )
}

fn report(n: usize, title: &str, v: &Verdict) -> bool {
    println!(
        "criterion {n} {} {title}: {}",
        if v.passed { "PASS" } else { "FAIL" },
        v.detail
    );
    v.passed
}

fn main() -> ExitCode {
    let mut all = true;
    all &= report(
        1,
        "oracle equivalence",
        &timed(Duration::from_secs(10), oracle_equivalence),
    );
    all &= report(
        2,
        "approximation quality",
        &timed(Duration::from_secs(30), approximation_quality),
    );
    all &= report(3, "explore/exploit flip", &explore_exploit_flip());
    all &= report(4, "estimator correctness", &estimator_correctness());
    all &= report(5, "schur/entropy correctness", &schur_and_entropy());
    all &= report(6, "chance constraint", &chance_constraint());

    let two_room = scenario("two_room.toml");
    let mut active = Vec::new();
    let v7 = timed(Duration::from_secs(120), || {
        let seeds = two_room.run.seeds.clone();
        let mut baseline = Vec::new();
        for &seed in &seeds {
            active.push(run_active_slam(&two_room, seed).unwrap());
            baseline.push(run_nearest_frontier(&two_room, seed).unwrap());
        }
        benchmark(&active, &baseline)
    });
    all &= report(7, "two-room benchmark", &v7);

    let corridor = scenario("loop_corridor.toml");
    let logs: Vec<RunLog> = corridor
        .run
        .seeds
        .iter()
        .map(|&s| run_active_slam(&corridor, s).unwrap())
        .collect();
    all &= report(8, "loop closure", &loop_closure(&logs));
    all &= report(9, "determinism", &determinism(&active[0]));

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
