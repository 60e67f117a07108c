use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::Matrix2;

use super::motion::{plan_steps, step_motion};
use super::noise::NoiseSource;
use super::scenario::Scenario;
use super::sense::{sense, SenseResult};
use super::track::PoseTracker;
use crate::error::{Error, Result};
use crate::info_gain::{CandidateGoal, ExplorationPrior};
use crate::planner::{
    plan_next, CovarianceModel, GoalPolicy, PlannedPath, PlannerConfig, Roadmap, RoadmapConfig,
};
use crate::slam::{
    compress_between_goals, graph_marginal, landmark_entropy, map_solve, pose_covariance, Factor,
    FactorGraph, LandmarkId, Pose2, PoseId,
};
use crate::tfg::{ScanEntry, TopologicalFeatureGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    BudgetReached,
    GainBelowEpsilon,
    FrontierExhausted,
}

impl RunStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RunStatus::BudgetReached => "budget_reached",
            RunStatus::GainBelowEpsilon => "gain_below_epsilon",
            RunStatus::FrontierExhausted => "frontier_exhausted",
        }
    }
}

pub fn policy_name(policy: GoalPolicy) -> &'static str {
    match policy {
        GoalPolicy::InformationGain => "active_tfg",
        GoalPolicy::NearestFrontier => "nearest_frontier",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    pub policy: GoalPolicy,
    pub seed: u64,
    /// Keep every stage's scored candidates and roadmap.
    pub keep_plans: bool,
}

/// Outcome of one goal-to-goal stage. Stage 0 is the initial observation at
/// the start pose.
#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    /// MAP estimate of the goal pose after the stage.
    pub goal: Pose2,
    pub true_goal: Pose2,
    pub path: PlannedPath,
    /// Predicted gains of the chosen goal.
    pub dh_o: f64,
    pub dh_u: f64,
    pub entropy_before: f64,
    pub entropy_after: f64,
    pub coverage: f64,
    pub position_error: f64,
    pub dead_reckoning_error: f64,
    pub distance_travelled: f64,
    pub landmarks_mapped: usize,
    /// Landmarks from the initial observation seen again at this goal.
    pub initial_reobserved: usize,
}

#[derive(Debug, Clone)]
pub struct StagePlan {
    pub stage: usize,
    pub candidates: Vec<CandidateGoal>,
    pub roadmap: Roadmap,
}

#[derive(Debug, Clone)]
pub struct RunLog {
    pub scenario: String,
    pub policy: GoalPolicy,
    pub seed: u64,
    pub status: RunStatus,
    pub stages: Vec<StageRecord>,
    pub graph: FactorGraph,
    pub tfg: TopologicalFeatureGraph,
    /// The factor graph as it stood after each stage.
    pub snapshots: Vec<FactorGraph>,
    pub plans: Vec<StagePlan>,
    /// True landmark count, for entropy accounting.
    pub true_landmarks: usize,
    pub sigma_u: f64,
    pub final_landmark_rmse: f64,
}

impl RunLog {
    pub fn final_stage(&self) -> &StageRecord {
        self.stages.last().expect("a run log has at least stage 0")
    }

    fn goal_rmse(&self, f: impl Fn(&StageRecord) -> f64) -> f64 {
        let moved: Vec<f64> = self.stages.iter().skip(1).map(f).collect();
        if moved.is_empty() {
            return 0.0;
        }
        (moved.iter().map(|e| e * e).sum::<f64>() / moved.len() as f64).sqrt()
    }

    /// RMS goal position error of the final MAP estimate.
    pub fn position_rmse(&self) -> f64 {
        let goals = goal_ids_of(&self.graph);
        let stages: Vec<&StageRecord> = self.stages.iter().skip(1).collect();
        if stages.is_empty() {
            return 0.0;
        }
        let sum: f64 = stages
            .iter()
            .zip(goals.iter().skip(1))
            .map(|(s, id)| {
                let p = self.graph.poses()[id];
                (p.translation() - s.true_goal.translation()).norm_squared()
            })
            .sum();
        (sum / stages.len() as f64).sqrt()
    }

    /// RMS goal position error of odometry integration alone.
    pub fn dead_reckoning_rmse(&self) -> f64 {
        self.goal_rmse(|s| s.dead_reckoning_error)
    }
}

/// Goal poses are the only poses left after compression.
fn goal_ids_of(graph: &FactorGraph) -> Vec<PoseId> {
    graph.poses().keys().copied().collect()
}

/// Total landmark entropy over all true landmarks. Landmarks not yet in the
/// graph contribute their unseen prior.
pub fn total_entropy(graph: &FactorGraph, true_landmarks: usize, sigma_u: f64) -> Result<f64> {
    let mapped = graph.landmarks().len();
    let observed = if mapped == 0 {
        0.0
    } else {
        landmark_entropy(&graph_marginal(graph)?)?
    };
    Ok(observed + true_landmarks.saturating_sub(mapped) as f64 * sigma_u.ln())
}

fn stage_seed(seed: u64, stage: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stage as u64)
        .rotate_left(17)
}

struct Runner<'a> {
    sc: &'a Scenario,
    cfg: RunConfig,
    noise: NoiseSource,
    graph: FactorGraph,
    tfg: TopologicalFeatureGraph,
    next_pose: PoseId,
    goal_ids: Vec<PoseId>,
    x_true: Pose2,
    dead_reckoning: Pose2,
    distance: f64,
    observed: BTreeSet<LandmarkId>,
    initial: BTreeSet<LandmarkId>,
    pending_scan: Vec<ScanEntry>,
    stages: Vec<StageRecord>,
    snapshots: Vec<FactorGraph>,
    plans: Vec<StagePlan>,
}

impl<'a> Runner<'a> {
    fn new(sc: &'a Scenario, cfg: RunConfig) -> Result<Self> {
        let mut graph = FactorGraph::new();
        graph.add_pose(0, sc.start)?;
        let var = sc.run.start_std * sc.run.start_std;
        graph.add_factor(Factor::PosePrior {
            pose: 0,
            mean: sc.start,
            information: nalgebra::Matrix3::identity() / var,
        })?;
        let tfg = TopologicalFeatureGraph::new(
            Default::default(),
            [],
            crate::slam::MarginalInfo::empty(),
        )?;
        Ok(Self {
            sc,
            cfg,
            noise: NoiseSource::new(sc.noise(cfg.seed)),
            graph,
            tfg,
            next_pose: 1,
            goal_ids: vec![0],
            x_true: sc.start,
            dead_reckoning: sc.start,
            distance: 0.0,
            observed: BTreeSet::new(),
            initial: BTreeSet::new(),
            pending_scan: Vec::new(),
            stages: Vec::new(),
            snapshots: Vec::new(),
            plans: Vec::new(),
        })
    }

    fn measurement_information(&self) -> Matrix2<f64> {
        self.sc.sensing.measurement_information
    }

    fn coverage(&self) -> f64 {
        let n = self.sc.world.true_landmarks.len();
        if n == 0 {
            1.0
        } else {
            self.observed.len() as f64 / n as f64
        }
    }

    fn entropy(&self, graph: &FactorGraph) -> Result<f64> {
        total_entropy(graph, self.sc.world.true_landmarks.len(), self.sc.sigma_u)
    }

    fn current_goal(&self) -> PoseId {
        *self.goal_ids.last().expect("start pose is a goal")
    }

    /// Adds goal measurements, solves, refreshes the map and records the
    /// stage. `graph` already holds the goal pose.
    fn observe_at_goal(
        &mut self,
        goal: PoseId,
        seen: SenseResult,
        stage: usize,
        path: PlannedPath,
        predicted: (f64, f64),
    ) -> Result<()> {
        let info = self.measurement_information();
        // Localize the goal from known landmarks before placing new ones.
        let mut localized = self.graph.clone();
        for (id, z) in &seen.measurements {
            if localized.has_landmark(*id) {
                localized.add_factor(Factor::Measurement {
                    pose: goal,
                    landmark: *id,
                    relative: *z,
                    information: info,
                })?;
            }
        }
        let loc = map_solve(&localized, Some(&localized.assignment()))?;
        let goal_estimate = loc.assignment.poses[&goal];

        // Temporary along-path factors end here.
        let transit: BTreeSet<PoseId> = self
            .graph
            .poses()
            .keys()
            .copied()
            .filter(|p| !self.goal_ids.contains(p) && *p != goal)
            .collect();
        self.graph.retain_factors(|f| match f {
            Factor::Measurement { pose, .. } => !transit.contains(pose),
            _ => true,
        });
        self.graph.set_assignment(&loc.assignment);
        let prev = self.current_goal();
        let mut before = compress_between_goals(&self.graph, prev, goal)?;

        let sigma_u_info = Matrix2::identity() / self.sc.sigma_u;
        for (id, z) in &seen.measurements {
            if !before.has_landmark(*id) {
                let p = goal_estimate.point_to_world(z);
                before.add_landmark(*id, p)?;
                before.add_factor(Factor::LandmarkPrior {
                    landmark: *id,
                    mean: p,
                    information: sigma_u_info,
                })?;
            }
        }
        let mut after = before.clone();
        for (id, z) in &seen.measurements {
            after.add_factor(Factor::Measurement {
                pose: goal,
                landmark: *id,
                relative: *z,
                information: info,
            })?;
        }
        let solved = map_solve(&after, Some(&after.assignment()))?;
        after.set_assignment(&solved.assignment);
        before.set_assignment(&solved.assignment);
        let entropy_before = self.entropy(&before)?;
        let entropy_after = self.entropy(&after)?;
        self.graph = after;
        self.goal_ids.push(goal);
        self.finish_stage(
            stage,
            goal,
            &seen,
            path,
            predicted,
            entropy_before,
            entropy_after,
        )
    }

    #[allow(clippy::too_many_arguments)]
    fn finish_stage(
        &mut self,
        stage: usize,
        goal: PoseId,
        seen: &SenseResult,
        path: PlannedPath,
        predicted: (f64, f64),
        entropy_before: f64,
        entropy_after: f64,
    ) -> Result<()> {
        let seen_ids: BTreeSet<LandmarkId> = seen.measurements.iter().map(|(id, _)| *id).collect();
        if stage == 0 {
            self.initial = seen_ids.clone();
        }
        let initial_reobserved = seen_ids.intersection(&self.initial).count();
        self.observed.extend(seen_ids);

        let mut tfg =
            TopologicalFeatureGraph::from_graph(&self.graph, self.tfg.edges().iter().copied())?;
        let mut scan: Vec<ScanEntry> = std::mem::take(&mut self.pending_scan)
            .into_iter()
            .filter(|s| self.graph.has_landmark(s.landmark))
            .collect();
        // Keep component ids of different scans apart.
        let offset = scan.iter().map(|s| s.component + 1).max().unwrap_or(0);
        scan.extend(seen.scan.iter().map(|s| ScanEntry {
            component: s.component + offset,
            landmark: s.landmark,
        }));
        tfg.learn_edges(&scan)?;
        self.tfg = tfg;

        let estimate = self.graph.poses()[&goal];
        self.stages.push(StageRecord {
            stage,
            goal: estimate,
            true_goal: self.x_true,
            path,
            dh_o: predicted.0,
            dh_u: predicted.1,
            entropy_before,
            entropy_after,
            coverage: self.coverage(),
            position_error: (estimate.translation() - self.x_true.translation()).norm(),
            dead_reckoning_error: (self.dead_reckoning.translation() - self.x_true.translation())
                .norm(),
            distance_travelled: self.distance,
            landmarks_mapped: self.graph.landmarks().len(),
            initial_reobserved,
        });
        self.snapshots.push(self.graph.clone());
        Ok(())
    }

    fn initial_observation(&mut self) -> Result<()> {
        let seen = sense(
            &self.x_true,
            &self.sc.world,
            &self.sc.sensing,
            &mut self.noise,
            true,
        );
        let info = self.measurement_information();
        let sigma_u_info = Matrix2::identity() / self.sc.sigma_u;
        let entropy_before = self.entropy(&self.graph)?;
        for (id, z) in &seen.measurements {
            let p = self.sc.start.point_to_world(z);
            self.graph.add_landmark(*id, p)?;
            self.graph.add_factor(Factor::LandmarkPrior {
                landmark: *id,
                mean: p,
                information: sigma_u_info,
            })?;
            self.graph.add_factor(Factor::Measurement {
                pose: 0,
                landmark: *id,
                relative: *z,
                information: info,
            })?;
        }
        let solved = map_solve(&self.graph, Some(&self.graph.assignment()))?;
        self.graph.set_assignment(&solved.assignment);
        let entropy_after = self.entropy(&self.graph)?;
        let path = PlannedPath {
            nodes: vec![0],
            waypoints: vec![self.sc.start],
            total_cost: 0.0,
            length: 0.0,
        };
        self.finish_stage(0, 0, &seen, path, (0.0, 0.0), entropy_before, entropy_after)
    }

    fn planner_config(&self, stage: usize) -> Result<PlannerConfig> {
        let p = &self.sc.planner;
        let current = self.current_goal();
        let cov = pose_covariance(&self.graph, current)?;
        let mut roadmap = RoadmapConfig::new(
            p.connect_radius,
            p.delta,
            self.sc.robot_radius,
            stage_seed(self.cfg.seed, stage),
        );
        roadmap.penalty_weight = p.penalty_weight;
        roadmap.safe_distance = p.safe_distance;
        roadmap.mc_samples = p.mc_samples;
        roadmap.step = self.sc.run.steps.translation;
        roadmap.covariance = CovarianceModel {
            origin: self.graph.poses()[&current].translation(),
            start: cov,
            per_step: self.sc.q,
        };
        let previous_goals = self.goal_ids[..self.goal_ids.len() - 1]
            .iter()
            .map(|id| self.graph.poses()[id])
            .collect();
        Ok(PlannerConfig {
            bounds: self.sc.world.bounds,
            sample_count: p.sample_count,
            sensing: self.sc.sensing,
            prior: ExplorationPrior::isotropic(
                self.sc.sigma_u,
                self.sc.sensing.measurement_information,
                self.sc.density,
            ),
            previous_goals,
            reach_range: self.sc.reach_range(),
            min_goal_distance: p.min_goal_distance,
            max_path_length: p.max_path_length.unwrap_or(f64::INFINITY),
            roadmap,
            policy: self.cfg.policy,
        })
    }

    /// Drives along `path`, adding transit poses with odometry and temporary
    /// measurement factors. Returns the id of the final pose.
    fn traverse(&mut self, path: &PlannedPath) -> Result<PoseId> {
        let q_info = self.sc.noise(self.cfg.seed).odometry_information();
        let r_info = self.measurement_information();
        let limits = self.sc.run.steps;
        let mut prev = self.current_goal();
        let mut tracker = PoseTracker::new(
            self.graph.poses()[&prev],
            pose_covariance(&self.graph, prev)?,
        );
        let mut moved = false;
        for (w, target) in path.waypoints.iter().enumerate().skip(1) {
            let steps = plan_steps(&tracker.estimate, target, &limits);
            let last_waypoint = w + 1 == path.waypoints.len();
            for (k, delta) in steps.iter().enumerate() {
                let (x_next, odometry) = step_motion(
                    &self.x_true,
                    delta,
                    &mut self.noise,
                    &self.sc.world,
                    self.sc.robot_radius,
                )?;
                self.distance += (x_next.translation() - self.x_true.translation()).norm();
                self.x_true = x_next;
                tracker.predict(&odometry, &self.sc.q);
                self.dead_reckoning = self.dead_reckoning.compose(&odometry);
                let id = self.next_pose;
                self.next_pose += 1;
                let arrived = last_waypoint && k + 1 == steps.len();
                // The goal itself is sensed afterwards with a full rotation.
                let seen = if arrived {
                    SenseResult::default()
                } else {
                    sense(
                        &self.x_true,
                        &self.sc.world,
                        &self.sc.sensing,
                        &mut self.noise,
                        false,
                    )
                };
                let known: Vec<_> = seen
                    .measurements
                    .iter()
                    .filter(|(lid, _)| self.graph.has_landmark(*lid))
                    .map(|(lid, z)| (*lid, *z))
                    .collect();
                let fixed: Vec<_> = known
                    .iter()
                    .map(|(lid, z)| (self.graph.landmarks()[lid].position, *z))
                    .collect();
                tracker.correct(&fixed, &r_info);
                self.graph.add_pose(id, tracker.estimate)?;
                self.graph.add_factor(Factor::Odometry {
                    from: prev,
                    to: id,
                    delta: odometry,
                    information: q_info,
                })?;
                for (lid, z) in known {
                    self.graph.add_factor(Factor::Measurement {
                        pose: id,
                        landmark: lid,
                        relative: z,
                        information: r_info,
                    })?;
                }
                prev = id;
                moved = true;
                if arrived {
                    break;
                }
                let offset = self
                    .pending_scan
                    .iter()
                    .map(|s| s.component + 1)
                    .max()
                    .unwrap_or(0);
                self.pending_scan
                    .extend(seen.scan.iter().map(|s| ScanEntry {
                        component: s.component + offset,
                        landmark: s.landmark,
                    }));
            }
        }
        if !moved {
            return Err(Error::InvalidGraph("planned path has no motion".into()));
        }
        Ok(prev)
    }

    fn run(mut self) -> Result<RunLog> {
        self.initial_observation()?;
        let mut status = RunStatus::BudgetReached;
        for stage in 1..=self.sc.run.stages {
            let config = self.planner_config(stage)?;
            let current = self.graph.poses()[&self.current_goal()];
            let outcome = match plan_next(&self.tfg, &current, &config) {
                Ok(o) => o,
                Err(Error::NoFeasibleGoal | Error::NoReachableCandidate) => {
                    status = RunStatus::FrontierExhausted;
                    break;
                }
                Err(e) => return Err(e),
            };
            if self.cfg.keep_plans {
                self.plans.push(StagePlan {
                    stage,
                    candidates: outcome.candidates.clone(),
                    roadmap: outcome.roadmap.clone(),
                });
            }
            if self.cfg.policy == GoalPolicy::InformationGain
                && outcome.goal.total < self.sc.run.gain_epsilon
            {
                status = RunStatus::GainBelowEpsilon;
                break;
            }
            let goal = self.traverse(&outcome.path)?;
            let seen = sense(
                &self.x_true,
                &self.sc.world,
                &self.sc.sensing,
                &mut self.noise,
                true,
            );
            self.observe_at_goal(
                goal,
                seen,
                stage,
                outcome.path,
                (outcome.goal.dh_o, outcome.goal.dh_u),
            )?;
        }
        let final_landmark_rmse = {
            let ls = self.graph.landmarks();
            if ls.is_empty() {
                0.0
            } else {
                let sum: f64 = ls
                    .values()
                    .map(|l| (l.position - self.sc.world.true_landmarks[&l.id]).norm_squared())
                    .sum();
                (sum / ls.len() as f64).sqrt()
            }
        };
        Ok(RunLog {
            scenario: self.sc.name.clone(),
            policy: self.cfg.policy,
            seed: self.cfg.seed,
            status,
            stages: self.stages,
            graph: self.graph,
            tfg: self.tfg,
            snapshots: self.snapshots,
            plans: self.plans,
            true_landmarks: self.sc.world.true_landmarks.len(),
            sigma_u: self.sc.sigma_u,
            final_landmark_rmse,
        })
    }
}

/// Sequential active SLAM: observe, plan to the most informative goal,
/// drive there, repeat.
pub fn run_active_slam(scenario: &Scenario, seed: u64) -> Result<RunLog> {
    run_policy(
        scenario,
        RunConfig {
            policy: GoalPolicy::InformationGain,
            seed,
            keep_plans: false,
        },
    )
}

/// Baseline loop that always heads for the cheapest goal seeing a frontier.
pub fn run_nearest_frontier(scenario: &Scenario, seed: u64) -> Result<RunLog> {
    run_policy(
        scenario,
        RunConfig {
            policy: GoalPolicy::NearestFrontier,
            seed,
            keep_plans: false,
        },
    )
}

pub fn run_policy(scenario: &Scenario, cfg: RunConfig) -> Result<RunLog> {
    let start = scenario.start.translation();
    let swept = crate::tfg::geometry::Segment::new(start, start);
    if scenario.world.wall_clearance(&swept) < scenario.robot_radius {
        return Err(Error::CollisionWithTruth {
            x0: start.x,
            y0: start.y,
            x1: start.x,
            y1: start.y,
        });
    }
    Runner::new(scenario, cfg)?.run()
}

/// Column names of the `STAGE` rows of a run log.
pub const STAGE_COLUMNS: &str =
    "stage goal_x goal_y goal_theta true_x true_y true_theta dh_o dh_u \
entropy_before entropy_after coverage position_error dead_reckoning_error distance_travelled \
landmarks_mapped initial_reobserved path_cost";

/// Tabular text form of a run: header comments, one `STAGE` row per stage,
/// one `PATH` row per stage listing its waypoints, then `SUMMARY` rows.
pub fn write_run_log(log: &RunLog) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# run log");
    let _ = writeln!(out, "# scenario {}", log.scenario);
    let _ = writeln!(out, "# policy {}", policy_name(log.policy));
    let _ = writeln!(out, "# seed {}", log.seed);
    let _ = writeln!(out, "# status {}", log.status.as_str());
    let _ = writeln!(out, "# STAGE {STAGE_COLUMNS}");
    let _ = writeln!(out, "# PATH stage x y theta [x y theta ...]");
    for s in &log.stages {
        let _ = writeln!(
            out,
            "STAGE {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
            s.stage,
            s.goal.x,
            s.goal.y,
            s.goal.theta,
            s.true_goal.x,
            s.true_goal.y,
            s.true_goal.theta,
            s.dh_o,
            s.dh_u,
            s.entropy_before,
            s.entropy_after,
            s.coverage,
            s.position_error,
            s.dead_reckoning_error,
            s.distance_travelled,
            s.landmarks_mapped,
            s.initial_reobserved,
            s.path.total_cost
        );
    }
    for s in &log.stages {
        let _ = write!(out, "PATH {}", s.stage);
        for w in &s.path.waypoints {
            let _ = write!(out, " {} {} {}", w.x, w.y, w.theta);
        }
        out.push('\n');
    }
    let last = log.final_stage();
    let _ = writeln!(out, "SUMMARY final_coverage {}", last.coverage);
    let _ = writeln!(
        out,
        "SUMMARY distance_travelled {}",
        last.distance_travelled
    );
    let _ = writeln!(out, "SUMMARY position_rmse {}", log.position_rmse());
    let _ = writeln!(
        out,
        "SUMMARY dead_reckoning_rmse {}",
        log.dead_reckoning_rmse()
    );
    let _ = writeln!(out, "SUMMARY landmark_rmse {}", log.final_landmark_rmse);
    let _ = writeln!(out, "SUMMARY final_entropy {}", last.entropy_after);
    out
}
