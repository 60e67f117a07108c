//! Sampling-based goal selection and roadmap path planning.

mod roadmap;
mod sample;
mod search;

pub use roadmap::{
    build_roadmap, discretize, edge_feasibility, write_roadmap, CovarianceModel, NodeId, NodeKind,
    Roadmap, RoadmapConfig, RoadmapEdge, RoadmapNode,
};
pub use sample::{clearance, is_free, sample_free, Bounds};
pub use search::{shortest_path, PlannedPath, ShortestPaths};

use crate::error::{Error, Result};
use crate::info_gain::{score_candidates, CandidateGoal, ExplorationPrior, Reachability};
use crate::sensor::SensorSpec;
use crate::slam::Pose2;
use crate::tfg::TopologicalFeatureGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoalPolicy {
    /// Highest expected entropy reduction with a feasible path.
    InformationGain,
    /// Cheapest-to-reach candidate that sees a frontier.
    NearestFrontier,
}

#[derive(Debug, Clone)]
pub struct PlannerConfig {
    pub bounds: Bounds,
    pub sample_count: usize,
    pub sensing: SensorSpec,
    pub prior: ExplorationPrior,
    pub previous_goals: Vec<Pose2>,
    /// Distance up to which a previous goal vouches for a location.
    pub reach_range: f64,
    pub min_goal_distance: f64,
    pub max_path_length: f64,
    pub roadmap: RoadmapConfig,
    pub policy: GoalPolicy,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub goal: CandidateGoal,
    pub path: PlannedPath,
    /// Scored samples, best first.
    pub candidates: Vec<CandidateGoal>,
    pub roadmap: Roadmap,
}

/// Samples candidate goals, scores them, and returns the first one (in
/// policy order) that admits a roadmap path from `current`.
pub fn plan_next(
    tfg: &TopologicalFeatureGraph,
    current: &Pose2,
    config: &PlannerConfig,
) -> Result<PlanOutcome> {
    let robot_radius = config.roadmap.robot_radius;
    let mut anchors = config.previous_goals.clone();
    anchors.push(*current);
    let reach = Reachability::new(anchors, config.reach_range);
    let samples = sample_free(
        tfg,
        &config.bounds,
        config.sample_count,
        config.roadmap.seed,
        robot_radius,
        &reach,
    )?;
    let candidates = score_candidates(tfg, &samples, &config.sensing, &config.prior, &reach)?;

    let mut nodes = vec![RoadmapNode {
        id: 0,
        pose: *current,
        kind: NodeKind::Current,
    }];
    for g in &config.previous_goals {
        nodes.push(RoadmapNode {
            id: nodes.len(),
            pose: *g,
            kind: NodeKind::PreviousGoal,
        });
    }
    let first_sample = nodes.len();
    for s in &samples {
        nodes.push(RoadmapNode {
            id: nodes.len(),
            pose: *s,
            kind: NodeKind::Sample,
        });
    }
    let roadmap = build_roadmap(nodes, tfg, &config.roadmap)?;
    let paths = ShortestPaths::compute(&roadmap);

    let admissible = |c: &CandidateGoal| -> Option<PlannedPath> {
        if !c.reachable
            || (c.pose.translation() - current.translation()).norm() < config.min_goal_distance
        {
            return None;
        }
        let path = paths.path_to(&roadmap, first_sample + c.index).ok()?;
        (path.length <= config.max_path_length).then_some(path)
    };

    let chosen = match config.policy {
        GoalPolicy::InformationGain => candidates
            .iter()
            .find_map(|c| admissible(c).map(|p| (c.clone(), p))),
        GoalPolicy::NearestFrontier => candidates
            .iter()
            .filter(|c| c.frontier_count > 0)
            .filter_map(|c| admissible(c).map(|p| (c.clone(), p)))
            .min_by(|a, b| {
                a.1.total_cost
                    .total_cmp(&b.1.total_cost)
                    .then(a.0.index.cmp(&b.0.index))
            }),
    };
    let (goal, path) = chosen.ok_or(Error::NoFeasibleGoal)?;
    Ok(PlanOutcome {
        goal,
        path,
        candidates,
        roadmap,
    })
}
