use rayon::prelude::*;

use super::{delta_h, gain_terms, CandidateGoal, ExplorationPrior};
use crate::error::{Error, Result};
use crate::sensor::SensorSpec;
use crate::slam::Pose2;
use crate::tfg::{detect_frontiers, TopologicalFeatureGraph};

/// A location is reachable if it can be seen from some previous goal.
#[derive(Debug, Clone, Default)]
pub struct Reachability {
    pub goals: Vec<Pose2>,
    /// Maximum distance at which a previous goal vouches for a location.
    pub range: f64,
}

impl Reachability {
    pub fn new(goals: Vec<Pose2>, range: f64) -> Self {
        Self { goals, range }
    }

    /// With no previous goals every location counts as reachable.
    pub fn unrestricted() -> Self {
        Self {
            goals: Vec::new(),
            range: f64::INFINITY,
        }
    }

    pub fn is_reachable(&self, tfg: &TopologicalFeatureGraph, pose: &Pose2) -> bool {
        if self.goals.is_empty() {
            return true;
        }
        let p = pose.translation();
        self.goals.iter().any(|g| {
            let q = g.translation();
            (p - q).norm() <= self.range && tfg.line_of_sight(&q, &p)
        })
    }
}

fn score_one(
    tfg: &TopologicalFeatureGraph,
    index: usize,
    pose: &Pose2,
    sensing: &SensorSpec,
    prior: &ExplorationPrior,
    reach: &Reachability,
) -> Result<CandidateGoal> {
    let frontiers = detect_frontiers(tfg, pose, &sensing.full_rotation());
    let terms = gain_terms(tfg, pose, sensing, prior, &frontiers)?;
    let (dh_o, dh_u) = delta_h(&terms, terms.n_x, prior)?;
    Ok(CandidateGoal {
        index,
        pose: *pose,
        visible_observed: terms.visible,
        n_x: terms.n_x,
        dh_o,
        dh_u,
        total: dh_o + dh_u,
        reachable: reach.is_reachable(tfg, pose),
        frontier_count: frontiers.len(),
    })
}

/// Scores every sample and returns them best first: reachable before
/// unreachable, then by total gain descending, then by sample index.
pub fn score_candidates(
    tfg: &TopologicalFeatureGraph,
    samples: &[Pose2],
    sensing: &SensorSpec,
    prior: &ExplorationPrior,
    reach: &Reachability,
) -> Result<Vec<CandidateGoal>> {
    let mut scored: Vec<CandidateGoal> = samples
        .par_iter()
        .enumerate()
        .map(|(i, p)| score_one(tfg, i, p, sensing, prior, reach))
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| {
        b.reachable
            .cmp(&a.reachable)
            .then(b.total.total_cmp(&a.total))
            .then(a.index.cmp(&b.index))
    });
    if !scored.first().is_some_and(|c| c.reachable) {
        return Err(Error::NoReachableCandidate);
    }
    Ok(scored)
}
