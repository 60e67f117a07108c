use nalgebra::{Matrix2, Vector2};

use crate::error::Result;
use crate::sensor::SensorSpec;
use crate::slam::{
    assemble_information, logdet_spd, marginal_landmark_info, Factor, FactorGraph, LandmarkId,
    Pose2,
};

/// Exact entropy reduction (as a log-determinant ratio) from measuring
/// `visible` at `goal`, computed by appending the goal pose and its
/// measurements to `graph` and marginalizing densely. `graph` must hold its
/// MAP assignment.
pub fn exact_delta_h(
    graph: &FactorGraph,
    goal: &Pose2,
    visible: &[LandmarkId],
    sensing: &SensorSpec,
) -> Result<f64> {
    exact_delta_h_with_new_landmarks(graph, goal, visible, &[], &Matrix2::zeros(), sensing)
}

/// As [`exact_delta_h`], with additional unseen landmarks instantiated at
/// `new_landmarks` under prior covariance `sigma_u`, all measured from `goal`.
pub fn exact_delta_h_with_new_landmarks(
    graph: &FactorGraph,
    goal: &Pose2,
    visible: &[LandmarkId],
    new_landmarks: &[Vector2<f64>],
    sigma_u: &Matrix2<f64>,
    sensing: &SensorSpec,
) -> Result<f64> {
    if visible.is_empty() && new_landmarks.is_empty() {
        return Ok(0.0);
    }
    let mut before = graph.clone();
    let mut next_landmark = graph.landmarks().keys().next_back().map_or(0, |id| id + 1);
    let mut measured: Vec<LandmarkId> = visible.to_vec();
    if !new_landmarks.is_empty() {
        let info_u = sigma_u.try_inverse().ok_or_else(|| {
            crate::Error::NonPositiveDefinite("unseen landmark prior covariance".into())
        })?;
        for p in new_landmarks {
            before.add_landmark(next_landmark, *p)?;
            before.add_factor(Factor::LandmarkPrior {
                landmark: next_landmark,
                mean: *p,
                information: info_u,
            })?;
            measured.push(next_landmark);
            next_landmark += 1;
        }
    }

    let mut after = before.clone();
    let goal_id = graph.poses().keys().next_back().map_or(0, |id| id + 1);
    after.add_pose(goal_id, *goal)?;
    for id in &measured {
        let l = after.landmarks()[id].position;
        after.add_factor(Factor::Measurement {
            pose: goal_id,
            landmark: *id,
            relative: goal.point_in_frame(&l),
            information: sensing.measurement_information,
        })?;
    }

    let lb = marginal_landmark_info(&assemble_information(&before, &before.assignment())?)?;
    let la = marginal_landmark_info(&assemble_information(&after, &after.assignment())?)?;
    Ok(logdet_spd(&la.lambda)? - logdet_spd(&lb.lambda)?)
}
