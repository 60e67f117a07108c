use crate::error::{Error, Result};
use crate::slam::Pose2;
use crate::tfg::geometry::Segment;

use super::noise::NoiseSource;
use super::world::WorldModel;

/// Largest translation and rotation of a single motion step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLimits {
    pub translation: f64,
    pub rotation: f64,
}

impl Default for StepLimits {
    fn default() -> Self {
        Self {
            translation: 0.25,
            rotation: 0.2,
        }
    }
}

/// Moves the true pose by exactly `delta` and reports odometry perturbed by
/// a draw from `N(0, Q)`.
pub fn step_motion(
    x_true: &Pose2,
    delta: &Pose2,
    noise: &mut NoiseSource,
    world: &WorldModel,
    robot_radius: f64,
) -> Result<(Pose2, Pose2)> {
    let next = x_true.compose(delta);
    let swept = Segment::new(x_true.translation(), next.translation());
    if world.wall_clearance(&swept) < robot_radius {
        return Err(Error::CollisionWithTruth {
            x0: x_true.x,
            y0: x_true.y,
            x1: next.x,
            y1: next.y,
        });
    }
    let v = noise.odometry();
    let odometry = Pose2::new(delta.x + v.x, delta.y + v.y, delta.theta + v.z);
    Ok((next, odometry))
}

/// Commanded steps taking `from` to `to`: turn towards the target, then
/// drive straight. Each step respects `limits`.
pub fn plan_steps(from: &Pose2, to: &Pose2, limits: &StepLimits) -> Vec<Pose2> {
    let d = to.translation() - from.translation();
    let dist = d.norm();
    let mut steps = Vec::new();
    if dist < 1e-9 {
        return steps;
    }
    let turn = crate::slam::wrap_angle(d.y.atan2(d.x) - from.theta);
    let n_turn = (turn.abs() / limits.rotation).ceil() as usize;
    for _ in 0..n_turn {
        steps.push(Pose2::new(0.0, 0.0, turn / n_turn as f64));
    }
    let n_drive = (dist / limits.translation).ceil() as usize;
    for _ in 0..n_drive {
        steps.push(Pose2::new(dist / n_drive as f64, 0.0, 0.0));
    }
    steps
}
