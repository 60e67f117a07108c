use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::info_gain::Reachability;
use crate::slam::Pose2;
use crate::tfg::{nearest_obstacle_distance, TopologicalFeatureGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min_x && x <= self.max_x && y >= self.min_y && y <= self.max_y
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// Clearance of `p` from mapped surfaces and from mapped landmarks, which
/// sit on surfaces whose edges may not be known yet.
pub fn clearance(p: &nalgebra::Vector2<f64>, tfg: &TopologicalFeatureGraph) -> f64 {
    let edges = nearest_obstacle_distance(p, tfg).0;
    tfg.landmarks()
        .values()
        .map(|l| (l - p).norm())
        .fold(edges, f64::min)
}

/// The predicate applied to every sample: clear of obstacles by the robot
/// radius and reachable.
pub fn is_free(
    pose: &Pose2,
    tfg: &TopologicalFeatureGraph,
    robot_radius: f64,
    reach: &Reachability,
) -> bool {
    clearance(&pose.translation(), tfg) >= robot_radius && reach.is_reachable(tfg, pose)
}

/// Uniform rejection sampling of free poses inside `bounds`.
///
/// At most `100 × count` draws are made. If fewer than one draw in a hundred
/// is accepted the sampler gives up with [`Error::SamplingExhausted`];
/// otherwise whatever was accepted is returned.
pub fn sample_free(
    tfg: &TopologicalFeatureGraph,
    bounds: &Bounds,
    count: usize,
    seed: u64,
    robot_radius: f64,
    reach: &Reachability,
) -> Result<Vec<Pose2>> {
    assert!(count > 0, "sample count must be positive");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 100 * count;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < max_attempts {
        attempts += 1;
        let x = rng.random_range(bounds.min_x..=bounds.max_x);
        let y = rng.random_range(bounds.min_y..=bounds.max_y);
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let pose = Pose2::new(x, y, theta);
        if is_free(&pose, tfg, robot_radius, reach) {
            out.push(pose);
        }
    }
    if out.len() * 100 < attempts {
        return Err(Error::SamplingExhausted {
            attempts,
            accepted: out.len(),
        });
    }
    Ok(out)
}
