//! Expected entropy reduction at candidate goal poses.
//!
//! A goal's gain splits into a part from re-observing mapped landmarks
//! (`dH_o`) and a part from landmarks expected beyond frontiers (`dH_u`).
//! Gains are log-determinant ratios of landmark information, i.e. twice the
//! reduction of the Gaussian entropy `−½ log |Λ_L|`.

mod exact;
mod score;
mod terms;

use nalgebra::Matrix2;

use crate::slam::{LandmarkId, Pose2};

pub use exact::{exact_delta_h, exact_delta_h_with_new_landmarks};
pub use score::{score_candidates, Reachability};
pub use terms::{delta_h, gain_terms, visible_set, GainTerms};

/// Prior knowledge about landmarks that have not been observed yet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationPrior {
    /// Prior covariance of a single unseen landmark.
    pub sigma_u: Matrix2<f64>,
    /// Expected measurement information gained on a new landmark.
    pub a_u: Matrix2<f64>,
    /// Expected landmarks per metre of frontier arc.
    pub density: f64,
}

impl ExplorationPrior {
    /// Isotropic prior with variance `variance` and `a_u = R⁻¹`.
    pub fn isotropic(variance: f64, measurement_information: Matrix2<f64>, density: f64) -> Self {
        Self {
            sigma_u: Matrix2::identity() * variance,
            a_u: measurement_information,
            density,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateGoal {
    /// Position of the pose in the scored sample list.
    pub index: usize,
    pub pose: Pose2,
    pub visible_observed: Vec<LandmarkId>,
    pub n_x: f64,
    pub dh_o: f64,
    pub dh_u: f64,
    pub total: f64,
    pub reachable: bool,
    pub frontier_count: usize,
}
