use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};

use crate::slam::factor::measurement_jacobians;
use crate::slam::{compose_jacobians, wrap_angle, Pose2};

/// Pose estimate used to steer between goals: odometry prediction corrected
/// against mapped landmark positions held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseTracker {
    pub estimate: Pose2,
    pub covariance: Matrix3<f64>,
}

const ITERATIONS: usize = 5;

impl PoseTracker {
    pub fn new(estimate: Pose2, covariance: Matrix3<f64>) -> Self {
        Self {
            estimate,
            covariance,
        }
    }

    pub fn predict(&mut self, odometry: &Pose2, q: &Matrix3<f64>) {
        let (ja, jb) = compose_jacobians(&self.estimate, odometry);
        self.estimate = self.estimate.compose(odometry);
        self.covariance = ja * self.covariance * ja.transpose() + jb * q * jb.transpose();
    }

    /// Gauss–Newton on the pose alone with the prediction as prior. Each
    /// observation pairs a landmark position with its robot-frame measurement.
    pub fn correct(
        &mut self,
        observations: &[(Vector2<f64>, Vector2<f64>)],
        r_info: &Matrix2<f64>,
    ) {
        if observations.is_empty() {
            return;
        }
        let cov =
            (self.covariance + self.covariance.transpose()) * 0.5 + Matrix3::identity() * 1e-12;
        let Some(prior_info) = cov.try_inverse() else {
            return;
        };
        let prior = self.estimate;
        let mut x = prior;
        let mut info = prior_info;
        for _ in 0..ITERATIONS {
            let d = x.to_vector() - prior.to_vector();
            let d = Vector3::new(d.x, d.y, wrap_angle(d.z));
            let mut h = prior_info;
            let mut g = prior_info * d;
            for (l, z) in observations {
                let (jx, _) = measurement_jacobians(&x, l);
                let r = x.point_in_frame(l) - z;
                h += jx.transpose() * r_info * jx;
                g += jx.transpose() * r_info * r;
            }
            info = h;
            let Some(step) = h.cholesky().map(|c| c.solve(&(-g))) else {
                return;
            };
            x = Pose2::new(x.x + step.x, x.y + step.y, wrap_angle(x.theta + step.z));
            if step.norm() < 1e-10 {
                break;
            }
        }
        if let Some(c) = info.try_inverse() {
            self.estimate = x;
            self.covariance = c;
        }
    }
}
