//! SE(2) poses and the composition / relative-transform operators used by
//! the odometry and landmark measurement models.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use std::f64::consts::{PI, TAU};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let a = (angle + PI).rem_euclid(TAU) - PI;
    if a <= -PI {
        a + TAU
    } else {
        a
    }
}

pub fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Robot pose in the plane. `theta` is kept wrapped to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Default for Pose2 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, 0.0, 0.0)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.theta)
    }

    pub fn translation(&self) -> Vector2<f64> {
        Vector2::new(self.x, self.y)
    }

    pub fn rotation(&self) -> Matrix2<f64> {
        rotation(self.theta)
    }

    /// `self ⊕ other`: `other` is expressed in the frame of `self`.
    pub fn compose(&self, other: &Pose2) -> Pose2 {
        let t = self.translation() + self.rotation() * other.translation();
        Pose2::new(t.x, t.y, self.theta + other.theta)
    }

    pub fn inverse(&self) -> Pose2 {
        let t = -(self.rotation().transpose() * self.translation());
        Pose2::new(t.x, t.y, -self.theta)
    }

    /// `other ⊖ self`: the pose of `other` expressed in the frame of `self`.
    pub fn between(&self, other: &Pose2) -> Pose2 {
        let t = self.rotation().transpose() * (other.translation() - self.translation());
        Pose2::new(t.x, t.y, other.theta - self.theta)
    }

    /// `p ⊖ self`: a world point expressed in the robot frame.
    pub fn point_in_frame(&self, p: &Vector2<f64>) -> Vector2<f64> {
        self.rotation().transpose() * (p - self.translation())
    }

    /// Inverse of [`Pose2::point_in_frame`].
    pub fn point_to_world(&self, v: &Vector2<f64>) -> Vector2<f64> {
        self.translation() + self.rotation() * v
    }

    /// Euclidean distance between the translations.
    pub fn distance(&self, other: &Pose2) -> f64 {
        (self.translation() - other.translation()).norm()
    }
}

pub fn pose_compose(a: &Pose2, b: &Pose2) -> Pose2 {
    a.compose(b)
}

pub fn pose_between(a: &Pose2, b: &Pose2) -> Pose2 {
    a.between(b)
}

pub fn point_in_robot_frame(x: &Pose2, p: &Vector2<f64>) -> Vector2<f64> {
    x.point_in_frame(p)
}

/// Jacobians of `a ⊕ b` with respect to `a` and `b`.
pub fn compose_jacobians(a: &Pose2, b: &Pose2) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = a.theta.sin_cos();
    let ja = Matrix3::new(
        1.0,
        0.0,
        -s * b.x - c * b.y,
        0.0,
        1.0,
        c * b.x - s * b.y,
        0.0,
        0.0,
        1.0,
    );
    let jb = Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
    (ja, jb)
}

/// Difference of two pose vectors with the heading component wrapped.
pub fn pose_residual(predicted: &Pose2, measured: &Pose2) -> Vector3<f64> {
    Vector3::new(
        predicted.x - measured.x,
        predicted.y - measured.y,
        wrap_angle(predicted.theta - measured.theta),
    )
}
