use nalgebra::{DMatrix, DVector, Matrix2, Matrix2x3, Matrix3, Vector2, Vector3};

use super::pose::{pose_residual, Pose2};

pub type PoseId = u64;
pub type LandmarkId = u64;

/// A variable of the factor graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Landmark(LandmarkId),
    Pose(PoseId),
}

impl VarKey {
    pub fn dim(&self) -> usize {
        match self {
            VarKey::Landmark(_) => 2,
            VarKey::Pose(_) => 3,
        }
    }
}

impl std::fmt::Display for VarKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarKey::Landmark(id) => write!(f, "L{id}"),
            VarKey::Pose(id) => write!(f, "X{id}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Factor {
    PosePrior {
        pose: PoseId,
        mean: Pose2,
        information: Matrix3<f64>,
    },
    LandmarkPrior {
        landmark: LandmarkId,
        mean: Vector2<f64>,
        information: Matrix2<f64>,
    },
    /// `delta ≈ to ⊖ from`.
    Odometry {
        from: PoseId,
        to: PoseId,
        delta: Pose2,
        information: Matrix3<f64>,
    },
    /// `relative ≈ landmark ⊖ pose`, expressed in the robot frame.
    Measurement {
        pose: PoseId,
        landmark: LandmarkId,
        relative: Vector2<f64>,
        information: Matrix2<f64>,
    },
}

impl Factor {
    pub fn keys(&self) -> Vec<VarKey> {
        match self {
            Factor::PosePrior { pose, .. } => vec![VarKey::Pose(*pose)],
            Factor::LandmarkPrior { landmark, .. } => vec![VarKey::Landmark(*landmark)],
            Factor::Odometry { from, to, .. } => vec![VarKey::Pose(*from), VarKey::Pose(*to)],
            Factor::Measurement { pose, landmark, .. } => {
                vec![VarKey::Pose(*pose), VarKey::Landmark(*landmark)]
            }
        }
    }

    pub fn information(&self) -> DMatrix<f64> {
        match self {
            Factor::PosePrior { information, .. } | Factor::Odometry { information, .. } => {
                DMatrix::from_column_slice(3, 3, information.as_slice())
            }
            Factor::LandmarkPrior { information, .. } | Factor::Measurement { information, .. } => {
                DMatrix::from_column_slice(2, 2, information.as_slice())
            }
        }
    }

    pub fn is_prior(&self) -> bool {
        matches!(
            self,
            Factor::PosePrior { .. } | Factor::LandmarkPrior { .. }
        )
    }

    pub fn involves(&self, key: VarKey) -> bool {
        self.keys().contains(&key)
    }
}

/// Residual `between(a, b) - delta` of an odometry factor (heading wrapped).
pub fn odometry_residual(a: &Pose2, b: &Pose2, delta: &Pose2) -> Vector3<f64> {
    pose_residual(&a.between(b), delta)
}

/// Jacobians of the odometry prediction `between(a, b)` w.r.t. `a` and `b`.
pub fn odometry_jacobians(a: &Pose2, b: &Pose2) -> (Matrix3<f64>, Matrix3<f64>) {
    let (s, c) = a.theta.sin_cos();
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let ja = Matrix3::new(
        -c,
        -s,
        -s * dx + c * dy,
        s,
        -c,
        -c * dx - s * dy,
        0.0,
        0.0,
        -1.0,
    );
    let jb = Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0);
    (ja, jb)
}

/// Residual `(landmark ⊖ pose) - z` of a measurement factor.
pub fn measurement_residual(x: &Pose2, l: &Vector2<f64>, z: &Vector2<f64>) -> Vector2<f64> {
    x.point_in_frame(l) - z
}

/// Jacobians of the measurement prediction w.r.t. the pose and the landmark.
pub fn measurement_jacobians(x: &Pose2, l: &Vector2<f64>) -> (Matrix2x3<f64>, Matrix2<f64>) {
    let (s, c) = x.theta.sin_cos();
    let dx = l.x - x.x;
    let dy = l.y - x.y;
    let jx = Matrix2x3::new(-c, -s, -s * dx + c * dy, s, -c, -c * dx - s * dy);
    let jl = Matrix2::new(c, s, -s, c);
    (jx, jl)
}

/// A factor linearized at some assignment: `r(x ⊞ δ) ≈ r + Σ J_k δ_k`.
#[derive(Debug, Clone)]
pub struct Linearized {
    pub keys: Vec<VarKey>,
    pub jacobians: Vec<DMatrix<f64>>,
    pub residual: DVector<f64>,
    pub information: DMatrix<f64>,
}

pub(crate) fn to_dmatrix<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<f64, R, C>,
) -> DMatrix<f64> {
    DMatrix::from_column_slice(R, C, m.as_slice())
}

pub(crate) fn to_dvector<const R: usize>(v: &nalgebra::SVector<f64, R>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}
