use nalgebra::{Matrix2, Matrix3, SymmetricEigen, Vector2, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::tfg::collision::psd_sqrt;

/// Odometry noise `Q` per motion step and measurement noise `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub q: Matrix3<f64>,
    pub r: Matrix2<f64>,
    pub seed: u64,
}

/// Variance used in place of zero when a noise-free model is turned into
/// factor information.
pub const VARIANCE_FLOOR: f64 = 1e-8;

fn floored_inverse3(m: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(*m);
    let d = eig.eigenvalues.map(|v| 1.0 / v.max(VARIANCE_FLOOR));
    eig.eigenvectors * Matrix3::from_diagonal(&d) * eig.eigenvectors.transpose()
}

fn floored_inverse2(m: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = SymmetricEigen::new(*m);
    let d = eig.eigenvalues.map(|v| 1.0 / v.max(VARIANCE_FLOOR));
    eig.eigenvectors * Matrix2::from_diagonal(&d) * eig.eigenvectors.transpose()
}

impl NoiseModel {
    pub fn odometry_information(&self) -> Matrix3<f64> {
        floored_inverse3(&self.q)
    }

    pub fn measurement_information(&self) -> Matrix2<f64> {
        floored_inverse2(&self.r)
    }
}

/// Independent random streams for motion and sensing noise.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    pub model: NoiseModel,
    q_sqrt: Matrix3<f64>,
    r_sqrt: Matrix2<f64>,
    motion: ChaCha8Rng,
    sensing: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(model: NoiseModel) -> Self {
        let eig = SymmetricEigen::new((model.q + model.q.transpose()) * 0.5);
        let q_sqrt =
            eig.eigenvectors * Matrix3::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
        let mut motion = ChaCha8Rng::seed_from_u64(model.seed);
        motion.set_stream(1);
        let mut sensing = ChaCha8Rng::seed_from_u64(model.seed);
        sensing.set_stream(2);
        Self {
            model,
            q_sqrt,
            r_sqrt: psd_sqrt(&model.r),
            motion,
            sensing,
        }
    }

    pub fn odometry(&mut self) -> Vector3<f64> {
        let z = Vector3::from_fn(|_, _| StandardNormal.sample(&mut self.motion));
        self.q_sqrt * z
    }

    pub fn measurement(&mut self) -> Vector2<f64> {
        let z = Vector2::from_fn(|_, _| StandardNormal.sample(&mut self.sensing));
        self.r_sqrt * z
    }
}
