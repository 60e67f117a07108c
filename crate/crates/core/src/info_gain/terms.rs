use nalgebra::{DMatrix, Matrix2, Matrix2x3, Matrix3, SymmetricEigen, Vector2};

use super::ExplorationPrior;
use crate::error::{Error, Result};
use crate::sensor::SensorSpec;
use crate::slam::factor::measurement_jacobians;
use crate::slam::{logdet_spd, LandmarkId, Pose2};
use crate::tfg::{Frontier, TopologicalFeatureGraph};

/// Landmarks observable from a goal pose. The robot turns in place at a
/// goal, so the field of view is a full circle.
pub fn visible_set(
    tfg: &TopologicalFeatureGraph,
    pose: &Pose2,
    sensing: &SensorSpec,
) -> Vec<LandmarkId> {
    tfg.visible_landmarks(pose, sensing.range, std::f64::consts::TAU)
        .into_iter()
        .map(|(id, _)| id)
        .collect()
}

/// Blocks of the information added by measurements taken at a goal pose.
#[derive(Debug, Clone)]
pub struct GainTerms {
    pub visible: Vec<LandmarkId>,
    /// Block-diagonal landmark information `A_o` (2k × 2k).
    pub a_o: DMatrix<f64>,
    /// Landmark–goal cross information `H_o` (2k × 3).
    pub h_o: DMatrix<f64>,
    /// Expected new landmarks, their weights and blocks.
    pub new_points: Vec<Vector2<f64>>,
    pub new_weights: Vec<f64>,
    pub a_u: Vec<Matrix2<f64>>,
    pub h_u: Vec<Matrix2x3<f64>>,
    pub b_o: Matrix3<f64>,
    pub b_u: Matrix3<f64>,
    /// Goal-pose self information `B_o + B_u`.
    pub b: Matrix3<f64>,
    /// Marginal covariance of the visible landmarks.
    pub sigma_o: DMatrix<f64>,
    /// Expected number of new landmarks.
    pub n_x: f64,
}

pub fn gain_terms(
    tfg: &TopologicalFeatureGraph,
    pose: &Pose2,
    sensing: &SensorSpec,
    prior: &ExplorationPrior,
    frontiers: &[Frontier],
) -> Result<GainTerms> {
    let omega = sensing.measurement_information;
    let visible = visible_set(tfg, pose, sensing);
    let k = visible.len();
    let mut a_o = DMatrix::zeros(2 * k, 2 * k);
    let mut h_o = DMatrix::zeros(2 * k, 3);
    let mut b_o = Matrix3::zeros();
    for (i, id) in visible.iter().enumerate() {
        let l = tfg.position(*id).ok_or(Error::UnknownLandmark(*id))?;
        let (jx, jl) = measurement_jacobians(pose, l);
        let wl = jl.transpose() * omega;
        a_o.view_mut((2 * i, 2 * i), (2, 2)).copy_from(&(wl * jl));
        h_o.view_mut((2 * i, 0), (2, 3)).copy_from(&(wl * jx));
        b_o += jx.transpose() * omega * jx;
    }
    let sigma_o = tfg.marginal().restrict(tfg.covariance(), &visible)?;

    let origin = pose.translation();
    let mut n_x = 0.0;
    let mut new_points = Vec::new();
    let mut new_weights = Vec::new();
    let mut a_u = Vec::new();
    let mut h_u = Vec::new();
    let mut b_u = Matrix3::zeros();
    for f in frontiers {
        let n_f = prior.density * f.arc_length;
        if n_f <= 0.0 {
            continue;
        }
        n_x += n_f;
        let count = n_f.ceil() as usize;
        let weight = n_f / count as f64;
        for p in f.sample_points(&origin, count) {
            let (jx, jl) = measurement_jacobians(pose, &p);
            h_u.push(jl.transpose() * omega * jx);
            a_u.push(prior.a_u);
            b_u += jx.transpose() * omega * jx * weight;
            new_points.push(p);
            new_weights.push(weight);
        }
    }
    Ok(GainTerms {
        visible,
        a_o,
        h_o,
        new_points,
        new_weights,
        a_u,
        h_u,
        b_o,
        b_u,
        b: b_o + b_u,
        sigma_o,
        n_x,
    })
}

/// Moore–Penrose inverse of a symmetric PSD matrix. A goal pose that sees a
/// single landmark is not fully constrained; the unconstrained directions
/// carry no information to the landmarks.
fn pseudo_inverse(b: &Matrix3<f64>) -> Matrix3<f64> {
    let eig = SymmetricEigen::new((b + b.transpose()) * 0.5);
    let cutoff = 1e-12 * eig.eigenvalues.amax();
    let inv = eig
        .eigenvalues
        .map(|v| if v > cutoff && v > 0.0 { 1.0 / v } else { 0.0 });
    eig.eigenvectors * Matrix3::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

/// `(dH_o, dH_u)` with
/// `dH_o = log |I + Σ_o (A_o − H_o B⁻¹ H_oᵀ)|` and
/// `dH_u = n_x log |I + σ_u a_u|`.
pub fn delta_h(terms: &GainTerms, n_x: f64, prior: &ExplorationPrior) -> Result<(f64, f64)> {
    let dh_u = if n_x > 0.0 {
        let det = (Matrix2::identity() + prior.sigma_u * prior.a_u).determinant();
        if det <= 0.0 {
            return Err(Error::NonPositiveDefinite("I + σ_u a_u".into()));
        }
        n_x * det.ln()
    } else {
        0.0
    };

    if terms.visible.is_empty() {
        return Ok((0.0, dh_u));
    }
    let b_pinv = pseudo_inverse(&terms.b);
    let b_pinv = DMatrix::from_column_slice(3, 3, b_pinv.as_slice());
    let k = &terms.a_o - &terms.h_o * b_pinv * terms.h_o.transpose();
    let k = (&k + k.transpose()) * 0.5;
    // |I + Σ K| = |I + Lᵀ K L| for Σ = L Lᵀ; the latter is symmetric.
    let chol = terms
        .sigma_o
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NonPositiveDefinite("visible landmark covariance".into()))?;
    let l = chol.l();
    let m = DMatrix::identity(k.nrows(), k.ncols()) + l.transpose() * k * &l;
    let dh_o = logdet_spd(&((&m + m.transpose()) * 0.5))?;
    Ok((dh_o, dh_u))
}
