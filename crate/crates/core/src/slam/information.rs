//! Laplace approximation of the posterior: information matrix assembly,
//! Schur-complement marginalization onto landmarks and Gaussian entropy.

use nalgebra::{DMatrix, DVector};

use super::factor::LandmarkId;
use super::graph::{Assignment, FactorGraph, VariableOrdering};
use crate::error::{Error, Result};

/// Information matrix over all variables, laid out as
/// `[[Λ_f, Λ_fr], [Λ_rf, Λ_r]]` (landmarks first, then poses).
#[derive(Debug, Clone)]
pub struct InformationMatrix {
    pub ordering: VariableOrdering,
    pub matrix: DMatrix<f64>,
}

impl InformationMatrix {
    pub fn landmark_block(&self) -> DMatrix<f64> {
        let m = self.ordering.landmark_dim();
        self.matrix.view((0, 0), (m, m)).into_owned()
    }

    pub fn pose_block(&self) -> DMatrix<f64> {
        let m = self.ordering.landmark_dim();
        let n = self.ordering.dim() - m;
        self.matrix.view((m, m), (n, n)).into_owned()
    }

    pub fn cross_block(&self) -> DMatrix<f64> {
        let m = self.ordering.landmark_dim();
        let n = self.ordering.dim() - m;
        self.matrix.view((0, m), (m, n)).into_owned()
    }
}

/// Accumulates `Σ JᵀΩJ` and `Σ JᵀΩr` over all factors.
pub(crate) fn normal_equations(
    graph: &FactorGraph,
    a: &Assignment,
    ordering: &VariableOrdering,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = ordering.dim();
    let mut h = DMatrix::zeros(n, n);
    let mut g = DVector::zeros(n);
    for f in graph.factors() {
        let lin = graph.linearize(f, a)?;
        let weighted: Vec<DMatrix<f64>> = lin
            .jacobians
            .iter()
            .map(|j| j.transpose() * &lin.information)
            .collect();
        for (i, ki) in lin.keys.iter().enumerate() {
            let oi = ordering.offset(*ki);
            let gi = &weighted[i] * &lin.residual;
            let mut gv = g.rows_mut(oi, ki.dim());
            gv += &gi;
            for (j, kj) in lin.keys.iter().enumerate() {
                let oj = ordering.offset(*kj);
                let block = &weighted[i] * &lin.jacobians[j];
                let mut hv = h.view_mut((oi, oj), (ki.dim(), kj.dim()));
                hv += &block;
            }
        }
    }
    Ok((h, g))
}

pub fn assemble_information(graph: &FactorGraph, a: &Assignment) -> Result<InformationMatrix> {
    let ordering = graph.ordering();
    let (h, _) = normal_equations(graph, a, &ordering)?;
    Ok(InformationMatrix {
        ordering,
        matrix: symmetrize(&h),
    })
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Marginal information on landmarks, `Λ_L` of size `2M × 2M`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalInfo {
    pub landmark_order: Vec<LandmarkId>,
    pub lambda: DMatrix<f64>,
}

impl MarginalInfo {
    pub fn empty() -> Self {
        Self {
            landmark_order: Vec::new(),
            lambda: DMatrix::zeros(0, 0),
        }
    }

    pub fn index_of(&self, id: LandmarkId) -> Option<usize> {
        self.landmark_order.iter().position(|l| *l == id)
    }

    /// Dense marginal covariance `Λ_L⁻¹`.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        if self.landmark_order.is_empty() {
            return Ok(DMatrix::zeros(0, 0));
        }
        let chol =
            self.lambda.clone().cholesky().ok_or_else(|| {
                Error::NonPositiveDefinite("landmark marginal information".into())
            })?;
        Ok(symmetrize(&chol.inverse()))
    }

    /// Restricts a covariance laid out like `landmark_order` to `ids`.
    pub fn restrict(&self, full: &DMatrix<f64>, ids: &[LandmarkId]) -> Result<DMatrix<f64>> {
        let idx: Vec<usize> = ids
            .iter()
            .map(|id| self.index_of(*id).ok_or(Error::UnknownLandmark(*id)))
            .collect::<Result<_>>()?;
        let k = idx.len();
        let mut out = DMatrix::zeros(2 * k, 2 * k);
        for (r, ir) in idx.iter().enumerate() {
            for (c, ic) in idx.iter().enumerate() {
                out.view_mut((2 * r, 2 * c), (2, 2))
                    .copy_from(&full.view((2 * ir, 2 * ic), (2, 2)));
            }
        }
        Ok(out)
    }

    /// Largest per-axis marginal variance among all landmarks.
    pub fn max_variance(&self) -> Result<f64> {
        let cov = self.covariance()?;
        Ok((0..cov.nrows()).map(|i| cov[(i, i)]).fold(0.0, f64::max))
    }
}

/// `Λ_L = Λ_f − Λ_fr Λ_r⁻¹ Λ_rf`.
pub fn marginal_landmark_info(info: &InformationMatrix) -> Result<MarginalInfo> {
    let lf = info.landmark_block();
    let lambda = if info.ordering.poses.is_empty() {
        lf
    } else {
        let lr = info.pose_block();
        let lfr = info.cross_block();
        let chol = lr.cholesky().ok_or(Error::SingularPoseBlock)?;
        let x = chol.solve(&lfr.transpose());
        lf - lfr * x
    };
    Ok(MarginalInfo {
        landmark_order: info.ordering.landmarks.clone(),
        lambda: symmetrize(&lambda),
    })
}

/// `log |M|` for symmetric positive definite `M`.
pub fn logdet_spd(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NonPositiveDefinite("logdet argument".into()))?;
    Ok(2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// `H(L) = −½ log |Λ_L|`, without the additive Gaussian constant.
pub fn landmark_entropy(m: &MarginalInfo) -> Result<f64> {
    Ok(-0.5 * logdet_spd(&m.lambda)?)
}

/// Landmark marginal of `graph` linearized at its stored assignment.
pub fn graph_marginal(graph: &FactorGraph) -> Result<MarginalInfo> {
    let info = assemble_information(graph, &graph.assignment())?;
    marginal_landmark_info(&info)
}

/// Marginal covariance of pose `id` in `graph` at its stored assignment.
pub fn pose_covariance(
    graph: &FactorGraph,
    id: crate::slam::PoseId,
) -> Result<nalgebra::Matrix3<f64>> {
    let info = assemble_information(graph, &graph.assignment())?;
    let off = info
        .ordering
        .get(crate::slam::VarKey::Pose(id))
        .ok_or(Error::UnknownPose(id))?;
    let n = info.matrix.nrows();
    let chol = info.matrix.cholesky().ok_or(Error::SingularSystem)?;
    let mut rhs = DMatrix::zeros(n, 3);
    for k in 0..3 {
        rhs[(off + k, k)] = 1.0;
    }
    let cols = chol.solve(&rhs);
    let block = cols.view((off, 0), (3, 3));
    Ok(nalgebra::Matrix3::from_fn(|i, j| {
        0.5 * (block[(i, j)] + block[(j, i)])
    }))
}
