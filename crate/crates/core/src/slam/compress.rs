use nalgebra::Matrix3;

use super::factor::{Factor, PoseId, VarKey};
use super::graph::FactorGraph;
use super::pose::{compose_jacobians, Pose2};
use crate::error::{Error, Result};

/// Composes a chain of odometry increments with first-order covariance
/// propagation. Returns the composed delta and its covariance.
pub fn compose_odometry_chain(chain: &[(Pose2, Matrix3<f64>)]) -> Option<(Pose2, Matrix3<f64>)> {
    let (first, rest) = chain.split_first()?;
    let (mut delta, mut cov) = *first;
    for (d, q) in rest {
        let (ja, jb) = compose_jacobians(&delta, d);
        cov = ja * cov * ja.transpose() + jb * q * jb.transpose();
        delta = delta.compose(d);
    }
    Some((delta, (cov + cov.transpose()) * 0.5))
}

/// Marginalizes the poses strictly between `start` and `end` (in pose id
/// order), replacing their odometry chain by one composed odometry factor.
pub fn compress_between_goals(
    graph: &FactorGraph,
    start: PoseId,
    end: PoseId,
) -> Result<FactorGraph> {
    if !graph.has_pose(start) {
        return Err(Error::UnknownPose(start));
    }
    if !graph.has_pose(end) {
        return Err(Error::UnknownPose(end));
    }
    if end <= start {
        return Err(Error::IllegalCompress(format!(
            "end pose {end} does not follow start pose {start}"
        )));
    }
    let intermediate: Vec<PoseId> = graph
        .poses()
        .range(start + 1..end)
        .map(|(id, _)| *id)
        .collect();
    if intermediate.is_empty() {
        return Ok(graph.clone());
    }
    for id in &intermediate {
        let mut attached = 0;
        for f in graph
            .factors()
            .iter()
            .filter(|f| f.involves(VarKey::Pose(*id)))
        {
            if !matches!(f, Factor::Odometry { .. }) {
                return Err(Error::IllegalCompress(format!(
                    "pose {id} carries a non-odometry factor"
                )));
            }
            attached += 1;
        }
        if attached != 2 {
            return Err(Error::IllegalCompress(format!(
                "pose {id} is not an interior link of an odometry chain"
            )));
        }
    }

    let mut chain = Vec::with_capacity(intermediate.len() + 1);
    let mut current = start;
    for expected in intermediate.iter().copied().chain(std::iter::once(end)) {
        let step = graph.factors().iter().find_map(|f| match f {
            Factor::Odometry {
                from,
                to,
                delta,
                information,
            } if *from == current && *to == expected => Some((*delta, *information)),
            _ => None,
        });
        let Some((delta, information)) = step else {
            return Err(Error::IllegalCompress(format!(
                "no odometry factor from pose {current} to pose {expected}"
            )));
        };
        let cov = information
            .try_inverse()
            .ok_or_else(|| Error::NonPositiveDefinite(format!("odometry {current}->{expected}")))?;
        chain.push((delta, cov));
        current = expected;
    }
    let (delta, cov) = compose_odometry_chain(&chain).expect("chain is nonempty");
    let information = cov
        .try_inverse()
        .ok_or_else(|| Error::NonPositiveDefinite("composed odometry covariance".into()))?;

    let mut out = graph.clone();
    for id in &intermediate {
        out.remove_pose(*id);
    }
    out.add_factor(Factor::Odometry {
        from: start,
        to: end,
        delta,
        information: (information + information.transpose()) * 0.5,
    })?;
    Ok(out)
}
