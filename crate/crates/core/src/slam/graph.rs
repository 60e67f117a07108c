use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use nalgebra::{DMatrix, DVector, Vector2};

use super::factor::{
    measurement_jacobians, measurement_residual, odometry_jacobians, odometry_residual, to_dmatrix,
    to_dvector, Factor, LandmarkId, Linearized, PoseId, VarKey,
};
use super::pose::{pose_residual, Pose2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkEstimate {
    pub id: LandmarkId,
    pub position: Vector2<f64>,
}

/// Values for every variable of a graph.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    pub poses: BTreeMap<PoseId, Pose2>,
    pub landmarks: BTreeMap<LandmarkId, Vector2<f64>>,
}

impl Assignment {
    pub fn pose(&self, id: PoseId) -> Result<&Pose2> {
        self.poses.get(&id).ok_or(Error::UnknownPose(id))
    }

    pub fn landmark(&self, id: LandmarkId) -> Result<&Vector2<f64>> {
        self.landmarks.get(&id).ok_or(Error::UnknownLandmark(id))
    }

    /// Applies a tangent-space increment laid out by `ordering`.
    pub fn retract(&self, ordering: &VariableOrdering, delta: &DVector<f64>) -> Assignment {
        let mut out = self.clone();
        for (id, p) in out.landmarks.iter_mut() {
            let o = ordering.offset(VarKey::Landmark(*id));
            p.x += delta[o];
            p.y += delta[o + 1];
        }
        for (id, x) in out.poses.iter_mut() {
            let o = ordering.offset(VarKey::Pose(*id));
            *x = Pose2::new(x.x + delta[o], x.y + delta[o + 1], x.theta + delta[o + 2]);
        }
        out
    }
}

/// Column layout of the stacked state: landmarks first (2 each, ascending
/// id), then poses (3 each, ascending id).
#[derive(Debug, Clone, PartialEq)]
pub struct VariableOrdering {
    pub landmarks: Vec<LandmarkId>,
    pub poses: Vec<PoseId>,
    offsets: HashMap<VarKey, usize>,
}

impl VariableOrdering {
    pub fn new(landmarks: Vec<LandmarkId>, poses: Vec<PoseId>) -> Self {
        let mut offsets = HashMap::new();
        let mut o = 0;
        for id in &landmarks {
            offsets.insert(VarKey::Landmark(*id), o);
            o += 2;
        }
        for id in &poses {
            offsets.insert(VarKey::Pose(*id), o);
            o += 3;
        }
        Self {
            landmarks,
            poses,
            offsets,
        }
    }

    pub fn landmark_dim(&self) -> usize {
        2 * self.landmarks.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.landmarks.len() + 3 * self.poses.len()
    }

    pub fn offset(&self, key: VarKey) -> usize {
        self.offsets[&key]
    }

    pub fn get(&self, key: VarKey) -> Option<usize> {
        self.offsets.get(&key).copied()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FactorGraph {
    poses: BTreeMap<PoseId, Pose2>,
    landmarks: BTreeMap<LandmarkId, LandmarkEstimate>,
    factors: Vec<Factor>,
}

impl FactorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn poses(&self) -> &BTreeMap<PoseId, Pose2> {
        &self.poses
    }

    pub fn landmarks(&self) -> &BTreeMap<LandmarkId, LandmarkEstimate> {
        &self.landmarks
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn has_pose(&self, id: PoseId) -> bool {
        self.poses.contains_key(&id)
    }

    pub fn has_landmark(&self, id: LandmarkId) -> bool {
        self.landmarks.contains_key(&id)
    }

    pub fn add_pose(&mut self, id: PoseId, value: Pose2) -> Result<()> {
        if self.poses.insert(id, value).is_some() {
            return Err(Error::InvalidGraph(format!("duplicate pose {id}")));
        }
        Ok(())
    }

    pub fn add_landmark(&mut self, id: LandmarkId, position: Vector2<f64>) -> Result<()> {
        if self.landmarks.contains_key(&id) {
            return Err(Error::InvalidGraph(format!("duplicate landmark {id}")));
        }
        self.landmarks.insert(id, LandmarkEstimate { id, position });
        Ok(())
    }

    /// Adds a factor after checking its variables exist and its information
    /// matrix is symmetric positive definite.
    pub fn add_factor(&mut self, factor: Factor) -> Result<()> {
        for key in factor.keys() {
            match key {
                VarKey::Pose(id) if !self.has_pose(id) => return Err(Error::UnknownPose(id)),
                VarKey::Landmark(id) if !self.has_landmark(id) => {
                    return Err(Error::UnknownLandmark(id))
                }
                _ => {}
            }
        }
        let info = factor.information();
        let asym = (&info - info.transpose()).amax();
        if asym > 1e-9 * info.amax().max(1.0) || info.clone().cholesky().is_none() {
            return Err(Error::NonPositiveDefinite(format!(
                "factor information over {:?}",
                factor.keys()
            )));
        }
        self.factors.push(factor);
        Ok(())
    }

    /// Removes every factor for which `pred` returns true.
    pub fn retain_factors(&mut self, mut pred: impl FnMut(&Factor) -> bool) {
        self.factors.retain(|f| pred(f));
    }

    /// Removes a pose and every factor attached to it.
    pub fn remove_pose(&mut self, id: PoseId) {
        self.poses.remove(&id);
        self.factors.retain(|f| !f.involves(VarKey::Pose(id)));
    }

    pub fn assignment(&self) -> Assignment {
        Assignment {
            poses: self.poses.clone(),
            landmarks: self
                .landmarks
                .iter()
                .map(|(k, v)| (*k, v.position))
                .collect(),
        }
    }

    /// Overwrites stored values with those present in `a`.
    pub fn set_assignment(&mut self, a: &Assignment) {
        for (id, p) in &a.poses {
            if let Some(v) = self.poses.get_mut(id) {
                *v = *p;
            }
        }
        for (id, p) in &a.landmarks {
            if let Some(v) = self.landmarks.get_mut(id) {
                v.position = *p;
            }
        }
    }

    pub fn ordering(&self) -> VariableOrdering {
        VariableOrdering::new(
            self.landmarks.keys().copied().collect(),
            self.poses.keys().copied().collect(),
        )
    }

    pub fn pose_prior_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|f| matches!(f, Factor::PosePrior { .. }))
            .count()
    }

    /// Checks that a pose prior exists and every variable is reachable from
    /// some prior through factors.
    pub fn check_connected(&self) -> Result<()> {
        if self.pose_prior_count() == 0 {
            return Err(Error::NotConnected("graph has no pose prior".into()));
        }
        let mut adjacency: HashMap<VarKey, Vec<VarKey>> = HashMap::new();
        let mut seen: BTreeSet<VarKey> = BTreeSet::new();
        let mut queue = VecDeque::new();
        for f in &self.factors {
            let keys = f.keys();
            if f.is_prior() {
                for k in &keys {
                    if seen.insert(*k) {
                        queue.push_back(*k);
                    }
                }
            }
            for a in &keys {
                for b in &keys {
                    if a != b {
                        adjacency.entry(*a).or_default().push(*b);
                    }
                }
            }
        }
        while let Some(k) = queue.pop_front() {
            if let Some(next) = adjacency.get(&k) {
                for n in next {
                    if seen.insert(*n) {
                        queue.push_back(*n);
                    }
                }
            }
        }
        let all = self
            .landmarks
            .keys()
            .map(|id| VarKey::Landmark(*id))
            .chain(self.poses.keys().map(|id| VarKey::Pose(*id)));
        for k in all {
            if !seen.contains(&k) {
                return Err(Error::NotConnected(k.to_string()));
            }
        }
        Ok(())
    }

    /// Initial values from priors, dead-reckoned odometry and back-projected
    /// first measurements.
    pub fn initial_guess(&self) -> Result<Assignment> {
        self.check_connected()?;
        let mut a = Assignment::default();
        for f in &self.factors {
            match f {
                Factor::PosePrior { pose, mean, .. } => {
                    a.poses.entry(*pose).or_insert(*mean);
                }
                Factor::LandmarkPrior { landmark, mean, .. } => {
                    a.landmarks.entry(*landmark).or_insert(*mean);
                }
                _ => {}
            }
        }
        let total = self.poses.len() + self.landmarks.len();
        loop {
            let before = a.poses.len() + a.landmarks.len();
            for f in &self.factors {
                match f {
                    Factor::Odometry {
                        from, to, delta, ..
                    } => match (a.poses.get(from).copied(), a.poses.get(to).copied()) {
                        (Some(p), None) => {
                            a.poses.insert(*to, p.compose(delta));
                        }
                        (None, Some(q)) => {
                            a.poses.insert(*from, q.compose(&delta.inverse()));
                        }
                        _ => {}
                    },
                    Factor::Measurement {
                        pose,
                        landmark,
                        relative,
                        ..
                    } => {
                        if let (Some(p), false) = (
                            a.poses.get(pose).copied(),
                            a.landmarks.contains_key(landmark),
                        ) {
                            a.landmarks.insert(*landmark, p.point_to_world(relative));
                        }
                    }
                    _ => {}
                }
            }
            let after = a.poses.len() + a.landmarks.len();
            if after == total {
                break;
            }
            if after == before {
                // Poses reachable only through landmark measurements: place
                // them so the first such measurement is satisfied at zero heading.
                let mut progressed = false;
                for f in &self.factors {
                    if let Factor::Measurement {
                        pose,
                        landmark,
                        relative,
                        ..
                    } = f
                    {
                        if let (false, Some(l)) = (
                            a.poses.contains_key(pose),
                            a.landmarks.get(landmark).copied(),
                        ) {
                            let t = l - relative;
                            a.poses.insert(*pose, Pose2::new(t.x, t.y, 0.0));
                            progressed = true;
                            break;
                        }
                    }
                }
                if !progressed {
                    let missing = self
                        .poses
                        .keys()
                        .find(|id| !a.poses.contains_key(id))
                        .map(|id| VarKey::Pose(*id))
                        .or_else(|| {
                            self.landmarks
                                .keys()
                                .find(|id| !a.landmarks.contains_key(id))
                                .map(|id| VarKey::Landmark(*id))
                        })
                        .expect("some variable uninitialized");
                    return Err(Error::NotConnected(missing.to_string()));
                }
            }
        }
        Ok(a)
    }

    pub fn linearize(&self, factor: &Factor, a: &Assignment) -> Result<Linearized> {
        let lin = match factor {
            Factor::PosePrior {
                pose,
                mean,
                information,
            } => {
                let x = a.pose(*pose)?;
                Linearized {
                    keys: factor.keys(),
                    jacobians: vec![DMatrix::identity(3, 3)],
                    residual: to_dvector(&pose_residual(x, mean)),
                    information: to_dmatrix(information),
                }
            }
            Factor::LandmarkPrior {
                landmark,
                mean,
                information,
            } => {
                let l = a.landmark(*landmark)?;
                Linearized {
                    keys: factor.keys(),
                    jacobians: vec![DMatrix::identity(2, 2)],
                    residual: to_dvector(&(l - mean)),
                    information: to_dmatrix(information),
                }
            }
            Factor::Odometry {
                from,
                to,
                delta,
                information,
            } => {
                let xa = a.pose(*from)?;
                let xb = a.pose(*to)?;
                let (ja, jb) = odometry_jacobians(xa, xb);
                Linearized {
                    keys: factor.keys(),
                    jacobians: vec![to_dmatrix(&ja), to_dmatrix(&jb)],
                    residual: to_dvector(&odometry_residual(xa, xb, delta)),
                    information: to_dmatrix(information),
                }
            }
            Factor::Measurement {
                pose,
                landmark,
                relative,
                information,
            } => {
                let x = a.pose(*pose)?;
                let l = a.landmark(*landmark)?;
                let (jx, jl) = measurement_jacobians(x, l);
                Linearized {
                    keys: factor.keys(),
                    jacobians: vec![to_dmatrix(&jx), to_dmatrix(&jl)],
                    residual: to_dvector(&measurement_residual(x, l, relative)),
                    information: to_dmatrix(information),
                }
            }
        };
        Ok(lin)
    }

    /// Negative log posterior up to a constant: `½ Σ rᵀ Ω r`.
    pub fn cost(&self, a: &Assignment) -> Result<f64> {
        let mut total = 0.0;
        for f in &self.factors {
            let lin = self.linearize(f, a)?;
            total += 0.5 * (lin.residual.transpose() * &lin.information * &lin.residual)[(0, 0)];
        }
        Ok(total)
    }
}
