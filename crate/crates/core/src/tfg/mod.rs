//! Topological feature graph: landmark vertices joined by obstacle-surface
//! edges, plus the landmark marginal information used for planning.

pub mod collision;
pub mod frontier;
pub mod geometry;
pub mod io;

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, Vector2};

use crate::error::{Error, Result};
use crate::slam::{graph_marginal, FactorGraph, LandmarkId, MarginalInfo, Pose2};
use geometry::{segment_intersects, Point, Segment};

pub use collision::{collision_chance, nearest_obstacle_distance, point_in_collision};
pub use frontier::{detect_frontiers, Frontier};
pub use geometry::{point_segment_distance, segment_segment_distance};

/// Sight lines stop this far short of their target landmark, so surfaces
/// passing through the landmark itself do not occlude it.
pub const SIGHT_EPS: f64 = 1e-6;

/// Unordered obstacle surface between two landmarks; stored with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SurfaceEdge {
    pub a: LandmarkId,
    pub b: LandmarkId,
}

impl SurfaceEdge {
    pub fn new(a: LandmarkId, b: LandmarkId) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Self { a, b }),
            std::cmp::Ordering::Greater => Some(Self { a: b, b: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn touches(&self, id: LandmarkId) -> bool {
        self.a == id || self.b == id
    }

    pub fn other(&self, id: LandmarkId) -> LandmarkId {
        if self.a == id {
            self.b
        } else {
            self.a
        }
    }
}

/// Which sides of a landmark are not covered by a surface edge. The right
/// side is the half-plane containing the landmark's first edge (lowest
/// neighbour id); the left side is the opposite half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontierFlags {
    pub left_open: bool,
    pub right_open: bool,
}

/// One entry of a segmented scan: a landmark seen on a surface component.
/// Entries of the same component appear in their order along the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanEntry {
    pub component: u64,
    pub landmark: LandmarkId,
}

#[derive(Debug, Clone)]
pub struct TopologicalFeatureGraph {
    landmarks: BTreeMap<LandmarkId, Point>,
    edges: BTreeSet<SurfaceEdge>,
    marginal: MarginalInfo,
    covariance: DMatrix<f64>,
    frontier_flags: BTreeMap<LandmarkId, FrontierFlags>,
}

impl TopologicalFeatureGraph {
    pub fn new(
        landmarks: BTreeMap<LandmarkId, Point>,
        edges: impl IntoIterator<Item = SurfaceEdge>,
        marginal: MarginalInfo,
    ) -> Result<Self> {
        let observed: BTreeSet<_> = landmarks.keys().copied().collect();
        let ordered: BTreeSet<_> = marginal.landmark_order.iter().copied().collect();
        if observed != ordered || marginal.landmark_order.len() != observed.len() {
            return Err(Error::InvalidGraph(
                "marginal landmark order must cover exactly the map landmarks".into(),
            ));
        }
        if marginal.lambda.nrows() != 2 * observed.len()
            || marginal.lambda.ncols() != 2 * observed.len()
        {
            return Err(Error::InvalidGraph(
                "marginal matrix has the wrong size".into(),
            ));
        }
        let covariance = marginal.covariance()?;
        let mut tfg = Self {
            landmarks,
            edges: BTreeSet::new(),
            marginal,
            covariance,
            frontier_flags: BTreeMap::new(),
        };
        for e in edges {
            tfg.insert_edge(e)?;
        }
        tfg.recompute_flags();
        Ok(tfg)
    }

    /// Map snapshot of `graph` at its stored (MAP) assignment.
    pub fn from_graph(
        graph: &FactorGraph,
        edges: impl IntoIterator<Item = SurfaceEdge>,
    ) -> Result<Self> {
        let landmarks = graph
            .landmarks()
            .iter()
            .map(|(id, l)| (*id, l.position))
            .collect();
        Self::new(landmarks, edges, graph_marginal(graph)?)
    }

    /// Refreshes landmark positions and marginal from a re-estimated graph.
    /// Edges refer to ids and are carried over unchanged.
    pub fn rebuild(&self, graph: &FactorGraph) -> Result<Self> {
        Self::from_graph(graph, self.edges.iter().copied())
    }

    pub fn landmarks(&self) -> &BTreeMap<LandmarkId, Point> {
        &self.landmarks
    }

    pub fn position(&self, id: LandmarkId) -> Option<&Point> {
        self.landmarks.get(&id)
    }

    pub fn edges(&self) -> &BTreeSet<SurfaceEdge> {
        &self.edges
    }

    pub fn marginal(&self) -> &MarginalInfo {
        &self.marginal
    }

    /// Dense landmark marginal covariance, laid out like the marginal.
    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn frontier_flags(&self) -> &BTreeMap<LandmarkId, FrontierFlags> {
        &self.frontier_flags
    }

    pub fn has_edge(&self, a: LandmarkId, b: LandmarkId) -> bool {
        SurfaceEdge::new(a, b).is_some_and(|e| self.edges.contains(&e))
    }

    fn insert_edge(&mut self, e: SurfaceEdge) -> Result<bool> {
        for id in [e.a, e.b] {
            if !self.landmarks.contains_key(&id) {
                return Err(Error::UnknownLandmark(id));
            }
        }
        Ok(self.edges.insert(e))
    }

    /// Joins landmarks that are adjacent within the same surface component.
    /// Returns the number of edges that were not present before.
    pub fn learn_edges(&mut self, scan: &[ScanEntry]) -> Result<usize> {
        for s in scan {
            if !self.landmarks.contains_key(&s.landmark) {
                return Err(Error::UnknownLandmark(s.landmark));
            }
        }
        let mut last_in_component: BTreeMap<u64, LandmarkId> = BTreeMap::new();
        let mut added = 0;
        for s in scan {
            if let Some(prev) = last_in_component.insert(s.component, s.landmark) {
                if let Some(e) = SurfaceEdge::new(prev, s.landmark) {
                    if self.insert_edge(e)? {
                        added += 1;
                    }
                }
            }
        }
        self.recompute_flags();
        Ok(added)
    }

    /// Neighbours of `id` along surface edges, in ascending id order.
    pub fn neighbours(&self, id: LandmarkId) -> Vec<LandmarkId> {
        let mut out: Vec<_> = self
            .edges
            .iter()
            .filter(|e| e.touches(id))
            .map(|e| e.other(id))
            .collect();
        out.sort_unstable();
        out
    }

    fn recompute_flags(&mut self) {
        let mut degree: BTreeMap<LandmarkId, usize> = BTreeMap::new();
        for e in &self.edges {
            *degree.entry(e.a).or_default() += 1;
            *degree.entry(e.b).or_default() += 1;
        }
        self.frontier_flags = self
            .landmarks
            .keys()
            .map(|id| {
                let flags = match degree.get(id).copied().unwrap_or(0) {
                    0 => FrontierFlags {
                        left_open: true,
                        right_open: true,
                    },
                    1 => FrontierFlags {
                        left_open: true,
                        right_open: false,
                    },
                    _ => FrontierFlags {
                        left_open: false,
                        right_open: false,
                    },
                };
                (*id, flags)
            })
            .collect();
    }

    /// Whether the side of landmark `id` facing `direction` is open.
    pub fn side_open(&self, id: LandmarkId, direction: &Vector2<f64>) -> bool {
        let Some(flags) = self.frontier_flags.get(&id) else {
            return false;
        };
        if flags.left_open == flags.right_open {
            return flags.left_open;
        }
        let neighbours = self.neighbours(id);
        let tangent = self.landmarks[&neighbours[0]] - self.landmarks[&id];
        if tangent.dot(direction) > 1e-9 * tangent.norm() * direction.norm() {
            flags.right_open
        } else {
            flags.left_open
        }
    }

    pub fn edge_segment(&self, e: &SurfaceEdge) -> Segment {
        Segment::new(self.landmarks[&e.a], self.landmarks[&e.b])
    }

    /// Edge segments in edge-index order.
    pub fn edge_segments(&self) -> Vec<Segment> {
        self.edges.iter().map(|e| self.edge_segment(e)).collect()
    }

    /// True if the sight line from `from` to landmark `id` crosses an edge
    /// not incident to `id`.
    pub fn is_occluded(&self, from: &Point, id: LandmarkId) -> bool {
        let Some(target) = self.landmarks.get(&id) else {
            return true;
        };
        let sight = Segment::new(*from, *target).shortened_end(SIGHT_EPS);
        self.edges
            .iter()
            .filter(|e| !e.touches(id))
            .any(|e| segment_intersects(&sight, &self.edge_segment(e)))
    }

    /// True if the straight line between two points crosses no edge.
    pub fn line_of_sight(&self, a: &Point, b: &Point) -> bool {
        let s = Segment::new(*a, *b);
        !self
            .edges
            .iter()
            .any(|e| segment_intersects(&s, &self.edge_segment(e)))
    }

    /// Landmarks within `range` and `fov` of `pose` and not occluded, with
    /// bearing relative to the heading, sorted by bearing then id.
    pub fn visible_landmarks(&self, pose: &Pose2, range: f64, fov: f64) -> Vec<(LandmarkId, f64)> {
        let origin = pose.translation();
        let omni = fov >= std::f64::consts::TAU - 1e-12;
        let mut out: Vec<(LandmarkId, f64)> = self
            .landmarks
            .iter()
            .filter_map(|(id, p)| {
                let d = p - origin;
                if d.norm() > range {
                    return None;
                }
                let bearing = crate::slam::wrap_angle(d.y.atan2(d.x) - pose.theta);
                if !omni && bearing.abs() > 0.5 * fov {
                    return None;
                }
                if self.is_occluded(&origin, *id) {
                    return None;
                }
                Some((*id, bearing))
            })
            .collect();
        out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        out
    }

    /// Minimum distance from a segment to any edge.
    pub fn segment_clearance(&self, s: &Segment) -> f64 {
        self.edges
            .iter()
            .map(|e| segment_segment_distance(s, &self.edge_segment(e)))
            .fold(f64::INFINITY, f64::min)
    }
}
