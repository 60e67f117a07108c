use std::fmt::Write as _;

use nalgebra::{Matrix2, Matrix3};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::slam::{compose_jacobians, Pose2};
use crate::tfg::collision::collision_chance_reaches;
use crate::tfg::geometry::{
    point_segment_distance, segment_intersects, segment_segment_distance, Point, Segment,
};
use crate::tfg::TopologicalFeatureGraph;

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Current,
    PreviousGoal,
    Sample,
}

impl NodeKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeKind::Current => "current",
            NodeKind::PreviousGoal => "previous_goal",
            NodeKind::Sample => "sample",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapNode {
    pub id: NodeId,
    pub pose: Pose2,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapEdge {
    pub a: NodeId,
    pub b: NodeId,
    pub length: f64,
    pub penalty: f64,
    pub cost: f64,
}

/// Pose uncertainty along a path, propagated to first order from the pose
/// marginal `start` at `origin` by composing straight drive steps, each
/// adding odometry noise `per_step`. An edge is assumed to be reached by a
/// straight approach from `origin` to its nearer end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceModel {
    pub origin: Point,
    pub start: Matrix3<f64>,
    pub per_step: Matrix3<f64>,
}

impl CovarianceModel {
    pub fn zero() -> Self {
        Self {
            origin: Point::zeros(),
            start: Matrix3::zeros(),
            per_step: Matrix3::zeros(),
        }
    }

    fn drive(
        &self,
        mut cov: Matrix3<f64>,
        heading: f64,
        length: f64,
        steps: usize,
    ) -> Matrix3<f64> {
        if steps == 0 {
            return cov;
        }
        let x = Pose2::new(0.0, 0.0, heading);
        let (ja, jb) = compose_jacobians(&x, &Pose2::new(length / steps as f64, 0.0, 0.0));
        let noise = jb * self.per_step * jb.transpose();
        for _ in 0..steps {
            cov = ja * cov * ja.transpose() + noise;
        }
        cov
    }

    /// Position covariance at each point of `discretize(a, b, step)`.
    pub fn along(&self, a: &Point, b: &Point, step: f64) -> Vec<Matrix2<f64>> {
        let approach = a - self.origin;
        let d0 = approach.norm();
        let mut cov = if d0 > 0.0 {
            let n0 = (d0 / step).ceil() as usize;
            self.drive(self.start, approach.y.atan2(approach.x), d0, n0)
        } else {
            self.start
        };
        let d = b - a;
        let n = (d.norm() / step).ceil().max(1.0) as usize;
        let heading = d.y.atan2(d.x);
        let mut out = Vec::with_capacity(n + 1);
        out.push(cov.fixed_view::<2, 2>(0, 0).into_owned());
        for _ in 0..n {
            cov = self.drive(cov, heading, d.norm(), n);
            out.push(cov.fixed_view::<2, 2>(0, 0).into_owned());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadmapConfig {
    pub connect_radius: f64,
    /// Chance-constraint bound δ on each discretization point.
    pub delta: f64,
    pub robot_radius: f64,
    /// Collision penalty weight `w_c`.
    pub penalty_weight: f64,
    /// Clearance below which the penalty applies; defaults to 3 × radius.
    pub safe_distance: Option<f64>,
    pub step: f64,
    pub mc_samples: usize,
    pub covariance: CovarianceModel,
    pub seed: u64,
}

impl RoadmapConfig {
    pub fn new(connect_radius: f64, delta: f64, robot_radius: f64, seed: u64) -> Self {
        Self {
            connect_radius,
            delta,
            robot_radius,
            penalty_weight: 1.0,
            safe_distance: None,
            step: 0.25,
            mc_samples: 200,
            covariance: CovarianceModel::zero(),
            seed,
        }
    }

    pub fn d_safe(&self) -> f64 {
        self.safe_distance.unwrap_or(3.0 * self.robot_radius)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Roadmap {
    pub nodes: Vec<RoadmapNode>,
    pub edges: Vec<RoadmapEdge>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl Roadmap {
    /// Assembles a roadmap from explicit nodes and edges. Node ids must equal
    /// their positions.
    pub fn from_parts(nodes: Vec<RoadmapNode>, edges: Vec<RoadmapEdge>) -> Result<Self> {
        if nodes.iter().enumerate().any(|(i, n)| n.id != i) {
            return Err(Error::InvalidGraph("roadmap node ids must be 0..n".into()));
        }
        if nodes.iter().filter(|n| n.kind == NodeKind::Current).count() != 1 {
            return Err(Error::InvalidGraph(
                "roadmap needs exactly one current node".into(),
            ));
        }
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (k, e) in edges.iter().enumerate() {
            if e.a >= nodes.len() || e.b >= nodes.len() {
                return Err(Error::InvalidGraph(format!(
                    "edge {}-{} out of range",
                    e.a, e.b
                )));
            }
            adjacency[e.a].push((e.b, k));
            adjacency[e.b].push((e.a, k));
        }
        for list in &mut adjacency {
            list.sort();
        }
        Ok(Self {
            nodes,
            edges,
            adjacency,
        })
    }

    pub fn current(&self) -> NodeId {
        self.nodes
            .iter()
            .position(|n| n.kind == NodeKind::Current)
            .expect("roadmap has a current node")
    }

    pub fn neighbours(&self, id: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[id]
    }
}

/// Discretization points of a segment at spacing at most `step`, both ends
/// included.
pub fn discretize(a: &Point, b: &Point, step: f64) -> Vec<Point> {
    let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
    (0..=n)
        .map(|i| a + (b - a) * (i as f64 / n as f64))
        .collect()
}

fn point_seed(seed: u64, a: NodeId, b: NodeId, k: usize) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [a as u64, b as u64, k as u64] {
        h = (h ^ v).wrapping_mul(0x1000_0000_01B3).rotate_left(29);
    }
    h
}

/// Length and penalty of a feasible segment, or `None` if it is blocked or
/// violates the chance constraint somewhere.
pub fn edge_feasibility(
    tfg: &TopologicalFeatureGraph,
    a: (NodeId, &Point),
    b: (NodeId, &Point),
    cfg: &RoadmapConfig,
) -> Option<(f64, f64)> {
    feasibility_among(&Obstacles::new(tfg), a, b, cfg)
}

/// Surface edges followed by mapped landmarks as zero-length segments.
/// Landmarks sit on surfaces whose edges may not be known yet.
struct Obstacles {
    all: Vec<Segment>,
    edges: usize,
}

impl Obstacles {
    fn new(tfg: &TopologicalFeatureGraph) -> Self {
        let mut all = tfg.edge_segments();
        let edges = all.len();
        all.extend(tfg.landmarks().values().map(|p| Segment::new(*p, *p)));
        Self { all, edges }
    }

    fn edges(&self) -> &[Segment] {
        &self.all[..self.edges]
    }

    fn clearance(&self, p: &Point) -> f64 {
        self.all
            .iter()
            .map(|s| point_segment_distance(p, s))
            .fold(f64::INFINITY, f64::min)
    }
}

fn feasibility_among(
    obstacles: &Obstacles,
    a: (NodeId, &Point),
    b: (NodeId, &Point),
    cfg: &RoadmapConfig,
) -> Option<(f64, f64)> {
    let seg = Segment::new(*a.1, *b.1);
    if obstacles
        .edges()
        .iter()
        .any(|s| segment_intersects(&seg, s))
    {
        return None;
    }
    let seg_clearance = obstacles
        .edges()
        .iter()
        .map(|s| segment_segment_distance(&seg, s))
        .fold(f64::INFINITY, f64::min);
    if seg_clearance < cfg.robot_radius {
        return None;
    }
    let d_safe = cfg.d_safe();
    let mut penalty = 0.0;
    // Traverse from the end nearer the current pose.
    let (from, to) = if (a.1 - cfg.covariance.origin).norm() <= (b.1 - cfg.covariance.origin).norm()
    {
        (a.1, b.1)
    } else {
        (b.1, a.1)
    };
    let covs = cfg.covariance.along(from, to, cfg.step);
    for (k, (p, cov)) in discretize(from, to, cfg.step).iter().zip(&covs).enumerate() {
        let dist = obstacles.clearance(p);
        if dist < cfg.robot_radius {
            return None;
        }
        penalty += (d_safe - dist).max(0.0).powi(2);
        // A colliding sample lies at least `dist - r` from the mean, and
        // Pr(|x - mean| ≥ ρ) ≤ exp(-ρ² / 2σ²). Points an order of magnitude
        // inside the bound need no sampling.
        let var_max = cov.symmetric_eigenvalues().max().max(0.0);
        let rho = dist - cfg.robot_radius;
        if obstacles.all.is_empty()
            || var_max == 0.0
            || (-rho * rho / (2.0 * var_max)).exp() <= 0.1 * cfg.delta
        {
            continue;
        }
        if collision_chance_reaches(
            p,
            cov,
            &obstacles.all,
            cfg.robot_radius,
            cfg.mc_samples,
            point_seed(cfg.seed, a.0, b.0, k),
            cfg.delta,
        ) {
            return None;
        }
    }
    Some((seg.length(), penalty))
}

/// Connects node pairs within `connect_radius` by feasible straight
/// segments.
pub fn build_roadmap(
    nodes: Vec<RoadmapNode>,
    tfg: &TopologicalFeatureGraph,
    cfg: &RoadmapConfig,
) -> Result<Roadmap> {
    assert!(!nodes.is_empty(), "roadmap needs at least one node");
    let pairs: Vec<(NodeId, NodeId)> = (0..nodes.len())
        .flat_map(|i| (i + 1..nodes.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let d = (nodes[i].pose.translation() - nodes[j].pose.translation()).norm();
            d <= cfg.connect_radius
        })
        .collect();
    let obstacles = Obstacles::new(tfg);
    let edges: Vec<RoadmapEdge> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let pa = nodes[i].pose.translation();
            let pb = nodes[j].pose.translation();
            feasibility_among(&obstacles, (i, &pa), (j, &pb), cfg).map(|(length, penalty)| {
                RoadmapEdge {
                    a: i,
                    b: j,
                    length,
                    penalty,
                    cost: length + cfg.penalty_weight * penalty,
                }
            })
        })
        .collect();
    Roadmap::from_parts(nodes, edges)
}

/// Tabular roadmap dump: one `NODE id kind x y theta` line per node, then
/// one `EDGE a b length penalty cost` line per edge.
pub fn write_roadmap(roadmap: &Roadmap) -> String {
    let mut out = String::from("# NODE id kind x y theta\n# EDGE a b length penalty cost\n");
    for n in &roadmap.nodes {
        let _ = writeln!(
            out,
            "NODE {} {} {} {} {}",
            n.id,
            n.kind.as_str(),
            n.pose.x,
            n.pose.y,
            n.pose.theta
        );
    }
    for e in &roadmap.edges {
        let _ = writeln!(
            out,
            "EDGE {} {} {} {} {}",
            e.a, e.b, e.length, e.penalty, e.cost
        );
    }
    out
}
