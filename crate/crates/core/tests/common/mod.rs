#![allow(dead_code)]

use nalgebra::{Matrix2, Matrix3, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tfg_slam::slam::{map_solve, Factor, FactorGraph, Pose2};
use tfg_slam::SensorSpec;

pub struct Scene {
    pub graph: FactorGraph,
    pub goal: Pose2,
    pub sensing: SensorSpec,
}

/// Random small SLAM scene: a short pose chain observing scattered
/// landmarks, solved to its MAP estimate, plus a random goal pose.
pub fn random_scene(seed: u64, max_landmarks: usize, max_poses: usize) -> Scene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_l = rng.random_range(3..=max_landmarks);
    let n_p = rng.random_range(1..=max_poses);
    let sigma_r: f64 = rng.random_range(0.05..0.3);
    let r_info = Matrix2::identity() / (sigma_r * sigma_r);
    let q_info = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        1.0 / 0.01,
        1.0 / 0.01,
        1.0 / 0.0025,
    ));
    let sensing = SensorSpec::new(8.0, std::f64::consts::TAU, r_info);

    let mut truth = vec![Pose2::new(0.0, 0.0, rng.random_range(-3.0..3.0))];
    for _ in 1..n_p {
        let d = Pose2::new(
            rng.random_range(0.3..1.2),
            rng.random_range(-0.3..0.3),
            rng.random_range(-0.5..0.5),
        );
        let last = *truth.last().unwrap();
        truth.push(last.compose(&d));
    }
    let landmarks: Vec<Vector2<f64>> = (0..n_l)
        .map(|_| Vector2::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)))
        .collect();

    let mut g = FactorGraph::new();
    for (i, x) in truth.iter().enumerate() {
        g.add_pose(i as u64, *x).unwrap();
    }
    for (i, l) in landmarks.iter().enumerate() {
        g.add_landmark(i as u64, *l).unwrap();
        g.add_factor(Factor::LandmarkPrior {
            landmark: i as u64,
            mean: *l + Vector2::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
            information: Matrix2::identity() / 100.0,
        })
        .unwrap();
    }
    g.add_factor(Factor::PosePrior {
        pose: 0,
        mean: truth[0],
        information: Matrix3::identity() * 1e4,
    })
    .unwrap();
    for i in 1..n_p {
        let d = truth[i - 1].between(&truth[i]);
        let noisy = Pose2::new(
            d.x + rng.random_range(-0.05..0.05),
            d.y + rng.random_range(-0.05..0.05),
            d.theta + rng.random_range(-0.02..0.02),
        );
        g.add_factor(Factor::Odometry {
            from: i as u64 - 1,
            to: i as u64,
            delta: noisy,
            information: q_info,
        })
        .unwrap();
    }
    for (i, x) in truth.iter().enumerate() {
        for (j, l) in landmarks.iter().enumerate() {
            if rng.random_bool(0.7) || i == 0 {
                let z = x.point_in_frame(l)
                    + Vector2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                        * sigma_r;
                g.add_factor(Factor::Measurement {
                    pose: i as u64,
                    landmark: j as u64,
                    relative: z,
                    information: r_info,
                })
                .unwrap();
            }
        }
    }
    let solved = map_solve(&g, None).unwrap();
    g.set_assignment(&solved.assignment);
    let goal = Pose2::new(
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
        rng.random_range(-3.0..3.0),
    );
    Scene {
        graph: g,
        goal,
        sensing,
    }
}

/// Map with the given landmarks and surface edges and an isotropic
/// landmark information of `info` per coordinate.
pub fn tfg_with_walls(
    points: &[(u64, f64, f64)],
    edges: &[(u64, u64)],
    info: f64,
) -> tfg_slam::tfg::TopologicalFeatureGraph {
    use std::collections::BTreeMap;
    use tfg_slam::slam::MarginalInfo;
    use tfg_slam::tfg::{SurfaceEdge, TopologicalFeatureGraph};
    let landmarks: BTreeMap<u64, Vector2<f64>> = points
        .iter()
        .map(|(id, x, y)| (*id, Vector2::new(*x, *y)))
        .collect();
    let n = landmarks.len();
    let marginal = MarginalInfo {
        landmark_order: landmarks.keys().copied().collect(),
        lambda: nalgebra::DMatrix::identity(2 * n, 2 * n) * info,
    };
    TopologicalFeatureGraph::new(
        landmarks,
        edges.iter().map(|(a, b)| SurfaceEdge::new(*a, *b).unwrap()),
        marginal,
    )
    .unwrap()
}

/// Landmark `(id, x, y)`.
pub type Point = (u64, f64, f64);

/// Landmarks every `spacing` metres along the polyline `corners`, chained
/// by surface edges. Ids start at `first_id`.
pub fn wall_chain(
    corners: &[(f64, f64)],
    spacing: f64,
    first_id: u64,
) -> (Vec<Point>, Vec<(u64, u64)>) {
    let mut pts: Vec<(u64, f64, f64)> = Vec::new();
    let mut id = first_id;
    for w in corners.windows(2) {
        let (a, b) = (Vector2::new(w[0].0, w[0].1), Vector2::new(w[1].0, w[1].1));
        let n = ((b - a).norm() / spacing).round().max(1.0) as usize;
        let start = if pts.is_empty() { 0 } else { 1 };
        for i in start..=n {
            let p = a + (b - a) * (i as f64 / n as f64);
            pts.push((id, p.x, p.y));
            id += 1;
        }
    }
    let edges = pts.windows(2).map(|w| (w[0].0, w[1].0)).collect();
    (pts, edges)
}
