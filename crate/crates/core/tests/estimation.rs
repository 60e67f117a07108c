mod common;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, Vector2, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use tfg_slam::slam::{
    assemble_information, compose_odometry_chain, compress_between_goals, graph_marginal,
    landmark_entropy, map_solve, marginal_landmark_info, pose_covariance, read_graph, wrap_angle,
    write_graph, Factor, FactorGraph, Pose2,
};
use tfg_slam::tfg::geometry::{
    point_segment_distance, segment_intersects, segment_segment_distance, Segment,
};

#[test]
fn jacobians_match_central_differences() {
    let h = 1e-6;
    let mut checked = 0;
    for seed in 0..50 {
        let scene = common::random_scene(seed, 6, 4);
        let g = &scene.graph;
        let a = g.assignment();
        let ordering = g.ordering();
        for f in g.factors() {
            let lin = g.linearize(f, &a).unwrap();
            for (key, jac) in lin.keys.iter().zip(&lin.jacobians) {
                let offset = ordering.offset(*key);
                for col in 0..key.dim() {
                    let mut d = DVector::zeros(ordering.dim());
                    d[offset + col] = h;
                    let plus = g.linearize(f, &a.retract(&ordering, &d)).unwrap().residual;
                    let minus = g
                        .linearize(f, &a.retract(&ordering, &(-&d)))
                        .unwrap()
                        .residual;
                    let mut fd = (plus - minus) / (2.0 * h);
                    if fd.len() == 3 {
                        // Heading residuals are wrapped.
                        fd[2] = wrap_angle(fd[2] * 2.0 * h) / (2.0 * h);
                    }
                    let err = (fd - jac.column(col)).amax();
                    assert!(err < 1e-5, "seed {seed} factor {f:?} column {col}: {err}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn schur_marginal_matches_dense_inverse() {
    let mut tested = 0;
    for seed in 0..100 {
        let scene = common::random_scene(1000 + seed, 7, 5);
        let g = &scene.graph;
        if g.landmarks().len() + g.poses().len() > 12 {
            continue;
        }
        let info = assemble_information(g, &g.assignment()).unwrap();
        let marginal = marginal_landmark_info(&info).unwrap();
        let full_cov = info.matrix.clone().try_inverse().unwrap();
        let m = info.ordering.landmark_dim();
        let oracle = full_cov
            .view((0, 0), (m, m))
            .into_owned()
            .try_inverse()
            .unwrap();
        let scale = oracle.amax();
        let err = (&marginal.lambda - &oracle).amax() / scale;
        assert!(err < 1e-8, "seed {seed}: relative error {err}");
        tested += 1;
    }
    assert!(tested >= 50, "only {tested} graphs within the size limit");
}

#[test]
fn measurements_never_raise_landmark_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let scene = common::random_scene(2000 + trial, 8, 4);
        let mut g = scene.graph;
        let before = landmark_entropy(&graph_marginal(&g).unwrap()).unwrap();
        let poses: Vec<u64> = g.poses().keys().copied().collect();
        let landmarks: Vec<u64> = g.landmarks().keys().copied().collect();
        let pose = poses[rng.random_range(0..poses.len())];
        let landmark = landmarks[rng.random_range(0..landmarks.len())];
        let x = g.poses()[&pose];
        let l = g.landmarks()[&landmark].position;
        let sigma: f64 = rng.random_range(0.01..1.0);
        g.add_factor(Factor::Measurement {
            pose,
            landmark,
            relative: x.point_in_frame(&l),
            information: Matrix2::identity() / (sigma * sigma),
        })
        .unwrap();
        let after = landmark_entropy(&graph_marginal(&g).unwrap()).unwrap();
        assert!(after <= before + 1e-9, "trial {trial}: {before} -> {after}");
    }
}

/// Pose chain with exact odometry and exact landmark measurements; the
/// initial values are perturbed.
fn noiseless_graph(seed: u64) -> (FactorGraph, Vec<Pose2>, Vec<Vector2<f64>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth = vec![Pose2::new(0.5, -0.2, 0.3)];
    for _ in 0..6 {
        let d = Pose2::new(
            rng.random_range(0.2..0.8),
            rng.random_range(-0.2..0.2),
            rng.random_range(-0.4..0.4),
        );
        truth.push(truth.last().unwrap().compose(&d));
    }
    let landmarks: Vec<Vector2<f64>> = (0..8)
        .map(|_| Vector2::new(rng.random_range(-3.0..5.0), rng.random_range(-3.0..3.0)))
        .collect();
    let mut g = FactorGraph::new();
    for (i, x) in truth.iter().enumerate() {
        let guess = Pose2::new(x.x + 0.1, x.y - 0.1, x.theta + 0.05);
        g.add_pose(i as u64, guess).unwrap();
    }
    for (i, l) in landmarks.iter().enumerate() {
        g.add_landmark(i as u64, l + Vector2::new(0.2, 0.1))
            .unwrap();
    }
    g.add_factor(Factor::PosePrior {
        pose: 0,
        mean: truth[0],
        information: Matrix3::identity() * 1e6,
    })
    .unwrap();
    for i in 1..truth.len() {
        g.add_factor(Factor::Odometry {
            from: i as u64 - 1,
            to: i as u64,
            delta: truth[i - 1].between(&truth[i]),
            information: Matrix3::identity() * 1e4,
        })
        .unwrap();
    }
    for (i, x) in truth.iter().enumerate() {
        for (j, l) in landmarks.iter().enumerate() {
            g.add_factor(Factor::Measurement {
                pose: i as u64,
                landmark: j as u64,
                relative: x.point_in_frame(l),
                information: Matrix2::identity() * 1e4,
            })
            .unwrap();
        }
    }
    (g, truth, landmarks)
}

#[test]
fn noiseless_solve_recovers_truth() {
    for seed in 0..5 {
        let (g, truth, landmarks) = noiseless_graph(seed);
        let report = map_solve(&g, None).unwrap();
        assert!(report.converged);
        for (i, l) in landmarks.iter().enumerate() {
            let err = (report.assignment.landmarks[&(i as u64)] - l).norm();
            assert!(err < 1e-6, "seed {seed} landmark {i}: {err}");
        }
        for (i, x) in truth.iter().enumerate() {
            let est = report.assignment.poses[&(i as u64)];
            assert!((est.translation() - x.translation()).norm() < 1e-6);
            assert!(wrap_angle(est.theta - x.theta).abs() < 1e-6);
        }
    }
}

#[test]
fn composed_odometry_covariance_matches_monte_carlo() {
    let q = Matrix3::from_diagonal(&Vector3::new(
        0.01f64.powi(2),
        0.01f64.powi(2),
        0.005f64.powi(2),
    ));
    let steps: Vec<Pose2> = (0..10)
        .map(|i| Pose2::new(0.25, 0.0, if i % 3 == 0 { 0.2 } else { 0.0 }))
        .collect();
    let chain: Vec<(Pose2, Matrix3<f64>)> = steps.iter().map(|d| (*d, q)).collect();
    let (mean, cov) = compose_odometry_chain(&chain).unwrap();

    let l = q.cholesky().unwrap().l();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 20_000;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x = Pose2::identity();
        for d in &steps {
            let z = Vector3::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            let e = l * z;
            x = x.compose(&Pose2::new(d.x + e.x, d.y + e.y, d.theta + e.z));
        }
        let v = x.to_vector() - mean.to_vector();
        samples.push(Vector3::new(v.x, v.y, wrap_angle(v.z)));
    }
    let avg = samples.iter().sum::<Vector3<f64>>() / n as f64;
    let sample_cov = samples
        .iter()
        .map(|s| (s - avg) * (s - avg).transpose())
        .sum::<Matrix3<f64>>()
        / (n - 1) as f64;
    let rel = (sample_cov - cov).norm() / cov.norm();
    assert!(rel < 0.05, "relative Frobenius error {rel}");
}

#[test]
fn compression_preserves_goal_marginal() {
    // Goal, three transit poses, goal; the transit poses see landmarks only
    // through odometry.
    let mut g = FactorGraph::new();
    let xs = [
        Pose2::new(0.0, 0.0, 0.0),
        Pose2::new(0.5, 0.0, 0.1),
        Pose2::new(1.0, 0.1, 0.2),
        Pose2::new(1.5, 0.2, 0.3),
        Pose2::new(2.0, 0.4, 0.3),
    ];
    for (i, x) in xs.iter().enumerate() {
        g.add_pose(i as u64, *x).unwrap();
    }
    g.add_landmark(0, Vector2::new(1.0, 2.0)).unwrap();
    g.add_factor(Factor::PosePrior {
        pose: 0,
        mean: xs[0],
        information: Matrix3::identity() * 1e4,
    })
    .unwrap();
    let q_info = Matrix3::from_diagonal(&Vector3::new(400.0, 400.0, 2500.0));
    for i in 1..xs.len() {
        g.add_factor(Factor::Odometry {
            from: i as u64 - 1,
            to: i as u64,
            delta: xs[i - 1].between(&xs[i]),
            information: q_info,
        })
        .unwrap();
    }
    for goal in [0u64, 4] {
        let x = xs[goal as usize];
        g.add_factor(Factor::Measurement {
            pose: goal,
            landmark: 0,
            relative: x.point_in_frame(&Vector2::new(1.0, 2.0)),
            information: Matrix2::identity() * 100.0,
        })
        .unwrap();
    }
    // Consistent data: the estimates satisfy the transit chain exactly, so
    // composing the measured increments linearizes at the same point as the
    // full graph.
    let before = pose_covariance(&g, 4).unwrap();
    let compressed = compress_between_goals(&g, 0, 4).unwrap();
    assert_eq!(compressed.poses().len(), 2);
    let after = pose_covariance(&compressed, 4).unwrap();
    assert!(
        (before - after).amax() < 1e-9 * before.amax().max(1.0),
        "{before} vs {after}"
    );
}

#[test]
fn graph_dump_round_trips() {
    for seed in 0..10 {
        let g = common::random_scene(300 + seed, 6, 4).graph;
        let text = write_graph(&g);
        let back = read_graph(&text).unwrap();
        assert_eq!(write_graph(&back), text);
        assert_eq!(back.factors().len(), g.factors().len());
    }
}

#[test]
fn entropy_is_half_negative_logdet() {
    let scene = common::random_scene(77, 5, 3);
    let m = graph_marginal(&scene.graph).unwrap();
    let det = m.lambda.clone().determinant();
    let h = landmark_entropy(&m).unwrap();
    assert!((h + 0.5 * det.ln()).abs() < 1e-8 * h.abs().max(1.0));
    let _: &DMatrix<f64> = &m.lambda;
}

fn pose() -> impl Strategy<Value = Pose2> {
    (-10.0..10.0f64, -10.0..10.0f64, -3.2..3.2f64).prop_map(|(x, y, t)| Pose2::new(x, y, t))
}

fn close(a: &Pose2, b: &Pose2) -> bool {
    (a.translation() - b.translation()).norm() < 1e-9 && wrap_angle(a.theta - b.theta).abs() < 1e-9
}

proptest! {
    #[test]
    fn compose_is_associative(a in pose(), b in pose(), c in pose()) {
        prop_assert!(close(&a.compose(&b).compose(&c), &a.compose(&b.compose(&c))));
    }

    #[test]
    fn inverse_cancels(a in pose()) {
        prop_assert!(close(&a.compose(&a.inverse()), &Pose2::identity()));
        prop_assert!(close(&a.inverse().compose(&a), &Pose2::identity()));
    }

    #[test]
    fn between_undoes_compose(a in pose(), b in pose()) {
        prop_assert!(close(&a.compose(&a.between(&b)), &b));
    }

    #[test]
    fn angles_wrap_into_half_open_interval(t in -100.0..100.0f64) {
        let w = wrap_angle(t);
        prop_assert!(w > -std::f64::consts::PI - 1e-12 && w <= std::f64::consts::PI);
        prop_assert!(((t - w) / std::f64::consts::TAU).fract().abs() < 1e-9
            || (1.0 - ((t - w) / std::f64::consts::TAU).fract().abs()) < 1e-9);
    }

    #[test]
    fn frame_change_round_trips(a in pose(), px in -10.0..10.0f64, py in -10.0..10.0f64) {
        let p = Vector2::new(px, py);
        prop_assert!((a.point_to_world(&a.point_in_frame(&p)) - p).norm() < 1e-9);
    }

    #[test]
    fn segment_predicates_agree(
        ax in -5.0..5.0f64, ay in -5.0..5.0f64, bx in -5.0..5.0f64, by in -5.0..5.0f64,
        cx in -5.0..5.0f64, cy in -5.0..5.0f64, dx in -5.0..5.0f64, dy in -5.0..5.0f64,
    ) {
        let s = Segment::new(Vector2::new(ax, ay), Vector2::new(bx, by));
        let t = Segment::new(Vector2::new(cx, cy), Vector2::new(dx, dy));
        prop_assert_eq!(segment_intersects(&s, &t), segment_intersects(&t, &s));
        let d = segment_segment_distance(&s, &t);
        prop_assert_eq!(d == 0.0, segment_intersects(&s, &t));
        prop_assert!((d - segment_segment_distance(&t, &s)).abs() < 1e-12);
        let p = Vector2::new(cx, cy);
        prop_assert!(point_segment_distance(&p, &s) <= (p - s.a).norm().min((p - s.b).norm()) + 1e-12);
    }
}
