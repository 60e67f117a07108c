use nalgebra::{Matrix2, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::geometry::{point_segment_distance, segment_intersects, Point, Segment};
use super::TopologicalFeatureGraph;

/// Distance from `p` to the closest surface edge and that edge's index in
/// [`TopologicalFeatureGraph::edges`] order. Ties go to the lower index.
pub fn nearest_obstacle_distance(p: &Point, tfg: &TopologicalFeatureGraph) -> (f64, Option<usize>) {
    let mut best = (f64::INFINITY, None);
    for (i, e) in tfg.edges().iter().enumerate() {
        let d = point_segment_distance(p, &tfg.edge_segment(e));
        if d < best.0 {
            best = (d, Some(i));
        }
    }
    best
}

/// A disc of `radius` at `p` touches a surface edge.
pub fn point_in_collision(p: &Point, tfg: &TopologicalFeatureGraph, radius: f64) -> bool {
    nearest_obstacle_distance(p, tfg).0 <= radius
}

/// Square root `L` of a PSD 2×2 matrix with `L Lᵀ = P`; negative
/// eigenvalues from round-off are clamped to zero.
pub fn psd_sqrt(p: &Matrix2<f64>) -> Matrix2<f64> {
    let eig = SymmetricEigen::new((p + p.transpose()) * 0.5);
    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    eig.eigenvectors * Matrix2::from_diagonal(&d)
}

/// Monte-Carlo estimate of `Pr(x ∈ obstacle)` for `x ~ N(mean, cov)`.
///
/// A sample is in the obstacle region if the robot disc around it touches an
/// edge, or if reaching it from the mean crosses an edge (it lies behind a
/// surface).
pub fn collision_chance(
    mean: &Point,
    cov: &Matrix2<f64>,
    tfg: &TopologicalFeatureGraph,
    robot_radius: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    collision_chance_among(mean, cov, &tfg.edge_segments(), robot_radius, samples, seed)
}

/// [`collision_chance`] against an explicit obstacle list. Zero-length
/// segments stand for point obstacles.
pub fn collision_chance_among(
    mean: &Point,
    cov: &Matrix2<f64>,
    segments: &[Segment],
    robot_radius: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    if samples == 0 {
        return 0.0;
    }
    count_hits(mean, cov, segments, robot_radius, samples, seed, usize::MAX) as f64 / samples as f64
}

/// Whether [`collision_chance_among`] with the same arguments would be at
/// least `delta`. Stops sampling as soon as the answer is settled.
pub fn collision_chance_reaches(
    mean: &Point,
    cov: &Matrix2<f64>,
    segments: &[Segment],
    robot_radius: f64,
    samples: usize,
    seed: u64,
    delta: f64,
) -> bool {
    if samples == 0 {
        return 0.0 >= delta;
    }
    let Some(needed) = (0..=samples).find(|&h| h as f64 / samples as f64 >= delta) else {
        return false;
    };
    needed == 0 || count_hits(mean, cov, segments, robot_radius, samples, seed, needed) >= needed
}

fn count_hits(
    mean: &Point,
    cov: &Matrix2<f64>,
    segments: &[Segment],
    robot_radius: f64,
    samples: usize,
    seed: u64,
    stop_at: usize,
) -> usize {
    if segments.is_empty() {
        return 0;
    }
    // A sample at distance ρ from the mean can only touch segments within
    // ρ + radius of the mean.
    let mut near: Vec<(f64, Segment)> = segments
        .iter()
        .map(|s| (point_segment_distance(mean, s), *s))
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0));
    let l = psd_sqrt(cov);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..samples {
        let z = Point::new(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        );
        let x = mean + l * z;
        let reach = Segment::new(*mean, x);
        let horizon = (x - mean).norm() + robot_radius;
        let hit = near
            .iter()
            .take_while(|(d, _)| *d <= horizon)
            .any(|(_, s)| {
                point_segment_distance(&x, s) <= robot_radius || segment_intersects(&reach, s)
            });
        if hit {
            hits += 1;
            if hits >= stop_at {
                break;
            }
        }
    }
    hits
}
