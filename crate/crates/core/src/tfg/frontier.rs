use std::f64::consts::TAU;

use nalgebra::Vector2;

use super::TopologicalFeatureGraph;
use crate::sensor::SensorSpec;
use crate::slam::{LandmarkId, Pose2};

/// An angular gap between two bearing-consecutive visible landmarks that are
/// not joined by a surface edge. The gap runs counter-clockwise from
/// `right_landmark_id` to `left_landmark_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub left_landmark_id: LandmarkId,
    pub right_landmark_id: LandmarkId,
    pub angular_width: f64,
    pub arc_length: f64,
    /// World-frame bearing of the right boundary as seen from the viewpoint.
    pub start_bearing: f64,
    /// Distances from the viewpoint to the right and left boundaries.
    pub right_range: f64,
    pub left_range: f64,
}

impl Frontier {
    pub fn mid_bearing(&self) -> f64 {
        self.start_bearing + 0.5 * self.angular_width
    }

    /// Points spread uniformly across the gap, at the mean boundary range.
    pub fn sample_points(&self, viewpoint: &Vector2<f64>, count: usize) -> Vec<Vector2<f64>> {
        let r = 0.5 * (self.right_range + self.left_range);
        (0..count)
            .map(|j| {
                let b = self.start_bearing + self.angular_width * (j as f64 + 0.5) / count as f64;
                viewpoint + Vector2::new(b.cos(), b.sin()) * r
            })
            .collect()
    }
}

/// Frontier detection at a viewpoint:
/// 1. collect the landmarks visible within range and field of view;
/// 2. sort them by bearing;
/// 3. each consecutive pair without a surface edge, where at least one of the
///    facing sides is open, bounds a frontier.
///
/// With an omnidirectional sensor the last and first landmarks are also
/// consecutive; otherwise pairs never wrap past the field-of-view boundary.
pub fn detect_frontiers(
    tfg: &TopologicalFeatureGraph,
    viewpoint: &Pose2,
    sensing: &SensorSpec,
) -> Vec<Frontier> {
    let visible = tfg.visible_landmarks(viewpoint, sensing.range, sensing.fov);
    let n = visible.len();
    if n == 0 {
        return Vec::new();
    }
    let origin = viewpoint.translation();
    let mut pairs: Vec<(usize, usize, f64)> = (0..n - 1)
        .map(|i| (i, i + 1, visible[i + 1].1 - visible[i].1))
        .collect();
    if sensing.is_omnidirectional() {
        let width = visible[0].1 + TAU - visible[n - 1].1;
        pairs.push((n - 1, 0, width));
    }

    let mut out = Vec::new();
    for (i, j, width) in pairs {
        if width <= 1e-12 {
            continue;
        }
        let (right, left) = (visible[i].0, visible[j].0);
        let pr = tfg.landmarks()[&right];
        let pl = tfg.landmarks()[&left];
        let open = if right == left {
            let f = tfg.frontier_flags()[&right];
            f.left_open || f.right_open
        } else {
            if tfg.has_edge(right, left) {
                continue;
            }
            tfg.side_open(right, &(pl - pr)) || tfg.side_open(left, &(pr - pl))
        };
        if !open {
            continue;
        }
        out.push(Frontier {
            left_landmark_id: left,
            right_landmark_id: right,
            angular_width: width.min(TAU),
            arc_length: width.min(TAU) * sensing.range,
            start_bearing: visible[i].1 + viewpoint.theta,
            right_range: (pr - origin).norm(),
            left_range: (pl - origin).norm(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfg::tests::map;
    use crate::tfg::ScanEntry;
    use nalgebra::Matrix2;

    fn sensor(range: f64, fov: f64) -> SensorSpec {
        SensorSpec::new(range, fov, Matrix2::identity())
    }

    #[test]
    fn connected_pair_has_no_frontier() {
        let mut t = map(&[(1, 1.0, 0.0), (2, 1.0, 0.5)]);
        t.learn_edges(&[
            ScanEntry {
                component: 0,
                landmark: 1,
            },
            ScanEntry {
                component: 0,
                landmark: 2,
            },
        ])
        .unwrap();
        let f = detect_frontiers(&t, &Pose2::identity(), &sensor(10.0, 2.0));
        assert!(f.is_empty());
    }

    #[test]
    fn unconnected_pair_yields_arc() {
        let t = map(&[(1, 2.0, 0.0), (2, 2.0 * 0.5f64.cos(), 2.0 * 0.5f64.sin())]);
        let f = detect_frontiers(&t, &Pose2::identity(), &sensor(10.0, 2.0));
        assert_eq!(f.len(), 1);
        assert_eq!(f[0].right_landmark_id, 1);
        assert_eq!(f[0].left_landmark_id, 2);
        assert!((f[0].angular_width - 0.5).abs() < 1e-12);
        assert!((f[0].arc_length - 5.0).abs() < 1e-11);
    }

    #[test]
    fn nothing_visible() {
        let t = map(&[(1, 20.0, 0.0)]);
        assert!(detect_frontiers(&t, &Pose2::identity(), &sensor(10.0, TAU)).is_empty());
    }
}
