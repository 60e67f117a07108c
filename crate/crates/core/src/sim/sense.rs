use nalgebra::Vector2;

use crate::sensor::SensorSpec;
use crate::slam::{wrap_angle, LandmarkId, Pose2};
use crate::tfg::ScanEntry;

use super::noise::NoiseSource;
use super::world::WorldModel;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SenseResult {
    /// Noisy robot-frame landmark positions, ascending by id.
    pub measurements: Vec<(LandmarkId, Vector2<f64>)>,
    /// Visible landmarks grouped into surface components.
    pub scan: Vec<ScanEntry>,
}

pub fn visible_true_landmarks(
    x_true: &Pose2,
    world: &WorldModel,
    sensing: &SensorSpec,
    full_rotation: bool,
) -> Vec<LandmarkId> {
    let fov = if full_rotation {
        std::f64::consts::TAU
    } else {
        sensing.fov
    };
    let origin = x_true.translation();
    world
        .true_landmarks
        .iter()
        .filter(|(id, l)| {
            let rel = *l - origin;
            if rel.norm() > sensing.range {
                return false;
            }
            if fov < std::f64::consts::TAU {
                let bearing = wrap_angle(rel.y.atan2(rel.x) - x_true.theta);
                if bearing.abs() > 0.5 * fov {
                    return false;
                }
            }
            world.unoccluded(&origin, **id)
        })
        .map(|(id, _)| *id)
        .collect()
}

/// Noisy measurements of visible landmarks and the segmented scan. Two
/// landmarks share a component when they lie on the same wall and no
/// unseen landmark of that wall lies between them.
pub fn sense(
    x_true: &Pose2,
    world: &WorldModel,
    sensing: &SensorSpec,
    noise: &mut NoiseSource,
    full_rotation: bool,
) -> SenseResult {
    let visible = visible_true_landmarks(x_true, world, sensing, full_rotation);
    let measurements = visible
        .iter()
        .map(|id| {
            let z = x_true.point_in_frame(&world.true_landmarks[id]) + noise.measurement();
            (*id, z)
        })
        .collect();
    let mut scan = Vec::new();
    let mut component = 0u64;
    for w in 0..world.walls().len() {
        let mut open = false;
        for id in world.landmarks_on_wall(w) {
            if visible.binary_search(id).is_ok() {
                scan.push(ScanEntry {
                    component,
                    landmark: *id,
                });
                open = true;
            } else if open {
                component += 1;
                open = false;
            }
        }
        if open {
            component += 1;
        }
    }
    SenseResult { measurements, scan }
}
