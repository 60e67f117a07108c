use nalgebra::Matrix2;
use std::f64::consts::TAU;

/// Range/bearing-limited point-feature sensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// Maximum sensing distance (m).
    pub range: f64,
    /// Field of view (rad), in `(0, 2π]`.
    pub fov: f64,
    /// Measurement information `R⁻¹`.
    pub measurement_information: Matrix2<f64>,
}

impl SensorSpec {
    pub fn new(range: f64, fov: f64, measurement_information: Matrix2<f64>) -> Self {
        assert!(range > 0.0, "sensor range must be positive");
        assert!(fov > 0.0 && fov <= TAU + 1e-12, "fov must lie in (0, 2π]");
        Self {
            range,
            fov: fov.min(TAU),
            measurement_information,
        }
    }

    pub fn full_rotation(&self) -> Self {
        Self { fov: TAU, ..*self }
    }

    pub fn is_omnidirectional(&self) -> bool {
        self.fov >= TAU - 1e-12
    }
}
