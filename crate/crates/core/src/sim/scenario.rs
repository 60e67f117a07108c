use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, Matrix2, Matrix3, Vector2, Vector3};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::planner::Bounds;
use crate::sensor::SensorSpec;
use crate::slam::{LandmarkId, MarginalInfo, Pose2};
use crate::tfg::{SurfaceEdge, TopologicalFeatureGraph};

use super::motion::StepLimits;
use super::noise::NoiseModel;
use super::world::WorldModel;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: Option<String>,
    world: WorldSection,
    robot: RobotSection,
    #[serde(default)]
    noise: NoiseSection,
    sensor: SensorSection,
    exploration: ExplorationSection,
    #[serde(default)]
    planner: PlannerParams,
    #[serde(default)]
    run: RunSection,
    partial_map: Option<PartialMapSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorldSection {
    bounds: [f64; 4],
    #[serde(default)]
    polygons: Vec<Vec<[f64; 2]>>,
    landmark_spacing: Option<f64>,
    landmarks: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RobotSection {
    start: [f64; 3],
    #[serde(default = "default_radius")]
    radius: f64,
}

fn default_radius() -> f64 {
    0.2
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseSection {
    odometry_std: [f64; 3],
    measurement_std: [f64; 2],
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            odometry_std: [0.02, 0.02, 0.01],
            measurement_std: [0.05, 0.05],
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorSection {
    range: f64,
    #[serde(default = "default_fov")]
    fov_deg: f64,
}

fn default_fov() -> f64 {
    360.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplorationSection {
    sigma_u: f64,
    density: f64,
}

/// Planner tuning read from the `[planner]` table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    pub sample_count: usize,
    pub connect_radius: f64,
    pub delta: f64,
    pub penalty_weight: f64,
    pub safe_distance: Option<f64>,
    pub min_goal_distance: f64,
    pub max_path_length: Option<f64>,
    pub mc_samples: usize,
    /// Defaults to 0.6 × sensor range.
    pub reach_range: Option<f64>,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self {
            sample_count: 150,
            connect_radius: 2.5,
            delta: 0.05,
            penalty_weight: 1.0,
            safe_distance: None,
            min_goal_distance: 0.5,
            max_path_length: None,
            mc_samples: 200,
            reach_range: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunSection {
    stages: usize,
    gain_epsilon: f64,
    seeds: Vec<u64>,
    step_translation: f64,
    step_rotation: f64,
    start_std: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            stages: 40,
            gain_epsilon: 1e-3,
            seeds: vec![1],
            step_translation: 0.25,
            step_rotation: 0.2,
            start_std: 1e-3,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialMapSection {
    landmarks: Vec<(LandmarkId, f64, f64)>,
    #[serde(default)]
    edges: Vec<(LandmarkId, LandmarkId)>,
    landmark_std: Option<Vec<f64>>,
    covariance_upper: Option<Vec<f64>>,
    #[serde(default)]
    goals: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub stages: usize,
    pub gain_epsilon: f64,
    pub seeds: Vec<u64>,
    pub steps: StepLimits,
    /// Standard deviation of the prior on the start pose.
    pub start_std: f64,
}

/// A prebuilt map used to render information-gain maps.
#[derive(Debug, Clone)]
pub struct PartialMap {
    pub tfg: TopologicalFeatureGraph,
    pub goals: Vec<Pose2>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub world: WorldModel,
    pub start: Pose2,
    pub robot_radius: f64,
    pub q: Matrix3<f64>,
    pub r: Matrix2<f64>,
    pub sensing: SensorSpec,
    /// Isotropic prior variance of an unseen landmark.
    pub sigma_u: f64,
    pub density: f64,
    pub planner: PlannerParams,
    pub run: RunParams,
    pub partial_map: Option<PartialMap>,
}

fn parse_error(msg: impl Into<String>) -> Error {
    Error::ScenarioParse(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(parse_error(format!("{name} must be positive and finite")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(parse_error(format!(
            "{name} must be non-negative and finite"
        )))
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| parse_error(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| parse_error(e.to_string()))?;
        let [x0, y0, x1, y1] = file.world.bounds;
        if !(x1 > x0 && y1 > y0) {
            return Err(parse_error(
                "bounds must be [min_x, min_y, max_x, max_y] with max > min",
            ));
        }
        let bounds = Bounds::new(x0, y0, x1, y1);
        let polygons: Vec<Vec<Vector2<f64>>> = file
            .world
            .polygons
            .iter()
            .map(|p| p.iter().map(|v| Vector2::new(v[0], v[1])).collect())
            .collect();
        let world = match (&file.world.landmarks, file.world.landmark_spacing) {
            (Some(_), Some(_)) => {
                return Err(parse_error(
                    "give either landmark_spacing or landmarks, not both",
                ))
            }
            (Some(list), None) => {
                let landmarks: BTreeMap<LandmarkId, Vector2<f64>> = list
                    .iter()
                    .enumerate()
                    .map(|(i, p)| (i as LandmarkId, Vector2::new(p[0], p[1])))
                    .collect();
                WorldModel::new(polygons, landmarks, bounds)?
            }
            (None, spacing) => WorldModel::with_spacing(polygons, spacing.unwrap_or(1.0), bounds)?,
        };

        let radius = positive("robot.radius", file.robot.radius)?;
        let [sx, sy, st] = file.robot.start;
        let start = Pose2::new(sx, sy, st);
        let q_std = file.noise.odometry_std;
        let r_std = file.noise.measurement_std;
        for v in q_std.iter().chain(r_std.iter()) {
            nonnegative("noise standard deviation", *v)?;
        }
        let q = Matrix3::from_diagonal(&Vector3::new(
            q_std[0].powi(2),
            q_std[1].powi(2),
            q_std[2].powi(2),
        ));
        let r = Matrix2::from_diagonal(&Vector2::new(r_std[0].powi(2), r_std[1].powi(2)));
        let range = positive("sensor.range", file.sensor.range)?;
        let fov = file.sensor.fov_deg.to_radians();
        if !(fov > 0.0 && fov <= std::f64::consts::TAU + 1e-12) {
            return Err(parse_error("sensor.fov_deg must be in (0, 360]"));
        }
        let noise = NoiseModel { q, r, seed: 0 };
        let sensing = SensorSpec::new(
            range,
            fov.min(std::f64::consts::TAU),
            noise.measurement_information(),
        );
        let sigma_u = positive("exploration.sigma_u", file.exploration.sigma_u)?;
        let density = nonnegative("exploration.density", file.exploration.density)?;

        let p = &file.planner;
        if p.sample_count == 0 {
            return Err(parse_error("planner.sample_count must be positive"));
        }
        positive("planner.connect_radius", p.connect_radius)?;
        if !(p.delta > 0.0 && p.delta < 1.0) {
            return Err(parse_error("planner.delta must be in (0, 1)"));
        }
        nonnegative("planner.penalty_weight", p.penalty_weight)?;

        let run = &file.run;
        if run.seeds.is_empty() {
            return Err(parse_error("run.seeds must not be empty"));
        }
        let run = RunParams {
            stages: run.stages,
            gain_epsilon: nonnegative("run.gain_epsilon", run.gain_epsilon)?,
            seeds: run.seeds.clone(),
            steps: StepLimits {
                translation: positive("run.step_translation", run.step_translation)?,
                rotation: positive("run.step_rotation", run.step_rotation)?,
            },
            start_std: positive("run.start_std", run.start_std)?,
        };

        let partial_map = file.partial_map.as_ref().map(partial_map).transpose()?;

        Ok(Self {
            name: file.name.unwrap_or_else(|| "scenario".into()),
            world,
            start,
            robot_radius: radius,
            q,
            r,
            sensing,
            sigma_u,
            density,
            planner: file.planner,
            run,
            partial_map,
        })
    }

    pub fn noise(&self, seed: u64) -> NoiseModel {
        NoiseModel {
            q: self.q,
            r: self.r,
            seed,
        }
    }

    pub fn reach_range(&self) -> f64 {
        self.planner.reach_range.unwrap_or(0.6 * self.sensing.range)
    }
}

fn partial_map(s: &PartialMapSection) -> Result<PartialMap> {
    let landmarks: BTreeMap<LandmarkId, Vector2<f64>> = s
        .landmarks
        .iter()
        .map(|(id, x, y)| (*id, Vector2::new(*x, *y)))
        .collect();
    if landmarks.len() != s.landmarks.len() {
        return Err(parse_error("partial_map landmark ids must be unique"));
    }
    let n = landmarks.len();
    let covariance = match (&s.landmark_std, &s.covariance_upper) {
        (Some(std), None) => {
            if std.len() != n {
                return Err(parse_error(
                    "partial_map.landmark_std needs one entry per landmark",
                ));
            }
            let mut c = DMatrix::zeros(2 * n, 2 * n);
            for (i, v) in std.iter().enumerate() {
                positive("partial_map.landmark_std", *v)?;
                c[(2 * i, 2 * i)] = v * v;
                c[(2 * i + 1, 2 * i + 1)] = v * v;
            }
            c
        }
        (None, Some(upper)) => {
            let m = 2 * n;
            if upper.len() != m * (m + 1) / 2 {
                return Err(parse_error(
                    "partial_map.covariance_upper has the wrong length",
                ));
            }
            let mut c = DMatrix::zeros(m, m);
            let mut k = 0;
            for i in 0..m {
                for j in i..m {
                    c[(i, j)] = upper[k];
                    c[(j, i)] = upper[k];
                    k += 1;
                }
            }
            c
        }
        _ => {
            return Err(parse_error(
                "partial_map needs exactly one of landmark_std or covariance_upper",
            ))
        }
    };
    let lambda = covariance
        .try_inverse()
        .ok_or_else(|| parse_error("partial_map covariance is singular"))?;
    let marginal = MarginalInfo {
        landmark_order: landmarks.keys().copied().collect(),
        lambda: (&lambda + lambda.transpose()) * 0.5,
    };
    let mut edges = Vec::new();
    for (a, b) in &s.edges {
        edges.push(
            SurfaceEdge::new(*a, *b)
                .ok_or_else(|| parse_error(format!("edge {a}-{b} is a loop")))?,
        );
    }
    let tfg = TopologicalFeatureGraph::new(landmarks, edges, marginal)
        .map_err(|e| parse_error(format!("partial_map: {e}")))?;
    Ok(PartialMap {
        tfg,
        goals: s
            .goals
            .iter()
            .map(|g| Pose2::new(g[0], g[1], g[2]))
            .collect(),
    })
}
