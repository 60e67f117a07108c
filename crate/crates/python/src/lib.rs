use std::path::PathBuf;

use nalgebra::{Matrix2, Matrix3, Vector2};
use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use tfg_slam::harness::{infomap as score_grid, sigma_for_level, SigmaLevel};
use tfg_slam::info_gain::{delta_h as gain, gain_terms, ExplorationPrior};
use tfg_slam::planner::GoalPolicy;
use tfg_slam::sim::{run_policy, write_run_log, RunConfig, Scenario};
use tfg_slam::slam::{self, Factor};
use tfg_slam::tfg::{self, ScanEntry, SurfaceEdge, TopologicalFeatureGraph};
use tfg_slam::{Error, SensorSpec};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::UnknownLandmark(_) | Error::UnknownPose(_) => PyKeyError::new_err(e.to_string()),
        Error::ScenarioParse(_) | Error::Parse { .. } | Error::InvalidGraph(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn diag2(std: f64) -> Matrix2<f64> {
    Matrix2::identity() / (std * std)
}

/// SE(2) pose `(x, y, theta)`.
#[pyclass(name = "Pose2", module = "tfg_slam_py", from_py_object)]
#[derive(Clone, Copy)]
struct PyPose2 {
    inner: slam::Pose2,
}

#[pymethods]
impl PyPose2 {
    #[new]
    #[pyo3(signature = (x=0.0, y=0.0, theta=0.0))]
    fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            inner: slam::Pose2::new(x, y, theta),
        }
    }

    #[getter]
    fn x(&self) -> f64 {
        self.inner.x
    }

    #[getter]
    fn y(&self) -> f64 {
        self.inner.y
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }

    fn compose(&self, other: &PyPose2) -> PyPose2 {
        PyPose2 {
            inner: self.inner.compose(&other.inner),
        }
    }

    fn inverse(&self) -> PyPose2 {
        PyPose2 {
            inner: self.inner.inverse(),
        }
    }

    fn between(&self, other: &PyPose2) -> PyPose2 {
        PyPose2 {
            inner: self.inner.between(&other.inner),
        }
    }

    /// World point expressed in this pose's frame.
    fn point_in_frame(&self, x: f64, y: f64) -> (f64, f64) {
        let p = self.inner.point_in_frame(&Vector2::new(x, y));
        (p.x, p.y)
    }

    #[allow(clippy::wrong_self_convention)]
    fn to_tuple(&self) -> (f64, f64, f64) {
        (self.inner.x, self.inner.y, self.inner.theta)
    }

    fn __repr__(&self) -> String {
        format!(
            "Pose2({}, {}, {})",
            self.inner.x, self.inner.y, self.inner.theta
        )
    }
}

/// Factor graph of SE(2) poses and point landmarks. Information arguments
/// are given as isotropic standard deviations.
#[pyclass(name = "FactorGraph", module = "tfg_slam_py", skip_from_py_object)]
#[derive(Clone, Default)]
struct PyFactorGraph {
    inner: slam::FactorGraph,
}

#[pymethods]
impl PyFactorGraph {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    fn add_pose(&mut self, id: u64, pose: &PyPose2) -> PyResult<()> {
        self.inner.add_pose(id, pose.inner).map_err(to_py)
    }

    fn add_landmark(&mut self, id: u64, x: f64, y: f64) -> PyResult<()> {
        self.inner
            .add_landmark(id, Vector2::new(x, y))
            .map_err(to_py)
    }

    fn add_pose_prior(&mut self, pose: u64, mean: &PyPose2, std: f64) -> PyResult<()> {
        self.inner
            .add_factor(Factor::PosePrior {
                pose,
                mean: mean.inner,
                information: Matrix3::identity() / (std * std),
            })
            .map_err(to_py)
    }

    fn add_odometry(&mut self, from: u64, to: u64, delta: &PyPose2, std: f64) -> PyResult<()> {
        self.inner
            .add_factor(Factor::Odometry {
                from,
                to,
                delta: delta.inner,
                information: Matrix3::identity() / (std * std),
            })
            .map_err(to_py)
    }

    /// Landmark observed at robot-frame position `(zx, zy)`.
    fn add_measurement(
        &mut self,
        pose: u64,
        landmark: u64,
        zx: f64,
        zy: f64,
        std: f64,
    ) -> PyResult<()> {
        self.inner
            .add_factor(Factor::Measurement {
                pose,
                landmark,
                relative: Vector2::new(zx, zy),
                information: diag2(std),
            })
            .map_err(to_py)
    }

    /// Solves for the MAP estimate and stores it. Returns `(iterations, cost)`.
    fn solve(&mut self) -> PyResult<(usize, f64)> {
        let report = slam::map_solve(&self.inner, None).map_err(to_py)?;
        self.inner.set_assignment(&report.assignment);
        Ok((report.iterations, report.cost))
    }

    fn pose(&self, id: u64) -> PyResult<PyPose2> {
        Ok(PyPose2 {
            inner: *self
                .inner
                .poses()
                .get(&id)
                .ok_or(Error::UnknownPose(id))
                .map_err(to_py)?,
        })
    }

    fn landmark(&self, id: u64) -> PyResult<(f64, f64)> {
        let l = self
            .inner
            .landmarks()
            .get(&id)
            .ok_or(Error::UnknownLandmark(id))
            .map_err(to_py)?;
        Ok((l.position.x, l.position.y))
    }

    fn landmark_ids(&self) -> Vec<u64> {
        self.inner.landmarks().keys().copied().collect()
    }

    /// Entropy of the landmark marginal at the stored estimate.
    fn landmark_entropy(&self) -> PyResult<f64> {
        let m = slam::graph_marginal(&self.inner).map_err(to_py)?;
        slam::landmark_entropy(&m).map_err(to_py)
    }

    fn pose_covariance(&self, id: u64) -> PyResult<Vec<Vec<f64>>> {
        let c = slam::pose_covariance(&self.inner, id).map_err(to_py)?;
        Ok((0..3)
            .map(|r| (0..3).map(|k| c[(r, k)]).collect())
            .collect())
    }

    fn dump(&self) -> String {
        slam::write_graph(&self.inner)
    }

    #[staticmethod]
    fn load(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: slam::read_graph(text).map_err(to_py)?,
        })
    }
}

/// Topological feature graph built from a solved factor graph.
#[pyclass(
    name = "TopologicalFeatureGraph",
    module = "tfg_slam_py",
    skip_from_py_object
)]
#[derive(Clone)]
struct PyTfg {
    inner: TopologicalFeatureGraph,
}

fn sensing(range: f64, fov: f64, measurement_std: f64) -> PyResult<SensorSpec> {
    if !(range > 0.0 && fov > 0.0 && fov <= std::f64::consts::TAU && measurement_std > 0.0) {
        return Err(PyValueError::new_err(
            "need range > 0, fov in (0, 2π], measurement_std > 0",
        ));
    }
    Ok(SensorSpec::new(range, fov, diag2(measurement_std)))
}

#[pymethods]
impl PyTfg {
    #[staticmethod]
    #[pyo3(signature = (graph, edges=Vec::new()))]
    fn from_graph(graph: &PyFactorGraph, edges: Vec<(u64, u64)>) -> PyResult<Self> {
        let edges = edges
            .into_iter()
            .map(|(a, b)| {
                SurfaceEdge::new(a, b)
                    .ok_or_else(|| PyValueError::new_err("edge joins a landmark to itself"))
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: TopologicalFeatureGraph::from_graph(&graph.inner, edges).map_err(to_py)?,
        })
    }

    /// Joins neighbours within each scan component; `scan` is a list of
    /// `(component, landmark)` in surface order. Returns the edges added.
    fn learn_edges(&mut self, scan: Vec<(u64, u64)>) -> PyResult<usize> {
        let scan: Vec<ScanEntry> = scan
            .into_iter()
            .map(|(component, landmark)| ScanEntry {
                component,
                landmark,
            })
            .collect();
        self.inner.learn_edges(&scan).map_err(to_py)
    }

    fn edges(&self) -> Vec<(u64, u64)> {
        self.inner.edges().iter().map(|e| (e.a, e.b)).collect()
    }

    fn has_edge(&self, a: u64, b: u64) -> bool {
        self.inner.has_edge(a, b)
    }

    /// Frontiers seen from `pose` as dicts.
    #[pyo3(signature = (pose, range, fov=std::f64::consts::TAU))]
    fn frontiers<'py>(
        &self,
        py: Python<'py>,
        pose: &PyPose2,
        range: f64,
        fov: f64,
    ) -> PyResult<Vec<Bound<'py, pyo3::types::PyDict>>> {
        let spec = sensing(range, fov, 1.0)?;
        tfg::detect_frontiers(&self.inner, &pose.inner, &spec)
            .into_iter()
            .map(|f| {
                let d = pyo3::types::PyDict::new(py);
                d.set_item("left_landmark_id", f.left_landmark_id)?;
                d.set_item("right_landmark_id", f.right_landmark_id)?;
                d.set_item("angular_width", f.angular_width)?;
                d.set_item("arc_length", f.arc_length)?;
                Ok(d)
            })
            .collect()
    }

    /// Monte Carlo chance that a robot of `radius` at `(x, y)` with
    /// position covariance `cov` (2×2 nested list) hits a surface.
    #[pyo3(signature = (x, y, cov, radius, samples=10_000, seed=0))]
    fn collision_chance(
        &self,
        x: f64,
        y: f64,
        cov: [[f64; 2]; 2],
        radius: f64,
        samples: usize,
        seed: u64,
    ) -> f64 {
        let p = Matrix2::new(cov[0][0], cov[0][1], cov[1][0], cov[1][1]);
        tfg::collision_chance(&Vector2::new(x, y), &p, &self.inner, radius, samples, seed)
    }

    fn dump(&self) -> String {
        tfg::io::write_tfg(&self.inner)
    }

    #[staticmethod]
    fn load(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: tfg::io::read_tfg(text).map_err(to_py)?,
        })
    }
}

/// Expected entropy reduction `(dH_o, dH_u)` of a measurement taken at `pose`.
#[pyfunction]
#[pyo3(signature = (tfg, pose, range, measurement_std, sigma_u, density, fov=std::f64::consts::TAU))]
fn delta_h(
    tfg: &PyTfg,
    pose: &PyPose2,
    range: f64,
    measurement_std: f64,
    sigma_u: f64,
    density: f64,
    fov: f64,
) -> PyResult<(f64, f64)> {
    let spec = sensing(range, fov, measurement_std)?;
    let prior = ExplorationPrior::isotropic(sigma_u, spec.measurement_information, density);
    let frontiers = tfg::detect_frontiers(&tfg.inner, &pose.inner, &spec);
    let terms = gain_terms(&tfg.inner, &pose.inner, &spec, &prior, &frontiers).map_err(to_py)?;
    gain(&terms, terms.n_x, &prior).map_err(to_py)
}

/// Runs one seed of a scenario file and returns the run log text.
#[pyfunction]
#[pyo3(signature = (scenario, seed=1, policy="active_tfg"))]
fn run(scenario: PathBuf, seed: u64, policy: &str) -> PyResult<String> {
    let policy = match policy {
        "active_tfg" => GoalPolicy::InformationGain,
        "nearest_frontier" => GoalPolicy::NearestFrontier,
        other => return Err(PyValueError::new_err(format!("unknown policy {other}"))),
    };
    let sc = Scenario::load(&scenario).map_err(to_py)?;
    let log = run_policy(
        &sc,
        RunConfig {
            policy,
            seed,
            keep_plans: false,
        },
    )
    .map_err(to_py)?;
    Ok(write_run_log(&log))
}

type ScoreRow = (f64, f64, f64, f64, f64, bool);

/// Scores a grid over the scenario's partial map. Rows are
/// `(x, y, dh_o, dh_u, total, reachable)`.
#[pyfunction]
#[pyo3(signature = (scenario, step=0.25, sigma_u="high"))]
fn infomap(scenario: PathBuf, step: f64, sigma_u: &str) -> PyResult<Vec<ScoreRow>> {
    let level: SigmaLevel = sigma_u.parse().map_err(to_py)?;
    let sc = Scenario::load(&scenario).map_err(to_py)?;
    let sigma = sigma_for_level(&sc, level).map_err(to_py)?;
    let map = score_grid(&sc, step, sigma).map_err(to_py)?;
    Ok(map
        .cells
        .iter()
        .map(|c| (c.x, c.y, c.dh_o, c.dh_u, c.total, c.reachable))
        .collect())
}

#[pymodule]
fn tfg_slam_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPose2>()?;
    m.add_class::<PyFactorGraph>()?;
    m.add_class::<PyTfg>()?;
    m.add_function(wrap_pyfunction!(delta_h, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(infomap, m)?)?;
    Ok(())
}
