//! Command implementations behind the `tfgslam` binary.

mod infomap;
mod run;
mod verify;

pub use infomap::{cmd_infomap, infomap, sigma_for_level, InfoMap, ScoreCell, SigmaLevel};
pub use run::{cmd_run, AggregateReport, RunOptions, SeedSummary};
pub use verify::{
    cmd_verify, cmd_verify_with, collision_suite, entropy_suite, gain_suite, jacobian_suite,
    random_scene, schur_suite, JacobianSet, MeasurementJacobians, OdometryJacobians, SuiteResult,
};
