//! Ground-truth world simulation and the sequential active SLAM loop.

mod motion;
mod noise;
mod run;
mod scenario;
mod sense;
mod track;
mod world;

pub use motion::{plan_steps, step_motion, StepLimits};
pub use noise::{NoiseModel, NoiseSource, VARIANCE_FLOOR};
pub use run::{
    policy_name, run_active_slam, run_nearest_frontier, run_policy, total_entropy, write_run_log,
    RunConfig, RunLog, RunStatus, StagePlan, StageRecord, STAGE_COLUMNS,
};
pub use scenario::{PartialMap, PlannerParams, RunParams, Scenario};
pub use sense::{sense, visible_true_landmarks, SenseResult};
pub use track::PoseTracker;
pub use world::WorldModel;
