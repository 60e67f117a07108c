//! Factor-graph state estimation over SE(2) poses and 2D point landmarks.

pub mod compress;
pub mod factor;
pub mod graph;
pub mod information;
pub mod io;
pub mod pose;
pub mod solve;

pub use compress::{compose_odometry_chain, compress_between_goals};
pub use factor::{Factor, LandmarkId, PoseId, VarKey};
pub use graph::{Assignment, FactorGraph, LandmarkEstimate, VariableOrdering};
pub use information::{
    assemble_information, graph_marginal, landmark_entropy, logdet_spd, marginal_landmark_info,
    pose_covariance, InformationMatrix, MarginalInfo,
};
pub use io::{read_graph, write_graph};
pub use pose::{
    compose_jacobians, point_in_robot_frame, pose_between, pose_compose, wrap_angle, Pose2,
};
pub use solve::{map_solve, map_solve_with, SolveReport, SolverOptions};
