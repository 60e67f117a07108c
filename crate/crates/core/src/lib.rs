//! Active SLAM over a topological feature graph.
//!
//! The crate estimates a landmark/pose factor graph, keeps an obstacle graph
//! over the landmarks, scores candidate goal poses by their expected entropy
//! reduction and plans collision-aware roadmap paths to the chosen goal. A
//! deterministic simulator and benchmark harness drive the whole loop.

pub mod error;
pub mod harness;
pub mod info_gain;
pub mod planner;
pub mod sensor;
pub mod sim;
pub mod slam;
pub mod tfg;

pub use error::{Error, Result};
pub use sensor::SensorSpec;
