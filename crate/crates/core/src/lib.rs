//! Deterministic desk-scale harness for finding non-optimal path-planning
//! decisions: an evolutionary search mutates driving scenarios under a
//! non-invasive constraint, replays them in an embedded 2D simulator against
//! a pluggable planner, and flags runs where the planner abandons a path that
//! is still available.

pub mod engine;
pub mod feedback;
pub mod geometry;
pub mod mutation;
pub mod oracle;
pub mod scenario;
pub mod sim;
pub mod stats;

pub use geometry::{Footprint, Point2, Pose, Region};
