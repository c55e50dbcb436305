//! Blackboard multi-agent planner for access and visibility tasks.
//!
//! A manikin (or a robot carrying a camera on a pan/tilt mast) is driven
//! through a cluttered scene by a handful of elementary agents that never
//! talk to each other: each one reads a snapshot of the shared
//! [`blackboard`], proposes a small normalized move toward its own goal,
//! and the [`scheduler`] merges the moves at rates that encode priority.
//! A human operator is just one more agent, steering live through the
//! [`session`] protocol or from a script.
//!
//! - [`world`]: prisms, collision-line length, line-of-sight and cone occlusion, finite-difference gradients
//! - [`body`]: trunk pose, head joints and limits, eye point, vision axis
//! - [`blackboard`]: snapshots, normalization, transactional apply
//! - [`agents`]: attraction, repulsion, head orientation, visibility, operator
//! - [`scheduler`]: rate-driven tick loop, convergence and stall detection, trace and replay
//! - [`scenario`]: scenario files, bundled scenes, run metrics
//! - [`session`]: the web-socket protocol used by the operator console

pub mod agents;
pub mod blackboard;
pub mod body;
pub mod scenario;
pub mod scheduler;
pub mod session;
pub mod world;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] world::GeometryError),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("target coincides with the eye point")]
    DegenerateDirection,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario:\n{}", .0.join("\n"))]
    Validation(Vec<String>),
    #[error("i/o error: {0}")]
    Io(String),
}
