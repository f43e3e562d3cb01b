//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation needed at least one point / vertex and got none.
    #[error("degenerate set: {0}")]
    DegenerateSet(&'static str),

    /// Two sites coincide; a Voronoi bisector cannot be formed.
    #[error("degenerate configuration: coincident positions")]
    DegenerateConfiguration,

    /// The uncertainty disk reaches past the other focus: the distance
    /// difference locus does not exist and the focal constraint is either
    /// vacuous or total.
    #[error("uncertainty swallows bisector (delta {delta} >= focal distance {focal_distance})")]
    UncertaintySwallowsBisector { delta: f64, focal_distance: f64 },

    /// Both centroid balls should intersect whenever the cell sandwich holds;
    /// an empty lens signals a geometry or quadrature bug upstream.
    #[error("inconsistent centroid bound: lens is empty")]
    InconsistentCentroidBound,

    /// A dual-guaranteed cell with zero mass cannot bound the centroid.
    #[error("degenerate dual cell: zero mass")]
    DegenerateDualCell,

    /// Queried a record that was never received.
    #[error("no information for agent {0}")]
    NoInformation(usize),

    /// Timestamps passed out of order.
    #[error("time ordering violation: {0}")]
    TimeOrdering(&'static str),

    /// Motion control invoked with nonzero speed but no direction.
    #[error("control input undefined: positive speed with target reached")]
    ControlUndefined,

    /// An integrated position escaped the domain polygon.
    #[error("containment violation: agent {agent} left the domain at t={time}")]
    ContainmentViolation { agent: usize, time: f64 },

    /// Bad scenario or config input.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("config error at line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
