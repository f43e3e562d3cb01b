//! Coverage control with asynchronous event-triggered broadcasting.
//!
//! A group of agents deploys inside a convex polygon and descends the
//! locational cost `H(P) = Σᵢ ∫_{Vᵢ} ‖q − pᵢ‖² φ(q) dq` toward a centroidal
//! Voronoi configuration. Agents never request information: each one decides
//! locally when to broadcast its position and a speed promise, and over what
//! radius, based on guaranteed / dual-guaranteed Voronoi cells built from the
//! uncertainty disks implied by the promises it holds.
//!
//! Crate layout:
//! - [`geometry`]: polygons, half-plane clipping, distance-difference (focal)
//!   clipping, minimum enclosing circles, lens projection.
//! - [`density`]: density fields and Gauss quadrature for mass / centroid.
//! - [`partition`]: exact Voronoi cells plus conservative guaranteed and
//!   dual-guaranteed cells from uncertainty disks, and neighbor predicates.
//! - [`controller`]: the per-agent state machine (motion law, decision law,
//!   broadcast radius, potential-neighbor maintenance, variable speed).
//! - [`sim`]: the deterministic time-stepped engine, broadcast medium,
//!   baseline controllers, metrics and trace serialization.

pub mod controller;
pub mod density;
pub mod error;
pub mod geometry;
pub mod partition;
pub mod sim;

pub use controller::{AgentId, AgentRecord, AgentState, BroadcastMsg, ControlDecision};
pub use density::{DensityField, MassCentroid};
pub use error::{Error, Result};
pub use geometry::{Circle, HalfPlane, Point2, SimplePolygon};
pub use partition::{CellPair, UncertaintyDisk};
pub use sim::{ControllerKind, Scenario, SimTrace};
