//! Point-to-point connectivity of planar fully-parallel manipulator workspaces.
//!
//! The crate is split in three layers:
//!
//! - [`hypertree`]: dimension-generic `2^k`-trees with set algebra, face
//!   adjacency, connected components and axis projection.
//! - [`kinematics`]: closed-form direct/inverse kinematics, Jacobians and
//!   singularity measures of the RR-RRR five-bar.
//! - [`regions`]: the Cartesian workspace, the reachable configurations in
//!   the Cartesian x joint product space, their singularity-free connected
//!   components and the N-connected regions obtained by projecting them.

pub mod hypertree;
pub mod kinematics;
pub mod regions;

pub use hypertree::{Bounds, CellColor, ComponentLabeling, HyperTree, LeafId, LeafPolicy, TreeError};
