//! Workspace, reachable configurations and N-connected regions.
//!
//! The reachable configurations form a 2-surface in the 4-dimensional space
//! `(x, y, theta1, theta2)`. Each assembly mode contributes one sheet; every
//! sheet is thickened into a 4D [`HyperTree`] and split into face-connected
//! components `R_j`. The projection of `R_j` on `(x, y)` is the N-connected
//! region `W_Nj`: any two poses inside it can be joined without crossing a
//! parallel singularity.

mod connectivity;
mod locus;
mod oracle;
mod reachable;
mod workspace;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypertree::{Bounds, TreeError};
use crate::kinematics::{Geometry, KinematicsError, Pose};

pub use connectivity::{check_trajectory, is_n_connected, Connectivity, FeasibilityVerdict, Trajectory};
pub use locus::singularity_locus;
pub use oracle::{grid_oracle, GridOracle, MIN_RESOLUTION as MIN_ORACLE_RESOLUTION};
pub use reachable::{
    build_reachable_configurations, configuration_root, joint_box, reachable_components, sheet_deposits,
    ConfigurationSpace, Deposit, ModeTags, ReachableRegion, Sheet,
};
pub use workspace::{compute_workspace, is_reachable, Workspace};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionsError {
    #[error("invalid analysis parameters: {0}")]
    Params(String),
    #[error("cartesian root {root:?} does not contain the reach disks {needed:?}")]
    RootTooSmall { root: Box<Bounds>, needed: Box<Bounds> },
    #[error("empty workspace")]
    EmptyWorkspace,
    #[error("trajectory point {index} ({x}, {y}) is outside the workspace")]
    Unreachable { index: usize, x: f64, y: f64 },
    #[error("invalid trajectory: {0}")]
    Trajectory(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

/// Discretization settings of the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisParams {
    pub cartesian_root: Bounds,
    /// Depth of the joint-space subdivision that is sampled.
    pub depth_q: u32,
    /// Depth of the 4D configuration tree.
    pub depth_4: u32,
    /// Depth of the Cartesian workspace tree.
    pub depth_w: u32,
    /// Samples per axis when evaluating a cell.
    pub samples: usize,
    /// Configurations with `|det A| <= epsilon` are excluded.
    pub epsilon: f64,
    /// Coverage tolerance of the N-connectivity test.
    pub tol: f64,
    /// Identify the joint limits `min` and `max` of both actuated joints.
    pub periodic: bool,
}

impl AnalysisParams {
    pub const DEPTH_Q: u32 = 8;
    pub const DEPTH_4: u32 = 7;
    pub const DEPTH_W: u32 = 8;
    pub const SAMPLES: usize = 3;
    pub const EPSILON: f64 = 0.05;
    pub const TOL: f64 = 0.01;

    /// Defaults over the smallest root holding both reach disks.
    pub fn for_geometry(g: &Geometry) -> Self {
        AnalysisParams {
            cartesian_root: default_cartesian_root(g),
            depth_q: Self::DEPTH_Q,
            depth_4: Self::DEPTH_4,
            depth_w: Self::DEPTH_W,
            samples: Self::SAMPLES,
            epsilon: Self::EPSILON,
            tol: Self::TOL,
            periodic: false,
        }
    }

    pub fn validate(&self) -> Result<(), RegionsError> {
        let bad = |msg: String| Err(RegionsError::Params(msg));
        if self.cartesian_root.dim() != 2 {
            return bad(format!("cartesian root must be 2-dimensional, got {}", self.cartesian_root.dim()));
        }
        for (name, d) in [("depth_q", self.depth_q), ("depth_4", self.depth_4), ("depth_w", self.depth_w)] {
            if !(4..=16).contains(&d) {
                return bad(format!("{name} = {d} must lie in 4..=16"));
            }
        }
        if self.samples < 2 {
            return bad(format!("samples = {} must be at least 2", self.samples));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon = {} must lie in (0, 1)", self.epsilon));
        }
        if !(self.tol > 0.0 && self.tol < 0.5) {
            return bad(format!("tol = {} must lie in (0, 0.5)", self.tol));
        }
        Ok(())
    }
}

/// Bounding box of the two disks reachable by the legs.
pub fn default_cartesian_root(g: &Geometry) -> Bounds {
    let r1 = g.l1 + g.l2;
    let r2 = g.l3 + g.l4;
    let lo = [(-r1).min(g.l0 - r2), -r1.max(r2)];
    let hi = [r1.max(g.l0 + r2), r1.max(r2)];
    Bounds::new(&lo, &hi).expect("positive link lengths give a proper box")
}

/// `s x s` lattice over a 2D box, corners included, row-major in axis 0.
pub(crate) fn lattice(b: &Bounds, s: usize) -> impl Iterator<Item = [f64; 2]> + '_ {
    let step = move |axis: usize, i: usize| {
        if i + 1 == s {
            b.hi()[axis]
        } else {
            b.lo()[axis] + b.width(axis) * i as f64 / (s - 1) as f64
        }
    };
    (0..s).flat_map(move |i| (0..s).map(move |j| [step(0, i), step(1, j)]))
}

/// Cell sample points: the lattice plus the exact center.
pub(crate) fn cell_samples(b: &Bounds, s: usize) -> Vec<Pose> {
    let mut pts: Vec<Pose> = lattice(b, s).map(|[x, y]| Pose::new(x, y)).collect();
    pts.push(Pose::new(b.mid(0), b.mid(1)));
    pts
}

/// Distance range `[min, max]` from `c` to the points of a 2D box.
pub(crate) fn distance_range(b: &Bounds, c: [f64; 2]) -> (f64, f64) {
    let mut near = 0.0;
    let mut far = 0.0;
    for i in 0..2 {
        let (lo, hi) = (b.lo()[i] - c[i], b.hi()[i] - c[i]);
        let n = if lo > 0.0 {
            lo
        } else if hi < 0.0 {
            hi
        } else {
            0.0
        };
        near += n * n;
        far += lo.abs().max(hi.abs()).powi(2);
    }
    (near.sqrt(), far.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_root_for_reference_geometry() {
        let root = default_cartesian_root(&Geometry::reference());
        assert_eq!(root.lo(), &[-13.0, -13.0]);
        assert_eq!(root.hi(), &[20.0, 13.0]);
    }

    #[test]
    fn params_validation() {
        let p = AnalysisParams::for_geometry(&Geometry::reference());
        assert!(p.validate().is_ok());
        assert!(AnalysisParams { depth_q: 3, ..p.clone() }.validate().is_err());
        assert!(AnalysisParams { samples: 1, ..p.clone() }.validate().is_err());
        assert!(AnalysisParams { epsilon: 1.0, ..p.clone() }.validate().is_err());
        assert!(AnalysisParams { tol: 0.5, ..p.clone() }.validate().is_err());
    }

    #[test]
    fn lattice_includes_corners() {
        let b = Bounds::new(&[0.0, 1.0], &[2.0, 3.0]).unwrap();
        let pts: Vec<_> = lattice(&b, 3).collect();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], [0.0, 1.0]);
        assert_eq!(pts[4], [1.0, 2.0]);
        assert_eq!(pts[8], [2.0, 3.0]);
    }

    #[test]
    fn distance_range_of_box() {
        let b = Bounds::new(&[1.0, -1.0], &[2.0, 1.0]).unwrap();
        let (near, far) = distance_range(&b, [0.0, 0.0]);
        assert_eq!(near, 1.0);
        assert_eq!(far, 5f64.sqrt());
    }
}
