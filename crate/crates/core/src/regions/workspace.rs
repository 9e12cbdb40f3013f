use crate::hypertree::{Bounds, CellColor, HyperTree};
use crate::kinematics::{ikp, Geometry, Pose};

use super::{cell_samples, default_cartesian_root, distance_range, AnalysisParams, RegionsError};

/// Cartesian workspace `W`: poses with at least one in-limit posture.
#[derive(Clone, Debug, PartialEq)]
pub struct Workspace {
    pub tree: HyperTree,
}

impl Workspace {
    pub fn measure(&self) -> f64 {
        self.tree.measure()
    }
}

/// Exact membership in `W`.
pub fn is_reachable(g: &Geometry, x: Pose) -> bool {
    ikp(g, x).map(|sols| sols.iter().any(|s| s.within_limits)).unwrap_or(false)
}

/// True when some annulus boundary circle passes through the box.
fn crosses_annulus(g: &Geometry, b: &Bounds) -> bool {
    let (in1, out1) = g.leg1_annulus();
    let (in2, out2) = g.leg2_annulus();
    let a = distance_range(b, [0.0, 0.0]);
    let bb = distance_range(b, [g.l0, 0.0]);
    let crosses = |(near, far): (f64, f64), r: f64| near <= r && r <= far;
    crosses(a, in1) || crosses(a, out1) || crosses(bb, in2) || crosses(bb, out2)
}

pub(crate) fn check_root(g: &Geometry, root: &Bounds) -> Result<(), RegionsError> {
    let needed = default_cartesian_root(g);
    if root.dim() != 2 || !root.contains_box(&needed) {
        return Err(RegionsError::RootTooSmall { root: Box::new(*root), needed: Box::new(needed) });
    }
    Ok(())
}

/// Quadtree of `W` over `params.cartesian_root` at depth `params.depth_w`.
///
/// A cell is inside when every sample (lattice and center) is reachable and
/// outside when none is and no annulus boundary crosses it; remaining cells
/// at the maximum depth take the verdict of their center.
pub fn compute_workspace(g: &Geometry, params: &AnalysisParams) -> Result<Workspace, RegionsError> {
    params.validate()?;
    check_root(g, &params.cartesian_root)?;
    let classify = |b: &Bounds| {
        let samples = cell_samples(b, params.samples);
        let hits = samples.iter().filter(|&&x| is_reachable(g, x)).count();
        if hits == samples.len() {
            CellColor::Inside
        } else if hits == 0 && !crosses_annulus(g, b) {
            CellColor::Outside
        } else {
            CellColor::Mixed
        }
    };
    let resolve = |b: &Bounds| is_reachable(g, Pose::new(b.mid(0), b.mid(1)));
    let tree = HyperTree::build_with_resolver(params.cartesian_root, params.depth_w, classify, resolve)?;
    Ok(Workspace { tree })
}
