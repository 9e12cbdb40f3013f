use crate::hypertree::{Bounds, CellColor, HyperTree};
use crate::kinematics::{configuration, ikp, jacobians, Geometry, Pose, Sign};

use super::workspace::compute_workspace;
use super::{cell_samples, AnalysisParams, RegionsError};

/// `|det A|` of the in-limit ikp branch with posture `(gamma1, gamma2)` at
/// `x`, if that branch exists. A stretched or folded leg matches both signs.
fn branch_det(g: &Geometry, x: Pose, posture: (Sign, Sign)) -> Option<f64> {
    let matches = |s: Sign, want: Sign| s == want || s == Sign::Zero;
    ikp(g, x)
        .ok()?
        .into_iter()
        .filter(|s| s.within_limits && matches(s.signs.gamma1, posture.0) && matches(s.signs.gamma2, posture.1))
        .map(|s| jacobians(g, &configuration(g, x, s.joints)).det_a.abs())
        .reduce(f64::min)
}

/// Cartesian cells where the posture's branch exists and comes within
/// `epsilon` of a parallel singularity, clipped to the workspace.
pub fn singularity_locus(
    g: &Geometry,
    posture: (Sign, Sign),
    params: &AnalysisParams,
) -> Result<HyperTree, RegionsError> {
    if posture.0 == Sign::Zero || posture.1 == Sign::Zero {
        return Err(RegionsError::Params("posture signs must be +1 or -1".into()));
    }
    let w = compute_workspace(g, params)?;
    let eps = params.epsilon;
    let classify = |b: &Bounds| {
        let dets: Vec<Option<f64>> =
            cell_samples(b, params.samples).into_iter().map(|x| branch_det(g, x, posture)).collect();
        if dets.iter().all(|d| d.is_some_and(|v| v < eps)) {
            CellColor::Inside
        } else {
            CellColor::Mixed
        }
    };
    let resolve = |b: &Bounds| {
        cell_samples(b, params.samples).into_iter().filter_map(|x| branch_det(g, x, posture)).any(|v| v < eps)
    };
    let locus = HyperTree::build_with_resolver(params.cartesian_root, params.depth_w, classify, resolve)?;
    Ok(locus.intersect(&w.tree)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_posture_signs_rejected() {
        let g = Geometry::reference();
        let params = AnalysisParams::for_geometry(&g);
        assert!(singularity_locus(&g, (Sign::Zero, Sign::Positive), &params).is_err());
    }
}
