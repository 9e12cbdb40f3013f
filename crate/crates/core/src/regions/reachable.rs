//! Reachable configurations in the `(x, y, theta1, theta2)` product space.
//!
//! The joint box is cut into cells at depth `depth_q`. For each assembly mode
//! a cell is kept only when the direct kinematics assembles at every sample
//! and every sample has `|det A| > epsilon`; cells touching the tangency locus
//! or a parallel singularity therefore contribute nothing. A kept cell is
//! deposited in the 4D tree as `(xy hull of the sampled poses, inflated) x
//! (joint cell)`.
//!
//! The inflation is the sampled Lipschitz bound
//! `0.5 * diag(cell) * max ||A^-1 B|| * 1.5` plus half a 4D leaf on each
//! Cartesian axis. The half leaf guarantees that deposits of neighboring
//! joint cells share a lattice center, so the sheet stays face-connected in
//! the tree. Where the Lipschitz term exceeds half a leaf (close to parallel
//! singularities `||A^-1 B||` grows like `1 / |det A|`) the cell is bisected
//! again, up to `MAX_REFINE` extra levels, before depositing.
//!
//! The joint extent of a deposit is its enclosing `depth_4` cell, so a
//! refined piece is only deposited when that whole cell passes the same
//! sample test.
//!
//! Since `det A` keeps its sign on any singularity-free connected set, each
//! mode sheet lives in its own tree and is labeled separately.

use std::collections::BTreeMap;

use log::{debug, warn};
use rayon::prelude::*;

use crate::hypertree::{Bounds, HyperTree, LeafId};
use crate::kinematics::{dkp, jacobians, AssemblyMode, Geometry, JointVector};

use super::workspace::check_root;
use super::{lattice, AnalysisParams, RegionsError};

/// Extra bisection levels allowed below `depth_q`.
pub const MAX_REFINE: u32 = 8;

/// Safety factor on the sampled Lipschitz constant.
const LIPSCHITZ_SAFETY: f64 = 1.5;

/// Actuated joint box `[theta1] x [theta2]`.
pub fn joint_box(g: &Geometry) -> Bounds {
    Bounds::new(&[g.theta1.min, g.theta2.min], &[g.theta1.max, g.theta2.max])
        .expect("joint limits are validated by Geometry")
}

/// Root box of the 4D tree, axes ordered `(x, y, theta1, theta2)`.
pub fn configuration_root(g: &Geometry, params: &AnalysisParams) -> Result<Bounds, RegionsError> {
    Ok(params.cartesian_root.product(&joint_box(g))?)
}

/// One thickened piece of a mode sheet.
#[derive(Clone, Debug, PartialEq)]
pub struct Deposit {
    pub mode: AssemblyMode,
    /// Sampled joint cell, as a locational code under [`joint_box`].
    pub joint_cell: LeafId,
    pub joint_bounds: Bounds,
    /// Lipschitz part of the Cartesian inflation.
    pub lipschitz_margin: f64,
    /// Box inserted into the 4D tree.
    pub cell: Bounds,
}

struct SheetContext<'a> {
    g: &'a Geometry,
    params: &'a AnalysisParams,
    mode: AssemblyMode,
    joints: Bounds,
    half_leaf: [f64; 2],
}

impl SheetContext<'_> {
    /// Assembly and `|det A| > epsilon` at every sample of a joint box.
    fn is_regular(&self, cell: &Bounds) -> bool {
        lattice(cell, self.params.samples).all(|[t1, t2]| {
            dkp(self.g, JointVector::new(t1, t2), self.mode)
                .is_ok_and(|c| jacobians(self.g, &c).det_a.abs() > self.params.epsilon)
        })
    }

    fn evaluate(&self, path: &mut Vec<u8>, out: &mut Vec<Deposit>) {
        let id = LeafId::from_path(path.clone());
        let cell = id.bounds(&self.joints);
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        let mut gain: f64 = 0.0;
        for [t1, t2] in lattice(&cell, self.params.samples) {
            let Ok(cfg) = dkp(self.g, JointVector::new(t1, t2), self.mode) else {
                return;
            };
            let m = jacobians(self.g, &cfg);
            if m.det_a.abs() <= self.params.epsilon {
                return;
            }
            gain = gain.max(m.velocity_gain().unwrap_or(f64::INFINITY));
            for (i, v) in [cfg.pose.x, cfg.pose.y].into_iter().enumerate() {
                lo[i] = lo[i].min(v);
                hi[i] = hi[i].max(v);
            }
        }
        let lipschitz = 0.5 * cell.diagonal() * gain * LIPSCHITZ_SAFETY;
        let extra = path.len() as u32 - self.params.depth_q;
        if lipschitz > self.half_leaf[0].min(self.half_leaf[1]) && extra < MAX_REFINE {
            for c in 0..4u8 {
                path.push(c);
                self.evaluate(path, out);
                path.pop();
            }
            return;
        }
        let snapped = &path[..path.len().min(self.params.depth_4 as usize)];
        let joint_extent = LeafId::from_path(snapped.to_vec()).bounds(&self.joints);
        if snapped.len() < path.len() && !self.is_regular(&joint_extent) {
            return;
        }
        let margin = [lipschitz + self.half_leaf[0], lipschitz + self.half_leaf[1]];
        let cell4 = Bounds::new(
            &[lo[0] - margin[0], lo[1] - margin[1], joint_extent.lo()[0], joint_extent.lo()[1]],
            &[hi[0] + margin[0], hi[1] + margin[1], joint_extent.hi()[0], joint_extent.hi()[1]],
        )
        .expect("inflated box has positive width");
        out.push(Deposit {
            mode: self.mode,
            joint_cell: id,
            joint_bounds: cell,
            lipschitz_margin: lipschitz,
            cell: cell4,
        });
    }
}

/// Thickened pieces of the `mode` sheet, in lexicographic joint-cell order.
pub fn sheet_deposits(g: &Geometry, params: &AnalysisParams, mode: AssemblyMode) -> Result<Vec<Deposit>, RegionsError> {
    params.validate()?;
    let root = params.cartesian_root;
    let leaves = f64::powi(2.0, params.depth_4 as i32);
    let ctx = SheetContext {
        g,
        params,
        mode,
        joints: joint_box(g),
        half_leaf: [0.5 * root.width(0) / leaves, 0.5 * root.width(1) / leaves],
    };
    let depth = params.depth_q;
    let deposits = (0..1u64 << (2 * depth))
        .into_par_iter()
        .flat_map_iter(|idx| {
            let mut path: Vec<u8> = (0..depth).map(|l| (idx >> (2 * (depth - 1 - l)) & 3) as u8).collect();
            let mut out = Vec::new();
            ctx.evaluate(&mut path, &mut out);
            out
        })
        .collect();
    Ok(deposits)
}

/// One mode sheet of the reachable configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct Sheet {
    pub mode: AssemblyMode,
    pub tree: HyperTree,
    pub deposits: usize,
}

/// The thickened reachable-configuration set, one tree per assembly mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigurationSpace {
    pub root: Bounds,
    pub sheets: Vec<Sheet>,
    /// Finest-lattice cells claimed by both modes.
    pub cross_tagged_cells: u128,
}

impl ConfigurationSpace {
    /// All reachable configurations regardless of mode.
    pub fn union(&self) -> Result<HyperTree, RegionsError> {
        let mut acc = HyperTree::empty(self.root, self.sheets[0].tree.max_depth())?;
        for s in &self.sheets {
            acc = acc.union(&s.tree)?;
        }
        Ok(acc)
    }

    pub fn sheet(&self, mode: AssemblyMode) -> &Sheet {
        self.sheets.iter().find(|s| s.mode == mode).expect("one sheet per mode")
    }
}

fn with_joint_periodicity(t: HyperTree, periodic: bool) -> HyperTree {
    t.with_periodic(2, periodic).with_periodic(3, periodic)
}

/// Builds both mode sheets in the 4D tree.
pub fn build_reachable_configurations(
    g: &Geometry,
    params: &AnalysisParams,
) -> Result<ConfigurationSpace, RegionsError> {
    params.validate()?;
    check_root(g, &params.cartesian_root)?;
    if params.periodic && [g.theta1, g.theta2].iter().any(|l| (l.span() - std::f64::consts::TAU).abs() > 1e-9) {
        return Err(RegionsError::Params("periodic joints require limits spanning a full turn".into()));
    }
    let root = configuration_root(g, params)?;
    let mut sheets = Vec::new();
    for mode in AssemblyMode::BOTH {
        let deposits = sheet_deposits(g, params, mode)?;
        let boxes: Vec<Bounds> = deposits.iter().map(|d| d.cell).collect();
        let tree = HyperTree::empty(root, params.depth_4)?.insert_boxes(&boxes)?;
        debug!("mode {mode}: {} deposits, {} leaves", deposits.len(), tree.leaf_count());
        sheets.push(Sheet { mode, tree: with_joint_periodicity(tree, params.periodic), deposits: deposits.len() });
    }
    let cross_tagged_cells = sheets[0].tree.intersect(&sheets[1].tree)?.lattice_measure();
    if cross_tagged_cells > 0 {
        warn!(
            "{cross_tagged_cells} configuration cells carry both assembly modes; \
             the sheets are under-resolved near the parallel singularity (raise depth_q/depth_4 or epsilon)"
        );
    }
    Ok(ConfigurationSpace { root, sheets, cross_tagged_cells })
}

/// Finest-lattice cell counts per assembly-mode tag.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModeTags {
    pub positive: u128,
    pub negative: u128,
}

/// A connected component `R_j` and its Cartesian projection `W_Nj`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReachableRegion {
    pub id: usize,
    pub mode: AssemblyMode,
    pub cells: HyperTree,
    pub projection: HyperTree,
    pub mode_tags: ModeTags,
}

/// Face-connected components of every sheet, numbered sheet by sheet
/// (positive mode first) in lexicographic order of their first leaf.
pub fn reachable_components(cs: &ConfigurationSpace) -> Result<Vec<ReachableRegion>, RegionsError> {
    let mut regions = Vec::new();
    for sheet in &cs.sheets {
        let labeling = sheet.tree.connected_components();
        let mut members: BTreeMap<usize, Vec<&LeafId>> = BTreeMap::new();
        for (id, &label) in labeling.leaves().iter().zip(labeling.labels()) {
            members.entry(label).or_default().push(id);
        }
        for leaves in members.into_values() {
            let cells = HyperTree::from_leaves(cs.root, sheet.tree.max_depth(), leaves)?;
            let cells = with_joint_periodicity(cells, sheet.tree.is_periodic(2));
            let projection = cells.project(&[0, 1])?;
            let own = cells.lattice_measure();
            let mut shared = 0;
            for other in cs.sheets.iter().filter(|o| o.mode != sheet.mode) {
                shared += cells.intersect(&other.tree)?.lattice_measure();
            }
            let mode_tags = match sheet.mode {
                AssemblyMode::Positive => ModeTags { positive: own, negative: shared },
                AssemblyMode::Negative => ModeTags { positive: shared, negative: own },
            };
            regions.push(ReachableRegion { id: regions.len(), mode: sheet.mode, cells, projection, mode_tags });
        }
    }
    Ok(regions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::JointVector;
    use std::f64::consts::FRAC_PI_2;

    fn deposits_covering(deposits: &[Deposit], q: JointVector) -> Vec<&Deposit> {
        deposits.iter().filter(|d| d.joint_bounds.contains_point(&[q.theta1, q.theta2])).collect()
    }

    #[test]
    fn reference_joint_cell_contributes_to_both_sheets() {
        let g = Geometry::reference();
        let params = AnalysisParams::for_geometry(&g);
        let q = JointVector::new(FRAC_PI_2, FRAC_PI_2);
        let up = sheet_deposits(&g, &params, AssemblyMode::Positive).unwrap();
        let down = sheet_deposits(&g, &params, AssemblyMode::Negative).unwrap();
        let up = deposits_covering(&up, q);
        let down = deposits_covering(&down, q);
        assert!(!up.is_empty() && !down.is_empty());
        for d in &up {
            assert!(d.cell.contains_point(&[3.5, 11.5707, q.theta1, q.theta2]));
        }
        for d in &down {
            assert!(d.cell.contains_point(&[3.5, 4.4293, q.theta1, q.theta2]));
        }
        // the two boxes are far apart in y
        assert!(up.iter().all(|u| down.iter().all(|d| !u.cell.overlaps(&d.cell))));
    }

    #[test]
    fn unassemblable_cells_contribute_nothing() {
        let g = Geometry::reference();
        let params = AnalysisParams::for_geometry(&g);
        for mode in AssemblyMode::BOTH {
            let deposits = sheet_deposits(&g, &params, mode).unwrap();
            // q = (pi, 0) puts C and D 23 apart
            assert!(deposits_covering(&deposits, JointVector::new(3.1, 0.05)).is_empty());
        }
    }

    #[test]
    fn tangency_cells_contribute_nothing() {
        let g = Geometry::reference();
        let params = AnalysisParams::for_geometry(&g);
        let t2 = 1.1886456505627858;
        for mode in AssemblyMode::BOTH {
            let deposits = sheet_deposits(&g, &params, mode).unwrap();
            assert!(deposits_covering(&deposits, JointVector::new(FRAC_PI_2, t2)).is_empty());
        }
    }

    #[test]
    fn periodic_needs_full_turn() {
        let g = Geometry::reference();
        let params = AnalysisParams { periodic: true, ..AnalysisParams::for_geometry(&g) };
        assert!(matches!(build_reachable_configurations(&g, &params), Err(RegionsError::Params(_))));
    }
}
