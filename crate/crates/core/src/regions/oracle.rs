//! Dense-grid reference for the region pipeline.
//!
//! The joint box is cut into `resolution x resolution` cells per assembly
//! mode. A cell is valid when the direct kinematics assembles at its center
//! with `|det A| > epsilon`; valid cells are flood-filled with 4-adjacency.
//! Cartesian membership is read back through the inverse kinematics: a pose
//! belongs to every component holding the grid cell of one of its in-limit
//! postures.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::hypertree::{Bounds, CellColor};
use crate::kinematics::{configuration, dkp, ikp, jacobians, AssemblyMode, Geometry, JointVector, Pose};

use super::reachable::{joint_box, ReachableRegion};

/// Smallest accepted grid resolution.
pub const MIN_RESOLUTION: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct GridOracle {
    resolution: usize,
    epsilon: f64,
    periodic: bool,
    joints: Bounds,
    /// Component label per cell, row-major with `theta1` as the row; one grid
    /// per mode in [`AssemblyMode::BOTH`] order.
    labels: [Vec<Option<usize>>; 2],
    modes: Vec<AssemblyMode>,
    sizes: Vec<usize>,
}

fn mode_slot(mode: AssemblyMode) -> usize {
    match mode {
        AssemblyMode::Positive => 0,
        AssemblyMode::Negative => 1,
    }
}

/// Labels the valid cells of both mode sheets; components are numbered
/// positive mode first, each sheet in row-major order of first cell.
pub fn grid_oracle(g: &Geometry, resolution: usize, epsilon: f64, periodic: bool) -> GridOracle {
    assert!(resolution >= MIN_RESOLUTION, "resolution {resolution} below {MIN_RESOLUTION}");
    let joints = joint_box(g);
    let n = resolution;
    let mut modes = Vec::new();
    let mut sizes = Vec::new();
    let mut labels: [Vec<Option<usize>>; 2] = [Vec::new(), Vec::new()];
    for mode in AssemblyMode::BOTH {
        let valid: Vec<bool> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let q = cell_center(&joints, n, idx / n, idx % n);
                dkp(g, q, mode).is_ok_and(|c| jacobians(g, &c).det_a.abs() > epsilon)
            })
            .collect();
        let mut lab = vec![None; n * n];
        let mut queue = VecDeque::new();
        for start in 0..n * n {
            if !valid[start] || lab[start].is_some() {
                continue;
            }
            let id = modes.len();
            modes.push(mode);
            let mut size = 0;
            lab[start] = Some(id);
            queue.push_back(start);
            while let Some(c) = queue.pop_front() {
                size += 1;
                let (i, j) = (c / n, c % n);
                for (di, dj) in [(-1i64, 0i64), (1, 0), (0, -1), (0, 1)] {
                    let step = |v: usize, d: i64| -> Option<usize> {
                        let w = v as i64 + d;
                        if (0..n as i64).contains(&w) {
                            Some(w as usize)
                        } else if periodic {
                            Some(w.rem_euclid(n as i64) as usize)
                        } else {
                            None
                        }
                    };
                    let (Some(a), Some(b)) = (step(i, di), step(j, dj)) else { continue };
                    let nb = a * n + b;
                    if valid[nb] && lab[nb].is_none() {
                        lab[nb] = Some(id);
                        queue.push_back(nb);
                    }
                }
            }
            sizes.push(size);
        }
        labels[mode_slot(mode)] = lab;
    }
    GridOracle { resolution, epsilon, periodic, joints, labels, modes, sizes }
}

fn cell_center(joints: &Bounds, n: usize, i: usize, j: usize) -> JointVector {
    let t1 = joints.lo()[0] + joints.width(0) * (i as f64 + 0.5) / n as f64;
    let t2 = joints.lo()[1] + joints.width(1) * (j as f64 + 0.5) / n as f64;
    JointVector::new(t1, t2)
}

impl GridOracle {
    pub fn component_count(&self) -> usize {
        self.modes.len()
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn component_mode(&self, c: usize) -> AssemblyMode {
        self.modes[c]
    }

    /// Cell counts per component.
    pub fn component_sizes(&self) -> &[usize] {
        &self.sizes
    }

    /// Grid index of a joint angle, wrapping it into the box first.
    fn axis_index(&self, axis: usize, theta: f64) -> usize {
        let lo = self.joints.lo()[axis];
        let t = lo + (theta - lo).rem_euclid(TAU);
        let f = (t - lo) / self.joints.width(axis) * self.resolution as f64;
        (f.max(0.0) as usize).min(self.resolution - 1)
    }

    /// Component of the `mode` sheet holding joint vector `q`.
    pub fn label_at(&self, mode: AssemblyMode, q: JointVector) -> Option<usize> {
        let i = self.axis_index(0, q.theta1);
        let j = self.axis_index(1, q.theta2);
        self.labels[mode_slot(mode)][i * self.resolution + j]
    }

    /// Sorted, deduplicated components whose projection holds `x`.
    pub fn classify(&self, g: &Geometry, x: Pose) -> Vec<usize> {
        let mut out: Vec<usize> = ikp(g, x)
            .map(|sols| {
                sols.into_iter()
                    .filter(|s| s.within_limits)
                    .filter_map(|s| {
                        let det = jacobians(g, &configuration(g, x, s.joints)).det_a;
                        let mode = if det > 0.0 { AssemblyMode::Positive } else { AssemblyMode::Negative };
                        self.label_at(mode, s.joints)
                    })
                    .collect()
            })
            .unwrap_or_default();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Row-major raster (axis 0 as row) of component `c` over `root`,
    /// sampled at cell centers.
    pub fn cartesian_mask(&self, g: &Geometry, c: usize, root: &Bounds, resolution: usize) -> Vec<bool> {
        (0..resolution * resolution)
            .into_par_iter()
            .map(|idx| {
                let x = root.lo()[0] + root.width(0) * ((idx / resolution) as f64 + 0.5) / resolution as f64;
                let y = root.lo()[1] + root.width(1) * ((idx % resolution) as f64 + 0.5) / resolution as f64;
                self.classify(g, Pose::new(x, y)).contains(&c)
            })
            .collect()
    }

    /// Tree region best matching each oracle component: the region of the
    /// same mode whose 4D cells hold most of the component's grid points.
    pub fn match_regions(&self, g: &Geometry, regions: &[ReachableRegion]) -> Vec<Option<usize>> {
        let n = self.resolution;
        let stride = (n / 128).max(1);
        let mut votes: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); self.component_count()];
        for mode in AssemblyMode::BOTH {
            let labels = &self.labels[mode_slot(mode)];
            let candidates: Vec<&ReachableRegion> = regions.iter().filter(|r| r.mode == mode).collect();
            for i in (0..n).step_by(stride) {
                for j in (0..n).step_by(stride) {
                    let Some(c) = labels[i * n + j] else { continue };
                    let q = cell_center(&self.joints, n, i, j);
                    let Ok(cfg) = dkp(g, q, mode) else { continue };
                    let p = [cfg.pose.x, cfg.pose.y, q.theta1, q.theta2];
                    for r in &candidates {
                        if r.cells.root_box().contains_point(&p) && r.cells.contains(&p) == Ok(CellColor::Inside) {
                            *votes[c].entry(r.id).or_default() += 1;
                        }
                    }
                }
            }
        }
        votes
            .into_iter()
            .map(|v| v.into_iter().max_by_key(|&(id, count)| (count, std::cmp::Reverse(id))).map(|(id, _)| id))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn disjoint_legs_have_no_components() {
        let g = Geometry::reference();
        let far = Geometry::new([100.0, 8.0, 5.0, 8.0, 5.0], g.theta1, g.theta2).unwrap();
        assert_eq!(grid_oracle(&far, 64, 0.05, false).component_count(), 0);
    }

    #[test]
    fn reference_pose_classified_in_both_modes() {
        let g = Geometry::reference();
        let o = grid_oracle(&g, 128, 0.05, false);
        let q = JointVector::new(FRAC_PI_2, FRAC_PI_2);
        let up = o.label_at(AssemblyMode::Positive, q).unwrap();
        let down = o.label_at(AssemblyMode::Negative, q).unwrap();
        assert_eq!(o.component_mode(up), AssemblyMode::Positive);
        assert_eq!(o.component_mode(down), AssemblyMode::Negative);
        assert!(o.classify(&g, Pose::new(3.5, 11.5707)).contains(&up));
        assert!(o.classify(&g, Pose::new(3.5, 4.4293)).contains(&down));
    }
}
