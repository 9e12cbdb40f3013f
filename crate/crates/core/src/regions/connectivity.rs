use serde::{Deserialize, Serialize};

use crate::hypertree::CellColor;
use crate::kinematics::{JointVector, Pose};

use super::reachable::ReachableRegion;
use super::workspace::Workspace;
use super::RegionsError;

/// N-connectivity verdict with the coverage ratio of every region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Connectivity {
    pub n_connected: bool,
    /// `measure(W & W_Nj) / measure(W)`, indexed by region id.
    pub coverage: Vec<f64>,
}

impl Connectivity {
    pub fn max_coverage(&self) -> f64 {
        self.coverage.iter().copied().fold(0.0, f64::max)
    }
}

/// W is N-connected when one region covers it up to `tol`.
pub fn is_n_connected(w: &Workspace, regions: &[ReachableRegion], tol: f64) -> Result<Connectivity, RegionsError> {
    let total = w.measure();
    if total <= 0.0 {
        return Err(RegionsError::EmptyWorkspace);
    }
    let coverage = regions
        .iter()
        .map(|r| Ok(w.tree.intersect(&r.projection)?.measure() / total))
        .collect::<Result<Vec<f64>, RegionsError>>()?;
    let n_connected = coverage.iter().any(|&c| c >= 1.0 - tol);
    Ok(Connectivity { n_connected, coverage })
}

/// Ordered list of at least two poses.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    points: Vec<Pose>,
}

impl Trajectory {
    pub fn new(points: Vec<Pose>) -> Result<Self, RegionsError> {
        if points.len() < 2 {
            return Err(RegionsError::Trajectory(format!("need at least 2 points, got {}", points.len())));
        }
        if let Some(i) = points.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(RegionsError::Trajectory(format!("point {i} is not finite")));
        }
        Ok(Trajectory { points })
    }

    pub fn points(&self) -> &[Pose] {
        &self.points
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// Smallest region holding every point.
    pub region: Option<usize>,
    /// One joint vector per point, the joint center of a 4D cell of `region`
    /// above that point.
    pub postures: Vec<JointVector>,
    /// First point whose region set empties the running intersection.
    pub offending_point: Option<usize>,
    /// `S_i`: ids of the regions whose projection holds point `i`.
    pub candidate_sets: Vec<Vec<usize>>,
}

/// Decides whether every point of `t` lies in one common N-connected region.
pub fn check_trajectory(
    t: &Trajectory,
    regions: &[ReachableRegion],
    w: &Workspace,
) -> Result<FeasibilityVerdict, RegionsError> {
    let mut candidate_sets = Vec::with_capacity(t.points.len());
    for (index, x) in t.points.iter().enumerate() {
        let p = [x.x, x.y];
        if !w.tree.root_box().contains_point(&p) || w.tree.contains(&p)? != CellColor::Inside {
            return Err(RegionsError::Unreachable { index, x: x.x, y: x.y });
        }
        let mut set = Vec::new();
        for r in regions {
            if r.projection.contains(&p)? == CellColor::Inside {
                set.push(r.id);
            }
        }
        candidate_sets.push(set);
    }

    let mut common = candidate_sets[0].clone();
    let mut offending_point = common.is_empty().then_some(0);
    for (i, set) in candidate_sets.iter().enumerate().skip(1) {
        if offending_point.is_some() {
            break;
        }
        common.retain(|j| set.contains(j));
        if common.is_empty() {
            offending_point = Some(i);
        }
    }
    if let Some(i) = offending_point {
        return Ok(FeasibilityVerdict {
            feasible: false,
            region: None,
            postures: Vec::new(),
            offending_point: Some(i),
            candidate_sets,
        });
    }

    let j = *common.iter().min().expect("nonempty intersection");
    let region = regions.iter().find(|r| r.id == j).expect("ids come from the region list");
    let postures = t
        .points
        .iter()
        .map(|x| {
            let p = [x.x, x.y];
            let (_, cell) = region
                .cells
                .find_inside_leaf(|b| b.lo()[0] <= p[0] && p[0] <= b.hi()[0] && b.lo()[1] <= p[1] && p[1] <= b.hi()[1])
                .expect("a projection cell always has a 4D cell above it");
            JointVector::new(cell.mid(2), cell.mid(3))
        })
        .collect();
    Ok(FeasibilityVerdict { feasible: true, region: Some(j), postures, offending_point: None, candidate_sets })
}
