use std::f64::consts::PI;
use std::sync::OnceLock;

use nregions::kinematics::{dkp, jacobians, Geometry, JointLimits, JointVector, Pose, Sign};
use nregions::regions::{
    build_reachable_configurations, check_trajectory, compute_workspace, is_n_connected, is_reachable,
    reachable_components, sheet_deposits, singularity_locus, AnalysisParams, ConfigurationSpace, ReachableRegion,
    RegionsError, Trajectory, Workspace,
};
use nregions::{CellColor, HyperTree};

struct Scenario {
    g: Geometry,
    params: AnalysisParams,
    w: Workspace,
    cs: ConfigurationSpace,
    regions: Vec<ReachableRegion>,
}

fn scenario(lo: f64, hi: f64) -> Scenario {
    let l = JointLimits::new(lo, hi).unwrap();
    let g = Geometry::reference().with_limits(l, l).unwrap();
    let params = AnalysisParams::for_geometry(&g);
    let w = compute_workspace(&g, &params).unwrap();
    let cs = build_reachable_configurations(&g, &params).unwrap();
    let regions = reachable_components(&cs).unwrap();
    Scenario { g, params, w, cs, regions }
}

fn restricted() -> &'static Scenario {
    static S: OnceLock<Scenario> = OnceLock::new();
    S.get_or_init(|| scenario(0.0, PI))
}

fn relaxed() -> &'static Scenario {
    static S: OnceLock<Scenario> = OnceLock::new();
    S.get_or_init(|| scenario(-PI, PI))
}

fn scenarios() -> [&'static Scenario; 2] {
    [restricted(), relaxed()]
}

#[test]
fn every_configuration_cell_is_regular_on_a_fresh_grid() {
    for s in scenarios() {
        for sheet in &s.cs.sheets {
            for (_, b) in sheet.tree.inside_leaves() {
                let mut min = f64::INFINITY;
                for i in 0..5 {
                    for j in 0..5 {
                        let q = JointVector::new(
                            b.lo()[2] + b.width(2) * i as f64 / 4.0,
                            b.lo()[3] + b.width(3) * j as f64 / 4.0,
                        );
                        let c = dkp(&s.g, q, sheet.mode).expect("cells hold assemblable joint vectors");
                        min = min.min(jacobians(&s.g, &c).det_a.abs());
                    }
                }
                assert!(min > s.params.epsilon / 2.0, "cell {b:?} reaches |det A| = {min}");
                assert!(s.g.joints_within_limits(&JointVector::new(b.mid(2), b.mid(3))));
            }
        }
    }
}

#[test]
fn sheets_are_exactly_their_deposits() {
    let s = restricted();
    for sheet in &s.cs.sheets {
        let deposits = sheet_deposits(&s.g, &s.params, sheet.mode).unwrap();
        assert_eq!(deposits.len(), sheet.deposits);
        let boxes: Vec<_> = deposits.iter().map(|d| d.cell).collect();
        let rebuilt = HyperTree::empty(s.cs.root, s.params.depth_4).unwrap().insert_boxes(&boxes).unwrap();
        assert_eq!(rebuilt, sheet.tree);
    }
}

#[test]
fn projections_are_projected_cells_and_regions_partition_sheets() {
    for s in scenarios() {
        for sheet in &s.cs.sheets {
            let mut union = HyperTree::empty(s.cs.root, s.params.depth_4).unwrap();
            for r in s.regions.iter().filter(|r| r.mode == sheet.mode) {
                assert_eq!(r.projection, r.cells.project(&[0, 1]).unwrap());
                assert!(union.intersect(&r.cells).unwrap().is_empty());
                union = union.union(&r.cells).unwrap();
            }
            assert_eq!(union.lattice_measure(), sheet.tree.lattice_measure());
        }
    }
}

#[test]
fn enlarging_limits_never_lowers_coverage() {
    let (a, b) = (restricted(), relaxed());
    let ca = is_n_connected(&a.w, &a.regions, a.params.tol).unwrap();
    let cb = is_n_connected(&b.w, &b.regions, b.params.tol).unwrap();
    for (ra, cov_a) in a.regions.iter().zip(&ca.coverage) {
        let best = b
            .regions
            .iter()
            .zip(&cb.coverage)
            .filter(|(rb, _)| rb.mode == ra.mode)
            .map(|(_, &c)| c)
            .fold(0.0, f64::max);
        assert!(best >= *cov_a, "region {} coverage {cov_a} drops to {best}", ra.id);
    }
}

#[test]
fn projections_stay_within_a_leaf_diagonal_of_the_workspace() {
    for s in scenarios() {
        let mut union = HyperTree::empty(s.params.cartesian_root, s.params.depth_4).unwrap();
        for r in &s.regions {
            union = union.union(&r.projection).unwrap();
        }
        for (_, b) in union.inside_leaves() {
            if is_reachable(&s.g, Pose::new(b.mid(0), b.mid(1))) {
                continue;
            }
            let diag = (b.width(0).powi(2) + b.width(1).powi(2)).sqrt();
            let n = 12;
            let near = (0..=n).any(|i| {
                (0..=n).any(|j| {
                    let x = b.lo()[0] - diag + (b.width(0) + 2.0 * diag) * i as f64 / n as f64;
                    let y = b.lo()[1] - diag + (b.width(1) + 2.0 * diag) * j as f64 / n as f64;
                    is_reachable(&s.g, Pose::new(x, y))
                })
            });
            assert!(near, "projection leaf {b:?} is far from the workspace");
        }
    }
}

#[test]
fn rebuilding_is_deterministic() {
    let s = restricted();
    let again = build_reachable_configurations(&s.g, &s.params).unwrap();
    assert_eq!(again, s.cs);
    for (a, b) in again.sheets.iter().zip(&s.cs.sheets) {
        assert_eq!(a.tree.encode(), b.tree.encode());
    }
    assert_eq!(reachable_components(&again).unwrap(), s.regions);
}

#[test]
fn disjoint_legs_give_no_regions() {
    let g = Geometry::new(
        [100.0, 8.0, 5.0, 8.0, 5.0],
        JointLimits::new(0.0, PI).unwrap(),
        JointLimits::new(0.0, PI).unwrap(),
    )
    .unwrap();
    let params = AnalysisParams::for_geometry(&g);
    let cs = build_reachable_configurations(&g, &params).unwrap();
    assert!(reachable_components(&cs).unwrap().is_empty());
    let w = compute_workspace(&g, &params).unwrap();
    assert!(matches!(is_n_connected(&w, &[], params.tol), Err(RegionsError::EmptyWorkspace)));
}

#[test]
fn no_regions_means_not_n_connected() {
    let s = restricted();
    let c = is_n_connected(&s.w, &[], s.params.tol).unwrap();
    assert!(!c.n_connected);
    assert_eq!(c.max_coverage(), 0.0);
}

/// A pose whose neighborhood of radius `r` lies in W and in exactly the
/// projection of `region`.
fn deep_point(s: &Scenario, region: usize, r: f64) -> Option<Pose> {
    let root = s.params.cartesian_root;
    let n = 120;
    for i in 0..n {
        for j in 0..n {
            let c = Pose::new(
                root.lo()[0] + root.width(0) * (i as f64 + 0.5) / n as f64,
                root.lo()[1] + root.width(1) * (j as f64 + 0.5) / n as f64,
            );
            let ok = [(0.0, 0.0), (r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r), (r, r), (-r, -r), (r, -r), (-r, r)]
                .iter()
                .all(|&(dx, dy)| {
                    let p = [c.x + dx, c.y + dy];
                    root.contains_point(&p)
                        && s.w.tree.contains(&p) == Ok(CellColor::Inside)
                        && s.regions
                            .iter()
                            .all(|reg| (reg.projection.contains(&p) == Ok(CellColor::Inside)) == (reg.id == region))
                });
            if ok {
                return Some(c);
            }
        }
    }
    None
}

#[test]
fn points_unique_to_each_region_cannot_be_linked_until_limits_relax() {
    let s = restricted();
    assert_eq!(s.regions.len(), 2);
    let a = deep_point(s, 0, 0.3).expect("region 0 has a private interior");
    let b = deep_point(s, 1, 0.75).expect("region 1 has a private interior");
    let t = Trajectory::new(vec![a, b]).unwrap();
    let v = check_trajectory(&t, &s.regions, &s.w).unwrap();
    assert!(!v.feasible);
    assert_eq!(v.offending_point, Some(1));
    assert_eq!(v.candidate_sets, vec![vec![0], vec![1]]);

    let r = relaxed();
    let v = check_trajectory(&t, &r.regions, &r.w).unwrap();
    assert!(v.feasible);
    assert_eq!(v.postures.len(), 2);
    let j = v.region.unwrap();
    for (x, q) in t.points().iter().zip(&v.postures) {
        assert_eq!(r.regions[j].cells.contains(&[x.x, x.y, q.theta1, q.theta2]), Ok(CellColor::Inside));
        assert!(r.g.joints_within_limits(q));
    }
}

#[test]
fn trajectory_within_one_region_is_feasible() {
    let s = restricted();
    let a = deep_point(s, 1, 0.75).unwrap();
    let v = check_trajectory(&Trajectory::new(vec![a, a]).unwrap(), &s.regions, &s.w).unwrap();
    assert!(v.feasible);
    assert_eq!(v.region, Some(1));
    let out = Trajectory::new(vec![a, Pose::new(19.0, 12.0)]).unwrap();
    assert!(matches!(check_trajectory(&out, &s.regions, &s.w), Err(RegionsError::Unreachable { index: 1, .. })));
}

#[test]
fn singularity_loci_depend_on_posture() {
    let s = restricted();
    let mut params = s.params.clone();
    params.depth_w = 7;
    let pp = singularity_locus(&s.g, (Sign::Positive, Sign::Positive), &params).unwrap();
    let pn = singularity_locus(&s.g, (Sign::Positive, Sign::Negative), &params).unwrap();
    assert!(pp.measure() > 0.0);
    let sym = pp.difference(&pn).unwrap().union(&pn.difference(&pp).unwrap()).unwrap();
    assert!(sym.measure() > 0.0);

    let w = compute_workspace(&s.g, &params).unwrap();
    assert!(pp.difference(&w.tree).unwrap().is_empty());

    let mut thin = params.clone();
    thin.epsilon = 0.01;
    let narrow = singularity_locus(&s.g, (Sign::Positive, Sign::Positive), &thin).unwrap();
    assert!(narrow.measure() <= pp.measure());
}
