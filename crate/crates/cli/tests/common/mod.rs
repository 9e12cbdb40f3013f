#![allow(dead_code)]

use nregions::kinematics::Pose;
use nregions::{CellColor, HyperTree};
use nregions_cli::AnalysisReport;

pub const RESTRICTED: &str = r#"{"geometry":{"L0":7,"L1":8,"L2":5,"L3":8,"L4":5},
    "limits":{"theta1":[0,3.141592653589793],"theta2":[0,3.141592653589793]}}"#;

pub const RELAXED: &str = r#"{"geometry":{"L0":7,"L1":8,"L2":5,"L3":8,"L4":5},
    "limits":{"theta1":[-3.141592653589793,3.141592653589793],"theta2":[-3.141592653589793,3.141592653589793]}}"#;

pub fn with_outputs(config: &str, outputs: &[&str]) -> String {
    let list: Vec<String> = outputs.iter().map(|o| format!("{o:?}")).collect();
    format!("{},\"outputs\":[{}]}}", config.trim_end().strip_suffix('}').expect("a JSON object"), list.join(","))
}

/// A pose whose neighborhood of radius `r` lies in W and in the projection
/// of `region` only.
pub fn deep_point(report: &AnalysisReport, region: usize, r: f64) -> Option<Pose> {
    let w = report.workspace.tree.decode().unwrap();
    let projections: Vec<(usize, HyperTree)> =
        report.regions.iter().map(|reg| (reg.id, reg.projection.decode().unwrap())).collect();
    let root = *w.root_box();
    let n = 120;
    let inside = |t: &HyperTree, p: &[f64]| t.contains(p) == Ok(CellColor::Inside);
    for i in 0..n {
        for j in 0..n {
            let c = [
                root.lo()[0] + root.width(0) * (i as f64 + 0.5) / n as f64,
                root.lo()[1] + root.width(1) * (j as f64 + 0.5) / n as f64,
            ];
            let ok = [(0.0, 0.0), (r, 0.0), (-r, 0.0), (0.0, r), (0.0, -r), (r, r), (-r, -r), (r, -r), (-r, r)]
                .iter()
                .all(|&(dx, dy)| {
                    let p = [c[0] + dx, c[1] + dy];
                    root.contains_point(&p)
                        && inside(&w, &p)
                        && projections.iter().all(|(id, t)| inside(t, &p) == (*id == region))
                });
            if ok {
                return Some(Pose::new(c[0], c[1]));
            }
        }
    }
    None
}

/// One pose private to each region of the restricted-limit report.
pub fn infeasible_pair(report: &AnalysisReport) -> (Pose, Pose) {
    let a = deep_point(report, 0, 0.3).expect("region 0 has a private interior");
    let b = deep_point(report, 1, 0.75).expect("region 1 has a private interior");
    (a, b)
}
