//! `analyze` and `feasibility` commands.

use std::fs;
use std::path::Path;

use log::info;
use nregions::kinematics::{Geometry, Pose, Sign};
use nregions::regions::{
    build_reachable_configurations, check_trajectory, compute_workspace, grid_oracle, is_n_connected, is_reachable,
    reachable_components, singularity_locus, FeasibilityVerdict, ReachableRegion, RegionsError, Trajectory, Workspace,
};
use nregions::CellColor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Artifact, RunConfig};
use crate::report::{
    AnalysisReport, ConfigurationSummary, EncodedTree, LocusSummary, MembershipSample, ModeTagCounts, OracleComparison,
    RegionSummary, SheetSummary, WorkspaceSummary,
};
use crate::svg::render_svg;
use crate::CliError;

/// Seed of the poses compared against the grid oracle.
pub const ORACLE_SEED: u64 = 1;
/// Number of poses compared against the grid oracle.
pub const ORACLE_SAMPLES: usize = 20;

const POSTURES: [(Sign, Sign); 4] = [
    (Sign::Positive, Sign::Positive),
    (Sign::Positive, Sign::Negative),
    (Sign::Negative, Sign::Positive),
    (Sign::Negative, Sign::Negative),
];

fn lift(e: RegionsError) -> CliError {
    match e {
        RegionsError::EmptyWorkspace => CliError::EmptyWorkspace,
        RegionsError::Unreachable { index, x, y } => CliError::Unreachable { index, x, y },
        other => CliError::Analysis(other.to_string()),
    }
}

/// Workspace and regions of a configuration.
pub struct Analysis {
    pub workspace: Workspace,
    pub regions: Vec<ReachableRegion>,
}

pub fn analyze_regions(cfg: &RunConfig) -> Result<(Analysis, nregions::regions::ConfigurationSpace), CliError> {
    let workspace = compute_workspace(&cfg.geometry, &cfg.params).map_err(lift)?;
    if workspace.tree.is_empty() {
        return Err(CliError::EmptyWorkspace);
    }
    info!("workspace measure {:.4}", workspace.measure());
    let cs = build_reachable_configurations(&cfg.geometry, &cfg.params).map_err(lift)?;
    let regions = reachable_components(&cs).map_err(lift)?;
    info!("{} configuration components", regions.len());
    Ok((Analysis { workspace, regions }, cs))
}

/// Runs the whole analysis and assembles the report.
pub fn analyze(cfg: &RunConfig, with_oracle: bool) -> Result<AnalysisReport, CliError> {
    let (a, cs) = analyze_regions(cfg)?;
    let connectivity = is_n_connected(&a.workspace, &a.regions, cfg.params.tol).map_err(lift)?;

    let mut distinct: Vec<&nregions::HyperTree> = Vec::new();
    for r in &a.regions {
        if !distinct.contains(&&r.projection) {
            distinct.push(&r.projection);
        }
    }

    let regions = a
        .regions
        .iter()
        .zip(&connectivity.coverage)
        .map(|(r, &coverage)| RegionSummary {
            id: r.id,
            mode: r.mode,
            mode_tags: ModeTagCounts { positive: r.mode_tags.positive as u64, negative: r.mode_tags.negative as u64 },
            cells: r.cells.leaf_count(),
            coverage,
            projection_measure: r.projection.measure(),
            projection: EncodedTree::new(&r.projection),
        })
        .collect();

    let loci = if cfg.wants(&Artifact::Loci) {
        let mut out = Vec::new();
        for posture in POSTURES {
            let t = singularity_locus(&cfg.geometry, posture, &cfg.params).map_err(lift)?;
            out.push(LocusSummary {
                posture: [posture.0.value(), posture.1.value()],
                measure: t.measure(),
                tree: EncodedTree::new(&t),
            });
        }
        Some(out)
    } else {
        None
    };

    let oracle = with_oracle.then(|| compare_with_oracle(cfg, &a.regions));

    let mut report = AnalysisReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: cfg.echo(),
        periodic: cfg.params.periodic,
        workspace: WorkspaceSummary { measure: a.workspace.measure(), tree: EncodedTree::new(&a.workspace.tree) },
        configuration: ConfigurationSummary {
            sheets: cs
                .sheets
                .iter()
                .map(|s| SheetSummary {
                    mode: s.mode,
                    deposits: s.deposits,
                    leaves: s.tree.leaf_count(),
                    lattice_cells: s.tree.lattice_measure() as u64,
                })
                .collect(),
            cross_tagged_cells: cs.cross_tagged_cells as u64,
        },
        component_count: a.regions.len(),
        region_count: distinct.len(),
        regions,
        max_coverage: connectivity.max_coverage(),
        n_connected: connectivity.n_connected,
        loci,
        oracle,
        fingerprint: String::new(),
    };
    report.fingerprint = report.compute_fingerprint();
    Ok(report)
}

/// Uniform poses over the Cartesian root that have an in-limit posture.
pub fn random_reachable_poses(g: &Geometry, root: &nregions::Bounds, seed: u64, n: usize) -> Vec<Pose> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = Pose::new(rng.random_range(root.lo()[0]..root.hi()[0]), rng.random_range(root.lo()[1]..root.hi()[1]));
        if is_reachable(g, x) {
            out.push(x);
        }
    }
    out
}

/// Region ids whose projection holds `x`.
pub fn tree_membership(regions: &[ReachableRegion], x: Pose) -> Vec<usize> {
    regions.iter().filter(|r| r.projection.contains(&[x.x, x.y]) == Ok(CellColor::Inside)).map(|r| r.id).collect()
}

fn compare_with_oracle(cfg: &RunConfig, regions: &[ReachableRegion]) -> OracleComparison {
    let g = &cfg.geometry;
    let oracle = grid_oracle(g, cfg.oracle_resolution, cfg.params.epsilon, cfg.params.periodic);
    let matched = oracle.match_regions(g, regions);
    let samples: Vec<MembershipSample> =
        random_reachable_poses(g, &cfg.params.cartesian_root, ORACLE_SEED, ORACLE_SAMPLES)
            .into_iter()
            .map(|pose| {
                let tree_regions = tree_membership(regions, pose);
                let oracle_components = oracle.classify(g, pose);
                let mut mapped: Vec<Option<usize>> = oracle_components.iter().map(|&c| matched[c]).collect();
                mapped.sort_unstable();
                mapped.dedup();
                let agree =
                    mapped.len() == tree_regions.len() && mapped.iter().zip(&tree_regions).all(|(m, t)| *m == Some(*t));
                MembershipSample { pose, tree_regions, oracle_components, agree }
            })
            .collect();
    let membership_agreements = samples.iter().filter(|s| s.agree).count();
    let counts_agree = oracle.component_count() == regions.len();
    OracleComparison {
        resolution: oracle.resolution(),
        component_count: oracle.component_count(),
        component_modes: (0..oracle.component_count()).map(|c| oracle.component_mode(c)).collect(),
        component_sizes: oracle.component_sizes().to_vec(),
        matched_regions: matched,
        counts_agree,
        seed: ORACLE_SEED,
        agree: counts_agree && membership_agreements == samples.len(),
        membership_agreements,
        samples,
    }
}

/// Renders every requested SVG, then writes them with the report into `out`.
pub fn run_analyze(cfg: &RunConfig, out: &Path, with_oracle: bool) -> Result<AnalysisReport, CliError> {
    let report = analyze(cfg, with_oracle)?;
    let mut files = Vec::new();
    if cfg.wants(&Artifact::Report) {
        files.push(("report.json".to_string(), report.to_json()));
    }
    for a in cfg.outputs.iter().filter(|a| **a != Artifact::Report) {
        files.push((format!("{}.svg", a.name()), render_svg(&report, &a.name())?));
    }
    let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", out.display()));
    fs::create_dir_all(out).map_err(io)?;
    for (name, body) in files {
        fs::write(out.join(&name), body)
            .map_err(|e| CliError::Output(format!("{}: {e}", out.join(&name).display())))?;
    }
    Ok(report)
}

/// Parses "x y" lines; blank lines and `#` comments are skipped.
pub fn parse_trajectory(text: &str) -> Result<Trajectory, CliError> {
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed: Vec<f64> = fields.iter().filter_map(|f| f.parse().ok()).collect();
        if fields.len() != 2 || parsed.len() != 2 {
            return Err(CliError::Config(format!("trajectory line {}: expected \"x y\", got {line:?}", n + 1)));
        }
        points.push(Pose::new(parsed[0], parsed[1]));
    }
    Trajectory::new(points).map_err(|e| CliError::Config(e.to_string()))
}

pub fn run_feasibility(cfg: &RunConfig, trajectory: &Trajectory) -> Result<FeasibilityVerdict, CliError> {
    let (a, _) = analyze_regions(cfg)?;
    check_trajectory(trajectory, &a.regions, &a.workspace).map_err(lift)
}

/// Human-readable verdict, as printed by the `feasibility` command.
pub fn format_verdict(t: &Trajectory, v: &FeasibilityVerdict) -> String {
    let mut s = String::new();
    if v.feasible {
        s.push_str(&format!("FEASIBLE region {}\n", v.region.expect("feasible verdicts name a region")));
        for (i, (x, q)) in t.points().iter().zip(&v.postures).enumerate() {
            s.push_str(&format!("point {i} ({}, {}): theta1 {:.6} theta2 {:.6}\n", x.x, x.y, q.theta1, q.theta2));
        }
    } else {
        let i = v.offending_point.expect("infeasible verdicts name a point");
        let x = t.points()[i];
        s.push_str(&format!("INFEASIBLE at point {i} ({}, {})\n", x.x, x.y));
        for (j, set) in v.candidate_sets.iter().enumerate() {
            s.push_str(&format!("point {j} regions {set:?}\n"));
        }
    }
    s
}
