//! Run configuration: the JSON file schema, its defaults and overrides.

use std::path::Path;

use nregions::kinematics::{Geometry, JointLimits};
use nregions::regions::AnalysisParams;
use nregions::Bounds;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySpec {
    #[serde(rename = "L0")]
    pub l0: f64,
    #[serde(rename = "L1")]
    pub l1: f64,
    #[serde(rename = "L2")]
    pub l2: f64,
    #[serde(rename = "L3")]
    pub l3: f64,
    #[serde(rename = "L4")]
    pub l4: f64,
}

/// Joint limits `[min, max]` in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSpec {
    pub theta1: [f64; 2],
    pub theta2: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

/// Analysis settings; every field is optional in the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cartesian_root: Option<RootSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_q: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_4: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth_w: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_resolution: Option<usize>,
}

/// The config file as written by the user.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub geometry: GeometrySpec,
    pub limits: LimitsSpec,
    #[serde(default)]
    pub params: ParamsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<Vec<String>>,
}

/// Requested output: the JSON report or one SVG rendering.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Artifact {
    Report,
    Workspace,
    Regions,
    Region(usize),
    Loci,
}

impl Artifact {
    pub fn parse(name: &str) -> Result<Artifact, CliError> {
        match name {
            "report" => Ok(Artifact::Report),
            "workspace" => Ok(Artifact::Workspace),
            "regions" => Ok(Artifact::Regions),
            "loci" => Ok(Artifact::Loci),
            _ => name
                .strip_prefix("region-")
                .and_then(|id| id.parse().ok())
                .map(Artifact::Region)
                .ok_or_else(|| CliError::Config(format!("unknown artifact {name:?}"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Artifact::Report => "report".into(),
            Artifact::Workspace => "workspace".into(),
            Artifact::Regions => "regions".into(),
            Artifact::Region(id) => format!("region-{id}"),
            Artifact::Loci => "loci".into(),
        }
    }
}

pub const DEFAULT_OUTPUTS: [&str; 3] = ["report", "workspace", "regions"];
pub const DEFAULT_ORACLE_RESOLUTION: usize = 512;

/// Validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub params: AnalysisParams,
    pub outputs: Vec<Artifact>,
    pub oracle_resolution: usize,
}

/// Command-line overrides of the file settings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub depth_q: Option<u32>,
    pub depth_4: Option<u32>,
    pub epsilon: Option<f64>,
    pub periodic: bool,
    pub render: Option<Vec<String>>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, overrides)
    }

    pub fn from_json(text: &str, overrides: &Overrides) -> Result<RunConfig, CliError> {
        let file: ConfigFile = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_file(&file, overrides)
    }

    pub fn from_file(file: &ConfigFile, overrides: &Overrides) -> Result<RunConfig, CliError> {
        let limits = |[min, max]: [f64; 2]| JointLimits::new(min, max).map(|l| l.normalized());
        let g = &file.geometry;
        let geometry = limits(file.limits.theta1)
            .and_then(|t1| Geometry::new([g.l0, g.l1, g.l2, g.l3, g.l4], t1, limits(file.limits.theta2)?))
            .map_err(|e| CliError::Config(e.to_string()))?;

        let p = &file.params;
        let mut params = AnalysisParams::for_geometry(&geometry);
        if let Some(root) = &p.cartesian_root {
            params.cartesian_root = Bounds::new(&root.lo, &root.hi).map_err(|e| CliError::Config(e.to_string()))?;
        }
        params.depth_q = overrides.depth_q.or(p.depth_q).unwrap_or(params.depth_q);
        params.depth_4 = overrides.depth_4.or(p.depth_4).unwrap_or(params.depth_4);
        params.depth_w = p.depth_w.unwrap_or(params.depth_w);
        params.samples = p.samples.unwrap_or(params.samples);
        params.epsilon = overrides.epsilon.or(p.epsilon).unwrap_or(params.epsilon);
        params.tol = p.tol.unwrap_or(params.tol);
        params.periodic = overrides.periodic || p.periodic.unwrap_or(false);
        params.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let mut outputs = match (&overrides.render, &file.outputs) {
            (Some(names), _) => {
                let mut all = vec!["report".to_string()];
                all.extend(names.iter().cloned());
                all
            }
            (None, Some(names)) => names.clone(),
            (None, None) => DEFAULT_OUTPUTS.iter().map(|s| s.to_string()).collect(),
        }
        .iter()
        .map(|n| Artifact::parse(n))
        .collect::<Result<Vec<_>, _>>()?;
        outputs.sort();
        outputs.dedup();

        let oracle_resolution = p.oracle_resolution.unwrap_or(DEFAULT_ORACLE_RESOLUTION);
        if oracle_resolution < nregions::regions::MIN_ORACLE_RESOLUTION {
            return Err(CliError::Config(format!("oracle_resolution {oracle_resolution} is below 64")));
        }
        Ok(RunConfig { geometry, params, outputs, oracle_resolution })
    }

    /// The normalized configuration in file form.
    pub fn echo(&self) -> ConfigFile {
        let g = &self.geometry;
        let p = &self.params;
        let root = p.cartesian_root;
        ConfigFile {
            geometry: GeometrySpec { l0: g.l0, l1: g.l1, l2: g.l2, l3: g.l3, l4: g.l4 },
            limits: LimitsSpec { theta1: [g.theta1.min, g.theta1.max], theta2: [g.theta2.min, g.theta2.max] },
            params: ParamsSpec {
                cartesian_root: Some(RootSpec { lo: [root.lo()[0], root.lo()[1]], hi: [root.hi()[0], root.hi()[1]] }),
                depth_q: Some(p.depth_q),
                depth_4: Some(p.depth_4),
                depth_w: Some(p.depth_w),
                samples: Some(p.samples),
                epsilon: Some(p.epsilon),
                tol: Some(p.tol),
                periodic: Some(p.periodic),
                oracle_resolution: Some(self.oracle_resolution),
            },
            outputs: Some(self.outputs.iter().map(Artifact::name).collect()),
        }
    }

    pub fn wants(&self, a: &Artifact) -> bool {
        self.outputs.contains(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = r#"{"geometry":{"L0":7,"L1":8,"L2":5,"L3":8,"L4":5},
        "limits":{"theta1":[0,3.141592653589793],"theta2":[0,3.141592653589793]}}"#;

    #[test]
    fn defaults_are_filled() {
        let cfg = RunConfig::from_json(REFERENCE, &Overrides::default()).unwrap();
        assert_eq!(cfg.geometry, Geometry::reference());
        assert_eq!(cfg.params, AnalysisParams::for_geometry(&Geometry::reference()));
        assert_eq!(cfg.outputs, vec![Artifact::Report, Artifact::Workspace, Artifact::Regions]);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::from_json(REFERENCE, &Overrides { depth_q: Some(6), ..Default::default() }).unwrap();
        let again = RunConfig::from_file(&cfg.echo(), &Overrides::default()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn limits_are_normalized() {
        let text =
            REFERENCE.replace("[0,3.141592653589793],\"theta2\"", "[6.283185307179586,9.42477796076938],\"theta2\"");
        let cfg = RunConfig::from_json(&text, &Overrides::default()).unwrap();
        assert!(cfg.geometry.theta1.min.abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_fields_and_units() {
        let o = Overrides::default();
        assert!(RunConfig::from_json(&REFERENCE.replace("\"L4\":5", "\"L4\":5,\"L5\":1"), &o).is_err());
        assert!(RunConfig::from_json(
            &REFERENCE.replace("[0,3.141592653589793],\"theta2\"", "[\"0deg\",\"180deg\"],\"theta2\""),
            &o
        )
        .is_err());
        let bad_output = REFERENCE.replacen('}', "},\"outputs\":[\"movie\"]", 1);
        assert!(matches!(RunConfig::from_json(&bad_output, &o), Err(CliError::Config(_))));
        let bad_depth = REFERENCE.replacen('}', "},\"params\":{\"depth_q\":2}", 1);
        assert!(RunConfig::from_json(&bad_depth, &o).is_err());
    }

    #[test]
    fn artifact_names() {
        for name in ["report", "workspace", "regions", "region-3", "loci"] {
            assert_eq!(Artifact::parse(name).unwrap().name(), name);
        }
        assert!(Artifact::parse("region-x").is_err());
    }
}
