//! The JSON analysis report.

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use nregions::kinematics::{AssemblyMode, Pose};
use nregions::HyperTree;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::CliError;

pub const TREE_FORMAT: &str = "HTR1";

/// A tree in the binary format of `docs/tree-format.md`, base64 encoded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodedTree {
    pub format: String,
    pub leaves: usize,
    pub data: String,
}

impl EncodedTree {
    pub fn new(t: &HyperTree) -> EncodedTree {
        EncodedTree { format: TREE_FORMAT.into(), leaves: t.leaf_count(), data: STANDARD.encode(t.encode()) }
    }

    pub fn decode(&self) -> Result<HyperTree, CliError> {
        if self.format != TREE_FORMAT {
            return Err(CliError::Report(format!("unsupported tree format {:?}", self.format)));
        }
        let bytes = STANDARD.decode(&self.data).map_err(|e| CliError::Report(e.to_string()))?;
        HyperTree::decode(&bytes).map_err(|e| CliError::Report(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkspaceSummary {
    pub measure: f64,
    pub tree: EncodedTree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SheetSummary {
    pub mode: AssemblyMode,
    pub deposits: usize,
    pub leaves: usize,
    pub lattice_cells: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationSummary {
    pub sheets: Vec<SheetSummary>,
    /// Finest-lattice 4D cells claimed by both assembly modes.
    pub cross_tagged_cells: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub id: usize,
    pub mode: AssemblyMode,
    /// Finest-lattice 4D cells of this component tagged with each mode.
    pub mode_tags: ModeTagCounts,
    pub cells: usize,
    pub coverage: f64,
    pub projection_measure: f64,
    pub projection: EncodedTree,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeTagCounts {
    #[serde(rename = "+")]
    pub positive: u64,
    #[serde(rename = "-")]
    pub negative: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusSummary {
    /// `(gamma1, gamma2)`.
    pub posture: [i8; 2],
    pub measure: f64,
    pub tree: EncodedTree,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipSample {
    pub pose: Pose,
    pub tree_regions: Vec<usize>,
    pub oracle_components: Vec<usize>,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub resolution: usize,
    pub component_count: usize,
    pub component_modes: Vec<AssemblyMode>,
    pub component_sizes: Vec<usize>,
    /// Tree region matched to each oracle component.
    pub matched_regions: Vec<Option<usize>>,
    pub counts_agree: bool,
    pub seed: u64,
    pub samples: Vec<MembershipSample>,
    pub membership_agreements: usize,
    pub agree: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: String,
    pub version: String,
    pub config: ConfigFile,
    /// Wrap-around adjacency of the joint axes.
    pub periodic: bool,
    pub workspace: WorkspaceSummary,
    pub configuration: ConfigurationSummary,
    /// Connected components `R_j` of the configuration sheets.
    pub component_count: usize,
    /// Distinct projections `W_Nj` among the components.
    pub region_count: usize,
    pub regions: Vec<RegionSummary>,
    pub max_coverage: f64,
    pub n_connected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loci: Option<Vec<LocusSummary>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    /// SHA-256 of the report serialized with this field empty.
    pub fingerprint: String,
}

impl AnalysisReport {
    pub fn compute_fingerprint(&self) -> String {
        let bare = AnalysisReport { fingerprint: String::new(), ..self.clone() };
        let bytes = serde_json::to_vec(&bare).expect("reports always serialize");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<AnalysisReport, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Report(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nregions::{Bounds, CellColor};

    #[test]
    fn encoded_tree_round_trip() {
        let t = HyperTree::build(
            Bounds::new(&[-1.0, -1.0], &[1.0, 1.0]).unwrap(),
            6,
            |b| {
                let r = b.lo()[0].hypot(b.lo()[1]);
                if b.hi()[0] < 0.0 && r < 0.5 {
                    CellColor::Inside
                } else {
                    CellColor::Mixed
                }
            },
            nregions::LeafPolicy::Outside,
        )
        .unwrap();
        let e = EncodedTree::new(&t);
        assert_eq!(e.decode().unwrap(), t);
        let bad = EncodedTree { format: "XYZ".into(), ..e.clone() };
        assert!(bad.decode().is_err());
        let corrupt = EncodedTree { data: "!!".into(), ..e };
        assert!(corrupt.decode().is_err());
    }
}
