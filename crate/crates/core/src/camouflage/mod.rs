//! Function-preserving, appearance-mimicking camouflage built from a latent
//! interpolation between two cone trees.

pub mod filter;
pub mod fix;
pub mod pipeline;
pub mod views;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::AigError;
use crate::netlist::Netlist;
use crate::vae::VaeError;

pub use filter::{interpolate, threshold_filter, Proportion, Threshold};
pub use fix::{fix_lookup, state_from_code, FixAction, Phase};
pub use pipeline::{
    appearance_mimic, camouflage_graphs, camouflage_pipeline, decode_size, functional_preserve, interpolated_triple,
    normalize_decoded, Draft, NormalizeReport, PipelineConfig,
};
pub use views::{aig_cell_count, AppearanceView, Cell, CellKind, FunctionalView, Link, LinkKind, Placement};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CamouflageError {
    #[error(transparent)]
    Aig(#[from] AigError),
    #[error(transparent)]
    Vae(#[from] VaeError),
    #[error("threshold {0} is outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("proportion {0} is outside [0, 1]")]
    InvalidProportion(f64),
    #[error("{0}")]
    Shape(String),
    #[error("graphs are not index-aligned: {0}")]
    Misaligned(String),
    #[error("{0} circuit is not a single-output tree")]
    NotTree(String),
    #[error("camouflaged netlist json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, CamouflageError>;

/// One non-trivial fix-table lookup.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixStep {
    pub phase: Phase,
    pub src: usize,
    pub dst: usize,
    pub current: String,
    pub target: String,
    pub action: FixAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CamouflageMetadata {
    pub p: Option<f64>,
    pub th: Option<f64>,
    pub seed: u64,
    pub model_checksum: Option<String>,
    pub decode_nodes: usize,
    /// PI, PO, AND counts after joint padding.
    pub padded_counts: [usize; 3],
    pub decode_warnings: usize,
    pub dropped_edges: usize,
    pub retyped_outputs: usize,
    pub function_cells: usize,
    pub appearance_cells: usize,
    pub area_overhead: f64,
    pub placements_by_kind: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CamouflagedNetlist {
    pub functional_view: FunctionalView,
    pub appearance_view: AppearanceView,
    pub placements: Vec<Placement>,
    pub fix_log: Vec<FixStep>,
    pub metadata: CamouflageMetadata,
}

impl CamouflagedNetlist {
    pub fn functional_netlist(&self) -> Netlist {
        self.functional_view.to_netlist(&self.placements)
    }

    pub fn appearance_netlist(&self) -> Netlist {
        self.appearance_view.to_netlist()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("camouflaged netlist serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CamouflageError::Json(e.to_string()))
    }
}

/// Appearance cells per cell of the original function.
pub fn area_overhead(c: &CamouflagedNetlist, f: &crate::aig::AigGraph) -> f64 {
    c.appearance_view.cell_count() as f64 / aig_cell_count(f).max(1) as f64
}
