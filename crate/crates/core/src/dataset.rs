//! Cone-tree datasets: extraction, size filtering, seeded split and manifest.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::aiger::parse_aiger;
use crate::aig::cone::extract_all_cones;
use crate::aig::{json, AigError, AigGraph, ConeOutcome};
use crate::vae::split_dataset;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Aig(#[from] AigError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("no benchmark circuits found in {0}")]
    NoCircuits(String),
    #[error("no cone fits the {0}-node limit")]
    Empty(usize),
    #[error("{path}: {source}")]
    Parse { path: String, source: AigError },
}

pub type Result<T> = std::result::Result<T, DatasetError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub id: String,
    pub circuit: String,
    pub output: String,
    pub nodes: usize,
    pub inputs: usize,
    pub split: Split,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedCone {
    pub circuit: String,
    pub output: String,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub max_nodes: usize,
    pub train_frac: f64,
    pub trees: Vec<TreeRecord>,
    pub rejected: Vec<RejectedCone>,
}

impl DatasetManifest {
    pub fn ids(&self, split: Split) -> Vec<&str> {
        self.trees.iter().filter(|t| t.split == split).map(|t| t.id.as_str()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub manifest: DatasetManifest,
    /// Same order as `manifest.trees`.
    pub trees: Vec<AigGraph>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> Vec<AigGraph> {
        self.manifest.trees.iter().zip(&self.trees).filter(|(r, _)| r.split == split).map(|(_, g)| g.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&AigGraph> {
        self.manifest.trees.iter().position(|r| r.id == id).map(|k| &self.trees[k])
    }

    /// Writes `manifest.json` and one JSON graph per tree under `trees/`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir.join("trees"))?;
        for (r, g) in self.manifest.trees.iter().zip(&self.trees) {
            fs::write(dir.join("trees").join(file_name(&r.id)), json::to_json(g))?;
        }
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&self.manifest)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Dataset> {
        let manifest: DatasetManifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
        let trees = manifest
            .trees
            .iter()
            .map(|r| Ok(json::from_json(&fs::read_to_string(dir.join("trees").join(file_name(&r.id)))?)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { manifest, trees })
    }
}

fn file_name(id: &str) -> String {
    let safe: String = id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{safe}.json")
}

/// Extracts every output cone of every circuit as a tree, keeps those with
/// at most `max_nodes` nodes and splits them with a seeded shuffle.
pub fn build_dataset(circuits: &[(String, AigGraph)], max_nodes: usize, train_frac: f64, seed: u64) -> Result<Dataset> {
    let mut kept: Vec<(String, String, AigGraph)> = Vec::new();
    let mut rejected = Vec::new();
    for (name, g) in circuits {
        for (output, outcome) in extract_all_cones(g, max_nodes)? {
            match outcome {
                ConeOutcome::Tree(t) => kept.push((name.clone(), output, t)),
                ConeOutcome::Rejected { size } => rejected.push(RejectedCone { circuit: name.clone(), output, size }),
            }
        }
    }
    if kept.is_empty() {
        return Err(DatasetError::Empty(max_nodes));
    }
    let idx: Vec<usize> = (0..kept.len()).collect();
    let (train, _) = split_dataset(&idx, train_frac, seed);
    let mut is_train = vec![false; kept.len()];
    for k in train {
        is_train[k] = true;
    }
    let mut records = Vec::with_capacity(kept.len());
    let mut trees = Vec::with_capacity(kept.len());
    for (k, (circuit, output, t)) in kept.into_iter().enumerate() {
        records.push(TreeRecord {
            id: format!("{circuit}:{output}"),
            circuit,
            output,
            nodes: t.node_count(),
            inputs: t.input_names().len(),
            split: if is_train[k] { Split::Train } else { Split::Test },
        });
        trees.push(t);
    }
    Ok(Dataset { manifest: DatasetManifest { seed, max_nodes, train_frac, trees: records, rejected }, trees })
}

/// Reads every `.aag` file in `dir` (sorted by name) as a circuit named
/// after its file stem.
pub fn load_benchmarks(dir: &Path) -> Result<Vec<(String, AigGraph)>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "aag"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(DatasetError::NoCircuits(dir.display().to_string()));
    }
    paths
        .into_iter()
        .map(|p| {
            let text = fs::read_to_string(&p)?;
            let g = parse_aiger(&text).map_err(|source| DatasetError::Parse { path: p.display().to_string(), source })?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((name, g))
        })
        .collect()
}
