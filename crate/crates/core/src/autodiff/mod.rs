//! Dense reverse-mode differentiation, GRU and MLP building blocks, Adam.

pub mod adam;
pub mod gradcheck;
pub mod nn;
pub mod tape;

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use adam::AdamState;
pub use nn::{gru_step, mlp_forward, Activation, Gru, Mlp};
pub use tape::{Tape, Var};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffError {
    #[error("dimension mismatch: {0}")]
    Shape(String),
    #[error("loss must be a scalar, got shape {0:?}")]
    NonScalarLoss((usize, usize)),
    #[error("unknown parameter `{0}`")]
    MissingParam(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, DiffError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub shape: Vec<usize>,
    #[serde(rename = "values")]
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(DiffError::Shape(format!("shape {shape:?} holds {n} values, got {}", data.len())));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Tensor { shape, data: vec![0.0; n] }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Tensor { shape: vec![data.len()], data }
    }

    /// Uniform in `[-bound, bound]`.
    pub fn uniform(shape: Vec<usize>, bound: f64, rng: &mut impl Rng) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
        Tensor { shape, data }
    }

    /// Shape as seen on the tape: vectors are single rows.
    pub fn matrix_shape(&self) -> (usize, usize) {
        match self.shape.as_slice() {
            [] => (1, 1),
            [n] => (1, *n),
            [r, c] => (*r, *c),
            s => (s[0], s[1..].iter().product()),
        }
    }
}

/// Named parameters in a deterministic order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    params: BTreeMap<String, Tensor>,
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    params: BTreeMap<String, Tensor>,
}

pub const CHECKPOINT_FORMAT: &str = "ipcamo-params";
pub const CHECKPOINT_VERSION: u32 = 1;

impl ParamStore {
    pub fn insert(&mut self, name: impl Into<String>, t: Tensor) {
        self.params.insert(name.into(), t);
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.params.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.params.get_mut(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor)> {
        self.params.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor)> {
        self.params.iter_mut()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn scalar_count(&self) -> usize {
        self.params.values().map(|t| t.data.len()).sum()
    }

    /// SHA-256 over names, shapes and the little-endian bits of every value.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        for (name, t) in &self.params {
            h.update(name.as_bytes());
            for d in &t.shape {
                h.update((*d as u64).to_le_bytes());
            }
            for v in &t.data {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub fn to_checkpoint(&self, meta: &BTreeMap<String, String>) -> Result<String> {
        if let Some((name, _)) = self.params.iter().find(|(_, t)| t.data.iter().any(|v| !v.is_finite())) {
            return Err(DiffError::Checkpoint(format!("parameter `{name}` holds a non-finite value")));
        }
        let file = CheckpointFile {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            meta: meta.clone(),
            params: self.params.clone(),
        };
        serde_json::to_string(&file).map_err(|e| DiffError::Checkpoint(e.to_string()))
    }

    pub fn from_checkpoint(text: &str) -> Result<(ParamStore, BTreeMap<String, String>)> {
        let file: CheckpointFile = serde_json::from_str(text).map_err(|e| DiffError::Checkpoint(e.to_string()))?;
        if file.format != CHECKPOINT_FORMAT || file.version != CHECKPOINT_VERSION {
            return Err(DiffError::Checkpoint(format!("unsupported format {} v{}", file.format, file.version)));
        }
        for (name, t) in &file.params {
            Tensor::new(t.shape.clone(), t.data.clone())
                .map_err(|e| DiffError::Checkpoint(format!("parameter `{name}`: {e}")))?;
        }
        Ok((ParamStore { params: file.params }, file.meta))
    }
}
