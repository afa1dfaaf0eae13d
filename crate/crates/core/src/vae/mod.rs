//! Variational autoencoder over single-output AIG trees.

pub mod loss;
pub mod model;
pub mod train;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::AigError;
use crate::autodiff::{Activation, DiffError, Gru, Mlp, ParamStore};

pub use loss::{loss, LossBreakdown};
pub use model::{binary_agreement, decode, encode, reconstruct, reconstruction_agreement};
pub use train::{loss_with_gradients, split_dataset, train, EpochStats, Hyperparams, TrainReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VaeError {
    #[error(transparent)]
    Aig(#[from] AigError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("encoder input is not a single-output tree: {0}")]
    NotTree(String),
    #[error("node {0} was scheduled before all of its fanins")]
    Ordering(usize),
    #[error("decode needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{0}")]
    Shape(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, VaeError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub hidden: usize,
    pub latent: usize,
    pub mlp_hidden: usize,
    /// Width of the PI one-hot; later inputs share the last slot.
    pub max_pi: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims { hidden: 512, latent: 512, mlp_hidden: 512, max_pi: 200 }
    }
}

impl ModelDims {
    pub fn small(width: usize) -> Self {
        ModelDims { hidden: width, latent: width, mlp_hidden: width, max_pi: 64 }
    }
}

/// Network components; parameters live in the [`ParamStore`] under these
/// prefixes.
pub(crate) struct Modules {
    pub enc_gru: Gru,
    pub mu: Mlp,
    pub logvar: Mlp,
    pub dec_init: Mlp,
    pub dec_gru: Gru,
    pub type_head: Mlp,
    pub conn: Mlp,
    pub inv: Mlp,
}

pub(crate) const PI_EMBED: &str = "enc.pi_embed";

impl Modules {
    pub fn new(d: &ModelDims) -> Self {
        use Activation::*;
        let (h, z, m) = (d.hidden, d.latent, d.mlp_hidden);
        Modules {
            enc_gru: Gru::new("enc.gru", h, 3),
            mu: Mlp::new("enc.mu", &[h, m, z], Tanh, Identity),
            logvar: Mlp::new("enc.logvar", &[h, m, z], Tanh, Identity),
            dec_init: Mlp::new("dec.init", &[z, h], Tanh, Tanh),
            dec_gru: Gru::new("dec.gru", h, 3),
            type_head: Mlp::new("dec.type", &[h, m, 3], Tanh, Softmax),
            conn: Mlp::new("dec.conn", &[2 * h, m, 1], Tanh, Sigmoid),
            inv: Mlp::new("dec.inv", &[2 * h, m, 1], Tanh, Sigmoid),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VaeParams {
    pub dims: ModelDims,
    pub store: ParamStore,
}

impl VaeParams {
    pub fn init(dims: ModelDims, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::default();
        let m = Modules::new(&dims);
        let bound = 1.0 / (dims.max_pi as f64).sqrt();
        store.insert(PI_EMBED, crate::autodiff::Tensor::uniform(vec![dims.hidden, dims.max_pi], bound, &mut rng));
        m.enc_gru.init(&mut store, &mut rng);
        m.mu.init(&mut store, &mut rng);
        m.logvar.init(&mut store, &mut rng);
        m.dec_init.init(&mut store, &mut rng);
        m.dec_gru.init(&mut store, &mut rng);
        m.type_head.init(&mut store, &mut rng);
        m.conn.init(&mut store, &mut rng);
        m.inv.init(&mut store, &mut rng);
        VaeParams { dims, store }
    }

    pub(crate) fn modules(&self) -> Modules {
        Modules::new(&self.dims)
    }

    pub fn checksum(&self) -> String {
        self.store.checksum()
    }

    pub fn to_checkpoint(&self) -> Result<String> {
        let meta = BTreeMap::from([
            ("model".to_string(), "aig-vae".to_string()),
            ("dims".to_string(), serde_json::to_string(&self.dims).expect("dims serialize")),
        ]);
        Ok(self.store.to_checkpoint(&meta)?)
    }

    pub fn from_checkpoint(text: &str) -> Result<Self> {
        let (store, meta) = ParamStore::from_checkpoint(text)?;
        let dims = meta.get("dims").ok_or_else(|| VaeError::Checkpoint("missing `dims` metadata".into()))?;
        let dims: ModelDims = serde_json::from_str(dims).map_err(|e| VaeError::Checkpoint(e.to_string()))?;
        let expected = VaeParams::init(dims, 0);
        for (name, t) in expected.store.iter() {
            match store.get(name) {
                Some(u) if u.shape == t.shape => {}
                Some(u) => {
                    return Err(VaeError::Checkpoint(format!("`{name}` has shape {:?}, expected {:?}", u.shape, t.shape)))
                }
                None => return Err(VaeError::Checkpoint(format!("missing parameter `{name}`"))),
            }
        }
        Ok(VaeParams { dims, store })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentCode {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMode {
    Train,
    Eval,
}

/// Reparameterized draw `mu + sigma * eps` in train mode, `mu` in eval mode.
pub fn sample_latent(code: &LatentCode, mode: SampleMode, rng: &mut impl Rng) -> Vec<f64> {
    match mode {
        SampleMode::Eval => code.mu.clone(),
        SampleMode::Train => code
            .mu
            .iter()
            .zip(&code.sigma)
            .map(|(m, s)| {
                let e: f64 = rng.sample(StandardNormal);
                m + s * e
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_sample_is_mu() {
        let code = LatentCode { mu: vec![0.1, -0.7], sigma: vec![2.0, 3.0], z: vec![0.1, -0.7] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let z = sample_latent(&code, SampleMode::Eval, &mut rng);
        assert_eq!(z.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), code.mu.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn train_sample_is_seeded_and_tends_to_mu() {
        let code = LatentCode { mu: vec![0.1, -0.7], sigma: vec![1.0, 1.0], z: vec![] };
        let a = sample_latent(&code, SampleMode::Train, &mut ChaCha8Rng::seed_from_u64(5));
        let b = sample_latent(&code, SampleMode::Train, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert_ne!(a, code.mu);
        let tiny = LatentCode { sigma: vec![1e-12, 1e-12], ..code.clone() };
        let c = sample_latent(&tiny, SampleMode::Train, &mut ChaCha8Rng::seed_from_u64(5));
        for (x, m) in c.iter().zip(&code.mu) {
            assert!((x - m).abs() < 1e-10);
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let p = VaeParams::init(ModelDims::small(4), 3);
        let back = VaeParams::from_checkpoint(&p.to_checkpoint().unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
