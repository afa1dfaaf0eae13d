//! Seeded single-sample training with validation early stopping.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::aig::{to_tensors, AigGraph};
use crate::autodiff::{AdamState, Tape};

use super::loss::{loss_on, LossBreakdown};
use super::model::{decode_on, encode_on};
use super::{Modules, Result, SampleMode, VaeError, VaeParams};

/// Parameter name to flat gradient.
pub type Gradients = BTreeMap<String, Vec<f64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lr: f64,
    pub epochs: usize,
    pub batch: usize,
    pub patience: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { alpha: 0.3, beta: 0.3, gamma: 0.3, delta: 0.1, lr: 1e-4, epochs: 100, batch: 1, patience: 10, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub type_loss: f64,
    pub conn_loss: f64,
    pub inv_loss: f64,
    pub kl: f64,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Parameters from the epoch with the lowest validation loss.
    pub params: VaeParams,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub stopped_early: bool,
}

impl TrainReport {
    pub fn history_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.history {
            w.serialize(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
    }
}

/// Seeded shuffle, then the first `round(train_frac * n)` graphs train.
pub fn split_dataset<T: Clone>(items: &[T], train_frac: f64, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = ((items.len() as f64) * train_frac).round() as usize;
    let k = k.min(items.len());
    let pick = |ids: &[usize]| ids.iter().map(|&i| items[i].clone()).collect();
    (pick(&idx[..k]), pick(&idx[k..]))
}

/// Loss of one graph; in train mode also the parameter gradients.
pub(crate) fn graph_loss(
    p: &VaeParams,
    m: &Modules,
    g: &AigGraph,
    h: &Hyperparams,
    mode: SampleMode,
    want_grads: bool,
    rng: &mut impl Rng,
) -> Result<(LossBreakdown, Option<Gradients>)> {
    let target = to_tensors(g)?;
    let mut tape = Tape::new(&p.store);
    let enc = encode_on(&mut tape, p, m, g)?;
    let z = match mode {
        SampleMode::Eval => enc.mu,
        SampleMode::Train => {
            let eps: Vec<f64> = (0..p.dims.latent).map(|_| rng.sample(StandardNormal)).collect();
            let eps = tape.row(eps);
            let half = tape.affine(enc.logvar, 0.5, 0.0);
            let sd = tape.exp(half);
            let noise = tape.mul(sd, eps);
            tape.add(enc.mu, noise)
        }
    };
    let dec = decode_on(&mut tape, m, z, g.node_count())?;
    let l = loss_on(&mut tape, &target, &dec, enc.mu, enc.logvar, h);
    let values = l.values(&tape);
    let grads = if want_grads { Some(tape.backward(l.total)?) } else { None };
    Ok((values, grads))
}

/// Loss of one graph and its gradient with respect to every parameter. In
/// train mode the reparameterization noise is drawn from `seed`.
pub fn loss_with_gradients(
    p: &VaeParams,
    g: &AigGraph,
    h: &Hyperparams,
    mode: SampleMode,
    seed: u64,
) -> Result<(LossBreakdown, Gradients)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (l, grads) = graph_loss(p, &p.modules(), g, h, mode, true, &mut rng)?;
    Ok((l, grads.expect("gradients requested")))
}

fn mean_eval_loss(p: &VaeParams, m: &Modules, set: &[AigGraph], h: &Hyperparams) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut s = 0.0;
    for g in set {
        s += graph_loss(p, m, g, h, SampleMode::Eval, false, &mut rng)?.0.total;
    }
    Ok(s / set.len() as f64)
}

/// Trains from `init`. Validation loss (or training loss when `val` is
/// empty) drives early stopping: training ends once it has failed to improve
/// for `patience` consecutive epochs.
pub fn train(init: VaeParams, train_set: &[AigGraph], val: &[AigGraph], h: &Hyperparams) -> Result<TrainReport> {
    if train_set.is_empty() {
        return Err(VaeError::EmptyDataset);
    }
    let m = init.modules();
    let mut params = init;
    let mut adam = AdamState::new(h.lr);
    let mut rng = ChaCha8Rng::seed_from_u64(h.seed);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut history = Vec::new();
    let mut best = (f64::INFINITY, params.clone(), 0usize);
    let mut bad = 0usize;
    let mut stopped_early = false;
    for epoch in 1..=h.epochs {
        order.shuffle(&mut rng);
        let mut sum = LossBreakdown::default();
        for &i in &order {
            let (l, grads) = graph_loss(&params, &m, &train_set[i], h, SampleMode::Train, true, &mut rng)?;
            adam.step(&mut params.store, &grads.expect("train mode yields gradients"))?;
            sum.total += l.total;
            sum.type_loss += l.type_loss;
            sum.conn_loss += l.conn_loss;
            sum.inv_loss += l.inv_loss;
            sum.kl += l.kl;
        }
        let k = train_set.len() as f64;
        let val_loss = if val.is_empty() { sum.total / k } else { mean_eval_loss(&params, &m, val, h)? };
        history.push(EpochStats {
            epoch,
            train_loss: sum.total / k,
            val_loss,
            type_loss: sum.type_loss / k,
            conn_loss: sum.conn_loss / k,
            inv_loss: sum.inv_loss / k,
            kl: sum.kl / k,
        });
        if val_loss < best.0 {
            best = (val_loss, params.clone(), epoch);
            bad = 0;
        } else {
            bad += 1;
            if bad >= h.patience {
                stopped_early = epoch < h.epochs;
                break;
            }
        }
    }
    Ok(TrainReport { params: best.1, history, best_epoch: best.2, stopped_early })
}
