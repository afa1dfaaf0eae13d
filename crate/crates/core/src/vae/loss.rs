//! Reconstruction plus KL objective.

use serde::{Deserialize, Serialize};

use crate::aig::TensorTriple;
use crate::autodiff::{Tape, Var};

use super::model::DecodedVars;
use super::{Hyperparams, LatentCode, Result, VaeError};

/// Normalized, unweighted components and the weighted total.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub type_loss: f64,
    pub conn_loss: f64,
    pub inv_loss: f64,
    pub kl: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub(crate) fn weighted(type_loss: f64, conn_loss: f64, inv_loss: f64, kl: f64, h: &Hyperparams) -> Self {
        let total = h.alpha * type_loss + h.beta * conn_loss + h.gamma * inv_loss + h.delta * kl;
        LossBreakdown { type_loss, conn_loss, inv_loss, kl, total }
    }
}

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Loss of the soft reconstruction `x_hat` against `x`, with the KL term of
/// `code` (which uses `sigma`, not a sampled `z`).
pub fn loss(x: &TensorTriple, x_hat: &TensorTriple, code: &LatentCode, h: &Hyperparams) -> Result<LossBreakdown> {
    if x.n != x_hat.n || x_hat.type_mat.len() != x.n || x_hat.conn_mat.len() != x.n * x.n || x_hat.inv_mat.len() != x.n * x.n {
        return Err(VaeError::Shape(format!("target has {} nodes, reconstruction {}", x.n, x_hat.n)));
    }
    if code.mu.len() != code.sigma.len() {
        return Err(VaeError::Shape("mu and sigma differ in length".into()));
    }
    let n = x.n as f64;
    let t: Vec<f64> = x.type_mat.iter().flatten().cloned().collect();
    let th: Vec<f64> = x_hat.type_mat.iter().flatten().cloned().collect();
    let kl = 0.5
        * code
            .mu
            .iter()
            .zip(&code.sigma)
            .map(|(m, s)| s * s + m * m - (s * s).ln() - 1.0)
            .sum::<f64>();
    Ok(LossBreakdown::weighted(
        sq(&th, &t) / (3.0 * n),
        sq(&x_hat.conn_mat, &x.conn_mat) / (n * n),
        sq(&x_hat.inv_mat, &x.inv_mat) / (n * n),
        kl,
        h,
    ))
}

pub(crate) struct LossVars {
    pub total: Var,
    pub type_loss: Var,
    pub conn_loss: Var,
    pub inv_loss: Var,
    pub kl: Var,
}

impl LossVars {
    pub fn values(&self, tape: &Tape) -> LossBreakdown {
        LossBreakdown {
            type_loss: tape.scalar(self.type_loss),
            conn_loss: tape.scalar(self.conn_loss),
            inv_loss: tape.scalar(self.inv_loss),
            kl: tape.scalar(self.kl),
            total: tape.scalar(self.total),
        }
    }
}

/// The same objective recorded on the tape, with the KL term written in
/// terms of the log-variance head.
pub(crate) fn loss_on(
    tape: &mut Tape,
    x: &TensorTriple,
    d: &DecodedVars,
    mu: Var,
    logvar: Var,
    h: &Hyperparams,
) -> LossVars {
    let n = x.n as f64;
    let t: Vec<f64> = x.type_mat.iter().flatten().cloned().collect();
    let se_t = tape.sq_err(d.types, t);
    let se_c = tape.sq_err(d.conn, x.conn_mat.clone());
    let se_i = tape.sq_err(d.inv, x.inv_mat.clone());
    let type_loss = tape.affine(se_t, 1.0 / (3.0 * n), 0.0);
    let conn_loss = tape.affine(se_c, 1.0 / (n * n), 0.0);
    let inv_loss = tape.affine(se_i, 1.0 / (n * n), 0.0);
    let var = tape.exp(logvar);
    let mu2 = tape.mul(mu, mu);
    let s = tape.add(var, mu2);
    let s = tape.sub(s, logvar);
    let s = tape.sum(s);
    let d_lat = tape.value(mu).len() as f64;
    let kl = tape.affine(s, 0.5, -0.5 * d_lat);
    let total = tape.weighted(&[(h.alpha, type_loss), (h.beta, conn_loss), (h.gamma, inv_loss), (h.delta, kl)]);
    LossVars { total, type_loss, conn_loss, inv_loss, kl }
}
