//! Latent interpolation and threshold filtering of decoded triples.

use serde::{Deserialize, Serialize};

use crate::aig::TensorTriple;

use super::{CamouflageError, Result};

/// Cut-off in the open interval (0, 1).
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(th: f64) -> Result<Self> {
        if th > 0.0 && th < 1.0 {
            Ok(Threshold(th))
        } else {
            Err(CamouflageError::InvalidThreshold(th))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Threshold {
    type Error = CamouflageError;
    fn try_from(v: f64) -> Result<Self> {
        Threshold::new(v)
    }
}

impl From<Threshold> for f64 {
    fn from(t: Threshold) -> f64 {
        t.0
    }
}

/// Interpolation weight in the closed interval [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Proportion(f64);

impl Proportion {
    pub fn new(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Proportion(p))
        } else {
            Err(CamouflageError::InvalidProportion(p))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Proportion {
    type Error = CamouflageError;
    fn try_from(v: f64) -> Result<Self> {
        Proportion::new(v)
    }
}

impl From<Proportion> for f64 {
    fn from(p: Proportion) -> f64 {
        p.0
    }
}

/// `(1 - p) * z_f + p * z_a`. The endpoints return exact copies.
pub fn interpolate(z_f: &[f64], z_a: &[f64], p: Proportion) -> Result<Vec<f64>> {
    if z_f.len() != z_a.len() {
        return Err(CamouflageError::Shape(format!("latent widths {} and {}", z_f.len(), z_a.len())));
    }
    let p = p.value();
    Ok(if p == 0.0 {
        z_f.to_vec()
    } else if p == 1.0 {
        z_a.to_vec()
    } else {
        z_f.iter().zip(z_a).map(|(f, a)| (1.0 - p) * f + p * a).collect()
    })
}

fn argmax(row: &[f64; 3]) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if row[k] > row[best] {
            best = k;
        }
    }
    best
}

/// Binarizes a soft triple: types by row argmax (ties to the lowest column),
/// connection and inversion entries strictly above `th`. Entries on or above
/// the diagonal are cleared, and an inversion bit survives only where the
/// connection bit is set.
pub fn threshold_filter(soft: &TensorTriple, th: Threshold) -> TensorTriple {
    let n = soft.n;
    let th = th.value();
    let mut out = TensorTriple::zeros(n);
    for (i, row) in soft.type_mat.iter().enumerate() {
        out.type_mat[i][argmax(row)] = 1.0;
    }
    for i in 0..n {
        for j in 0..i {
            if soft.conn(i, j) > th {
                out.set_conn(i, j, 1.0);
                if soft.inv(i, j) > th {
                    out.set_inv(i, j, 1.0);
                }
            }
        }
    }
    out
}
