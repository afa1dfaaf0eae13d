//! GRU cell and multi-layer perceptron on top of the tape.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DiffError, ParamStore, Result, Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Identity,
    Tanh,
    Sigmoid,
    Softmax,
}

impl Activation {
    fn apply(self, tape: &mut Tape, x: Var) -> Var {
        match self {
            Activation::Identity => x,
            Activation::Tanh => tape.tanh(x),
            Activation::Sigmoid => tape.sigmoid(x),
            Activation::Softmax => tape.softmax(x),
        }
    }
}

fn init_bound(fan_in: usize) -> f64 {
    1.0 / (fan_in.max(1) as f64).sqrt()
}

fn width(tape: &Tape, x: Var, what: &str) -> Result<usize> {
    match tape.shape(x) {
        (1, w) => Ok(w),
        s => Err(DiffError::Shape(format!("{what}: expected a row vector, got {s:?}"))),
    }
}

/// GRU cell: `hidden`-dimensional message and state, `cond`-dimensional
/// conditioning vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gru {
    pub prefix: String,
    pub hidden: usize,
    pub cond: usize,
}

impl Gru {
    pub fn new(prefix: impl Into<String>, hidden: usize, cond: usize) -> Self {
        Gru { prefix: prefix.into(), hidden, cond }
    }

    fn name(&self, p: &str) -> String {
        format!("{}.{p}", self.prefix)
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut impl Rng) {
        let h = self.hidden;
        for g in ["z", "r", "h"] {
            store.insert(self.name(&format!("W_{g}")), Tensor::uniform(vec![h, h], init_bound(h), rng));
            store.insert(self.name(&format!("U_{g}")), Tensor::uniform(vec![h, self.cond], init_bound(self.cond), rng));
            store.insert(self.name(&format!("b_{g}")), Tensor::uniform(vec![h], init_bound(h), rng));
        }
    }

    /// One update from aggregated message `m`, conditioning `t` and previous
    /// state `h_prev`.
    pub fn step(&self, tape: &mut Tape, m: Var, t: Var, h_prev: Var) -> Result<Var> {
        for (v, want, what) in [(m, self.hidden, "message"), (t, self.cond, "conditioning"), (h_prev, self.hidden, "state")] {
            let w = width(tape, v, what)?;
            if w != want {
                return Err(DiffError::Shape(format!("gru {what}: width {w}, expected {want}")));
            }
        }
        let gate = |tape: &mut Tape, g: &str, x: Var| -> Result<Var> {
            let w = tape.param(&self.name(&format!("W_{g}")))?;
            let u = tape.param(&self.name(&format!("U_{g}")))?;
            let b = tape.param(&self.name(&format!("b_{g}")))?;
            let wx = tape.linear(x, w);
            let ut = tape.linear(t, u);
            let s = tape.add(wx, ut);
            Ok(tape.add(s, b))
        };
        let pre_z = gate(tape, "z", m)?;
        let z = tape.sigmoid(pre_z);
        let pre_r = gate(tape, "r", m)?;
        let r = tape.sigmoid(pre_r);
        let rh = tape.mul(r, h_prev);
        let pre_h = gate(tape, "h", rh)?;
        let cand = tape.tanh(pre_h);
        let keep = tape.affine(z, -1.0, 1.0);
        let old = tape.mul(keep, h_prev);
        let new = tape.mul(z, cand);
        Ok(tape.add(old, new))
    }
}

/// Plain-vector GRU evaluation.
pub fn gru_step(gru: &Gru, store: &ParamStore, m: &[f64], t: &[f64], h_prev: &[f64]) -> Result<Vec<f64>> {
    let mut tape = Tape::new(store);
    let (m, t, h) = (tape.row(m.to_vec()), tape.row(t.to_vec()), tape.row(h_prev.to_vec()));
    let out = gru.step(&mut tape, m, t, h)?;
    Ok(tape.value(out).to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub input: usize,
    pub output: usize,
    pub act: Activation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub prefix: String,
    pub layers: Vec<Layer>,
}

impl Mlp {
    /// `dims` lists layer widths from input to output; every hidden layer
    /// uses `hidden_act` and the last layer `out_act`.
    pub fn new(prefix: impl Into<String>, dims: &[usize], hidden_act: Activation, out_act: Activation) -> Self {
        assert!(dims.len() >= 2, "an MLP needs an input and an output width");
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|k| Layer { input: dims[k], output: dims[k + 1], act: if k + 1 == n { out_act } else { hidden_act } })
            .collect();
        Mlp { prefix: prefix.into(), layers }
    }

    pub fn weight_name(&self, k: usize) -> String {
        format!("{}.l{k}.w", self.prefix)
    }

    pub fn bias_name(&self, k: usize) -> String {
        format!("{}.l{k}.b", self.prefix)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().output
    }

    pub fn init(&self, store: &mut ParamStore, rng: &mut impl Rng) {
        for (k, l) in self.layers.iter().enumerate() {
            let b = init_bound(l.input);
            store.insert(self.weight_name(k), Tensor::uniform(vec![l.output, l.input], b, rng));
            store.insert(self.bias_name(k), Tensor::uniform(vec![l.output], b, rng));
        }
    }

    pub fn forward(&self, tape: &mut Tape, x: Var) -> Result<Var> {
        let w = width(tape, x, "mlp input")?;
        if w != self.input_dim() {
            return Err(DiffError::Shape(format!("mlp `{}`: input width {w}, expected {}", self.prefix, self.input_dim())));
        }
        let mut h = x;
        for (k, l) in self.layers.iter().enumerate() {
            let w = tape.param(&self.weight_name(k))?;
            let b = tape.param(&self.bias_name(k))?;
            let a = tape.linear(h, w);
            let a = tape.add(a, b);
            h = l.act.apply(tape, a);
        }
        Ok(h)
    }

    /// Scores every ordered pair `(i, j)`, `j < i`, of the stacked rows `hs`
    /// as `forward([hs_i ; hs_j])`, without materializing the concatenations.
    /// Requires a two-layer tanh/sigmoid network with scalar output.
    pub fn pair_scores(&self, tape: &mut Tape, hs: Var) -> Result<Var> {
        let (_, h) = tape.shape(hs);
        let ok = self.layers.len() == 2
            && self.layers[0].act == Activation::Tanh
            && self.layers[1].act == Activation::Sigmoid
            && self.output_dim() == 1
            && self.input_dim() == 2 * h;
        if !ok {
            return Err(DiffError::Shape(format!("mlp `{}` is not a pair scorer over width {h}", self.prefix)));
        }
        let w0 = tape.param(&self.weight_name(0))?;
        let b0 = tape.param(&self.bias_name(0))?;
        let w1 = tape.param(&self.weight_name(1))?;
        let b1 = tape.param(&self.bias_name(1))?;
        let cur = tape.linear_cols(hs, w0, 0);
        let prev = tape.linear_cols(hs, w0, h);
        Ok(tape.pair_scores(cur, prev, b0, w1, b1))
    }
}

/// Plain-vector MLP evaluation.
pub fn mlp_forward(mlp: &Mlp, store: &ParamStore, x: &[f64]) -> Result<Vec<f64>> {
    let mut tape = Tape::new(store);
    let x = tape.row(x.to_vec());
    let y = mlp.forward(&mut tape, x)?;
    Ok(tape.value(y).to_vec())
}
