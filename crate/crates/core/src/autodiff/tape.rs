//! Reverse-mode tape over dense row-major matrices.
//!
//! Every value is a `rows x cols` matrix; vectors are single rows and
//! scalars are `1 x 1`. Parameters are borrowed from a [`ParamStore`] rather
//! than copied.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};

use super::{DiffError, ParamStore, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Clone, Debug)]
enum Op {
    Leaf,
    /// `x[n,k] * w[:, off..off+k]^T` giving `[n, o]`.
    LinearCols { x: Var, w: Var, off: usize },
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Affine { a: Var, scale: f64 },
    Sigmoid(Var),
    Tanh(Var),
    Exp(Var),
    /// Softmax over each row.
    Softmax(Var),
    Sum(Var),
    /// Sum of squared differences against a constant target.
    SqErr { a: Var, target: Vec<f64> },
    /// Row vectors stacked into a matrix.
    Stack(Vec<Var>),
    /// Pairwise two-layer scorer, see [`Tape::pair_scores`].
    PairScore { a: Var, b: Var, b1: Var, w2: Var, b2: Var },
    Weighted(Vec<(f64, Var)>),
}

struct Node<'p> {
    rows: usize,
    cols: usize,
    value: Cow<'p, [f64]>,
    op: Op,
}

pub struct Tape<'p> {
    store: Option<&'p ParamStore>,
    nodes: Vec<Node<'p>>,
    params: HashMap<String, Var>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl<'p> Tape<'p> {
    pub fn new(store: &'p ParamStore) -> Self {
        Tape { store: Some(store), nodes: Vec::new(), params: HashMap::new() }
    }

    /// A tape with no parameters, for constant-only computations.
    pub fn detached() -> Self {
        Tape { store: None, nodes: Vec::new(), params: HashMap::new() }
    }

    fn push(&mut self, rows: usize, cols: usize, value: Cow<'p, [f64]>, op: Op) -> Var {
        debug_assert_eq!(value.len(), rows * cols);
        self.nodes.push(Node { rows, cols, value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> (usize, usize) {
        (self.nodes[v.0].rows, self.nodes[v.0].cols)
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.value(v)[0]
    }

    pub fn constant(&mut self, rows: usize, cols: usize, data: Vec<f64>) -> Var {
        assert_eq!(data.len(), rows * cols, "constant shape");
        self.push(rows, cols, Cow::Owned(data), Op::Leaf)
    }

    pub fn row(&mut self, data: Vec<f64>) -> Var {
        let n = data.len();
        self.constant(1, n, data)
    }

    /// Leaf bound to a named parameter. Vectors become single rows.
    pub fn param(&mut self, name: &str) -> Result<Var> {
        if let Some(&v) = self.params.get(name) {
            return Ok(v);
        }
        let store = self.store.ok_or_else(|| DiffError::MissingParam(name.to_string()))?;
        let t = store.get(name).ok_or_else(|| DiffError::MissingParam(name.to_string()))?;
        let (rows, cols) = t.matrix_shape();
        let v = self.push(rows, cols, Cow::Borrowed(&t.data), Op::Leaf);
        self.params.insert(name.to_string(), v);
        Ok(v)
    }

    pub fn linear_cols(&mut self, x: Var, w: Var, off: usize) -> Var {
        let (n, k) = self.shape(x);
        let (o, kk) = self.shape(w);
        assert!(off + k <= kk, "linear: input width {k} at offset {off} exceeds weight width {kk}");
        let (xv, wv) = (self.value(x), self.value(w));
        let mut out = vec![0.0; n * o];
        for r in 0..n {
            let xr = &xv[r * k..(r + 1) * k];
            for c in 0..o {
                let wr = &wv[c * kk + off..c * kk + off + k];
                out[r * o + c] = xr.iter().zip(wr).map(|(a, b)| a * b).sum();
            }
        }
        self.push(n, o, Cow::Owned(out), Op::LinearCols { x, w, off })
    }

    /// `x * w^T` for a row vector or stacked rows.
    pub fn linear(&mut self, x: Var, w: Var) -> Var {
        self.linear_cols(x, w, 0)
    }

    fn zip(&mut self, a: Var, b: Var, op: Op, f: impl Fn(f64, f64) -> f64) -> Var {
        let (sa, sb) = (self.shape(a), self.shape(b));
        assert_eq!(sa, sb, "elementwise shape mismatch");
        let out: Vec<f64> = self.value(a).iter().zip(self.value(b)).map(|(&x, &y)| f(x, y)).collect();
        self.push(sa.0, sa.1, Cow::Owned(out), op)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        self.zip(a, b, Op::Add(a, b), |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        self.zip(a, b, Op::Sub(a, b), |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        self.zip(a, b, Op::Mul(a, b), |x, y| x * y)
    }

    /// `scale * a + shift` elementwise.
    pub fn affine(&mut self, a: Var, scale: f64, shift: f64) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| scale * x + shift).collect();
        self.push(r, c, Cow::Owned(out), Op::Affine { a, scale })
    }

    fn map(&mut self, a: Var, op: Op, f: impl Fn(f64) -> f64) -> Var {
        let (r, c) = self.shape(a);
        let out = self.value(a).iter().map(|&x| f(x)).collect();
        self.push(r, c, Cow::Owned(out), op)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map(a, Op::Sigmoid(a), sigmoid)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map(a, Op::Tanh(a), f64::tanh)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.map(a, Op::Exp(a), f64::exp)
    }

    pub fn softmax(&mut self, a: Var) -> Var {
        let (r, c) = self.shape(a);
        let v = self.value(a);
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            let row = &v[i * c..(i + 1) * c];
            let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = row.iter().map(|&x| (x - m).exp()).collect();
            let s: f64 = e.iter().sum();
            for j in 0..c {
                out[i * c + j] = e[j] / s;
            }
        }
        self.push(r, c, Cow::Owned(out), Op::Softmax(a))
    }

    pub fn sum(&mut self, a: Var) -> Var {
        let s = self.value(a).iter().sum();
        self.push(1, 1, Cow::Owned(vec![s]), Op::Sum(a))
    }

    pub fn sq_err(&mut self, a: Var, target: Vec<f64>) -> Var {
        assert_eq!(self.value(a).len(), target.len(), "target shape mismatch");
        let s = self.value(a).iter().zip(&target).map(|(x, t)| (x - t) * (x - t)).sum();
        self.push(1, 1, Cow::Owned(vec![s]), Op::SqErr { a, target })
    }

    pub fn stack(&mut self, rows: &[Var]) -> Var {
        assert!(!rows.is_empty(), "stack of nothing");
        let c = self.shape(rows[0]).1;
        let mut out = Vec::with_capacity(rows.len() * c);
        for &r in rows {
            assert_eq!(self.shape(r), (1, c), "stack expects equal row vectors");
            out.extend_from_slice(self.value(r));
        }
        self.push(rows.len(), c, Cow::Owned(out), Op::Stack(rows.to_vec()))
    }

    /// For stacked projections `a`, `b` of shape `[n, m]`, returns the
    /// `[n, n]` matrix with `sigmoid(w2 . tanh(a_i + b_j + b1) + b2)` at
    /// `(i, j)` for `j < i` and zero elsewhere. `w2` is `[1, m]`, `b2` is
    /// `[1, 1]`.
    pub fn pair_scores(&mut self, a: Var, b: Var, b1: Var, w2: Var, b2: Var) -> Var {
        let (n, m) = self.shape(a);
        assert_eq!(self.shape(b), (n, m), "pair_scores operand shapes");
        assert_eq!(self.value(b1).len(), m, "pair_scores hidden bias");
        assert_eq!(self.value(w2).len(), m, "pair_scores output weight");
        assert_eq!(self.value(b2).len(), 1, "pair_scores output bias");
        let (av, bv, b1v, w2v, b2v) = (self.value(a), self.value(b), self.value(b1), self.value(w2), self.value(b2)[0]);
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..i {
                let mut s = b2v;
                for k in 0..m {
                    s += w2v[k] * (av[i * m + k] + bv[j * m + k] + b1v[k]).tanh();
                }
                out[i * n + j] = sigmoid(s);
            }
        }
        self.push(n, n, Cow::Owned(out), Op::PairScore { a, b, b1, w2, b2 })
    }

    pub fn weighted(&mut self, terms: &[(f64, Var)]) -> Var {
        let (r, c) = self.shape(terms[0].1);
        let mut out = vec![0.0; r * c];
        for &(w, v) in terms {
            assert_eq!(self.shape(v), (r, c), "weighted sum shape mismatch");
            for (o, x) in out.iter_mut().zip(self.value(v)) {
                *o += w * x;
            }
        }
        self.push(r, c, Cow::Owned(out), Op::Weighted(terms.to_vec()))
    }

    /// Gradients of the scalar `loss` with respect to every node.
    pub fn backward_all(&self, loss: Var) -> Result<Vec<Option<Vec<f64>>>> {
        if self.shape(loss) != (1, 1) {
            return Err(DiffError::NonScalarLoss(self.shape(loss)));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; loss.0 + 1];
        grads[loss.0] = Some(vec![1.0]);
        fn acc(grads: &mut [Option<Vec<f64>>], v: Var, len: usize) -> &mut Vec<f64> {
            grads[v.0].get_or_insert_with(|| vec![0.0; len])
        }
        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            let len = |v: Var| self.nodes[v.0].value.len();
            match &node.op {
                Op::Leaf => {}
                Op::LinearCols { x, w, off } => {
                    let (n, k) = self.shape(*x);
                    let (o, kk) = self.shape(*w);
                    let (xv, wv) = (self.value(*x), self.value(*w));
                    {
                        let gx = acc(&mut grads, *x, n * k);
                        for r in 0..n {
                            for c in 0..o {
                                let gv = g[r * o + c];
                                if gv == 0.0 {
                                    continue;
                                }
                                let wr = &wv[c * kk + off..c * kk + off + k];
                                for t in 0..k {
                                    gx[r * k + t] += gv * wr[t];
                                }
                            }
                        }
                    }
                    let gw = acc(&mut grads, *w, o * kk);
                    for r in 0..n {
                        let xr = &xv[r * k..(r + 1) * k];
                        for c in 0..o {
                            let gv = g[r * o + c];
                            if gv == 0.0 {
                                continue;
                            }
                            let row = &mut gw[c * kk + off..c * kk + off + k];
                            for t in 0..k {
                                row[t] += gv * xr[t];
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for (v, s) in [(*a, 1.0), (*b, 1.0)] {
                        let ga = acc(&mut grads, v, len(v));
                        ga.iter_mut().zip(&g).for_each(|(x, y)| *x += s * y);
                    }
                }
                Op::Sub(a, b) => {
                    for (v, s) in [(*a, 1.0), (*b, -1.0)] {
                        let ga = acc(&mut grads, v, len(v));
                        ga.iter_mut().zip(&g).for_each(|(x, y)| *x += s * y);
                    }
                }
                Op::Mul(a, b) => {
                    let (av, bv) = (self.value(*a).to_vec(), self.value(*b).to_vec());
                    let ga = acc(&mut grads, *a, av.len());
                    for i in 0..g.len() {
                        ga[i] += g[i] * bv[i];
                    }
                    let gb = acc(&mut grads, *b, bv.len());
                    for i in 0..g.len() {
                        gb[i] += g[i] * av[i];
                    }
                }
                Op::Affine { a, scale } => {
                    let ga = acc(&mut grads, *a, g.len());
                    ga.iter_mut().zip(&g).for_each(|(x, y)| *x += scale * y);
                }
                Op::Sigmoid(a) => {
                    let y = &node.value;
                    let ga = acc(&mut grads, *a, g.len());
                    for i in 0..g.len() {
                        ga[i] += g[i] * y[i] * (1.0 - y[i]);
                    }
                }
                Op::Tanh(a) => {
                    let y = &node.value;
                    let ga = acc(&mut grads, *a, g.len());
                    for i in 0..g.len() {
                        ga[i] += g[i] * (1.0 - y[i] * y[i]);
                    }
                }
                Op::Exp(a) => {
                    let y = &node.value;
                    let ga = acc(&mut grads, *a, g.len());
                    for i in 0..g.len() {
                        ga[i] += g[i] * y[i];
                    }
                }
                Op::Softmax(a) => {
                    let y = &node.value;
                    let (r, c) = (node.rows, node.cols);
                    let ga = acc(&mut grads, *a, g.len());
                    for i in 0..r {
                        let dot: f64 = (0..c).map(|j| g[i * c + j] * y[i * c + j]).sum();
                        for j in 0..c {
                            ga[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
                        }
                    }
                }
                Op::Sum(a) => {
                    let ga = acc(&mut grads, *a, len(*a));
                    ga.iter_mut().for_each(|x| *x += g[0]);
                }
                Op::SqErr { a, target } => {
                    let av = self.value(*a);
                    let ga = acc(&mut grads, *a, av.len());
                    for i in 0..av.len() {
                        ga[i] += g[0] * 2.0 * (av[i] - target[i]);
                    }
                }
                Op::Stack(rows) => {
                    let c = node.cols;
                    for (i, r) in rows.iter().enumerate() {
                        let gr = acc(&mut grads, *r, c);
                        for j in 0..c {
                            gr[j] += g[i * c + j];
                        }
                    }
                }
                Op::PairScore { a, b, b1, w2, b2 } => {
                    let (n, m) = self.shape(*a);
                    let (av, bv, b1v, w2v) = (self.value(*a), self.value(*b), self.value(*b1), self.value(*w2));
                    let y = &node.value;
                    let mut ga = vec![0.0; n * m];
                    let mut gb = vec![0.0; n * m];
                    let mut gb1 = vec![0.0; m];
                    let mut gw2 = vec![0.0; m];
                    let mut gb2 = 0.0;
                    for i in 0..n {
                        for j in 0..i {
                            let go = g[i * n + j] * y[i * n + j] * (1.0 - y[i * n + j]);
                            if go == 0.0 {
                                continue;
                            }
                            gb2 += go;
                            for k in 0..m {
                                let t = (av[i * m + k] + bv[j * m + k] + b1v[k]).tanh();
                                gw2[k] += go * t;
                                let dp = go * w2v[k] * (1.0 - t * t);
                                ga[i * m + k] += dp;
                                gb[j * m + k] += dp;
                                gb1[k] += dp;
                            }
                        }
                    }
                    for (v, d) in [(*a, ga), (*b, gb), (*b1, gb1), (*w2, gw2), (*b2, vec![gb2])] {
                        let t = acc(&mut grads, v, d.len());
                        t.iter_mut().zip(&d).for_each(|(x, y)| *x += y);
                    }
                }
                Op::Weighted(terms) => {
                    for &(w, v) in terms {
                        let gv = acc(&mut grads, v, g.len());
                        gv.iter_mut().zip(&g).for_each(|(x, y)| *x += w * y);
                    }
                }
            }
            grads[id] = Some(g);
        }
        Ok(grads)
    }

    /// Gradients of `loss` with respect to every parameter used on the tape.
    /// Parameters the loss does not depend on get zero gradients.
    pub fn backward(&self, loss: Var) -> Result<BTreeMap<String, Vec<f64>>> {
        let grads = self.backward_all(loss)?;
        Ok(self
            .params
            .iter()
            .map(|(name, v)| {
                let g = grads.get(v.0).cloned().flatten().unwrap_or_else(|| vec![0.0; self.value(*v).len()]);
                (name.clone(), g)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::Tensor;

    #[test]
    fn square_derivative() {
        let mut store = ParamStore::default();
        store.insert("x", Tensor::vector(vec![3.0]));
        let mut t = Tape::new(&store);
        let x = t.param("x").unwrap();
        let y = t.mul(x, x);
        let s = t.sum(y);
        assert_eq!(t.backward(s).unwrap()["x"], vec![6.0]);
    }

    #[test]
    fn sigmoid_derivative_at_zero() {
        let mut store = ParamStore::default();
        store.insert("x", Tensor::vector(vec![0.0]));
        let mut t = Tape::new(&store);
        let x = t.param("x").unwrap();
        let y = t.sigmoid(x);
        let s = t.sum(y);
        assert_eq!(t.backward(s).unwrap()["x"], vec![0.25]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut t = Tape::detached();
        let x = t.row(vec![1.0, 2.0]);
        assert!(matches!(t.backward(x), Err(DiffError::NonScalarLoss((1, 2)))));
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let mut t = Tape::detached();
        let x = t.constant(2, 3, vec![1.0, -2.0, 0.5, 100.0, 100.0, -100.0]);
        let y = t.softmax(x);
        let v = t.value(y);
        assert!((v[0] + v[1] + v[2] - 1.0).abs() < 1e-12);
        assert!((v[3] + v[4] + v[5] - 1.0).abs() < 1e-12);
    }
}
