//! Encoder and decoder forward passes.

use std::collections::VecDeque;

use crate::aig::{from_tensors, to_tensors, AigGraph, Fanin, NodeType, TensorTriple};
use crate::autodiff::{Tape, Var};
use crate::camouflage::{threshold_filter, Threshold};

use super::{LatentCode, Modules, Result, VaeError, VaeParams, PI_EMBED};

pub(crate) struct EncodedVars {
    pub mu: Var,
    pub logvar: Var,
}

pub(crate) struct DecodedVars {
    /// `[n, 3]`
    pub types: Var,
    /// `[n, n]`
    pub conn: Var,
    /// `[n, n]`
    pub inv: Var,
}

fn check_tree(g: &AigGraph) -> Result<()> {
    g.check_structure()?;
    if !g.is_tree() {
        return Err(VaeError::NotTree(format!(
            "{} nodes, {} edges, {} outputs",
            g.node_count(),
            g.edges.len(),
            g.count(NodeType::Po)
        )));
    }
    Ok(())
}

/// Processing order: a node becomes ready once every fanin has been
/// processed; ready nodes are taken first-in first-out starting from the
/// nodes without fanins.
pub(crate) fn bfs_order(g: &AigGraph) -> Vec<usize> {
    let n = g.node_count();
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for e in &g.edges {
        indeg[e.dst] += 1;
        out[e.src].push(e.dst);
    }
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &w in &out[v] {
            indeg[w] -= 1;
            if indeg[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    order
}

pub(crate) fn encode_on(tape: &mut Tape, p: &VaeParams, m: &Modules, g: &AigGraph) -> Result<EncodedVars> {
    check_tree(g)?;
    let dims = &p.dims;
    let fanins = g.fanins();
    let embed = tape.param(PI_EMBED)?;
    let mut h: Vec<Option<Var>> = vec![None; g.node_count()];
    let mut pi_ordinal = 0;
    let order = bfs_order(g);
    if order.len() != g.node_count() {
        return Err(VaeError::NotTree("graph has a cycle".into()));
    }
    for v in order {
        let kind = g.kind(v);
        let state = if kind == NodeType::Pi {
            let mut one_hot = vec![0.0; dims.max_pi];
            one_hot[pi_ordinal.min(dims.max_pi - 1)] = 1.0;
            pi_ordinal += 1;
            let x = tape.row(one_hot);
            tape.linear(x, embed)
        } else {
            let msg = aggregate(tape, dims.hidden, &fanins[v], &h, v)?;
            let t = tape.row(kind.one_hot().to_vec());
            m.enc_gru.step(tape, msg, t, msg)?
        };
        h[v] = Some(state);
    }
    let po = g.ids_of(NodeType::Po)[0];
    let h_po = h[po].ok_or(VaeError::Ordering(po))?;
    let mu = m.mu.forward(tape, h_po)?;
    let logvar = m.logvar.forward(tape, h_po)?;
    Ok(EncodedVars { mu, logvar })
}

/// Sum of fanin states, negated across inverted edges.
pub(crate) fn aggregate(tape: &mut Tape, hidden: usize, fanins: &[Fanin], h: &[Option<Var>], v: usize) -> Result<Var> {
    let mut msg = tape.row(vec![0.0; hidden]);
    for f in fanins {
        let hu = h[f.node].ok_or(VaeError::Ordering(v))?;
        msg = if f.inverted { tape.sub(msg, hu) } else { tape.add(msg, hu) };
    }
    Ok(msg)
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for k in 1..row.len() {
        if row[k] > row[best] {
            best = k;
        }
    }
    best
}

pub(crate) fn decode_on(tape: &mut Tape, m: &Modules, z: Var, n: usize) -> Result<DecodedVars> {
    if n < 2 {
        return Err(VaeError::TooFewNodes(n));
    }
    let mut h = m.dec_init.forward(tape, z)?;
    let mut states = Vec::with_capacity(n);
    let mut types = Vec::with_capacity(n);
    let mut po_seen = false;
    for i in 0..n {
        states.push(h);
        let t = if i == 0 {
            tape.row(NodeType::Pi.one_hot().to_vec())
        } else if i == n - 1 && !po_seen {
            tape.row(NodeType::Po.one_hot().to_vec())
        } else {
            m.type_head.forward(tape, h)?
        };
        po_seen |= argmax(tape.value(t)) == NodeType::Po.index();
        types.push(t);
        if i + 1 < n {
            h = m.dec_gru.step(tape, h, t, h)?;
        }
    }
    let hs = tape.stack(&states);
    let types = tape.stack(&types);
    let conn = m.conn.pair_scores(tape, hs)?;
    let inv = m.inv.pair_scores(tape, hs)?;
    Ok(DecodedVars { types, conn, inv })
}

pub(crate) fn triple_from(tape: &Tape, d: &DecodedVars) -> TensorTriple {
    let n = tape.shape(d.types).0;
    let tv = tape.value(d.types);
    TensorTriple {
        n,
        type_mat: (0..n).map(|i| [tv[3 * i], tv[3 * i + 1], tv[3 * i + 2]]).collect(),
        conn_mat: tape.value(d.conn).to_vec(),
        inv_mat: tape.value(d.inv).to_vec(),
    }
}

/// Evaluation-mode encoding: `z` equals `mu`.
pub fn encode(g: &AigGraph, p: &VaeParams) -> Result<LatentCode> {
    let m = p.modules();
    let mut tape = Tape::new(&p.store);
    let e = encode_on(&mut tape, p, &m, g)?;
    let mu = tape.value(e.mu).to_vec();
    let sigma = tape.value(e.logvar).iter().map(|lv| (0.5 * lv).exp()).collect();
    Ok(LatentCode { z: mu.clone(), mu, sigma })
}

/// Soft triple with `n` nodes decoded from `z`.
pub fn decode(z: &[f64], n: usize, p: &VaeParams) -> Result<TensorTriple> {
    if z.len() != p.dims.latent {
        return Err(VaeError::Shape(format!("latent width {}, model expects {}", z.len(), p.dims.latent)));
    }
    let m = p.modules();
    let mut tape = Tape::new(&p.store);
    let zv = tape.row(z.to_vec());
    let d = decode_on(&mut tape, &m, zv, n)?;
    Ok(triple_from(&tape, &d))
}

/// Thresholded decode of the evaluation-mode encoding of `g`.
pub fn reconstruct(g: &AigGraph, p: &VaeParams, th: Threshold) -> Result<AigGraph> {
    let code = encode(g, p)?;
    let soft = decode(&code.mu, g.node_count(), p)?;
    let (graph, _) = from_tensors(&threshold_filter(&soft, th))?;
    Ok(graph)
}

/// Fraction of equal entries between two binary triples of the same size,
/// over the type rows and the full connection and inverter matrices.
pub fn binary_agreement(x: &TensorTriple, y: &TensorTriple) -> Result<f64> {
    if x.n != y.n {
        return Err(VaeError::Shape(format!("{} vs {} nodes", x.n, y.n)));
    }
    let same = |a: f64, b: f64| u32::from((a > 0.5) == (b > 0.5));
    let mut agree = 0u64;
    for (r, s) in x.type_mat.iter().zip(&y.type_mat) {
        agree += (0..3).map(|k| u64::from(same(r[k], s[k]))).sum::<u64>();
    }
    agree += x.conn_mat.iter().zip(&y.conn_mat).map(|(&a, &b)| u64::from(same(a, b))).sum::<u64>();
    agree += x.inv_mat.iter().zip(&y.inv_mat).map(|(&a, &b)| u64::from(same(a, b))).sum::<u64>();
    Ok(agree as f64 / (3 * x.n + 2 * x.n * x.n) as f64)
}

/// Agreement between `g` and the thresholded decode of its encoding.
pub fn reconstruction_agreement(g: &AigGraph, p: &VaeParams, th: Threshold) -> Result<f64> {
    let code = encode(g, p)?;
    let soft = decode(&code.mu, g.node_count(), p)?;
    binary_agreement(&to_tensors(g)?, &threshold_filter(&soft, th))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{to_tensors, Fanin};
    use crate::vae::ModelDims;

    fn tree() -> AigGraph {
        let mut g = AigGraph::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let c = g.add_pi("c");
        let x = g.add_and(Fanin::plain(a), Fanin::inv(b));
        let y = g.add_and(Fanin::plain(x), Fanin::plain(c));
        g.add_po("o", Fanin::inv(y));
        g
    }

    fn params() -> VaeParams {
        VaeParams::init(ModelDims::small(8), 9)
    }

    #[test]
    fn latent_shapes_and_determinism() {
        let p = VaeParams::init(ModelDims { hidden: 16, latent: 12, mlp_hidden: 10, max_pi: 8 }, 1);
        let a = encode(&tree(), &p).unwrap();
        assert_eq!(a.mu.len(), 12);
        assert_eq!(a.sigma.len(), 12);
        assert!(a.sigma.iter().all(|&s| s > 0.0));
        assert_eq!(a, encode(&tree(), &p).unwrap());
        assert_eq!(a.z, a.mu);
    }

    #[test]
    fn rejects_non_tree() {
        let mut g = tree();
        g.add_po("p", Fanin::plain(3));
        assert!(matches!(encode(&g, &params()), Err(VaeError::NotTree(_))));
    }

    #[test]
    fn decode_shapes() {
        let p = params();
        let z = encode(&tree(), &p).unwrap().mu;
        for n in [2, 5, 9] {
            let t = decode(&z, n, &p).unwrap();
            assert_eq!(t.n, n);
            assert_eq!(t.type_mat.len(), n);
            assert_eq!(t.conn_mat.len(), n * n);
            assert_eq!(t.type_mat[0], [1.0, 0.0, 0.0]);
            assert!(t.is_lower_triangular());
            for r in &t.type_mat {
                assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
            for i in 0..n {
                for j in 0..i {
                    assert!(t.conn(i, j) > 0.0 && t.conn(i, j) < 1.0);
                    assert!(t.inv(i, j) > 0.0 && t.inv(i, j) < 1.0);
                }
            }
        }
        assert!(matches!(decode(&z, 1, &p), Err(VaeError::TooFewNodes(1))));
    }

    #[test]
    fn reconstruct_keeps_size() {
        let p = params();
        let g = reconstruct(&tree(), &p, Threshold::new(0.5).unwrap()).unwrap();
        assert_eq!(g.node_count(), 6);
        assert_eq!(to_tensors(&tree()).unwrap().n, 6);
    }

    /// Sibling order inside a level does not matter: swapping which of the
    /// two leaves is the AND's first fanin leaves the output encoding alone.
    #[test]
    fn sibling_order_is_irrelevant() {
        let p = params();
        let mut g = AigGraph::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let x = g.add_and(Fanin::plain(a), Fanin::plain(b));
        g.add_po("o", Fanin::plain(x));
        let mut h = g.clone();
        h.edges.swap(0, 1);
        assert_eq!(encode(&g, &p).unwrap(), encode(&h, &p).unwrap());
    }

    #[test]
    fn inverted_edge_flips_message_by_twice_the_source() {
        let p = params();
        let mut tape = Tape::new(&p.store);
        let ha = tape.row((0..8).map(|k| k as f64 * 0.1).collect());
        let hb = tape.row((0..8).map(|k| 1.0 - k as f64 * 0.3).collect());
        let h = vec![Some(ha), Some(hb)];
        let plain = aggregate(&mut tape, 8, &[Fanin::plain(0), Fanin::plain(1)], &h, 2).unwrap();
        let flipped = aggregate(&mut tape, 8, &[Fanin::plain(0), Fanin::inv(1)], &h, 2).unwrap();
        let (pv, fv, hbv) = (tape.value(plain).to_vec(), tape.value(flipped).to_vec(), tape.value(hb).to_vec());
        for k in 0..8 {
            assert!((fv[k] - pv[k] + 2.0 * hbv[k]).abs() < 1e-14);
        }
        assert!(matches!(
            aggregate(&mut tape, 8, &[Fanin::plain(0)], &[None], 1),
            Err(VaeError::Ordering(1))
        ));
    }
}
