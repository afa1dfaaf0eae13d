//! Matrix encoding of an AIG: node types, connections and inverters.
//!
//! Row `i` of the connection and inverter matrices describes the fanins of
//! node `i`; column `j < i` is the candidate source. Entries with `j >= i`
//! are structural zeros.

use serde::{Deserialize, Serialize};

use super::{AigError, AigGraph, Node, NodeType, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorTriple {
    pub n: usize,
    /// `n` rows of (PI, PO, AND) scores.
    pub type_mat: Vec<[f64; 3]>,
    /// Row-major `n x n`.
    pub conn_mat: Vec<f64>,
    /// Row-major `n x n`.
    pub inv_mat: Vec<f64>,
}

impl TensorTriple {
    pub fn zeros(n: usize) -> Self {
        TensorTriple { n, type_mat: vec![[0.0; 3]; n], conn_mat: vec![0.0; n * n], inv_mat: vec![0.0; n * n] }
    }

    pub fn conn(&self, i: usize, j: usize) -> f64 {
        self.conn_mat[i * self.n + j]
    }

    pub fn inv(&self, i: usize, j: usize) -> f64 {
        self.inv_mat[i * self.n + j]
    }

    pub fn set_conn(&mut self, i: usize, j: usize, v: f64) {
        self.conn_mat[i * self.n + j] = v;
    }

    pub fn set_inv(&mut self, i: usize, j: usize, v: f64) {
        self.inv_mat[i * self.n + j] = v;
    }

    pub fn is_binary(&self) -> bool {
        let bin = |x: &f64| *x == 0.0 || *x == 1.0;
        self.type_mat.iter().flatten().all(bin) && self.conn_mat.iter().all(bin) && self.inv_mat.iter().all(bin)
    }

    /// Upper triangle (j >= i) of both adjacency matrices is zero.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i..self.n).all(|j| self.conn(i, j) == 0.0 && self.inv(i, j) == 0.0))
    }

    /// In a binary triple every inverter sits on a connection.
    pub fn inverters_imply_connections(&self) -> bool {
        self.inv_mat.iter().zip(&self.conn_mat).all(|(&v, &c)| v == 0.0 || c == 1.0)
    }

    pub fn edge_count(&self) -> usize {
        self.conn_mat.iter().filter(|&&c| c != 0.0).count()
    }

    fn check_shape(&self) -> Result<()> {
        if self.type_mat.len() != self.n || self.conn_mat.len() != self.n * self.n || self.inv_mat.len() != self.n * self.n {
            return Err(AigError::Shape(format!(
                "n={} but type rows={}, conn={}, inv={}",
                self.n,
                self.type_mat.len(),
                self.conn_mat.len(),
                self.inv_mat.len()
            )));
        }
        Ok(())
    }
}

/// Two-bit connection/inversion state of a node pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeState {
    /// Codes 00 and 01: no connection; a lone inversion bit means nothing.
    None,
    /// Code 10.
    Plain,
    /// Code 11.
    Inverted,
}

impl EdgeState {
    pub fn from_bits(conn: bool, inv: bool) -> Self {
        match (conn, inv) {
            (false, _) => EdgeState::None,
            (true, false) => EdgeState::Plain,
            (true, true) => EdgeState::Inverted,
        }
    }

    pub fn code(self) -> &'static str {
        match self {
            EdgeState::None => "00",
            EdgeState::Plain => "10",
            EdgeState::Inverted => "11",
        }
    }

    pub fn is_connected(self) -> bool {
        self != EdgeState::None
    }
}

/// Binary encoding of a graph whose edges all run forward.
pub fn to_tensors(g: &AigGraph) -> Result<TensorTriple> {
    let n = g.node_count();
    let mut t = TensorTriple::zeros(n);
    for (i, node) in g.nodes.iter().enumerate() {
        t.type_mat[i] = node.kind.one_hot();
    }
    for e in &g.edges {
        if e.src >= e.dst || e.dst >= n {
            return Err(AigError::InvalidEdge { src: e.src, dst: e.dst, msg: "edge is not forward".into() });
        }
        if t.conn(e.dst, e.src) != 0.0 {
            return Err(AigError::ParallelEdge { src: e.src, dst: e.dst });
        }
        t.set_conn(e.dst, e.src, 1.0);
        if e.inverted {
            t.set_inv(e.dst, e.src, 1.0);
        }
    }
    Ok(t)
}

/// A note emitted while decoding a triple that did not satisfy every
/// invariant; the graph is still produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TensorWarning {
    /// Inverter bit without a connection bit; dropped.
    DroppedInverter { row: usize, col: usize },
    /// Non-zero entry on or above the diagonal; ignored.
    UpperTriangle { row: usize, col: usize },
}

/// Rebuilds a graph from a binary triple. PI nodes are named `i<k>` and PO
/// nodes `o<k>` by ordinal. The graph may be non-canonical (wrong arities,
/// fanin into PIs); repair happens downstream.
pub fn from_tensors(t: &TensorTriple) -> Result<(AigGraph, Vec<TensorWarning>)> {
    t.check_shape()?;
    let mut g = AigGraph::new();
    let mut warnings = Vec::new();
    let (mut pis, mut pos) = (0, 0);
    for (row, r) in t.type_mat.iter().enumerate() {
        let ones = r.iter().filter(|&&x| x == 1.0).count();
        let zeros = r.iter().filter(|&&x| x == 0.0).count();
        if ones != 1 || zeros != 2 {
            return Err(AigError::NotOneHot { row });
        }
        let kind = NodeType::from_index(r.iter().position(|&x| x == 1.0).unwrap()).unwrap();
        let name = match kind {
            NodeType::Pi => {
                pis += 1;
                Some(format!("i{}", pis - 1))
            }
            NodeType::Po => {
                pos += 1;
                Some(format!("o{}", pos - 1))
            }
            NodeType::And => None,
        };
        g.nodes.push(Node { kind, name, dummy: false });
    }
    for i in 0..t.n {
        for j in 0..t.n {
            let (c, v) = (t.conn(i, j), t.inv(i, j));
            for (x, col) in [(c, j), (v, j)] {
                if x != 0.0 && x != 1.0 {
                    return Err(AigError::NotBinary { row: i, col });
                }
            }
            if j >= i {
                if c != 0.0 || v != 0.0 {
                    warnings.push(TensorWarning::UpperTriangle { row: i, col: j });
                }
                continue;
            }
            match (c == 1.0, v == 1.0) {
                (true, inv) => g.add_edge(j, i, inv),
                (false, true) => warnings.push(TensorWarning::DroppedInverter { row: i, col: j }),
                (false, false) => {}
            }
        }
    }
    Ok((g, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::Fanin;

    fn and_tree(inv: bool) -> AigGraph {
        let mut g = AigGraph::new();
        let a = g.add_pi("i0");
        let b = g.add_pi("i1");
        let x = g.add_and(Fanin::plain(a), Fanin { node: b, inverted: inv });
        g.add_po("o0", Fanin::plain(x));
        g
    }

    #[test]
    fn four_node_tree_encoding() {
        let t = to_tensors(&and_tree(false)).unwrap();
        assert_eq!(t.type_mat, vec![[1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]);
        assert_eq!(t.edge_count(), 3);
        assert_eq!(t.inv_mat.iter().sum::<f64>(), 0.0);
        assert!(t.is_lower_triangular());
        let (g, w) = from_tensors(&t).unwrap();
        assert!(w.is_empty());
        assert_eq!(g, and_tree(false));
    }

    #[test]
    fn one_inverter_one_entry() {
        let t = to_tensors(&and_tree(true)).unwrap();
        assert_eq!(t.inv_mat.iter().filter(|&&x| x == 1.0).count(), 1);
        assert_eq!(t.inv(2, 1), 1.0);
        assert!(t.inverters_imply_connections());
    }

    #[test]
    fn three_fanins_decode_without_error() {
        let mut t = to_tensors(&and_tree(false)).unwrap();
        // Give the PO three fanins.
        t.set_conn(3, 0, 1.0);
        t.set_conn(3, 1, 1.0);
        let (g, _) = from_tensors(&t).unwrap();
        assert_eq!(g.non_canonical_nodes(), vec![3]);
    }

    #[test]
    fn lone_inverter_is_dropped_with_warning() {
        let mut t = to_tensors(&and_tree(false)).unwrap();
        t.set_inv(3, 0, 1.0);
        let (g, w) = from_tensors(&t).unwrap();
        assert_eq!(w, vec![TensorWarning::DroppedInverter { row: 3, col: 0 }]);
        assert_eq!(g, and_tree(false));
    }

    #[test]
    fn bad_type_row() {
        let mut t = to_tensors(&and_tree(false)).unwrap();
        t.type_mat[1] = [1.0, 1.0, 0.0];
        assert_eq!(from_tensors(&t).unwrap_err(), AigError::NotOneHot { row: 1 });
    }

    #[test]
    fn edge_state_codes() {
        assert_eq!(EdgeState::from_bits(true, false).code(), "10");
        assert_eq!(EdgeState::from_bits(true, true).code(), "11");
        assert_eq!(EdgeState::from_bits(false, false).code(), "00");
        assert_eq!(EdgeState::from_bits(false, true), EdgeState::None);
    }
}
