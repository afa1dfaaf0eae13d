//! And-Inverter Graph data model.
//!
//! An [`AigGraph`] is an ordered node list plus a list of directed edges that
//! carry an inversion flag. Node ids are positions in the node list, and every
//! edge runs from a lower id to a higher one, so the node order is always a
//! topological order.
//!
//! Primary inputs are identified by name: two PI nodes carrying the same name
//! are leaf copies of one input (cone trees duplicate shared leaves). An AND
//! node without fanins evaluates to constant 1; that is how constants are
//! represented.

pub mod aiger;
pub mod cone;
pub mod ged;
pub mod json;
pub mod pad;
pub mod sim;
pub mod tensor;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cone::{extract_cone_tree, ConeOutcome, DEFAULT_MAX_NODES};
pub use ged::{graph_edit_distance, GedOutcome, DEFAULT_GED_TIMEOUT};
pub use pad::{pad_pair, pad_to_match};
pub use sim::{simulate, truth_table, TruthTable, MAX_TRUTH_TABLE_INPUTS};
pub use tensor::{from_tensors, to_tensors, EdgeState, TensorTriple};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AigError {
    #[error("line 1: missing header")]
    MissingHeader,
    #[error("line {line}: malformed header: {msg}")]
    MalformedHeader { line: usize, msg: String },
    #[error("line {line}: latches are not supported (combinational AIGER only)")]
    LatchesUnsupported { line: usize },
    #[error("line {line}: literal {literal} references an undefined variable")]
    DanglingLiteral { line: usize, literal: u64 },
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("node {node} is not canonical: {msg}")]
    NonCanonical { node: usize, msg: String },
    #[error("invalid edge {src}->{dst}: {msg}")]
    InvalidEdge { src: usize, dst: usize, msg: String },
    #[error("parallel edges {src}->{dst} cannot be encoded as tensors")]
    ParallelEdge { src: usize, dst: usize },
    #[error("unknown output `{0}`")]
    UnknownOutput(String),
    #[error("{count} primary inputs exceed the truth-table limit of {max}")]
    TooManyInputs { count: usize, max: usize },
    #[error("assignment covers {got} inputs, graph has {expected}")]
    MissingAssignment { expected: usize, got: usize },
    #[error("type row {row} is not one-hot")]
    NotOneHot { row: usize },
    #[error("tensor entry ({row},{col}) is not binary")]
    NotBinary { row: usize, col: usize },
    #[error("tensor dimensions are inconsistent: {0}")]
    Shape(String),
    #[error("graph json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, AigError>;

/// Node kind. Column order in one-hot encodings is PI, PO, AND.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    #[serde(rename = "PI")]
    Pi,
    #[serde(rename = "PO")]
    Po,
    #[serde(rename = "AND")]
    And,
}

impl NodeType {
    pub const ALL: [NodeType; 3] = [NodeType::Pi, NodeType::Po, NodeType::And];

    pub fn index(self) -> usize {
        match self {
            NodeType::Pi => 0,
            NodeType::Po => 1,
            NodeType::And => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<NodeType> {
        NodeType::ALL.get(i).copied()
    }

    pub fn one_hot(self) -> [f64; 3] {
        let mut v = [0.0; 3];
        v[self.index()] = 1.0;
        v
    }

    /// Position of this kind in the canonical PI / AND / PO block layout.
    fn block_rank(self) -> u8 {
        match self {
            NodeType::Pi => 0,
            NodeType::And => 1,
            NodeType::Po => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub kind: NodeType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Inserted by padding; carries no function of the original design.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub dummy: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub inverted: bool,
}

/// A fanin reference: source node plus inversion flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fanin {
    pub node: usize,
    pub inverted: bool,
}

impl Fanin {
    pub fn plain(node: usize) -> Self {
        Fanin { node, inverted: false }
    }
    pub fn inv(node: usize) -> Self {
        Fanin { node, inverted: true }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AigGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl PartialEq for AigGraph {
    /// Structural equality: same node list and same edge multiset.
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.sorted_edges() == other.sorted_edges()
    }
}

impl AigGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_node(&mut self, kind: NodeType, name: Option<String>) -> usize {
        self.nodes.push(Node { kind, name, dummy: false });
        self.nodes.len() - 1
    }

    pub fn add_pi(&mut self, name: impl Into<String>) -> usize {
        self.add_node(NodeType::Pi, Some(name.into()))
    }

    pub fn add_and(&mut self, a: Fanin, b: Fanin) -> usize {
        let id = self.add_node(NodeType::And, None);
        self.add_edge(a.node, id, a.inverted);
        self.add_edge(b.node, id, b.inverted);
        id
    }

    pub fn add_po(&mut self, name: impl Into<String>, f: Fanin) -> usize {
        let id = self.add_node(NodeType::Po, Some(name.into()));
        self.add_edge(f.node, id, f.inverted);
        id
    }

    pub fn add_edge(&mut self, src: usize, dst: usize, inverted: bool) {
        self.edges.push(Edge { src, dst, inverted });
    }

    pub fn kind(&self, v: usize) -> NodeType {
        self.nodes[v].kind
    }

    pub fn count(&self, kind: NodeType) -> usize {
        self.nodes.iter().filter(|n| n.kind == kind).count()
    }

    pub fn ids_of(&self, kind: NodeType) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&v| self.nodes[v].kind == kind).collect()
    }

    pub fn sorted_edges(&self) -> Vec<Edge> {
        let mut e = self.edges.clone();
        e.sort_by_key(|e| (e.dst, e.src, e.inverted));
        e
    }

    /// Fanin lists indexed by destination node, sources in ascending order.
    pub fn fanins(&self) -> Vec<Vec<Fanin>> {
        let mut f = vec![Vec::new(); self.nodes.len()];
        for e in self.sorted_edges() {
            f[e.dst].push(Fanin { node: e.src, inverted: e.inverted });
        }
        f
    }

    pub fn fanout_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.nodes.len()];
        for e in &self.edges {
            c[e.src] += 1;
        }
        c
    }

    /// Name under which a PI node is bound during simulation.
    pub fn input_label(&self, v: usize) -> String {
        match &self.nodes[v].name {
            Some(n) => n.clone(),
            None => format!("_n{v}"),
        }
    }

    pub fn output_label(&self, v: usize) -> String {
        match &self.nodes[v].name {
            Some(n) => n.clone(),
            None => format!("_o{v}"),
        }
    }

    /// Distinct primary inputs in order of first appearance.
    pub fn input_names(&self) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for v in self.ids_of(NodeType::Pi) {
            let l = self.input_label(v);
            if seen.insert(l.clone()) {
                out.push(l);
            }
        }
        out
    }

    pub fn output_names(&self) -> Vec<String> {
        self.ids_of(NodeType::Po).into_iter().map(|v| self.output_label(v)).collect()
    }

    /// Hard structural invariants: edges in range, forward, no fanin into
    /// PIs and no fanout from POs. Arity is checked by [`Self::non_canonical_nodes`].
    pub fn check_structure(&self) -> Result<()> {
        let n = self.nodes.len();
        for e in &self.edges {
            if e.src >= n || e.dst >= n {
                return Err(AigError::InvalidEdge { src: e.src, dst: e.dst, msg: "out of range".into() });
            }
            if e.src >= e.dst {
                return Err(AigError::InvalidEdge { src: e.src, dst: e.dst, msg: "edge is not forward".into() });
            }
            if self.nodes[e.dst].kind == NodeType::Pi {
                return Err(AigError::InvalidEdge { src: e.src, dst: e.dst, msg: "PI with fanin".into() });
            }
            if self.nodes[e.src].kind == NodeType::Po {
                return Err(AigError::InvalidEdge { src: e.src, dst: e.dst, msg: "PO with fanout".into() });
            }
        }
        Ok(())
    }

    /// Nodes violating the arity rules: AND in-degree must be 2 (or 0 for a
    /// constant), PO in-degree must be 1, PI in-degree must be 0.
    pub fn non_canonical_nodes(&self) -> Vec<usize> {
        let mut indeg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            if e.dst < indeg.len() {
                indeg[e.dst] += 1;
            }
        }
        (0..self.nodes.len())
            .filter(|&v| match self.nodes[v].kind {
                NodeType::Pi => indeg[v] != 0,
                NodeType::Po => indeg[v] != 1,
                NodeType::And => indeg[v] != 2 && indeg[v] != 0,
            })
            .collect()
    }

    pub fn is_canonical(&self) -> bool {
        self.check_structure().is_ok() && self.non_canonical_nodes().is_empty()
    }

    pub fn ensure_canonical(&self) -> Result<()> {
        self.check_structure()?;
        if let Some(&v) = self.non_canonical_nodes().first() {
            return Err(AigError::NonCanonical {
                node: v,
                msg: format!("{:?} with in-degree {}", self.nodes[v].kind, self.fanins()[v].len()),
            });
        }
        Ok(())
    }

    /// Single PO, every other node drives exactly one edge, |E| = |V| - 1.
    pub fn is_tree(&self) -> bool {
        if self.count(NodeType::Po) != 1 || self.edges.len() + 1 != self.nodes.len() {
            return false;
        }
        let fo = self.fanout_counts();
        (0..self.nodes.len()).all(|v| match self.nodes[v].kind {
            NodeType::Po => fo[v] == 0,
            _ => fo[v] == 1,
        })
    }

    pub fn is_block_layout(&self) -> bool {
        self.nodes.windows(2).all(|w| w[0].kind.block_rank() <= w[1].kind.block_rank())
    }

    /// Stable reorder into PI block, AND block, PO block. Requires forward
    /// edges and the PI/PO direction rules, so the result stays topological.
    /// Returns the reordered graph and the old-to-new id map.
    pub fn to_block_layout(&self) -> (AigGraph, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by_key(|&v| (self.nodes[v].kind.block_rank(), v));
        let mut map = vec![0; self.nodes.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        let nodes = order.iter().map(|&v| self.nodes[v].clone()).collect();
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { src: map[e.src], dst: map[e.dst], inverted: e.inverted })
            .collect();
        (AigGraph { nodes, edges }, map)
    }

    /// Keeps only nodes in `keep` (which must be closed under fanin for the
    /// result to be meaningful), remapping ids.
    pub fn induced(&self, keep: &[bool]) -> AigGraph {
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut g = AigGraph::new();
        for v in 0..self.nodes.len() {
            if keep[v] {
                map[v] = g.nodes.len();
                g.nodes.push(self.nodes[v].clone());
            }
        }
        for e in &self.edges {
            if keep[e.src] && keep[e.dst] {
                g.add_edge(map[e.src], map[e.dst], e.inverted);
            }
        }
        g
    }
}
