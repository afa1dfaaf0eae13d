//! Per-output cone extraction with shared logic duplicated into a tree.

use super::{AigError, AigGraph, Fanin, Node, NodeType, Result};

pub const DEFAULT_MAX_NODES: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum ConeOutcome {
    Tree(AigGraph),
    /// The duplicated tree would exceed the node limit.
    Rejected { size: usize },
}

impl ConeOutcome {
    pub fn tree(self) -> Option<AigGraph> {
        match self {
            ConeOutcome::Tree(g) => Some(g),
            ConeOutcome::Rejected { .. } => None,
        }
    }
}

/// Node count of the tree rooted at every node once shared fanins are
/// duplicated. Saturates instead of overflowing.
fn tree_sizes(g: &AigGraph, fanins: &[Vec<Fanin>]) -> Vec<usize> {
    let mut size = vec![1usize; g.node_count()];
    for v in 0..g.node_count() {
        for f in &fanins[v] {
            size[v] = size[v].saturating_add(size[f.node]);
        }
    }
    size
}

/// Transitive fan-in cone of the named output as a tree rooted at a single
/// PO. PIs come first in order of leaf appearance, then ANDs in post-order
/// (first fanin first), then the PO. Leaf copies keep the input name.
pub fn extract_cone_tree(g: &AigGraph, output_name: &str, max_nodes: usize) -> Result<ConeOutcome> {
    g.check_structure()?;
    let po = g
        .ids_of(NodeType::Po)
        .into_iter()
        .find(|&v| g.output_label(v) == output_name)
        .ok_or_else(|| AigError::UnknownOutput(output_name.to_string()))?;
    let fanins = g.fanins();
    let size = tree_sizes(g, &fanins)[po];
    if size > max_nodes {
        return Ok(ConeOutcome::Rejected { size });
    }

    let mut t = AigGraph::new();
    let root = copy_subtree(g, &fanins, po, &mut t);
    debug_assert_eq!(root + 1, t.node_count());
    let (t, _) = t.to_block_layout();
    Ok(ConeOutcome::Tree(t))
}

fn copy_subtree(g: &AigGraph, fanins: &[Vec<Fanin>], v: usize, t: &mut AigGraph) -> usize {
    let children: Vec<(usize, bool)> =
        fanins[v].iter().map(|f| (copy_subtree(g, fanins, f.node, t), f.inverted)).collect();
    let node = match g.kind(v) {
        NodeType::Pi => Node { kind: NodeType::Pi, name: Some(g.input_label(v)), dummy: false },
        NodeType::Po => Node { kind: NodeType::Po, name: Some(g.output_label(v)), dummy: false },
        NodeType::And => Node { kind: NodeType::And, name: None, dummy: false },
    };
    t.nodes.push(node);
    let id = t.node_count() - 1;
    for (c, inv) in children {
        t.add_edge(c, id, inv);
    }
    id
}

/// Cones of every output that fit the limit, keyed by output name.
pub fn extract_all_cones(g: &AigGraph, max_nodes: usize) -> Result<Vec<(String, ConeOutcome)>> {
    g.output_names().into_iter().map(|name| Ok((name.clone(), extract_cone_tree(g, &name, max_nodes)?))).collect()
}
