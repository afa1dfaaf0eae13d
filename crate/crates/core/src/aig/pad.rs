//! Dummy-node padding so two graphs have equal per-type node counts.

use super::{AigGraph, Edge, Node, NodeType};

/// Per-type counts in (PI, PO, AND) order.
pub fn type_counts(g: &AigGraph) -> [usize; 3] {
    let mut c = [0; 3];
    for n in &g.nodes {
        c[n.kind.index()] += 1;
    }
    c
}

/// Extends `g` with unconnected dummy nodes up to `target` counts per type.
/// The result is in block layout with each type's dummies at the end of its
/// block. Returns the padded graph and the old-to-new id map.
pub fn pad_to_counts(g: &AigGraph, target: [usize; 3]) -> (AigGraph, Vec<usize>) {
    let have = type_counts(g);
    let mut order: Vec<usize> = (0..g.node_count()).collect();
    order.sort_by_key(|&v| (block(g.kind(v)), v));
    let mut out = AigGraph::new();
    let mut map = vec![0; g.node_count()];
    let mut next_dummy = [0usize; 3];
    for kind in [NodeType::Pi, NodeType::And, NodeType::Po] {
        for &v in order.iter().filter(|&&v| g.kind(v) == kind) {
            map[v] = out.node_count();
            out.nodes.push(g.nodes[v].clone());
        }
        let k = kind.index();
        for _ in have[k]..target[k].max(have[k]) {
            let name = match kind {
                NodeType::Pi => Some(format!("pad_pi{}", next_dummy[k])),
                NodeType::Po => Some(format!("pad_po{}", next_dummy[k])),
                NodeType::And => None,
            };
            next_dummy[k] += 1;
            out.nodes.push(Node { kind, name, dummy: true });
        }
    }
    out.edges = g.edges.iter().map(|e| Edge { src: map[e.src], dst: map[e.dst], inverted: e.inverted }).collect();
    (out, map)
}

fn block(k: NodeType) -> u8 {
    match k {
        NodeType::Pi => 0,
        NodeType::And => 1,
        NodeType::Po => 2,
    }
}

/// Pads `g` so every per-type count reaches the larger of `g` and `reference`.
pub fn pad_to_match(g: &AigGraph, reference: &AigGraph) -> AigGraph {
    let (a, b) = (type_counts(g), type_counts(reference));
    pad_to_counts(g, [a[0].max(b[0]), a[1].max(b[1]), a[2].max(b[2])]).0
}

/// Pads both graphs to their common per-type maxima.
pub fn pad_pair(a: &AigGraph, b: &AigGraph) -> (AigGraph, AigGraph) {
    (pad_to_match(a, b), pad_to_match(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{simulate, Fanin};

    fn and3(pis: usize) -> AigGraph {
        let mut g = AigGraph::new();
        let ids: Vec<usize> = (0..pis).map(|k| g.add_pi(format!("x{k}"))).collect();
        let mut acc = ids[0];
        for &v in &ids[1..] {
            acc = g.add_and(Fanin::plain(acc), Fanin::inv(v));
        }
        g.add_po("y", Fanin::plain(acc));
        g
    }

    #[test]
    fn gains_dummy_pis() {
        let g = and3(3);
        let p = pad_to_match(&g, &and3(5));
        assert_eq!(type_counts(&p), [5, 1, 4]);
        assert_eq!(p.nodes.iter().filter(|n| n.dummy && n.kind == NodeType::Pi).count(), 2);
        assert!(p.is_block_layout());
        assert!(p.check_structure().is_ok());
    }

    #[test]
    fn equal_sizes_unchanged() {
        let g = and3(4);
        assert_eq!(pad_to_match(&g, &and3(4)), g);
    }

    #[test]
    fn padding_preserves_function() {
        let g = and3(3);
        let p = pad_to_match(&g, &and3(5));
        for row in 0..32usize {
            let bits: Vec<bool> = (0..5).map(|k| (row >> k) & 1 == 1).collect();
            assert_eq!(simulate(&p, &bits).unwrap(), simulate(&g, &bits[..3]).unwrap());
        }
    }
}
