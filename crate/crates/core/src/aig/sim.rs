//! Bit-parallel simulation and truth tables.

use std::collections::HashMap;

use super::{AigError, AigGraph, NodeType, Result};

pub const MAX_TRUTH_TABLE_INPUTS: usize = 20;

/// Evaluates every node on 64 input patterns at once. `words[k]` holds the
/// patterns of the k-th distinct input (see [`AigGraph::input_names`]).
/// AND and PO nodes compute the conjunction of their (possibly inverted)
/// fanins; an empty conjunction is 1.
pub fn simulate_words(g: &AigGraph, words: &[u64]) -> Result<Vec<u64>> {
    let names = g.input_names();
    if words.len() != names.len() {
        return Err(AigError::MissingAssignment { expected: names.len(), got: words.len() });
    }
    let slot: HashMap<String, usize> = names.into_iter().enumerate().map(|(k, n)| (n, k)).collect();
    let mut val = vec![!0u64; g.node_count()];
    for v in g.ids_of(NodeType::Pi) {
        val[v] = words[slot[&g.input_label(v)]];
    }
    for e in g.sorted_edges() {
        if e.src >= e.dst {
            return Err(AigError::InvalidEdge { src: e.src, dst: e.dst, msg: "edge is not forward".into() });
        }
        if g.nodes[e.dst].kind == NodeType::Pi {
            continue;
        }
        // Sorted by destination, and sources precede destinations, so every
        // source is final by the time it is read.
        let s = if e.inverted { !val[e.src] } else { val[e.src] };
        val[e.dst] &= s;
    }
    Ok(val)
}

/// One bit per distinct PI in, one bit per PO out.
pub fn simulate(g: &AigGraph, assignment: &[bool]) -> Result<Vec<bool>> {
    let words: Vec<u64> = assignment.iter().map(|&b| if b { !0 } else { 0 }).collect();
    let val = simulate_words(g, &words)?;
    Ok(g.ids_of(NodeType::Po).into_iter().map(|v| val[v] & 1 == 1).collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruthTable {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// One column per PO, each of length 2^|inputs|. Row `r` assigns input k
    /// the bit `(r >> (n - 1 - k)) & 1`, i.e. rows are in lexicographic order
    /// with the first input most significant.
    pub columns: Vec<Vec<bool>>,
}

impl TruthTable {
    pub fn rows(&self) -> usize {
        1 << self.inputs.len()
    }
}

/// Pattern word for input `k` of `n` covering rows `64*chunk .. 64*chunk+63`.
pub(crate) fn pattern_word(k: usize, n: usize, chunk: usize) -> u64 {
    let shift = n - 1 - k;
    let mut w = 0u64;
    for bit in 0..64 {
        let row = chunk * 64 + bit;
        if (row >> shift) & 1 == 1 {
            w |= 1 << bit;
        }
    }
    w
}

pub fn truth_table(g: &AigGraph) -> Result<TruthTable> {
    let inputs = g.input_names();
    let n = inputs.len();
    if n > MAX_TRUTH_TABLE_INPUTS {
        return Err(AigError::TooManyInputs { count: n, max: MAX_TRUTH_TABLE_INPUTS });
    }
    let rows = 1usize << n;
    let pos = g.ids_of(NodeType::Po);
    let mut columns = vec![Vec::with_capacity(rows); pos.len()];
    for chunk in 0..rows.div_ceil(64) {
        let words: Vec<u64> = (0..n).map(|k| pattern_word(k, n, chunk)).collect();
        let val = simulate_words(g, &words)?;
        let take = (rows - chunk * 64).min(64);
        for (c, &v) in pos.iter().enumerate() {
            for bit in 0..take {
                columns[c].push((val[v] >> bit) & 1 == 1);
            }
        }
    }
    Ok(TruthTable { inputs, outputs: g.output_names(), columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{AigGraph, Fanin};

    #[test]
    fn and_gate_values() {
        let mut g = AigGraph::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let x = g.add_and(Fanin::plain(a), Fanin::plain(b));
        g.add_po("y", Fanin::plain(x));
        assert_eq!(simulate(&g, &[true, true]).unwrap(), vec![true]);
        let mut h = AigGraph::new();
        let a = h.add_pi("a");
        let b = h.add_pi("b");
        let x = h.add_and(Fanin::plain(a), Fanin::inv(b));
        h.add_po("y", Fanin::plain(x));
        assert_eq!(simulate(&h, &[true, true]).unwrap(), vec![false]);
        assert!(matches!(simulate(&h, &[true]), Err(AigError::MissingAssignment { .. })));
    }

    #[test]
    fn half_adder_sum_is_xor() {
        // sum = !( !(a & !b) & !(!a & b) )
        let mut g = AigGraph::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let l = g.add_and(Fanin::plain(a), Fanin::inv(b));
        let r = g.add_and(Fanin::inv(a), Fanin::plain(b));
        let o = g.add_and(Fanin::inv(l), Fanin::inv(r));
        g.add_po("s", Fanin::inv(o));
        let mut brute = Vec::new();
        for (x, y) in [(false, false), (false, true), (true, false), (true, true)] {
            brute.push(simulate(&g, &[x, y]).unwrap()[0]);
        }
        assert_eq!(brute, vec![false, true, true, false]);
        assert_eq!(truth_table(&g).unwrap().columns[0], brute);
    }

    #[test]
    fn constant_and_buffer_tables() {
        let mut one = AigGraph::new();
        let c = one.add_node(NodeType::And, None);
        one.add_po("one", Fanin::plain(c));
        let mut with_input = one.clone();
        with_input.nodes.insert(0, crate::aig::Node { kind: NodeType::Pi, name: Some("a".into()), dummy: false });
        for e in &mut with_input.edges {
            e.src += 1;
            e.dst += 1;
        }
        assert_eq!(truth_table(&one).unwrap().columns[0], vec![true]);
        assert_eq!(truth_table(&with_input).unwrap().columns[0], vec![true, true]);

        let mut buf = AigGraph::new();
        let a = buf.add_pi("a");
        buf.add_po("y", Fanin::plain(a));
        assert_eq!(truth_table(&buf).unwrap().columns[0], vec![false, true]);
    }

    #[test]
    fn leaf_copies_share_one_input() {
        // y = a & !a through two copies of `a` is constant 0.
        let mut g = AigGraph::new();
        let a1 = g.add_pi("a");
        let a2 = g.add_pi("a");
        let x = g.add_and(Fanin::plain(a1), Fanin::inv(a2));
        g.add_po("y", Fanin::plain(x));
        let tt = truth_table(&g).unwrap();
        assert_eq!(tt.inputs, vec!["a"]);
        assert_eq!(tt.columns[0], vec![false, false]);
    }

    #[test]
    fn wide_table_matches_pointwise_simulation() {
        let mut g = AigGraph::new();
        let ids: Vec<usize> = (0..7).map(|k| g.add_pi(format!("x{k}"))).collect();
        let mut acc = ids[0];
        for (k, &v) in ids.iter().enumerate().skip(1) {
            acc = g.add_and(Fanin { node: acc, inverted: k % 2 == 0 }, Fanin { node: v, inverted: k % 3 == 0 });
        }
        g.add_po("y", Fanin::inv(acc));
        let tt = truth_table(&g).unwrap();
        for row in 0..128usize {
            let bits: Vec<bool> = (0..7).map(|k| (row >> (6 - k)) & 1 == 1).collect();
            assert_eq!(simulate(&g, &bits).unwrap()[0], tt.columns[0][row]);
        }
    }
}
