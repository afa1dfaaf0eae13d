//! Gate-level netlist shared by the camouflaged views and the attack harness.
//!
//! Gates are stored in topological order: a gate only reads nets with a
//! smaller id. Every gate drives exactly one net, identified by its index.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{AigGraph, NodeType};
use crate::covert::{keyed_eval, ApparentCell};

pub type NetId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Lit {
    pub net: NetId,
    pub neg: bool,
}

impl Lit {
    pub fn pos(net: NetId) -> Self {
        Lit { net, neg: false }
    }
    pub fn neg(net: NetId) -> Self {
        Lit { net, neg: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Input(String),
    /// Key bit with the given index.
    Key(usize),
    Const(bool),
    /// Conjunction of `inputs`, complemented when `negate` is set. The empty
    /// conjunction is 1.
    And { inputs: Vec<Lit>, negate: bool },
    Xor(Lit, Lit),
    /// Key-programmable cell; `key` holds the nets of its two key gates.
    Keyed { cell: ApparentCell, inputs: Vec<NetId>, key: [NetId; 2] },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetlistError {
    #[error("gate {gate} reads net {net}, which is not defined before it")]
    NotTopological { gate: NetId, net: NetId },
    #[error("output `{name}` reads undefined net {net}")]
    BadOutput { name: String, net: NetId },
    #[error("keyed {cell:?} gate {gate} has {got} inputs")]
    KeyedArity { gate: NetId, cell: ApparentCell, got: usize },
    #[error("keyed gate {gate} reads net {net}, which is not a key bit")]
    NotAKey { gate: NetId, net: NetId },
    #[error("expected {expected} {what} values, got {got}")]
    Assignment { what: &'static str, expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, NetlistError>;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Netlist {
    pub gates: Vec<Gate>,
    pub outputs: Vec<(String, Lit)>,
}

impl Netlist {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, g: Gate) -> NetId {
        self.gates.push(g);
        self.gates.len() - 1
    }

    pub fn add_output(&mut self, name: impl Into<String>, lit: Lit) {
        self.outputs.push((name.into(), lit));
    }

    /// Net of the input called `name`, creating it if absent.
    pub fn input(&mut self, name: &str) -> NetId {
        match self.gates.iter().position(|g| matches!(g, Gate::Input(n) if n == name)) {
            Some(id) => id,
            None => self.add(Gate::Input(name.to_string())),
        }
    }

    /// Input nets and names in gate order.
    pub fn inputs(&self) -> Vec<(NetId, &str)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| match g {
                Gate::Input(n) => Some((i, n.as_str())),
                _ => None,
            })
            .collect()
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs().into_iter().map(|(_, n)| n.to_string()).collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.outputs.iter().map(|(n, _)| n.clone()).collect()
    }

    /// One past the largest key index used.
    pub fn key_len(&self) -> usize {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Key(k) => Some(k + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn key_nets(&self) -> Vec<(NetId, usize)> {
        self.gates
            .iter()
            .enumerate()
            .filter_map(|(i, g)| match g {
                Gate::Key(k) => Some((i, *k)),
                _ => None,
            })
            .collect()
    }

    /// Fan-in nets of a gate.
    pub fn gate_inputs(&self, id: NetId) -> Vec<NetId> {
        match &self.gates[id] {
            Gate::Input(_) | Gate::Key(_) | Gate::Const(_) => vec![],
            Gate::And { inputs, .. } => inputs.iter().map(|l| l.net).collect(),
            Gate::Xor(a, b) => vec![a.net, b.net],
            Gate::Keyed { inputs, key, .. } => inputs.iter().chain(key).copied().collect(),
        }
    }

    pub fn check(&self) -> Result<()> {
        for (id, g) in self.gates.iter().enumerate() {
            for net in self.gate_inputs(id) {
                if net >= id {
                    return Err(NetlistError::NotTopological { gate: id, net });
                }
            }
            if let Gate::Keyed { cell, inputs, key } = g {
                if inputs.len() != cell.arity() {
                    return Err(NetlistError::KeyedArity { gate: id, cell: *cell, got: inputs.len() });
                }
                for &k in key {
                    if !matches!(self.gates[k], Gate::Key(_)) {
                        return Err(NetlistError::NotAKey { gate: id, net: k });
                    }
                }
            }
        }
        for (name, l) in &self.outputs {
            if l.net >= self.gates.len() {
                return Err(NetlistError::BadOutput { name: name.clone(), net: l.net });
            }
        }
        Ok(())
    }

    /// Evaluates 64 patterns at once. `inputs[k]` drives the k-th input in
    /// gate order and `key[k]` drives key bit k. Returns every net's word.
    pub fn simulate_nets(&self, inputs: &[u64], key: &[u64]) -> Result<Vec<u64>> {
        let n_in = self.inputs().len();
        if inputs.len() != n_in {
            return Err(NetlistError::Assignment { what: "input", expected: n_in, got: inputs.len() });
        }
        if key.len() < self.key_len() {
            return Err(NetlistError::Assignment { what: "key", expected: self.key_len(), got: key.len() });
        }
        let lit = |val: &[u64], l: Lit| if l.neg { !val[l.net] } else { val[l.net] };
        let mut val = Vec::with_capacity(self.gates.len());
        let mut next_input = 0;
        for g in &self.gates {
            let v = match g {
                Gate::Input(_) => {
                    next_input += 1;
                    inputs[next_input - 1]
                }
                Gate::Key(k) => key[*k],
                Gate::Const(b) => {
                    if *b {
                        !0
                    } else {
                        0
                    }
                }
                Gate::And { inputs, negate } => {
                    let c = inputs.iter().fold(!0u64, |acc, &l| acc & lit(&val, l));
                    if *negate {
                        !c
                    } else {
                        c
                    }
                }
                Gate::Xor(a, b) => lit(&val, *a) ^ lit(&val, *b),
                Gate::Keyed { cell, inputs, key: kb } => keyed_word(*cell, [val[kb[0]], val[kb[1]]], inputs, &val),
            };
            val.push(v);
        }
        Ok(val)
    }

    pub fn simulate_words(&self, inputs: &[u64], key: &[u64]) -> Result<Vec<u64>> {
        let val = self.simulate_nets(inputs, key)?;
        Ok(self.outputs.iter().map(|(_, l)| if l.neg { !val[l.net] } else { val[l.net] }).collect())
    }

    pub fn simulate(&self, inputs: &[bool], key: &[bool]) -> Result<Vec<bool>> {
        let w = |b: &bool| if *b { !0u64 } else { 0 };
        let i: Vec<u64> = inputs.iter().map(w).collect();
        let k: Vec<u64> = key.iter().map(w).collect();
        Ok(self.simulate_words(&i, &k)?.into_iter().map(|x| x & 1 == 1).collect())
    }

    /// Gate-level rendering of an AIG: PIs become inputs (leaf copies merged
    /// by name), AND nodes conjunctions, POs outputs. A PO with one fanin
    /// reads it directly.
    pub fn from_aig(g: &AigGraph) -> Netlist {
        let mut n = Netlist::new();
        let fanins = g.fanins();
        let mut net = vec![0; g.node_count()];
        for v in 0..g.node_count() {
            let lits: Vec<Lit> = fanins[v].iter().map(|f| Lit { net: net[f.node], neg: f.inverted }).collect();
            match g.kind(v) {
                NodeType::Pi => net[v] = n.input(&g.input_label(v)),
                NodeType::And => net[v] = n.add(Gate::And { inputs: lits, negate: false }),
                NodeType::Po => {
                    let l = if lits.len() == 1 { lits[0] } else { Lit::pos(n.add(Gate::And { inputs: lits, negate: false })) };
                    n.add_output(g.output_label(v), l);
                }
            }
        }
        n
    }

    /// Copy with every keyed gate replaced by the plain gate it computes
    /// under `key`; key gates become constants.
    pub fn with_key(&self, key: &[bool]) -> Result<Netlist> {
        self.check()?;
        if key.len() < self.key_len() {
            return Err(NetlistError::Assignment { what: "key", expected: self.key_len(), got: key.len() });
        }
        let gates = self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Key(k) => Gate::Const(key[*k]),
                Gate::Keyed { cell, inputs, key: kb } => {
                    let bit = |net: NetId| match self.gates[net] {
                        Gate::Key(k) => key[k],
                        _ => false,
                    };
                    resolve_keyed(*cell, [bit(kb[0]), bit(kb[1])], inputs)
                }
                other => other.clone(),
            })
            .collect();
        Ok(Netlist { gates, outputs: self.outputs.clone() })
    }

    /// Name to input-position map.
    pub fn input_slots(&self) -> HashMap<String, usize> {
        self.inputs().into_iter().enumerate().map(|(k, (_, n))| (n.to_string(), k)).collect()
    }
}

/// Plain gate computing a keyed cell under a fixed key.
fn resolve_keyed(cell: ApparentCell, key: [bool; 2], inputs: &[NetId]) -> Gate {
    let rows: Vec<bool> = (0..1usize << inputs.len())
        .map(|r| {
            let ins: Vec<bool> = (0..inputs.len()).map(|i| (r >> i) & 1 == 1).collect();
            keyed_eval(cell, key, &ins)
        })
        .collect();
    if rows.iter().all(|&x| x == rows[0]) {
        return Gate::Const(rows[0]);
    }
    for (i, &net) in inputs.iter().enumerate() {
        for neg in [false, true] {
            if rows.iter().enumerate().all(|(r, &x)| x == (((r >> i) & 1 == 1) != neg)) {
                return Gate::And { inputs: vec![Lit { net, neg }], negate: false };
            }
        }
    }
    Gate::And { inputs: inputs.iter().map(|&n| Lit::pos(n)).collect(), negate: true }
}

fn keyed_word(cell: ApparentCell, k: [u64; 2], inputs: &[NetId], val: &[u64]) -> u64 {
    let [k0, k1] = k;
    let a = val[inputs[0]];
    match cell {
        ApparentCell::Inverter => k0 | (!k1 & !a),
        ApparentCell::Buffer => k0 | (!k1 & a),
        ApparentCell::Nand => {
            let b = val[inputs[1]];
            (k0 & !k1) | (!k0 & !k1 & !(a & b)) | (k0 & k1 & a)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{simulate, Fanin};

    fn xor_aig() -> AigGraph {
        let mut g = AigGraph::new();
        let a = g.add_pi("a");
        let b = g.add_pi("b");
        let x = g.add_and(Fanin::plain(a), Fanin::inv(b));
        let y = g.add_and(Fanin::inv(a), Fanin::plain(b));
        let z = g.add_and(Fanin::inv(x), Fanin::inv(y));
        g.add_po("o", Fanin::inv(z));
        g
    }

    #[test]
    fn matches_aig_simulation() {
        let g = xor_aig();
        let n = Netlist::from_aig(&g);
        n.check().unwrap();
        for r in 0..4 {
            let ins = [r & 1 == 1, r & 2 == 2];
            assert_eq!(n.simulate(&ins, &[]).unwrap(), simulate(&g, &ins).unwrap());
        }
    }

    #[test]
    fn leaf_copies_share_an_input() {
        let mut g = AigGraph::new();
        let a = g.add_pi("a");
        let a2 = g.add_pi("a");
        let x = g.add_and(Fanin::plain(a), Fanin::inv(a2));
        g.add_po("o", Fanin::plain(x));
        let n = Netlist::from_aig(&g);
        assert_eq!(n.input_names(), vec!["a"]);
        assert_eq!(n.simulate(&[true], &[]).unwrap(), vec![false]);
    }

    #[test]
    fn keyed_gates_follow_their_key() {
        let mut n = Netlist::new();
        let a = n.input("a");
        let k0 = n.add(Gate::Key(0));
        let k1 = n.add(Gate::Key(1));
        let y = n.add(Gate::Keyed { cell: ApparentCell::Inverter, inputs: vec![a], key: [k0, k1] });
        n.add_output("y", Lit::pos(y));
        n.check().unwrap();
        assert_eq!(n.simulate(&[true], &[false, false]).unwrap(), vec![false]);
        assert_eq!(n.simulate(&[true], &[true, false]).unwrap(), vec![true]);
        assert_eq!(n.simulate(&[true], &[false, true]).unwrap(), vec![false]);
        let fixed = n.with_key(&[true, false]).unwrap();
        assert_eq!(fixed.simulate(&[false], &[]).unwrap(), vec![true]);
    }

    #[test]
    fn word_simulation_matches_the_keyed_model() {
        for cell in [ApparentCell::Inverter, ApparentCell::Buffer, ApparentCell::Nand] {
            let mut n = Netlist::new();
            let ins: Vec<NetId> = (0..cell.arity()).map(|k| n.input(&format!("x{k}"))).collect();
            let k0 = n.add(Gate::Key(0));
            let k1 = n.add(Gate::Key(1));
            let y = n.add(Gate::Keyed { cell, inputs: ins, key: [k0, k1] });
            n.add_output("y", Lit::pos(y));
            for r in 0..16usize {
                let bits: Vec<bool> = (0..4).map(|b| (r >> b) & 1 == 1).collect();
                let x = &bits[..cell.arity()];
                let out = n.simulate(x, &bits[2..4]).unwrap()[0];
                assert_eq!(out, keyed_eval(cell, [bits[2], bits[3]], x), "{cell:?} {bits:?}");
            }
        }
    }

    #[test]
    fn rejects_backward_reads() {
        let mut n = Netlist::new();
        n.add(Gate::And { inputs: vec![Lit::pos(1)], negate: false });
        n.input("a");
        assert_eq!(n.check(), Err(NetlistError::NotTopological { gate: 0, net: 1 }));
    }
}
