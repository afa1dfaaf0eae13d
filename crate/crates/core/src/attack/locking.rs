//! XOR/XNOR logic-locking baseline with a target area.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::AigGraph;
use crate::camouflage::aig_cell_count;
use crate::netlist::{Gate, Lit, NetId, Netlist};

use super::{AttackError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LockedDesign {
    pub netlist: Netlist,
    pub correct_key: Vec<bool>,
    /// Original net of each key gate, in key order.
    pub sites: Vec<NetId>,
}

impl LockedDesign {
    pub fn key_bits(&self) -> usize {
        self.correct_key.len()
    }
}

/// Smallest key-gate count that brings `cells` up to `target_area` times
/// its size.
pub fn key_gates_for_area(cells: usize, target_area: f64) -> usize {
    let need = (target_area - 1.0) * cells as f64;
    if need <= 1e-9 {
        0
    } else {
        (need - 1e-9).ceil() as usize
    }
}

/// Inserts XOR (correct key 0) or XNOR (correct key 1) key gates on AND
/// outputs drawn without replacement; once every AND output carries one,
/// further gates stack on nets drawn again in a fresh order.
pub fn logic_lock(f: &AigGraph, target_area: f64, seed: u64) -> Result<LockedDesign> {
    let base = Netlist::from_aig(f);
    let count = key_gates_for_area(aig_cell_count(f), target_area);
    let ands: Vec<NetId> = (0..base.gates.len()).filter(|&i| matches!(base.gates[i], Gate::And { .. })).collect();
    if count > 0 && ands.is_empty() {
        return Err(AttackError::Unreachable(format!("no internal nets to lock for area {target_area}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<NetId> = Vec::with_capacity(count);
    while picks.len() < count {
        let mut round = ands.clone();
        round.shuffle(&mut rng);
        picks.extend(round.into_iter().take(count - picks.len()));
    }
    let mut per_net: Vec<Vec<(usize, bool)>> = vec![Vec::new(); base.gates.len()];
    let mut correct_key = Vec::with_capacity(count);
    for (k, &net) in picks.iter().enumerate() {
        let xnor = rng.random::<bool>();
        per_net[net].push((k, xnor));
        correct_key.push(xnor);
    }
    let mut out = Netlist::new();
    let mut map: Vec<Lit> = Vec::with_capacity(base.gates.len());
    let remap = |map: &[Lit], l: Lit| Lit { net: map[l.net].net, neg: map[l.net].neg != l.neg };
    for (i, g) in base.gates.iter().enumerate() {
        let ng = match g {
            Gate::And { inputs, negate } => Gate::And { inputs: inputs.iter().map(|&l| remap(&map, l)).collect(), negate: *negate },
            Gate::Xor(a, b) => Gate::Xor(remap(&map, *a), remap(&map, *b)),
            other => other.clone(),
        };
        let mut cur = Lit::pos(out.add(ng));
        for &(k, xnor) in &per_net[i] {
            let key = out.add(Gate::Key(k));
            cur = Lit::pos(out.add(Gate::Xor(cur, Lit { net: key, neg: xnor })));
        }
        map.push(cur);
    }
    out.outputs = base.outputs.iter().map(|(n, l)| (n.clone(), remap(&map, *l))).collect();
    Ok(LockedDesign { netlist: out, correct_key, sites: picks })
}
