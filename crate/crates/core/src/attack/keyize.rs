//! Attacker's model of a camouflaged layout: every cell that could hide a
//! covert cell becomes a two-bit keyed cell.

use serde::{Deserialize, Serialize};

use crate::camouflage::{AppearanceView, CamouflagedNetlist, CellKind};
use crate::covert::{correct_key, ApparentCell, KEY_NORMAL};
use crate::netlist::{Gate, Lit, NetId, Netlist};

/// One keyed cell. `cells` lists the appearance cells it covers, outermost
/// last; `key` the indices of its two key bits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub class: ApparentCell,
    pub cells: Vec<usize>,
    pub key: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyedDesign {
    pub netlist: Netlist,
    pub candidates: Vec<Candidate>,
}

impl KeyedDesign {
    pub fn key_bits(&self) -> usize {
        2 * self.candidates.len()
    }

    pub fn census(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for cand in &self.candidates {
            c[match cand.class {
                ApparentCell::Inverter => 0,
                ApparentCell::Buffer => 1,
                ApparentCell::Nand => 2,
            }] += 1;
        }
        c
    }
}

/// Inverters, inverter pairs (an inverter whose input is an inverter with no
/// other fanout) and NAND cells each become a keyed cell.
pub fn keyize(av: &AppearanceView) -> KeyedDesign {
    let fanouts = av.fanouts();
    let inner_of_pair = |i: usize| {
        av.cells[i].kind == CellKind::Inv && fanouts[i].len() == 1 && av.cells[fanouts[i][0]].kind == CellKind::Inv
    };
    let mut n = Netlist::new();
    let mut net: Vec<NetId> = vec![usize::MAX; av.cells.len()];
    let mut candidates = Vec::new();
    let mut keyed = |n: &mut Netlist, class: ApparentCell, inputs: Vec<NetId>, cells: Vec<usize>| {
        let k = 2 * candidates.len();
        let k0 = n.add(Gate::Key(k));
        let k1 = n.add(Gate::Key(k + 1));
        candidates.push(Candidate { class, cells, key: [k, k + 1] });
        n.add(Gate::Keyed { cell: class, inputs, key: [k0, k1] })
    };
    for (i, c) in av.cells.iter().enumerate() {
        let ins: Vec<NetId> = c.inputs.iter().map(|&s| net[s]).collect();
        net[i] = match c.kind {
            CellKind::Input => n.add(Gate::Input(c.name.clone().unwrap_or_default())),
            CellKind::And => n.add(Gate::And { inputs: ins.into_iter().map(Lit::pos).collect(), negate: false }),
            CellKind::Inv if inner_of_pair(i) => continue,
            CellKind::Inv if inner_of_pair(c.inputs[0]) => {
                let inner = c.inputs[0];
                let src = net[av.cells[inner].inputs[0]];
                keyed(&mut n, ApparentCell::Buffer, vec![src], vec![inner, i])
            }
            CellKind::Inv => keyed(&mut n, ApparentCell::Inverter, ins, vec![i]),
            CellKind::Nand => keyed(&mut n, ApparentCell::Nand, ins, vec![i]),
            CellKind::Output => {
                n.add_output(c.name.clone().unwrap_or_default(), Lit::pos(ins[0]));
                continue;
            }
        };
    }
    KeyedDesign { netlist: n, candidates }
}

/// Key under which the keyed model reproduces the true function: covert
/// cells get their configuration's key, genuine cells the normal key.
pub fn camouflage_key(c: &CamouflagedNetlist, d: &KeyedDesign) -> Vec<bool> {
    let mut key = vec![false; d.key_bits()];
    for cand in &d.candidates {
        let outer = *cand.cells.last().expect("candidate covers a cell");
        let k = match c.appearance_view.cells[outer].covert {
            Some(p) => {
                let inst = &c.placements[p].instance;
                correct_key(inst.kind, inst.config)
            }
            None => KEY_NORMAL,
        };
        key[cand.key[0]] = k[0];
        key[cand.key[1]] = k[1];
    }
    key
}
