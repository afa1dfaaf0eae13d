//! Functional view (true behavior) and appearance view (what an attacker
//! reads off the layout) of a camouflaged design.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::aig::{AigGraph, EdgeState, Node, NodeType};
use crate::covert::{gate_appearance, ApparentCell, CovertConfig, CovertGateKind, CovertInstance};
use crate::netlist::{Gate, Lit, NetId, Netlist};

use super::fix::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    Plain,
    Inverted,
    /// Realized by the placement with this index.
    Covert(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Link {
    pub src: usize,
    pub dst: usize,
    pub kind: LinkKind,
}

/// A covert cell on the link `src -> dst`. A UT-A also reads the output of
/// `dummy_src` on its second pin. `instance` refers to appearance-view nets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub src: usize,
    pub dst: usize,
    pub dummy_src: Option<usize>,
    pub phase: Phase,
    pub instance: CovertInstance,
}

impl Placement {
    pub fn new(src: usize, dst: usize, kind: CovertGateKind, config: CovertConfig, phase: Phase) -> Self {
        let instance = CovertInstance { kind, config, real_input: None, dummy_inputs: vec![], output: 0 };
        Placement { src, dst, dummy_src: None, phase, instance }
    }

    pub fn kind(&self) -> CovertGateKind {
        self.instance.kind
    }

    /// Connection state the placement realizes functionally.
    pub fn functional_state(&self) -> EdgeState {
        match (self.instance.kind, self.instance.config) {
            (CovertGateKind::UtA, CovertConfig::Normal) => EdgeState::Plain,
            (CovertGateKind::UtB, CovertConfig::Normal) => EdgeState::Inverted,
            _ => EdgeState::None,
        }
    }
}

/// Node list aligned with the padded input graphs plus typed links, sorted
/// by (dst, src). Every AND and PO node conjoins its link values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionalView {
    pub nodes: Vec<Node>,
    pub links: Vec<Link>,
}

impl FunctionalView {
    pub fn from_links(nodes: Vec<Node>, links: &BTreeMap<(usize, usize), LinkKind>) -> Self {
        let links = links.iter().map(|(&(dst, src), &kind)| Link { src, dst, kind }).collect();
        FunctionalView { nodes, links }
    }

    pub fn from_aig(g: &AigGraph) -> Self {
        let mut links: Vec<Link> = g
            .edges
            .iter()
            .map(|e| Link { src: e.src, dst: e.dst, kind: if e.inverted { LinkKind::Inverted } else { LinkKind::Plain } })
            .collect();
        links.sort_by_key(|l| (l.dst, l.src));
        FunctionalView { nodes: g.nodes.clone(), links }
    }

    pub fn link_map(&self) -> BTreeMap<(usize, usize), LinkKind> {
        self.links.iter().map(|l| ((l.dst, l.src), l.kind)).collect()
    }

    fn incoming(&self) -> Vec<Vec<Link>> {
        let mut inc = vec![Vec::new(); self.nodes.len()];
        for l in &self.links {
            inc[l.dst].push(*l);
        }
        inc
    }

    /// Nodes that appear in either view: all original nodes, plus padding
    /// nodes that are linked or feed a UT-A pin.
    pub fn visible(&self, placements: &[Placement]) -> Vec<bool> {
        let mut vis: Vec<bool> = self.nodes.iter().map(|n| !n.dummy).collect();
        for l in &self.links {
            vis[l.src] = true;
            vis[l.dst] = true;
        }
        for p in placements {
            if let Some(d) = p.dummy_src {
                vis[d] = true;
            }
        }
        vis
    }

    /// True behavior as a netlist: covert links evaluate to their configured
    /// function.
    pub fn to_netlist(&self, placements: &[Placement]) -> Netlist {
        let mut n = Netlist::new();
        let vis = self.visible(placements);
        let inc = self.incoming();
        let mut net = vec![usize::MAX; self.nodes.len()];
        let mut consts: HashMap<bool, NetId> = HashMap::new();
        for v in 0..self.nodes.len() {
            if !vis[v] {
                continue;
            }
            let mut lits = Vec::new();
            for l in &inc[v] {
                let lit = match l.kind {
                    LinkKind::Plain => Lit::pos(net[l.src]),
                    LinkKind::Inverted => Lit::neg(net[l.src]),
                    LinkKind::Covert(k) => {
                        let inst = &placements[k].instance;
                        match (inst.kind, inst.config) {
                            (CovertGateKind::UtA, CovertConfig::Normal) => Lit::pos(net[l.src]),
                            (CovertGateKind::UtB, CovertConfig::Normal) => Lit::neg(net[l.src]),
                            (_, c) => {
                                let b = c == CovertConfig::Const1;
                                Lit::pos(*consts.entry(b).or_insert_with(|| n.add(Gate::Const(b))))
                            }
                        }
                    }
                };
                lits.push(lit);
            }
            let node = &self.nodes[v];
            match node.kind {
                NodeType::Pi => net[v] = n.input(&label(node, v)),
                NodeType::And => net[v] = n.add(Gate::And { inputs: lits, negate: false }),
                NodeType::Po => {
                    let l = if lits.len() == 1 { lits[0] } else { Lit::pos(n.add(Gate::And { inputs: lits, negate: false })) };
                    n.add_output(label(node, v), l);
                }
            }
        }
        n
    }

    /// Lays out the attacker-visible cells. Real inverters are shared per
    /// source net; every covert cell gets its own cells. Fills each
    /// placement's net references.
    pub fn render(&self, placements: &mut [Placement]) -> AppearanceView {
        let mut cells: Vec<Cell> = Vec::new();
        let vis = self.visible(placements);
        let inc = self.incoming();
        let mut net = vec![usize::MAX; self.nodes.len()];
        let mut inputs: HashMap<String, NetId> = HashMap::new();
        let mut inverter: HashMap<NetId, NetId> = HashMap::new();
        let push = |cells: &mut Vec<Cell>, c: Cell| {
            cells.push(c);
            cells.len() - 1
        };
        for v in 0..self.nodes.len() {
            if !vis[v] {
                continue;
            }
            let node = &self.nodes[v];
            if node.kind == NodeType::Pi {
                let name = label(node, v);
                net[v] = *inputs
                    .entry(name.clone())
                    .or_insert_with(|| push(&mut cells, Cell::new(CellKind::Input, vec![], Some(name), Some(v), None)));
                continue;
            }
            let mut ins = Vec::new();
            for l in &inc[v] {
                let s = net[l.src];
                let out = match l.kind {
                    LinkKind::Plain => s,
                    LinkKind::Inverted => {
                        *inverter.entry(s).or_insert_with(|| push(&mut cells, Cell::new(CellKind::Inv, vec![s], None, None, None)))
                    }
                    LinkKind::Covert(k) => {
                        let p = &mut placements[k];
                        let (out, real, dummy) = match gate_appearance(p.kind()) {
                            ApparentCell::Inverter => (push(&mut cells, Cell::new(CellKind::Inv, vec![s], None, None, Some(k))), None, vec![s]),
                            ApparentCell::Buffer => {
                                let first = push(&mut cells, Cell::new(CellKind::Inv, vec![s], None, None, Some(k)));
                                (push(&mut cells, Cell::new(CellKind::Inv, vec![first], None, None, Some(k))), None, vec![s])
                            }
                            ApparentCell::Nand if p.kind() == CovertGateKind::UtA => {
                                let d = net[p.dummy_src.unwrap_or(l.src)];
                                (push(&mut cells, Cell::new(CellKind::Nand, vec![s, d], None, None, Some(k))), Some(s), vec![d])
                            }
                            ApparentCell::Nand => {
                                (push(&mut cells, Cell::new(CellKind::Nand, vec![s, s], None, None, Some(k))), Some(s), vec![])
                            }
                        };
                        p.instance.real_input = real;
                        p.instance.dummy_inputs = dummy;
                        p.instance.output = out;
                        out
                    }
                };
                ins.push(out);
            }
            match node.kind {
                NodeType::And => net[v] = push(&mut cells, Cell::new(CellKind::And, ins, None, Some(v), None)),
                NodeType::Po => {
                    let src = if ins.len() == 1 { ins[0] } else { push(&mut cells, Cell::new(CellKind::And, ins, None, None, None)) };
                    push(&mut cells, Cell::new(CellKind::Output, vec![src], Some(label(node, v)), Some(v), None));
                }
                NodeType::Pi => unreachable!(),
            }
        }
        AppearanceView { cells }
    }
}

fn label(node: &Node, v: usize) -> String {
    node.name.clone().unwrap_or_else(|| format!("_n{v}"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Input,
    And,
    Inv,
    Nand,
    Output,
}

impl CellKind {
    pub fn is_logic(self) -> bool {
        matches!(self, CellKind::And | CellKind::Inv | CellKind::Nand)
    }
}

/// One attacker-visible cell; it drives the net with its own index.
/// `node` is the functional-view node it renders and `covert` the placement
/// it belongs to; neither is visible to an attacker.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub inputs: Vec<NetId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covert: Option<usize>,
}

impl Cell {
    fn new(kind: CellKind, inputs: Vec<NetId>, name: Option<String>, node: Option<usize>, covert: Option<usize>) -> Self {
        Cell { kind, inputs, name, node, covert }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppearanceView {
    pub cells: Vec<Cell>,
}

impl AppearanceView {
    /// Logic cells (AND, INV, NAND); inputs and outputs are ports.
    pub fn cell_count(&self) -> usize {
        self.cells.iter().filter(|c| c.kind.is_logic()).count()
    }

    pub fn count(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }

    pub fn fanouts(&self) -> Vec<Vec<NetId>> {
        let mut f = vec![Vec::new(); self.cells.len()];
        for (i, c) in self.cells.iter().enumerate() {
            for &s in &c.inputs {
                f[s].push(i);
            }
        }
        f
    }

    /// Netlist with every cell at its apparent function.
    pub fn to_netlist(&self) -> Netlist {
        let mut n = Netlist::new();
        for c in &self.cells {
            let g = match c.kind {
                CellKind::Input => Gate::Input(c.name.clone().unwrap_or_default()),
                CellKind::And => Gate::And { inputs: c.inputs.iter().map(|&i| Lit::pos(i)).collect(), negate: false },
                CellKind::Inv | CellKind::Nand => {
                    Gate::And { inputs: c.inputs.iter().map(|&i| Lit::pos(i)).collect(), negate: true }
                }
                CellKind::Output => {
                    n.add_output(c.name.clone().unwrap_or_default(), Lit::pos(c.inputs[0]));
                    Gate::Const(false)
                }
            };
            n.add(g);
        }
        n
    }
}

/// Logic cells of the uncamouflaged rendering of `g`.
pub fn aig_cell_count(g: &AigGraph) -> usize {
    FunctionalView::from_aig(g).render(&mut []).cell_count()
}
