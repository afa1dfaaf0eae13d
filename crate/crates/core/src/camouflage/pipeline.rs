//! Decoded-graph repair, the two fix phases and the end-to-end pipeline.

use std::collections::BTreeMap;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::aig::pad::{pad_to_counts, type_counts};
use crate::aig::{from_tensors, pad_pair, AigGraph, EdgeState, Node, NodeType, TensorTriple};
use crate::covert::{CovertConfig, CovertGateKind};
use crate::vae::{decode, encode, VaeParams};

use super::filter::{interpolate, threshold_filter, Proportion, Threshold};
use super::fix::{fix_lookup, FixAction, Phase};
use super::views::{aig_cell_count, FunctionalView, LinkKind, Placement};
use super::{CamouflageError, CamouflageMetadata, CamouflagedNetlist, FixStep, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct NormalizeReport {
    pub dropped_edges: usize,
    pub retyped_outputs: usize,
}

/// Makes a decoded graph structurally legal: keeps only the last `max_po`
/// outputs (earlier ones become AND nodes), drops edges into PIs and out of
/// POs, and reorders into block layout.
pub fn normalize_decoded(g: &AigGraph, max_po: usize) -> (AigGraph, NormalizeReport) {
    let mut g = g.clone();
    let mut report = NormalizeReport::default();
    let pos = g.ids_of(NodeType::Po);
    for &v in &pos[..pos.len().saturating_sub(max_po)] {
        g.nodes[v] = Node { kind: NodeType::And, name: None, dummy: false };
        report.retyped_outputs += 1;
    }
    let before = g.edges.len();
    let kinds: Vec<NodeType> = g.nodes.iter().map(|n| n.kind).collect();
    g.edges.retain(|e| e.src < e.dst && kinds[e.dst] != NodeType::Pi && kinds[e.src] != NodeType::Po);
    report.dropped_edges = before - g.edges.len();
    (g.to_block_layout().0, report)
}

/// Work in progress between the two phases.
#[derive(Clone, Debug)]
pub struct Draft {
    pub nodes: Vec<Node>,
    pub links: BTreeMap<(usize, usize), LinkKind>,
    pub placements: Vec<Placement>,
    pub fix_log: Vec<FixStep>,
}

impl Draft {
    fn state(&self, dst: usize, src: usize) -> EdgeState {
        match self.links.get(&(dst, src)) {
            None => EdgeState::None,
            Some(LinkKind::Plain) => EdgeState::Plain,
            Some(LinkKind::Inverted) => EdgeState::Inverted,
            Some(LinkKind::Covert(k)) => self.placements[*k].functional_state(),
        }
    }

    fn place(&mut self, src: usize, dst: usize, kind: CovertGateKind, phase: Phase, rng: &mut ChaCha8Rng) {
        let config = match kind {
            CovertGateKind::Fi | CovertGateKind::Fb => CovertConfig::Const1,
            CovertGateKind::UtA | CovertGateKind::UtB => CovertConfig::Normal,
        };
        let mut p = Placement::new(src, dst, kind, config, phase);
        if kind == CovertGateKind::UtA {
            let pool: Vec<usize> = (0..dst)
                .filter(|&k| k != src && self.nodes[k].kind != NodeType::Po && !self.nodes[k].dummy)
                .collect();
            p.dummy_src = pool.choose(rng).copied();
        }
        self.placements.push(p);
        self.links.insert((dst, src), LinkKind::Covert(self.placements.len() - 1));
    }

    /// Changes the kind of the covert cell on `(dst, src)` if there is one,
    /// otherwise places a new one.
    fn convert_or_place(&mut self, src: usize, dst: usize, kind: CovertGateKind, phase: Phase, rng: &mut ChaCha8Rng) {
        match self.links.get(&(dst, src)) {
            Some(&LinkKind::Covert(k)) if self.placements[k].functional_state() == EdgeState::None || self.placements[k].kind() == kind => {
                let p = &mut self.placements[k];
                if p.kind() != kind {
                    p.instance.kind = kind;
                    p.phase = phase;
                }
            }
            _ => self.place(src, dst, kind, phase, rng),
        }
    }

    fn log(&mut self, phase: Phase, src: usize, dst: usize, current: EdgeState, target: EdgeState, action: FixAction) {
        self.fix_log.push(FixStep { phase, src, dst, current: current.code().into(), target: target.code().into(), action });
    }

    pub fn functional_view(&self) -> FunctionalView {
        FunctionalView::from_links(self.nodes.clone(), &self.links)
    }
}

fn state(g: &AigGraph) -> BTreeMap<(usize, usize), EdgeState> {
    g.edges.iter().map(|e| ((e.dst, e.src), EdgeState::from_bits(true, e.inverted))).collect()
}

fn check_aligned(a: &AigGraph, b: &AigGraph) -> Result<()> {
    if a.node_count() != b.node_count() {
        return Err(CamouflageError::Misaligned(format!("{} vs {} nodes", a.node_count(), b.node_count())));
    }
    for v in 0..a.node_count() {
        if a.kind(v) != b.kind(v) {
            return Err(CamouflageError::Misaligned(format!("node {v} is {:?} vs {:?}", a.kind(v), b.kind(v))));
        }
    }
    Ok(())
}

/// Function-preserving phase over index-aligned graphs: the result computes
/// `f` while keeping every edge of `g_hat`, neutralized or re-purposed by
/// covert cells where it disagrees with `f`.
pub fn functional_preserve(g_hat: &AigGraph, f: &AigGraph, rng: &mut ChaCha8Rng) -> Result<Draft> {
    check_aligned(g_hat, f)?;
    f.check_structure()?;
    let (sg, sf) = (state(g_hat), state(f));
    let mut d = Draft { nodes: f.nodes.clone(), links: BTreeMap::new(), placements: vec![], fix_log: vec![] };
    for dst in 0..f.node_count() {
        for src in 0..dst {
            let cur = sg.get(&(dst, src)).copied().unwrap_or(EdgeState::None);
            let tgt = sf.get(&(dst, src)).copied().unwrap_or(EdgeState::None);
            let action = fix_lookup(Phase::Functional, cur, tgt);
            match action {
                FixAction::Na => {
                    if tgt.is_connected() {
                        let kind = if tgt == EdgeState::Inverted { LinkKind::Inverted } else { LinkKind::Plain };
                        d.links.insert((dst, src), kind);
                    }
                    continue;
                }
                FixAction::Connect => {
                    d.links.insert((dst, src), LinkKind::Plain);
                }
                FixAction::InsertInv => {
                    d.links.insert((dst, src), LinkKind::Inverted);
                }
                FixAction::Fi => d.place(src, dst, CovertGateKind::Fi, Phase::Functional, rng),
                FixAction::Fb => d.place(src, dst, CovertGateKind::Fb, Phase::Functional, rng),
                FixAction::UtA => d.place(src, dst, CovertGateKind::UtA, Phase::Functional, rng),
                FixAction::UtB => d.place(src, dst, CovertGateKind::UtB, Phase::Functional, rng),
            }
            d.log(Phase::Functional, src, dst, cur, tgt, action);
        }
    }
    Ok(d)
}

/// Appearance-mimicking phase: adds or converts covert cells so the layout
/// shows every edge of `a` without changing the function.
pub fn appearance_mimic(mut d: Draft, a: &AigGraph, rng: &mut ChaCha8Rng) -> Result<Draft> {
    if d.nodes.len() != a.node_count() || (0..a.node_count()).any(|v| d.nodes[v].kind != a.kind(v)) {
        return Err(CamouflageError::Misaligned("appearance target does not align with the draft".into()));
    }
    let sa = state(a);
    for dst in 0..a.node_count() {
        for src in 0..dst {
            let cur = d.state(dst, src);
            let tgt = sa.get(&(dst, src)).copied().unwrap_or(EdgeState::None);
            let action = fix_lookup(Phase::Appearance, cur, tgt);
            let kind = match action {
                FixAction::Fi => CovertGateKind::Fi,
                FixAction::Fb => CovertGateKind::Fb,
                FixAction::UtA => CovertGateKind::UtA,
                FixAction::UtB => CovertGateKind::UtB,
                _ => continue,
            };
            d.convert_or_place(src, dst, kind, Phase::Appearance, rng);
            d.log(Phase::Appearance, src, dst, cur, tgt, action);
        }
    }
    Ok(d)
}

/// Runs both phases on an already decoded graph. `g_hat` is normalized and
/// all three graphs are padded to common per-type counts before alignment.
pub fn camouflage_graphs(g_hat: &AigGraph, f: &AigGraph, a: &AigGraph, seed: u64) -> Result<CamouflagedNetlist> {
    f.check_structure()?;
    a.check_structure()?;
    let (g_norm, report) = normalize_decoded(g_hat, f.count(NodeType::Po).max(1));
    let counts = [type_counts(&g_norm), type_counts(f), type_counts(a)];
    let target = [0, 1, 2].map(|k| counts.iter().map(|c| c[k]).max().unwrap_or(0));
    let (g_pad, f_pad, a_pad) = (pad_to_counts(&g_norm, target).0, pad_to_counts(f, target).0, pad_to_counts(a, target).0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draft = functional_preserve(&g_pad, &f_pad, &mut rng)?;
    let mut draft = appearance_mimic(draft, &a_pad, &mut rng)?;
    let functional_view = draft.functional_view();
    let appearance_view = functional_view.render(&mut draft.placements);
    let function_cells = aig_cell_count(f);
    let appearance_cells = appearance_view.cell_count();
    let mut by_kind = BTreeMap::new();
    for p in &draft.placements {
        *by_kind.entry(format!("{:?}", p.kind())).or_insert(0) += 1;
    }
    let metadata = CamouflageMetadata {
        p: None,
        th: None,
        seed,
        model_checksum: None,
        decode_nodes: g_hat.node_count(),
        padded_counts: target,
        decode_warnings: 0,
        dropped_edges: report.dropped_edges,
        retyped_outputs: report.retyped_outputs,
        function_cells,
        appearance_cells,
        area_overhead: appearance_cells as f64 / function_cells.max(1) as f64,
        placements_by_kind: by_kind,
    };
    Ok(CamouflagedNetlist { functional_view, appearance_view, placements: draft.placements, fix_log: draft.fix_log, metadata })
}

/// Node count the decoder is asked for: the size of `f` and `a` after
/// padding them to each other.
pub fn decode_size(f: &AigGraph, a: &AigGraph) -> usize {
    pad_pair(f, a).0.node_count()
}

/// Binary triple decoded from the interpolated latent point.
pub fn interpolated_triple(f: &AigGraph, a: &AigGraph, params: &VaeParams, p: Proportion, th: Threshold) -> Result<TensorTriple> {
    let zf = encode(f, params)?;
    let za = encode(a, params)?;
    let z = interpolate(&zf.mu, &za.mu, p)?;
    let soft = decode(&z, decode_size(f, a), params)?;
    Ok(threshold_filter(&soft, th))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PipelineConfig {
    pub p: Proportion,
    pub th: Threshold,
    pub seed: u64,
}

/// Encode both trees, interpolate, decode, threshold, then repair and
/// camouflage so the result computes `f` and looks like `a`.
pub fn camouflage_pipeline(f: &AigGraph, a: &AigGraph, params: &VaeParams, cfg: &PipelineConfig) -> Result<CamouflagedNetlist> {
    for (g, which) in [(f, "function"), (a, "appearance")] {
        if !g.is_tree() {
            return Err(CamouflageError::NotTree(which.into()));
        }
    }
    let bin = interpolated_triple(f, a, params, cfg.p, cfg.th)?;
    let (g_hat, warnings) = from_tensors(&bin)?;
    let mut out = camouflage_graphs(&g_hat, f, a, cfg.seed)?;
    out.metadata.p = Some(cfg.p.value());
    out.metadata.th = Some(cfg.th.value());
    out.metadata.model_checksum = Some(params.checksum());
    out.metadata.decode_warnings = warnings.len();
    Ok(out)
}
