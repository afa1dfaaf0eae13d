//! Latent-space analytics, random covert-insertion baselines and labeled
//! graph export.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aig::{graph_edit_distance, AigGraph, GedOutcome, NodeType};
use crate::camouflage::{
    aig_cell_count, AppearanceView, CamouflageMetadata, CamouflagedNetlist, Cell, CellKind, FunctionalView, LinkKind,
    Phase, Placement,
};
use crate::covert::{CovertConfig, CovertGateKind};
use crate::vae::{encode, VaeError, VaeParams};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("need at least 2 graphs, got {0}")]
    TooFewGraphs(usize),
    #[error(transparent)]
    Vae(#[from] VaeError),
    #[error("invalid insertion target: {0}")]
    InvalidTarget(String),
    #[error("no legal insertion site is left")]
    Unreachable,
    #[error("netlist {0} has no label")]
    Unlabeled(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("gnn import: {0}")]
    Import(String),
}

pub type Result<T> = std::result::Result<T, EvalError>;

/// Euclidean distance between two latent vectors.
pub fn latent_distance(z1: &[f64], z2: &[f64]) -> Result<f64> {
    if z1.len() != z2.len() {
        return Err(EvalError::Dimension(z1.len(), z2.len()));
    }
    Ok(z1.iter().zip(z2).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

pub fn pearson_r(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(EvalError::Dimension(xs.len(), ys.len()));
    }
    if xs.len() < 2 {
        return Err(EvalError::Undefined(format!("{} points", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(EvalError::Undefined("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id1: String,
    pub id2: String,
    pub lsd: f64,
    /// None when the edit-distance search timed out.
    pub ged: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinStat {
    pub bin: usize,
    pub lo: f64,
    pub hi: f64,
    pub mean: Option<f64>,
    /// Population standard deviation.
    pub std: Option<f64>,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    /// Over raw valid pairs; None when undefined.
    pub pearson_r: Option<f64>,
    /// Over (bin midpoint, bin mean) of non-empty bins.
    pub bin_mean_r: Option<f64>,
    pub valid: usize,
    pub discarded: usize,
    pub bins: Vec<BinStat>,
    #[serde(skip)]
    pub pairs: Vec<PairRecord>,
}

/// Equal-width bins over the observed range of `xs`; the last bin is
/// closed. Returns the bin of every point.
pub fn bin_index(xs: &[f64], bins: usize) -> (f64, f64, Vec<usize>) {
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w = (hi - lo) / bins as f64;
    let idx = xs
        .iter()
        .map(|&x| if w > 0.0 { (((x - lo) / w).floor() as usize).min(bins - 1) } else { 0 })
        .collect();
    (lo, hi, idx)
}

/// Bins and correlations over pairs whose GED is known.
pub fn correlation_report(pairs: Vec<PairRecord>, bins: usize) -> CorrelationReport {
    let bins = bins.max(1);
    let valid: Vec<(f64, f64)> = pairs.iter().filter_map(|p| p.ged.map(|g| (p.lsd, g as f64))).collect();
    let discarded = pairs.len() - valid.len();
    let xs: Vec<f64> = valid.iter().map(|v| v.0).collect();
    let ys: Vec<f64> = valid.iter().map(|v| v.1).collect();
    let mut stats = Vec::new();
    if !valid.is_empty() {
        let (lo, hi, idx) = bin_index(&xs, bins);
        let w = (hi - lo) / bins as f64;
        let mut members: Vec<Vec<f64>> = vec![Vec::new(); bins];
        for (k, &b) in idx.iter().enumerate() {
            members[b].push(ys[k]);
        }
        for (b, m) in members.iter().enumerate() {
            let (mean, std) = if m.is_empty() {
                (None, None)
            } else {
                let mean = m.iter().sum::<f64>() / m.len() as f64;
                let var = m.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / m.len() as f64;
                (Some(mean), Some(var.sqrt()))
            };
            let blo = lo + w * b as f64;
            let bhi = if b + 1 == bins { hi } else { lo + w * (b + 1) as f64 };
            stats.push(BinStat { bin: b, lo: blo, hi: bhi, mean, std, count: m.len() });
        }
    }
    let (bx, by): (Vec<f64>, Vec<f64>) = stats.iter().filter_map(|s| s.mean.map(|m| ((s.lo + s.hi) / 2.0, m))).unzip();
    CorrelationReport {
        pearson_r: pearson_r(&xs, &ys).ok(),
        bin_mean_r: pearson_r(&bx, &by).ok(),
        valid: valid.len(),
        discarded,
        bins: stats,
        pairs,
    }
}

/// LSD from eval-mode encodings and GED with `timeout` for every unordered
/// pair; timed-out pairs are discarded from the statistics.
pub fn ged_lsd_study(graphs: &[(String, AigGraph)], params: &VaeParams, bins: usize, timeout: Duration) -> Result<CorrelationReport> {
    if graphs.len() < 2 {
        return Err(EvalError::TooFewGraphs(graphs.len()));
    }
    let z: Vec<Vec<f64>> = graphs.par_iter().map(|(_, g)| Ok(encode(g, params)?.mu)).collect::<Result<_>>()?;
    let idx: Vec<(usize, usize)> = (0..graphs.len()).flat_map(|i| (i + 1..graphs.len()).map(move |j| (i, j))).collect();
    let pairs = idx
        .par_iter()
        .map(|&(i, j)| {
            let ged = match graph_edit_distance(&graphs[i].1, &graphs[j].1, timeout) {
                GedOutcome::Exact(d) => Some(d),
                GedOutcome::Timeout { .. } => None,
            };
            Ok(PairRecord { id1: graphs[i].0.clone(), id2: graphs[j].0.clone(), lsd: latent_distance(&z[i], &z[j])?, ged })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(correlation_report(pairs, bins))
}

pub fn pairs_csv(r: &CorrelationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id1", "id2", "lsd", "ged"])?;
    for p in &r.pairs {
        let ged = p.ged.map_or("TIMEOUT".to_string(), |g| g.to_string());
        w.write_record([p.id1.as_str(), p.id2.as_str(), &p.lsd.to_string(), &ged])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| EvalError::Io(e.into_error()))?).expect("csv is utf-8"))
}

pub fn bins_csv(r: &CorrelationReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["bin", "interval", "mean", "std", "count"])?;
    let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
    for b in &r.bins {
        w.write_record([b.bin.to_string(), format!("[{}, {}]", b.lo, b.hi), opt(b.mean), opt(b.std), b.count.to_string()])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| EvalError::Io(e.into_error()))?).expect("csv is utf-8"))
}

pub fn summary_json(r: &CorrelationReport) -> String {
    serde_json::json!({
        "pearson_r": r.pearson_r,
        "pearson_r_bin_means": r.bin_mean_r,
        "valid": r.valid,
        "discarded": r.discarded,
        "bins": r.bins.len(),
    })
    .to_string()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsertionMode {
    /// Covert placements for this fraction of the logic cells of `f`.
    Fraction(f64),
    /// Insert until appearance cells / cells of `f` reaches the ratio.
    MatchArea(f64),
}

/// Number of placements for a fraction: rounded, at least 1 when both the
/// fraction and the circuit are nonzero.
pub fn fraction_count(cells: usize, fraction: f64) -> usize {
    if fraction <= 0.0 || cells == 0 {
        return 0;
    }
    ((cells as f64 * fraction).round() as usize).max(1)
}

struct Inserter {
    nodes: Vec<crate::aig::Node>,
    links: BTreeMap<(usize, usize), LinkKind>,
    placements: Vec<Placement>,
}

impl Inserter {
    fn uncovered_links(&self) -> Vec<(usize, usize)> {
        self.links.iter().filter(|(_, k)| !matches!(k, LinkKind::Covert(_))).map(|(&s, _)| s).collect()
    }

    fn free_site(&self, rng: &mut ChaCha8Rng) -> Option<(usize, usize)> {
        let dsts: Vec<usize> = (0..self.nodes.len()).filter(|&v| self.nodes[v].kind != NodeType::Pi).collect();
        for _ in 0..64 {
            let &dst = dsts.choose(rng)?;
            let srcs: Vec<usize> =
                (0..dst).filter(|&s| self.nodes[s].kind != NodeType::Po && !self.links.contains_key(&(dst, s))).collect();
            if let Some(&src) = srcs.choose(rng) {
                return Some((dst, src));
            }
        }
        let all: Vec<(usize, usize)> = dsts
            .iter()
            .flat_map(|&d| (0..d).map(move |s| (d, s)))
            .filter(|&(d, s)| self.nodes[s].kind != NodeType::Po && !self.links.contains_key(&(d, s)))
            .collect();
        all.choose(rng).copied()
    }

    /// One placement of a uniformly chosen kind at a uniformly chosen legal
    /// site for it; falls back to the other kinds when none is legal.
    fn insert(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let first = rng.random_range(0..3);
        for t in 0..3 {
            match (first + t) % 3 {
                0 | 1 => {
                    let Some((dst, src)) = self.free_site(rng) else { continue };
                    let kind = if (first + t) % 3 == 0 { CovertGateKind::Fi } else { CovertGateKind::Fb };
                    self.push(Placement::new(src, dst, kind, CovertConfig::Const1, Phase::Appearance));
                    return Ok(());
                }
                _ => {
                    let Some(&(dst, src)) = self.uncovered_links().choose(rng) else { continue };
                    let kind = if self.links[&(dst, src)] == LinkKind::Inverted { CovertGateKind::UtB } else { CovertGateKind::UtA };
                    let mut p = Placement::new(src, dst, kind, CovertConfig::Normal, Phase::Appearance);
                    if kind == CovertGateKind::UtA {
                        let pool: Vec<usize> = (0..dst).filter(|&k| k != src && self.nodes[k].kind != NodeType::Po).collect();
                        p.dummy_src = pool.choose(rng).copied();
                    }
                    self.push(p);
                    return Ok(());
                }
            }
        }
        Err(EvalError::Unreachable)
    }

    fn push(&mut self, p: Placement) {
        self.links.insert((p.dst, p.src), LinkKind::Covert(self.placements.len()));
        self.placements.push(p);
    }

    fn render(&self) -> (FunctionalView, AppearanceView, Vec<Placement>) {
        let fv = FunctionalView::from_links(self.nodes.clone(), &self.links);
        let mut placements = self.placements.clone();
        let av = fv.render(&mut placements);
        (fv, av, placements)
    }
}

/// Random covert-gate baseline: FI/FB on non-edges, UT-A/UT-B on existing
/// plain/inverted edges, all in their function-transparent configuration.
pub fn random_covert_insertion(f: &AigGraph, mode: InsertionMode, seed: u64) -> Result<CamouflagedNetlist> {
    f.check_structure().map_err(VaeError::from)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = FunctionalView::from_aig(f);
    let mut ins = Inserter { nodes: base.nodes.clone(), links: base.link_map(), placements: Vec::new() };
    let cells = aig_cell_count(f);
    match mode {
        InsertionMode::Fraction(x) => {
            if !(0.0..=1.0).contains(&x) {
                return Err(EvalError::InvalidTarget(format!("fraction {x}")));
            }
            for _ in 0..fraction_count(cells, x) {
                ins.insert(&mut rng)?;
            }
        }
        InsertionMode::MatchArea(ratio) => {
            if !ratio.is_finite() || cells == 0 {
                return Err(EvalError::InvalidTarget(format!("area ratio {ratio} on {cells} cells")));
            }
            let limit = 4 * (ratio * cells as f64).ceil() as usize + 16;
            while (ins.render().1.cell_count() as f64) < ratio * cells as f64 {
                if ins.placements.len() >= limit {
                    return Err(EvalError::Unreachable);
                }
                ins.insert(&mut rng)?;
            }
        }
    }
    let (functional_view, appearance_view, placements) = ins.render();
    let appearance_cells = appearance_view.cell_count();
    let mut by_kind = BTreeMap::new();
    for p in &placements {
        *by_kind.entry(format!("{:?}", p.kind())).or_insert(0) += 1;
    }
    let n = f.node_count();
    let metadata = CamouflageMetadata {
        p: None,
        th: None,
        seed,
        model_checksum: None,
        decode_nodes: n,
        padded_counts: [f.count(NodeType::Pi), f.count(NodeType::Po), f.count(NodeType::And)],
        decode_warnings: 0,
        dropped_edges: 0,
        retyped_outputs: 0,
        function_cells: cells,
        appearance_cells,
        area_overhead: appearance_cells as f64 / cells.max(1) as f64,
        placements_by_kind: by_kind,
    };
    Ok(CamouflagedNetlist { functional_view, appearance_view, placements, fix_log: Vec::new(), metadata })
}

const GNN_KINDS: [CellKind; 5] = [CellKind::Input, CellKind::And, CellKind::Inv, CellKind::Nand, CellKind::Output];

const GNN_README: &str = "\
# Labeled appearance graphs

One graph per netlist, built only from the attacker-visible appearance view.

nodes.csv: graph_id, node_id, is_input, is_and, is_inv, is_nand, is_output, label
  One row per cell. The five is_* columns are the one-hot cell kind.
  label is the node-level label, the family of the graph it belongs to.
edges.csv: graph_id, src, dst
  One row per cell input pin, from the driving cell to the reading cell.
  Pins are listed in pin order.
labels.csv: graph_id, label
  Graph-level circuit-family label.
";

/// Writes nodes.csv, edges.csv, labels.csv and README.md into `dir`.
pub fn export_gnn_dataset(netlists: &[(String, AppearanceView)], dir: &Path) -> Result<()> {
    if let Some(k) = netlists.iter().position(|(l, _)| l.trim().is_empty()) {
        return Err(EvalError::Unlabeled(k));
    }
    fs::create_dir_all(dir)?;
    let mut nodes = csv::Writer::from_path(dir.join("nodes.csv"))?;
    let mut edges = csv::Writer::from_path(dir.join("edges.csv"))?;
    let mut labels = csv::Writer::from_path(dir.join("labels.csv"))?;
    nodes.write_record(["graph_id", "node_id", "is_input", "is_and", "is_inv", "is_nand", "is_output", "label"])?;
    edges.write_record(["graph_id", "src", "dst"])?;
    labels.write_record(["graph_id", "label"])?;
    for (gid, (label, av)) in netlists.iter().enumerate() {
        labels.write_record([gid.to_string(), label.clone()])?;
        for (i, c) in av.cells.iter().enumerate() {
            let mut row = vec![gid.to_string(), i.to_string()];
            row.extend(GNN_KINDS.iter().map(|&k| u8::from(c.kind == k).to_string()));
            row.push(label.clone());
            nodes.write_record(&row)?;
            for &s in &c.inputs {
                edges.write_record([gid.to_string(), s.to_string(), i.to_string()])?;
            }
        }
    }
    nodes.flush()?;
    edges.flush()?;
    labels.flush()?;
    fs::write(dir.join("README.md"), GNN_README)?;
    Ok(())
}

/// Reads an export back. Cells get their kind and input pins; names and
/// hidden annotations are not part of the export.
pub fn import_gnn_dataset(dir: &Path) -> Result<Vec<(String, AppearanceView)>> {
    let bad = |m: String| EvalError::Import(m);
    let mut out: Vec<(String, AppearanceView)> = Vec::new();
    for rec in csv::Reader::from_path(dir.join("labels.csv"))?.records() {
        let rec = rec?;
        let gid: usize = rec[0].parse().map_err(|_| bad(format!("graph id {}", &rec[0])))?;
        if gid != out.len() {
            return Err(bad(format!("graph ids out of order at {gid}")));
        }
        out.push((rec[1].to_string(), AppearanceView::default()));
    }
    for rec in csv::Reader::from_path(dir.join("nodes.csv"))?.records() {
        let rec = rec?;
        let gid: usize = rec[0].parse().map_err(|_| bad(format!("graph id {}", &rec[0])))?;
        let hot: Vec<&str> = (2..7).map(|k| &rec[k]).collect();
        let kind = match hot.iter().position(|&h| h == "1") {
            Some(k) if hot.iter().filter(|&&h| h == "1").count() == 1 => GNN_KINDS[k],
            _ => return Err(bad(format!("node row {:?} is not one-hot", rec))),
        };
        let g = out.get_mut(gid).ok_or_else(|| bad(format!("unknown graph {gid}")))?;
        g.1.cells.push(Cell { kind, inputs: vec![], name: None, node: None, covert: None });
    }
    for rec in csv::Reader::from_path(dir.join("edges.csv"))?.records() {
        let rec = rec?;
        let num = |k: usize| rec[k].parse::<usize>().map_err(|_| bad(format!("edge row {:?}", rec)));
        let (gid, src, dst) = (num(0)?, num(1)?, num(2)?);
        let g = out.get_mut(gid).ok_or_else(|| bad(format!("unknown graph {gid}")))?;
        if src >= g.1.cells.len() || dst >= g.1.cells.len() {
            return Err(bad(format!("edge {src}->{dst} out of range")));
        }
        g.1.cells[dst].inputs.push(src);
    }
    Ok(out)
}

/// Appearance view without names or hidden annotations, as exported.
pub fn strip_hidden(av: &AppearanceView) -> AppearanceView {
    AppearanceView {
        cells: av.cells.iter().map(|c| Cell { kind: c.kind, inputs: c.inputs.clone(), name: None, node: None, covert: None }).collect(),
    }
}

/// Human-readable one-line summary of a report.
pub fn describe(r: &CorrelationReport) -> String {
    let mut s = String::new();
    let show = |x: Option<f64>| x.map_or("undefined".to_string(), |v| format!("{v:.4}"));
    let _ = write!(s, "r={} r_bins={} valid={} discarded={}", show(r.pearson_r), show(r.bin_mean_r), r.valid, r.discarded);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distances() {
        assert_eq!(latent_distance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((latent_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(matches!(latent_distance(&[1.0], &[1.0, 2.0]), Err(EvalError::Dimension(1, 2))));
    }

    #[test]
    fn pearson_cases() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let ys = [2.0, 4.0, 5.0, 4.0, 5.0];
        // mean x 3, mean y 4; sxy 6, sxx 10, syy 6.
        let want = 6.0 / (10f64.sqrt() * 6f64.sqrt());
        assert!((pearson_r(&xs, &ys).unwrap() - want).abs() < 1e-12);
        assert!((pearson_r(&xs, &xs).unwrap() - 1.0).abs() < 1e-12);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson_r(&xs, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(matches!(pearson_r(&xs, &[1.0; 5]), Err(EvalError::Undefined(_))));
    }

    #[test]
    fn bins_partition_and_timeouts_are_discarded() {
        let pairs: Vec<PairRecord> = (0..50)
            .map(|k| PairRecord { id1: format!("a{k}"), id2: "b".into(), lsd: k as f64 * 0.37, ged: (k % 7 != 0).then_some(k as u32) })
            .collect();
        let r = correlation_report(pairs, 20);
        assert_eq!(r.discarded, 8);
        assert_eq!(r.valid, 42);
        assert_eq!(r.bins.len(), 20);
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<usize>(), 42);
        for w in r.bins.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
        }
    }

    #[test]
    fn identical_pair_has_undefined_r() {
        let r = correlation_report(vec![PairRecord { id1: "a".into(), id2: "b".into(), lsd: 0.0, ged: Some(0) }], 20);
        assert_eq!(r.pearson_r, None);
        assert_eq!(r.valid, 1);
        assert_eq!(r.bins[0].count, 1);
        assert!(summary_json(&r).contains("\"pearson_r\":null"));
    }

    #[test]
    fn fraction_counts() {
        assert_eq!(fraction_count(100, 0.05), 5);
        assert_eq!(fraction_count(7, 0.05), 1);
        assert_eq!(fraction_count(100, 0.0), 0);
        assert_eq!(fraction_count(0, 0.05), 0);
    }
}
