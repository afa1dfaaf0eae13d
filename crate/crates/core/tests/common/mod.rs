#![allow(dead_code)]

use ipcamo::aig::cone::extract_cone_tree;
use ipcamo::aig::{AigGraph, Fanin};
use ipcamo::bench;
use ipcamo::camouflage::FixAction;
use ipcamo::vae::{split_dataset, train, Hyperparams, ModelDims, TrainReport, VaeParams};

/// `(current, target, functional action, appearance action)` over the two-bit
/// connection codes.
pub const FIX_TABLE: [(&str, &str, FixAction, FixAction); 9] = [
    ("00", "00", FixAction::Na, FixAction::Na),
    ("00", "10", FixAction::Connect, FixAction::Fb),
    ("00", "11", FixAction::InsertInv, FixAction::Fi),
    ("10", "00", FixAction::Fb, FixAction::Na),
    ("10", "10", FixAction::Na, FixAction::Na),
    ("10", "11", FixAction::UtB, FixAction::UtA),
    ("11", "00", FixAction::Fi, FixAction::Na),
    ("11", "10", FixAction::UtA, FixAction::UtB),
    ("11", "11", FixAction::Na, FixAction::Na),
];

/// Three inputs into one wide AND, inverted into the output.
pub fn five_nodes() -> AigGraph {
    let mut g = AigGraph::new();
    let a = g.add_pi("a");
    let b = g.add_pi("b");
    let c = g.add_pi("c");
    let x = g.add_and(Fanin::plain(a), Fanin::inv(b));
    g.add_edge(c, x, false);
    g.add_po("y", Fanin::inv(x));
    g
}

pub fn cone(circuit: &str, output: &str) -> AigGraph {
    let (_, g) = bench::suite().into_iter().find(|(n, _)| n == circuit).expect("suite circuit");
    extract_cone_tree(&g, output, 1000).unwrap().tree().unwrap()
}

/// Function/appearance cone pairs up to 166 nodes.
pub fn desk_pairs() -> Vec<(String, AigGraph, AigGraph)> {
    [
        (("c17", "N23"), ("rand_a", "y0")),
        (("mux8", "y"), ("cmp4", "gt")),
        (("majpar5", "par"), ("adder4", "s3")),
        (("adder8", "s6"), ("cmp6", "gt")),
    ]
    .into_iter()
    .map(|((fc, fo), (ac, ao))| (format!("{fc}:{fo}/{ac}:{ao}"), cone(fc, fo), cone(ac, ao)))
    .collect()
}

pub struct Toy {
    pub report: TrainReport,
    pub train: Vec<(String, AigGraph)>,
    pub test: Vec<(String, AigGraph)>,
}

impl Toy {
    pub fn params(&self) -> &VaeParams {
        &self.report.params
    }
}

/// Small model trained on random trees of at most 20 nodes.
pub fn toy_checkpoint() -> Toy {
    let named = bench::toy_trees(90, 20, 5);
    let (train_set, test) = split_dataset(&named, 0.7, 1);
    let graphs = |s: &[(String, AigGraph)]| s.iter().map(|x| x.1.clone()).collect::<Vec<_>>();
    let h = Hyperparams { epochs: 30, lr: 3e-3, patience: 100, delta: 0.1, ..Hyperparams::default() };
    let report = train(VaeParams::init(ModelDims::small(32), 1), &graphs(&train_set), &graphs(&test), &h).unwrap();
    Toy { report, train: train_set, test }
}
