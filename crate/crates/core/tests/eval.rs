use std::time::Duration;

use ipcamo::attack::check_equivalence;
use ipcamo::attack::sat::SolveBudget;
use ipcamo::bench;
use ipcamo::camouflage::aig_cell_count;
use ipcamo::eval::{
    bins_csv, correlation_report, export_gnn_dataset, fraction_count, ged_lsd_study, import_gnn_dataset, pairs_csv, pearson_r,
    random_covert_insertion, strip_hidden, summary_json, EvalError, InsertionMode, PairRecord,
};
use ipcamo::netlist::Netlist;
use ipcamo::vae::{ModelDims, VaeParams};
use proptest::prelude::*;

fn pair(k: usize, lsd: f64, ged: Option<u32>) -> PairRecord {
    PairRecord { id1: format!("g{k}"), id2: format!("h{k}"), lsd, ged }
}

#[test]
fn perfectly_linear_pairs_have_unit_r() {
    let pairs: Vec<PairRecord> = (0..200).map(|k| pair(k, 0.5 + 0.13 * k as f64, Some(3 * k as u32 + 2))).collect();
    let r = correlation_report(pairs, 20);
    assert!((r.pearson_r.unwrap() - 1.0).abs() < 1e-9);
    assert!(r.bin_mean_r.unwrap() > 0.99);
    assert_eq!((r.valid, r.discarded), (200, 0));
    assert!(r.bins.iter().all(|b| b.count == 10));
}

proptest! {
    #[test]
    fn pearson_is_bounded_symmetric_and_affine_invariant(
        pts in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 3..40),
        scale in 0.01f64..100.0, shift in -50f64..50.0,
    ) {
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
        if let Ok(r) = pearson_r(&xs, &ys) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert!((pearson_r(&ys, &xs).unwrap() - r).abs() < 1e-9);
            let moved: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            prop_assert!((pearson_r(&moved, &ys).unwrap() - r).abs() < 1e-6);
        }
    }

    #[test]
    fn bins_cover_every_valid_pair(lsd in prop::collection::vec(0f64..10.0, 1..80), bins in 1usize..25) {
        let pairs: Vec<PairRecord> = lsd.iter().enumerate().map(|(k, &x)| pair(k, x, (k % 5 != 0).then_some(k as u32))).collect();
        let r = correlation_report(pairs, bins);
        prop_assert_eq!(r.valid + r.discarded, lsd.len());
        prop_assert_eq!(r.bins.iter().map(|b| b.count).sum::<usize>(), r.valid);
        for b in &r.bins {
            prop_assert_eq!(b.mean.is_some(), b.count > 0);
            prop_assert!(b.std.is_none_or(|s| s >= 0.0));
        }
    }
}

#[test]
fn study_covers_all_unordered_pairs() {
    let params = VaeParams::init(ModelDims::small(8), 2);
    let graphs = bench::toy_trees(8, 12, 3);
    let r = ged_lsd_study(&graphs, &params, 20, Duration::from_secs(5)).unwrap();
    assert_eq!(r.pairs.len(), 28);
    assert_eq!(r.valid + r.discarded, 28);
    assert!(r.pairs.iter().all(|p| p.lsd >= 0.0));
    assert_eq!(pairs_csv(&r).unwrap().lines().count(), 29);
    let bins = bins_csv(&r).unwrap();
    assert!(bins.starts_with("bin,interval,mean,std,count"));
    assert_eq!(bins.lines().count(), 21);
    let summary: serde_json::Value = serde_json::from_str(&summary_json(&r)).unwrap();
    assert_eq!(summary["valid"], r.valid);
    assert!(matches!(ged_lsd_study(&graphs[..1], &params, 20, Duration::from_secs(1)), Err(EvalError::TooFewGraphs(1))));
}

#[test]
fn gnn_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let views: Vec<(String, _)> = bench::suite()
        .into_iter()
        .take(4)
        .enumerate()
        .map(|(k, (name, g))| {
            let c = random_covert_insertion(&g, InsertionMode::Fraction(0.2), k as u64).unwrap();
            (name, c.appearance_view)
        })
        .collect();
    export_gnn_dataset(&views, dir.path()).unwrap();
    for f in ["nodes.csv", "edges.csv", "labels.csv", "README.md"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let back = import_gnn_dataset(dir.path()).unwrap();
    assert_eq!(back.len(), views.len());
    for ((l1, v1), (l2, v2)) in views.iter().zip(&back) {
        assert_eq!(l1, l2);
        assert_eq!(&strip_hidden(v1), v2);
    }
    let nodes = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    assert!(nodes.lines().nth(1).unwrap().ends_with(",c17"));
}

#[test]
fn gnn_export_rejects_unlabeled_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let g = bench::c17();
    let av = random_covert_insertion(&g, InsertionMode::Fraction(0.0), 0).unwrap().appearance_view;
    let err = export_gnn_dataset(&[("c17".into(), av.clone()), ("  ".into(), av)], dir.path());
    assert!(matches!(err, Err(EvalError::Unlabeled(1))));
}

#[test]
fn random_fraction_inserts_the_rounded_count() {
    for (k, (name, g)) in bench::suite().into_iter().enumerate() {
        let cells = aig_cell_count(&g);
        let c = random_covert_insertion(&g, InsertionMode::Fraction(0.05), k as u64).unwrap();
        assert_eq!(c.placements.len(), fraction_count(cells, 0.05), "{name}");
        assert!(check_equivalence(&Netlist::from_aig(&g), &c.functional_netlist(), SolveBudget::default()).unwrap().holds());
        let again = random_covert_insertion(&g, InsertionMode::Fraction(0.05), k as u64).unwrap();
        assert_eq!(again, c);
    }
}

#[test]
fn zero_fraction_leaves_the_circuit_unmodified() {
    let g = bench::ripple_adder(4);
    let c = random_covert_insertion(&g, InsertionMode::Fraction(0.0), 3).unwrap();
    assert!(c.placements.is_empty());
    assert_eq!(c.metadata.area_overhead, 1.0);
    assert_eq!(c.appearance_view.cell_count(), aig_cell_count(&g));
    assert!(matches!(random_covert_insertion(&g, InsertionMode::Fraction(1.5), 0), Err(EvalError::InvalidTarget(_))));
}

#[test]
fn area_matched_insertion_reaches_the_ratio() {
    for (name, g) in bench::suite().into_iter().take(6) {
        for ratio in [1.0, 1.3, 2.0] {
            let c = random_covert_insertion(&g, InsertionMode::MatchArea(ratio), 5).unwrap();
            assert!(c.metadata.area_overhead >= ratio, "{name} {ratio}");
            assert!(check_equivalence(&Netlist::from_aig(&g), &c.functional_netlist(), SolveBudget::default()).unwrap().holds());
        }
    }
}
