//! Runs the twelve acceptance criteria and prints one PASS/FAIL line each.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use ipcamo::aig::to_tensors;
use ipcamo::attack::{brute_force_keys, check_equivalence, dip_attack, keyize, logic_lock, AttackBudget, AttackResult, SolveBudget};
use ipcamo::autodiff::gradcheck::check_gradients;
use ipcamo::autodiff::ParamStore;
use ipcamo::bench;
use ipcamo::camouflage::{
    aig_cell_count, camouflage_pipeline, decode_size, fix_lookup, interpolated_triple, state_from_code, threshold_filter,
    CamouflagedNetlist, Phase, PipelineConfig, Proportion, Threshold,
};
use ipcamo::cli::{cmd_camouflage, PairSpec, RunConfig, RunManifest};
use ipcamo::covert::{gate_appearance, gate_function, ApparentCell, CovertConfig, CovertGateKind, CovertInstance};
use ipcamo::eval::{correlation_report, ged_lsd_study, PairRecord};
use ipcamo::netlist::Netlist;
use ipcamo::vae::{decode, encode, loss, loss_with_gradients, reconstruction_agreement, Hyperparams, ModelDims, VaeParams};
use ipcamo::vae::{LatentCode, SampleMode};
use rayon::prelude::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn toy() -> &'static common::Toy {
    static TOY: OnceLock<common::Toy> = OnceLock::new();
    TOY.get_or_init(common::toy_checkpoint)
}

const P_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const TH_GRID: [f64; 9] = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09];

fn gradients() -> Outcome {
    let t = Instant::now();
    let p = VaeParams::init(ModelDims { hidden: 8, latent: 8, mlp_hidden: 8, max_pi: 8 }, 4);
    let g = common::five_nodes();
    let h = Hyperparams::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for mode in [SampleMode::Eval, SampleMode::Train] {
        let f = |store: &ParamStore| {
            let q = VaeParams { dims: p.dims, store: store.clone() };
            let (l, grads) = loss_with_gradients(&q, &g, &h, mode, 11).unwrap();
            (l.total, grads)
        };
        let r = check_gradients(&p.store, f, 1e-5, 1e-4, 1e-10);
        ensure!(r.passed(), "{mode:?}: {} of {} entries off, worst {:?}", r.failures, r.checked, r.worst);
        worst = worst.max(r.max_rel_err);
        checked += r.checked;
    }
    let wall = t.elapsed();
    ensure!(wall < Duration::from_secs(10), "took {wall:.2?}");
    Ok(format!("{checked} partials, max rel err {worst:.1e} above a 1e-10 absolute floor, {wall:.2?}"))
}

fn loss_zero_point() -> Outcome {
    let x = to_tensors(&common::five_nodes()).unwrap();
    let code = LatentCode { mu: vec![0.0; 8], sigma: vec![1.0; 8], z: vec![0.0; 8] };
    let l = loss(&x, &x, &code, &Hyperparams::default()).unwrap();
    ensure!(l.total.abs() < 1e-12, "total {}", l.total);
    let unit = LatentCode { mu: vec![1.0], sigma: vec![1.0], z: vec![1.0] };
    let kl = loss(&x, &x, &unit, &Hyperparams::default()).unwrap().kl;
    ensure!(kl == 0.5, "KL {kl}");
    Ok(format!("total {:.1e}, KL(mu=1, sigma=1) = {kl}", l.total))
}

fn fix_table() -> Outcome {
    let mut cells = 0;
    for (cur, tgt, functional, appearance) in common::FIX_TABLE {
        let (c, t) = (state_from_code(cur).unwrap(), state_from_code(tgt).unwrap());
        for (phase, want) in [(Phase::Functional, functional), (Phase::Appearance, appearance)] {
            let got = fix_lookup(phase, c, t);
            ensure!(got == want, "{phase:?} {cur}->{tgt}: {got:?}, expected {want:?}");
            cells += 1;
        }
    }
    ensure!(state_from_code("01") == state_from_code("00"), "01 and 00 differ");
    Ok(format!("{cells} cells"))
}

fn cfg(p: f64, th: f64, seed: u64) -> PipelineConfig {
    PipelineConfig { p: Proportion::new(p).unwrap(), th: Threshold::new(th).unwrap(), seed }
}

/// Every grid output of every desk pair, computed once.
type GridCell = (String, f64, f64, CamouflagedNetlist);

fn grid_outputs() -> &'static Vec<GridCell> {
    static GRID: OnceLock<Vec<GridCell>> = OnceLock::new();
    GRID.get_or_init(|| {
        let params = toy().params();
        let jobs: Vec<(String, ipcamo::aig::AigGraph, ipcamo::aig::AigGraph, f64, f64)> = common::desk_pairs()
            .into_iter()
            .flat_map(|(n, f, a)| P_GRID.iter().flat_map(move |&p| TH_GRID.map(|th| (n.clone(), f.clone(), a.clone(), p, th))))
            .collect();
        jobs.into_par_iter()
            .map(|(n, f, a, p, th)| {
                let c = camouflage_pipeline(&f, &a, params, &cfg(p, th, 7)).unwrap();
                (n, p, th, c)
            })
            .collect()
    })
}

fn equivalence() -> Outcome {
    let t = Instant::now();
    let pairs = common::desk_pairs();
    let max_nodes = pairs.iter().flat_map(|(_, f, a)| [f.node_count(), a.node_count()]).max().unwrap();
    ensure!(max_nodes <= 166, "cone of {max_nodes} nodes");
    let outs = grid_outputs();
    let results: Vec<(String, bool, String)> = outs
        .par_iter()
        .map(|(n, p, th, c)| {
            let f = &pairs.iter().find(|x| &x.0 == n).unwrap().1;
            let eq = check_equivalence(&Netlist::from_aig(f), &c.functional_netlist(), SolveBudget::default()).unwrap();
            let method = match &eq {
                ipcamo::attack::Equivalence::Equivalent(m) => format!("{m:?}"),
                _ => "none".into(),
            };
            (format!("{n} p={p} th={th}"), eq.holds(), method)
        })
        .collect();
    let failures: Vec<&String> = results.iter().filter(|r| !r.1).map(|r| &r.0).collect();
    ensure!(failures.is_empty(), "{} failures, first {}", failures.len(), failures[0]);
    let miter = results.iter().filter(|r| r.2 == "Miter").count();
    let wall = t.elapsed();
    ensure!(wall < Duration::from_secs(600), "took {wall:.2?}");
    Ok(format!(
        "{} outputs over {} pairs (cones up to {max_nodes} nodes), {} truth table, {miter} miter, 0 failures, {wall:.2?}",
        results.len(),
        pairs.len(),
        results.len() - miter
    ))
}

fn endpoints() -> Outcome {
    let params = toy().params();
    let mut checked = 0;
    for (n, f, a) in common::desk_pairs() {
        let size = decode_size(&f, &a);
        let (zf, za) = (encode(&f, params).unwrap().mu, encode(&a, params).unwrap().mu);
        for th in TH_GRID {
            let th = Threshold::new(th).unwrap();
            for (p, z) in [(0.0, &zf), (1.0, &za)] {
                let direct = threshold_filter(&decode(z, size, params).unwrap(), th);
                let via = interpolated_triple(&f, &a, params, Proportion::new(p).unwrap(), th).unwrap();
                ensure!(via == direct && format!("{via:?}") == format!("{direct:?}"), "{n} p={p} th={}", th.value());
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} endpoint triples bitwise identical"))
}

fn key_law() -> Outcome {
    let mut closest: Option<(usize, usize, String)> = None;
    let outs = grid_outputs();
    for (n, p, th, c) in outs {
        let d = keyize(&c.appearance_view);
        ensure!(d.key_bits() == 2 * d.candidates.len(), "{n} p={p} th={th}: {} bits, {} candidates", d.key_bits(), d.candidates.len());
        ensure!(d.netlist.key_len() == d.key_bits(), "{n}: netlist key width differs");
        let gap = d.candidates.len().abs_diff(166);
        if closest.as_ref().is_none_or(|c| gap < c.0.abs_diff(166)) {
            closest = Some((d.candidates.len(), d.key_bits(), format!("{n} p={p} th={th}")));
        }
    }
    let (cand, bits, at) = closest.unwrap();
    let mut near: Option<(usize, usize, String)> = None;
    let mut baselines = 0;
    for (name, g) in bench::suite() {
        for fraction in [0.0, 0.05, 0.1, 0.2, 0.3, 0.5] {
            let c = ipcamo::eval::random_covert_insertion(&g, ipcamo::eval::InsertionMode::Fraction(fraction), 1).unwrap();
            let d = keyize(&c.appearance_view);
            ensure!(d.key_bits() == 2 * d.candidates.len(), "{name} at {fraction}");
            baselines += 1;
            if near.as_ref().is_none_or(|n| d.candidates.len().abs_diff(166) < n.0.abs_diff(166)) {
                near = Some((d.candidates.len(), d.key_bits(), format!("{name}, {fraction} random insertion")));
            }
        }
    }
    let (ncand, nbits, nat) = near.unwrap();
    Ok(format!(
        "#K = 2 x candidates on {} netlists; largest camouflage output {cand} candidates -> #K {bits} ({at}); nearest to 166: {ncand} -> #K {nbits} ({nat})",
        outs.len() + baselines
    ))
}

fn dip_soundness() -> Outcome {
    let t = Instant::now();
    let g = bench::c17();
    let oracle = Netlist::from_aig(&g);
    let budget = AttackBudget { time: Duration::from_secs(30), conflicts: 10_000_000 };
    let mut iters = 0;
    for seed in 0..50u64 {
        let bits = 1 + seed % 10;
        let l = logic_lock(&g, 1.0 + bits as f64 / aig_cell_count(&g) as f64, seed).unwrap();
        ensure!(l.key_bits() as u64 == bits && bits <= 10, "seed {seed}: {} key bits", l.key_bits());
        let r = dip_attack(&l.netlist, &oracle, budget).unwrap();
        ensure!(r.result == AttackResult::Recovered, "seed {seed}: {}", r.result.as_str());
        let key = r.key.unwrap();
        let good = brute_force_keys(&l.netlist, &oracle).unwrap();
        ensure!(good.contains(&key), "seed {seed}: recovered key is not in the enumerated set");
        let eq = check_equivalence(&oracle, &l.netlist.with_key(&key).unwrap(), SolveBudget::default()).unwrap();
        ensure!(eq.holds(), "seed {seed}: recovered netlist differs");
        iters += r.iterations;
    }
    let wall = t.elapsed();
    ensure!(wall < Duration::from_secs(300), "took {wall:.2?}");
    Ok(format!("50/50 trials with 1-10 key bits, {iters} DIPs total, {wall:.2?}"))
}

fn attack_resistance() -> Outcome {
    let f = common::cone("c17", "N22");
    let a = common::cone("rand_a", "y0");
    let c = camouflage_pipeline(&f, &a, toy().params(), &cfg(0.5, 0.03, 7)).unwrap();
    let oracle = Netlist::from_aig(&f);
    let budget = AttackBudget { time: Duration::from_secs(60), conflicts: u64::MAX };
    let d = keyize(&c.appearance_view);
    let camo = dip_attack(&d.netlist, &oracle, budget).unwrap();
    let l = logic_lock(&f, c.metadata.area_overhead, 3).unwrap();
    let ll = dip_attack(&l.netlist, &oracle, budget).unwrap();
    let line = format!(
        "c17:N22 as rand_a:y0 (p=0.5, th=0.03, area {:.2}): camouflage #K={} {} after {} DIPs in {:.2?}; locking #K={} {} after {} DIPs in {:.2?}",
        c.metadata.area_overhead,
        d.key_bits(),
        camo.result.as_str(),
        camo.iterations,
        camo.wall,
        l.key_bits(),
        ll.result.as_str(),
        ll.iterations,
        ll.wall
    );
    ensure!(ll.result == AttackResult::Recovered, "baseline did not finish: {line}");
    let resisted = camo.result == AttackResult::BudgetExceeded || camo.iterations >= 10 * ll.iterations.max(1);
    ensure!(resisted, "{line}");
    Ok(line)
}

fn ged_lsd() -> Outcome {
    let toy = toy();
    let max_nodes = toy.train.iter().chain(&toy.test).map(|(_, g)| g.node_count()).max().unwrap();
    ensure!(toy.train.len() >= 50 && toy.test.len() >= 20 && max_nodes <= 30, "toy set {} / {} / {max_nodes}", toy.train.len(), toy.test.len());
    let t = Instant::now();
    let r = ged_lsd_study(&toy.test, toy.params(), 20, Duration::from_secs(10)).unwrap();
    let total = r.valid + r.discarded;
    ensure!(r.valid * 10 >= total * 9, "{} of {total} pairs valid", r.valid);
    let pr = r.pearson_r.ok_or("undefined r")?;
    ensure!(pr > 0.0, "r = {pr:.4}");
    let linear: Vec<PairRecord> =
        (0..100).map(|k| PairRecord { id1: k.to_string(), id2: "x".into(), lsd: 0.25 * k as f64 + 1.0, ged: Some(2 * k + 1) }).collect();
    let lr = correlation_report(linear, 20).pearson_r.unwrap();
    ensure!((lr - 1.0).abs() <= 1e-9, "linear r = {lr}");
    Ok(format!(
        "{} train / {} test trees (<= {max_nodes} nodes), {}/{total} pairs valid, r = {pr:.4}, bin-mean r = {:.4}, linear r - 1 = {:.1e}, {:.2?}",
        toy.train.len(),
        toy.test.len(),
        r.valid,
        r.bin_mean_r.unwrap_or(f64::NAN),
        lr - 1.0,
        t.elapsed()
    ))
}

fn reconstruction() -> Outcome {
    let toy = toy();
    let th = Threshold::new(0.5).unwrap();
    let agree =
        toy.train.iter().map(|(_, g)| reconstruction_agreement(g, toy.params(), th).unwrap()).sum::<f64>() / toy.train.len() as f64;
    let h = &toy.report.history;
    ensure!(h.len() >= 10, "only {} epochs", h.len());
    ensure!(agree > 0.9, "agreement {agree:.4}");
    ensure!(h[9].train_loss < h[0].train_loss, "epoch 10 loss {} vs epoch 1 {}", h[9].train_loss, h[0].train_loss);
    Ok(format!("agreement {agree:.4}; train loss {:.4} at epoch 1, {:.4} at epoch 10", h[0].train_loss, h[9].train_loss))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("checkpoint.json");
    fs::write(&ck, toy().params().to_checkpoint().unwrap()).unwrap();
    let run = |out: &str| {
        let cfg = RunConfig {
            out: dir.path().join(out),
            checkpoint: Some(ck.clone()),
            pairs: vec![PairSpec::parse("c17:N23,rand_a:y0").unwrap(), PairSpec::parse("mux8:y,cmp4:gt").unwrap()],
            seed: 11,
            ..RunConfig::default()
        };
        cmd_camouflage(&cfg).unwrap();
        let m: RunManifest = serde_json::from_str(&fs::read_to_string(cfg.out.join("manifest.json")).unwrap()).unwrap();
        (cfg.out, m)
    };
    let (a, ma) = run("a");
    let (b, mb) = run("b");
    let files: Vec<&String> = ma.artifacts.keys().filter(|k| k.contains("/p")).collect();
    ensure!(files.len() == 90, "{} netlist files", files.len());
    for f in &files {
        ensure!(fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    ensure!(ma.artifacts == mb.artifacts, "checksums differ");
    Ok(format!("{} netlist files byte-identical across two runs", files.len()))
}

fn covert_semantics() -> Outcome {
    let mut rows = 0;
    for kind in CovertGateKind::ALL {
        for config in [CovertConfig::Normal, CovertConfig::Const1, CovertConfig::Const0] {
            let legal = kind.legal_configs().contains(&config);
            for dummies in 0..=2usize {
                let inst = CovertInstance {
                    kind,
                    config,
                    real_input: Some(0),
                    dummy_inputs: (1..=dummies).collect(),
                    output: dummies + 1,
                };
                let nets = dummies + 1;
                for x in 0..1usize << nets {
                    let bits: Vec<bool> = (0..nets).map(|k| (x >> k) & 1 == 1).collect();
                    let got = gate_function(&inst, &bits);
                    if !legal {
                        ensure!(got.is_err(), "{kind:?} {config:?} accepted");
                        continue;
                    }
                    let want = match (kind, config) {
                        (_, CovertConfig::Const1) => true,
                        (_, CovertConfig::Const0) => false,
                        (CovertGateKind::UtA, _) => bits[0],
                        (CovertGateKind::UtB, _) => !bits[0],
                        _ => unreachable!(),
                    };
                    ensure!(got == Ok(want), "{kind:?} {config:?} on {bits:?}: {got:?}");
                    rows += 1;
                }
            }
        }
    }
    let looks = CovertGateKind::ALL.map(gate_appearance);
    ensure!(
        looks == [ApparentCell::Inverter, ApparentCell::Buffer, ApparentCell::Nand, ApparentCell::Nand],
        "appearances {looks:?}"
    );
    Ok(format!("{rows} truth-table rows over 4 kinds, 3 configs, 1-3 nets; illegal configs rejected"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("gradient correctness", gradients),
        ("loss zero-point", loss_zero_point),
        ("fix-table conformance", fix_table),
        ("formal equivalence", equivalence),
        ("interpolation endpoints", endpoints),
        ("key-count law", key_law),
        ("DIP attack soundness", dip_soundness),
        ("attack-resistance trend", attack_resistance),
        ("GED/LSD analytics", ged_lsd),
        ("reconstruction sanity", reconstruction),
        ("determinism", determinism),
        ("covert-gate semantics", covert_semantics),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name}: {detail} [{:.2?}]", k + 1, t.elapsed());
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
