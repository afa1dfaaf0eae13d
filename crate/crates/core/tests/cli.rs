use std::fs;
use std::path::Path;
use std::process::Command as Process;

use ipcamo::aig::json;
use ipcamo::attack::AttackRow;
use ipcamo::bench;
use ipcamo::cli::{
    cmd_attack, cmd_camouflage, cmd_dataset, cmd_train, cmd_verify, run, CliError, Command, PairSpec, RunConfig, RunManifest,
};
use ipcamo::dataset::DatasetManifest;

fn base(out: &Path) -> RunConfig {
    RunConfig { out: out.to_path_buf(), max_nodes: 40, width: Some(8), seed: 5, ..RunConfig::default() }
}

fn manifest(dir: &Path) -> RunManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn config_parses_and_validates() {
    let c = RunConfig::from_toml("seed = 4\np = [0.5]\nth = [0.05]\n[hyper]\nepochs = 3\n").unwrap();
    assert_eq!((c.seed, c.p.clone(), c.hyper.epochs, c.hyper.lr), (4, vec![0.5], 3, 1e-4));
    c.validate().unwrap();
    assert!(matches!(RunConfig::from_toml("sede = 4"), Err(CliError::Config(_))));
    for bad in ["p = [1.5]", "th = [0.0]", "th = [1.0]", "train_frac = 1.0", "checkpoint = \"/does/not/exist\""] {
        let c = RunConfig::from_toml(bad).unwrap();
        let err = c.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2, "{bad}");
    }
    assert_eq!(RunConfig::default().p.len() * RunConfig::default().th.len(), 45);
}

#[test]
fn dataset_split_is_seeded_and_totals_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let summary = cmd_dataset(&base(&a)).unwrap();
    cmd_dataset(&base(&b)).unwrap();
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    let m: DatasetManifest = serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(summary["trees"], m.trees.len());
    assert_eq!(summary["nodes"], m.trees.iter().map(|t| t.nodes).sum::<usize>());
    assert_eq!(summary["train"].as_u64().unwrap() + summary["test"].as_u64().unwrap(), m.trees.len() as u64);
    assert!(m.trees.iter().all(|t| t.nodes <= 40));
}

#[test]
fn benchmark_directory_is_read() {
    let dir = tempfile::tempdir().unwrap();
    let benches = dir.path().join("bench");
    fs::create_dir(&benches).unwrap();
    for (name, g) in bench::suite().into_iter().take(3) {
        fs::write(benches.join(format!("{name}.aag")), ipcamo::aig::aiger::write_aiger(&g).unwrap()).unwrap();
    }
    let cfg = RunConfig { bench_dir: Some(benches), ..base(&dir.path().join("ds")) };
    let summary = run(Command::Dataset, &cfg).unwrap();
    assert!(summary["trees"].as_u64().unwrap() > 0);
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let cfg = RunConfig { bench_dir: Some(empty), ..base(&dir.path().join("none")) };
    assert_eq!(run(Command::Dataset, &cfg).unwrap_err().exit_code(), 2);
}

#[test]
fn pipeline_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s);
    cmd_dataset(&base(&p("ds"))).unwrap();
    let mut cfg = base(&p("train"));
    cfg.dataset = Some(p("ds"));
    cfg.hyper.epochs = 2;
    let t = cmd_train(&cfg).unwrap();
    assert_eq!(t["epochs"], 2);
    assert!(fs::read_to_string(p("train/history.csv")).unwrap().starts_with("epoch,"));

    let mut cfg = base(&p("cam"));
    cfg.checkpoint = Some(p("train/checkpoint.json"));
    cfg.pairs = vec![PairSpec::parse("c17:N23,half_adder:sum").unwrap(), PairSpec::parse("half_adder:sum,c17:N22").unwrap()];
    cfg.p = vec![0.1, 0.5];
    cfg.th = vec![0.03, 0.05, 0.07];
    assert_eq!(cmd_camouflage(&cfg).unwrap()["netlists"], 12);
    let m = manifest(&p("cam"));
    assert_eq!(m.command, "camouflage");
    assert_eq!(m.artifacts.keys().filter(|k| k.contains("/p0.")).count(), 12);

    let mut cfg = base(&p("verify"));
    cfg.netlists = Some(p("cam"));
    assert_eq!(cmd_verify(&cfg).unwrap()["failed"], 0);

    let mut cfg = base(&p("attack"));
    cfg.netlists = Some(p("cam"));
    cfg.budget_secs = 30.0;
    cfg.dimacs = true;
    assert_eq!(cmd_attack(&cfg).unwrap()["attacks"], 24);
    let rows: Vec<AttackRow> =
        csv::Reader::from_path(p("attack/attack.csv")).unwrap().deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 24);
    assert!(rows.iter().filter(|r| !r.pair.starts_with("LL:")).all(|r| r.key_bits % 2 == 0));
    assert!(p("attack/c17-N23__half_adder-sum/p0.10_th0.03.cnf").exists());

    let mut cfg = base(&p("eval"));
    cfg.netlists = Some(p("cam"));
    cfg.checkpoint = Some(p("train/checkpoint.json"));
    cfg.dataset = Some(p("ds"));
    let e = run(Command::Eval, &cfg).unwrap();
    assert!(e["study"]["valid"].as_u64().unwrap() > 0);
    assert!(p("eval/gnn/nodes.csv").exists());
}

fn camouflage_fixture(dir: &Path) -> RunConfig {
    let ck = dir.join("ck.json");
    let params = ipcamo::vae::VaeParams::init(ipcamo::vae::ModelDims::small(8), 1);
    fs::write(&ck, params.to_checkpoint().unwrap()).unwrap();
    let mut cfg = base(&dir.join("cam"));
    cfg.checkpoint = Some(ck);
    cfg.pairs = vec![PairSpec::parse("c17:N22,rand_a:y0").unwrap()];
    cfg
}

#[test]
fn camouflage_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = camouflage_fixture(dir.path());
    let again = RunConfig { out: dir.path().join("again"), ..cfg.clone() };
    cmd_camouflage(&cfg).unwrap();
    cmd_camouflage(&again).unwrap();
    let (a, b) = (manifest(&cfg.out), manifest(&again.out));
    assert_eq!(a.artifacts.len(), 2 + 45);
    assert_eq!(a.artifacts, b.artifacts);
    for f in a.artifacts.keys() {
        assert_eq!(fs::read(cfg.out.join(f)).unwrap(), fs::read(again.out.join(f)).unwrap(), "{f}");
    }
}

fn ipcamo(args: &[&str]) -> (i32, String) {
    let out = Process::new(env!("CARGO_BIN_EXE_ipcamo")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = camouflage_fixture(dir.path());
    let cam = cfg.out.to_str().unwrap().to_string();
    let ck = cfg.checkpoint.as_ref().unwrap().to_str().unwrap().to_string();
    let cfg_file = dir.path().join("run.toml");
    fs::write(&cfg_file, format!("checkpoint = \"{ck}\"\np = [0.5]\nth = [0.05]\n[[pairs]]\nfunction = \"c17:N22\"\nappearance = \"rand_a:y0\"\n"))
        .unwrap();
    let (code, _) = ipcamo(&["camouflage", "--config", cfg_file.to_str().unwrap(), "--out", &cam]);
    assert_eq!(code, 0);
    assert_eq!(manifest(&cfg.out).artifacts.len(), 3);

    let ver = dir.path().join("ver");
    assert_eq!(ipcamo(&["verify", "--netlists", &cam, "--out", ver.to_str().unwrap()]).0, 0);

    let (code, stdout) = ipcamo(&["attack", "--netlists", &cam, "--budget", "0.000001", "--out", dir.path().join("att").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.contains("budget-exceeded"), "{stdout}");

    let function = cfg.out.join("c17-N22__rand_a-y0/function.json");
    fs::write(&function, json::to_json(&inverted_c17_cone())).unwrap();
    assert_eq!(ipcamo(&["verify", "--netlists", &cam, "--out", ver.to_str().unwrap()]).0, 1);

    assert_eq!(ipcamo(&["camouflage", "--config", cfg_file.to_str().unwrap(), "--th", "1.2"]).0, 2);
    assert_eq!(ipcamo(&["verify", "--out", ver.to_str().unwrap()]).0, 2);
    assert_eq!(ipcamo(&["frobnicate"]).0, 2);
}

/// A cone with the same input names as c17:N22 but a different function.
fn inverted_c17_cone() -> ipcamo::aig::AigGraph {
    let g = ipcamo::aig::cone::extract_cone_tree(&bench::c17(), "N22", 100).unwrap().tree().unwrap();
    let mut h = g.clone();
    let e = h.edges.iter_mut().find(|e| e.dst == h.nodes.len() - 1).unwrap();
    e.inverted = !e.inverted;
    h
}
