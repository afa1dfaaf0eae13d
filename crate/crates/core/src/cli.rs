//! Batch subcommands driven by a TOML run configuration with flag overrides.
//!
//! Exit codes: 0 when the command ran and reported, 1 on a contract
//! violation or runtime failure, 2 on a usage or configuration error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::aig::cone::extract_cone_tree;
use crate::aig::{json, AigGraph};
use crate::attack::{
    attack_csv, check_equivalence, export_dimacs, keyize, logic_lock, AttackBudget, AttackResult, AttackRow, Equivalence,
    SolveBudget,
};
use crate::bench;
use crate::camouflage::{camouflage_pipeline, CamouflagedNetlist, PipelineConfig, Proportion, Threshold};
use crate::dataset::{build_dataset, load_benchmarks, Dataset, Split};
use crate::eval::{
    bins_csv, describe, export_gnn_dataset, ged_lsd_study, pairs_csv, random_covert_insertion, summary_json, EvalError,
    InsertionMode,
};
use crate::netlist::Netlist;
use crate::vae::{train, Hyperparams, ModelDims, VaeParams};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{failed} of {total} netlists are not equivalent to their function")]
    NotEquivalent { failed: usize, total: usize },
    #[error("{0:#}")]
    Failed(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::NotEquivalent { .. } | CliError::Failed(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A function cone and an appearance cone, each written `circuit:output`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub function: String,
    pub appearance: String,
}

impl PairSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let (f, a) = s.split_once(',').ok_or_else(|| config_err(format!("pair `{s}` is not `circuit:output,circuit:output`")))?;
        Ok(PairSpec { function: f.trim().into(), appearance: a.trim().into() })
    }

    pub fn slug(&self) -> String {
        let clean = |s: &str| s.replace(':', "-").replace(|c: char| !c.is_ascii_alphanumeric() && c != '-' && c != '_', "_");
        format!("{}__{}", clean(&self.function), clean(&self.appearance))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Directory of `.aag` files; the built-in circuit suite when absent.
    pub bench_dir: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    /// Output directory of a `camouflage` run.
    pub netlists: Option<PathBuf>,
    pub max_nodes: usize,
    pub train_frac: f64,
    /// Hidden, latent and MLP width; full-size model when absent.
    pub width: Option<usize>,
    pub hyper: Hyperparams,
    pub p: Vec<f64>,
    pub th: Vec<f64>,
    pub pairs: Vec<PairSpec>,
    pub budget_secs: f64,
    pub conflicts: u64,
    pub ll_baseline: bool,
    pub dimacs: bool,
    pub ged_timeout_secs: f64,
    pub bins: usize,
    pub random_fraction: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            out: PathBuf::from("run"),
            bench_dir: None,
            dataset: None,
            checkpoint: None,
            netlists: None,
            max_nodes: 166,
            train_frac: 0.8,
            width: None,
            hyper: Hyperparams::default(),
            p: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            th: (1..=9).map(|k| k as f64 / 100.0).collect(),
            pairs: Vec::new(),
            budget_secs: 60.0,
            conflicts: 50_000_000,
            ll_baseline: true,
            dimacs: false,
            ged_timeout_secs: 10.0,
            bins: 20,
            random_fraction: 0.05,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks value ranges and that every referenced input path exists.
    pub fn validate(&self) -> Result<()> {
        for &p in &self.p {
            Proportion::new(p).map_err(|e| config_err(e.to_string()))?;
        }
        for &th in &self.th {
            Threshold::new(th).map_err(|e| config_err(e.to_string()))?;
        }
        if !(self.train_frac > 0.0 && self.train_frac < 1.0) {
            return Err(config_err(format!("train_frac {} is outside (0, 1)", self.train_frac)));
        }
        if !(0.0..=1.0).contains(&self.random_fraction) {
            return Err(config_err(format!("random_fraction {} is outside [0, 1]", self.random_fraction)));
        }
        if !(self.budget_secs > 0.0 && self.ged_timeout_secs > 0.0) {
            return Err(config_err("budgets must be positive"));
        }
        if self.width == Some(0) || self.bins == 0 {
            return Err(config_err("width and bins must be positive"));
        }
        for (name, path) in [
            ("bench_dir", &self.bench_dir),
            ("dataset", &self.dataset),
            ("checkpoint", &self.checkpoint),
            ("netlists", &self.netlists),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    return Err(config_err(format!("{name} {} does not exist", p.display())));
                }
            }
        }
        Ok(())
    }

    fn dims(&self) -> ModelDims {
        self.width.map_or_else(ModelDims::default, ModelDims::small)
    }

    fn budget(&self) -> AttackBudget {
        AttackBudget { time: Duration::from_secs_f64(self.budget_secs), conflicts: self.conflicts }
    }

    fn require<'a>(&self, path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        path.as_deref().ok_or_else(|| config_err(format!("this command needs --{what}")))
    }
}

/// Flags shared by all subcommands; each one overrides its config key.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub bench_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
    /// Output directory of a camouflage run.
    #[arg(long, global = true)]
    pub netlists: Option<PathBuf>,
    /// Interpolation proportions, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Filter thresholds, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub th: Vec<f64>,
    /// `circuit:output,circuit:output` function/appearance pair; repeatable.
    #[arg(long = "pair", global = true)]
    pub pairs: Vec<String>,
    /// Attack time budget in seconds.
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    #[arg(long, global = true)]
    pub width: Option<usize>,
    #[arg(long, global = true)]
    pub epochs: Option<usize>,
    #[arg(long, global = true)]
    pub max_nodes: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut c: RunConfig) -> Result<RunConfig> {
        macro_rules! set {
            ($($field:ident => $target:expr),*) => {$(
                if let Some(v) = self.$field.clone() {
                    $target = v.into();
                }
            )*};
        }
        set!(seed => c.seed, out => c.out, width => c.width, epochs => c.hyper.epochs, max_nodes => c.max_nodes, budget => c.budget_secs);
        set!(bench_dir => c.bench_dir, dataset => c.dataset, checkpoint => c.checkpoint, netlists => c.netlists);
        if !self.p.is_empty() {
            c.p = self.p.clone();
        }
        if !self.th.is_empty() {
            c.th = self.th.clone();
        }
        if !self.pairs.is_empty() {
            c.pairs = self.pairs.iter().map(|s| PairSpec::parse(s)).collect::<Result<_>>()?;
        }
        Ok(c)
    }
}

#[derive(Parser, Debug)]
#[command(name = "ipcamo", version, about = "AIG VAE camouflage, verification and attack toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Extract cone trees from the benchmarks and split them.
    Dataset,
    /// Train the VAE on a dataset.
    Train,
    /// Sweep the p x th grid over every configured pair.
    Camouflage,
    /// Check every camouflaged netlist against its function.
    Verify,
    /// Run the DIP attack on camouflaged netlists and the locking baseline.
    Attack,
    /// Edit-distance study, random-insertion baselines and GNN export.
    Eval,
}

/// Written as `manifest.json` by every command except `dataset`, whose
/// manifest is the dataset manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: RunConfig,
    /// Relative path to SHA-256 of each artifact.
    pub artifacts: BTreeMap<String, String>,
    pub summary: serde_json::Value,
}

/// One grid cell of a camouflage run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CamouflageEntry {
    pub file: String,
    pub pair: PairSpec,
    pub function_file: String,
    pub p: f64,
    pub th: f64,
    pub area_overhead: f64,
    pub placements: usize,
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Writer {
    root: PathBuf,
    artifacts: BTreeMap<String, String>,
}

impl Writer {
    fn new(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Writer { root: root.to_path_buf(), artifacts: BTreeMap::new() })
    }

    fn write(&mut self, rel: &str, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(&path, bytes.as_ref()).with_context(|| format!("writing {}", path.display()))?;
        self.artifacts.insert(rel.to_string(), sha256(bytes.as_ref()));
        Ok(())
    }

    /// Records a file written by someone else.
    fn record(&mut self, rel: &str) -> anyhow::Result<()> {
        let bytes = fs::read(self.root.join(rel))?;
        self.artifacts.insert(rel.to_string(), sha256(&bytes));
        Ok(())
    }

    fn finish(self, command: Command, cfg: &RunConfig, summary: serde_json::Value) -> anyhow::Result<RunManifest> {
        let m = RunManifest { command: format!("{command:?}").to_lowercase(), config: cfg.clone(), artifacts: self.artifacts, summary };
        fs::write(self.root.join("manifest.json"), serde_json::to_string_pretty(&m)?)?;
        Ok(m)
    }
}

fn circuits(cfg: &RunConfig) -> Result<Vec<(String, AigGraph)>> {
    match &cfg.bench_dir {
        Some(dir) => Ok(load_benchmarks(dir).map_err(|e| config_err(e.to_string()))?),
        None => Ok(bench::suite()),
    }
}

fn resolve_cone(circuits: &[(String, AigGraph)], spec: &str) -> Result<AigGraph> {
    let (c, o) = spec.split_once(':').ok_or_else(|| config_err(format!("`{spec}` is not `circuit:output`")))?;
    let (_, g) = circuits.iter().find(|(n, _)| n == c).ok_or_else(|| config_err(format!("unknown circuit `{c}`")))?;
    let outcome = extract_cone_tree(g, o, usize::MAX).map_err(|e| config_err(format!("{spec}: {e}")))?;
    Ok(outcome.tree().expect("no size limit"))
}

fn load_checkpoint(cfg: &RunConfig) -> Result<VaeParams> {
    let path = cfg.require(&cfg.checkpoint, "checkpoint")?;
    let text = fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    VaeParams::from_checkpoint(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let dir = cfg.require(&cfg.dataset, "dataset")?;
    Dataset::load(dir).map_err(|e| config_err(format!("{}: {e}", dir.display())))
}

fn load_entries(cfg: &RunConfig) -> Result<(PathBuf, Vec<CamouflageEntry>)> {
    let dir = cfg.require(&cfg.netlists, "netlists")?;
    let m: RunManifest = fs::read_to_string(dir.join("manifest.json"))
        .map_err(|e| config_err(format!("{}: {e}", dir.display())))
        .and_then(|t| serde_json::from_str(&t).map_err(|e| config_err(e.to_string())))?;
    if m.command != "camouflage" {
        return Err(config_err(format!("{} holds a `{}` run, not a camouflage run", dir.display(), m.command)));
    }
    let entries = serde_json::from_value(m.summary["entries"].clone()).map_err(|e| config_err(e.to_string()))?;
    Ok((dir.to_path_buf(), entries))
}

fn read_entry(dir: &Path, e: &CamouflageEntry) -> anyhow::Result<(CamouflagedNetlist, AigGraph)> {
    let c = CamouflagedNetlist::from_json(&fs::read_to_string(dir.join(&e.file))?)?;
    let f = json::from_json(&fs::read_to_string(dir.join(&e.function_file))?)?;
    Ok((c, f))
}

pub fn cmd_dataset(cfg: &RunConfig) -> Result<serde_json::Value> {
    let circuits = circuits(cfg)?;
    let d = build_dataset(&circuits, cfg.max_nodes, cfg.train_frac, cfg.seed).context("building dataset")?;
    d.save(&cfg.out).context("saving dataset")?;
    Ok(serde_json::json!({
        "trees": d.trees.len(),
        "train": d.manifest.ids(Split::Train).len(),
        "test": d.manifest.ids(Split::Test).len(),
        "rejected": d.manifest.rejected.len(),
        "nodes": d.manifest.trees.iter().map(|t| t.nodes).sum::<usize>(),
    }))
}

pub fn cmd_train(cfg: &RunConfig) -> Result<serde_json::Value> {
    let d = load_dataset(cfg)?;
    let h = Hyperparams { seed: cfg.seed, ..cfg.hyper.clone() };
    let report = train(VaeParams::init(cfg.dims(), cfg.seed), &d.split(Split::Train), &d.split(Split::Test), &h)
        .context("training")?;
    let mut w = Writer::new(&cfg.out)?;
    w.write("checkpoint.json", report.params.to_checkpoint().context("checkpoint")?)?;
    w.write("history.csv", report.history_csv())?;
    let last = report.history.last().expect("at least one epoch");
    let summary = serde_json::json!({
        "epochs": report.history.len(),
        "best_epoch": report.best_epoch,
        "stopped_early": report.stopped_early,
        "final_train_loss": last.train_loss,
        "final_val_loss": last.val_loss,
        "checksum": report.params.checksum(),
    });
    w.finish(Command::Train, cfg, summary.clone())?;
    Ok(summary)
}

pub fn cmd_camouflage(cfg: &RunConfig) -> Result<serde_json::Value> {
    if cfg.pairs.is_empty() {
        return Err(config_err("no function/appearance pairs configured"));
    }
    let params = load_checkpoint(cfg)?;
    let circuits = circuits(cfg)?;
    let mut w = Writer::new(&cfg.out)?;
    let mut entries = Vec::new();
    for pair in &cfg.pairs {
        let f = resolve_cone(&circuits, &pair.function)?;
        let a = resolve_cone(&circuits, &pair.appearance)?;
        let slug = pair.slug();
        w.write(&format!("{slug}/function.json"), json::to_json(&f))?;
        w.write(&format!("{slug}/appearance.json"), json::to_json(&a))?;
        let grid: Vec<(f64, f64)> = cfg.p.iter().flat_map(|&p| cfg.th.iter().map(move |&th| (p, th))).collect();
        let outs = grid
            .par_iter()
            .map(|&(p, th)| {
                let pc = PipelineConfig { p: Proportion::new(p)?, th: Threshold::new(th)?, seed: cfg.seed };
                camouflage_pipeline(&f, &a, &params, &pc)
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .with_context(|| format!("camouflaging {}", pair.slug()))?;
        for ((p, th), c) in grid.into_iter().zip(outs) {
            let file = format!("{slug}/p{p:.2}_th{th:.2}.json");
            w.write(&file, c.to_json())?;
            entries.push(CamouflageEntry {
                file,
                pair: pair.clone(),
                function_file: format!("{slug}/function.json"),
                p,
                th,
                area_overhead: c.metadata.area_overhead,
                placements: c.placements.len(),
            });
        }
    }
    let summary = serde_json::json!({ "model_checksum": params.checksum(), "entries": entries });
    w.finish(Command::Camouflage, cfg, summary)?;
    Ok(serde_json::json!({ "netlists": entries.len() }))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<serde_json::Value> {
    let (dir, entries) = load_entries(cfg)?;
    let results = entries
        .par_iter()
        .map(|e| {
            let (c, f) = read_entry(&dir, e)?;
            let eq = check_equivalence(&Netlist::from_aig(&f), &c.functional_netlist(), SolveBudget::default())?;
            Ok((e.file.clone(), eq))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut csv = csv::Writer::from_writer(Vec::new());
    csv.write_record(["file", "result", "detail"]).context("csv")?;
    let mut failed = 0;
    for (file, eq) in &results {
        let (result, detail) = match eq {
            Equivalence::Equivalent(m) => ("equivalent", format!("{m:?}").to_lowercase()),
            Equivalence::Counterexample { output, .. } => ("counterexample", output.clone()),
            Equivalence::Undecided => ("undecided", String::new()),
        };
        failed += usize::from(!eq.holds());
        csv.write_record([file.as_str(), result, &detail]).context("csv")?;
    }
    let mut w = Writer::new(&cfg.out)?;
    w.write("verify.csv", csv.into_inner().context("csv")?)?;
    let summary = serde_json::json!({ "checked": results.len(), "failed": failed });
    w.finish(Command::Verify, cfg, summary.clone())?;
    if failed > 0 {
        return Err(CliError::NotEquivalent { failed, total: results.len() });
    }
    Ok(summary)
}

pub fn cmd_attack(cfg: &RunConfig) -> Result<serde_json::Value> {
    let (dir, entries) = load_entries(cfg)?;
    let mut w = Writer::new(&cfg.out)?;
    let mut rows = Vec::new();
    for e in &entries {
        let (c, f) = read_entry(&dir, e)?;
        let oracle = Netlist::from_aig(&f);
        let keyed = keyize(&c.appearance_view);
        let stem = e.file.trim_end_matches(".json");
        if cfg.dimacs {
            w.write(&format!("{stem}.cnf"), export_dimacs(&keyed.netlist))?;
        }
        let r = crate::attack::dip_attack(&keyed.netlist, &oracle, cfg.budget()).context("attack")?;
        rows.push(AttackRow::new(stem, Some(e.th), &r));
        if cfg.ll_baseline {
            let l = logic_lock(&f, e.area_overhead, cfg.seed).context("locking baseline")?;
            let r = crate::attack::dip_attack(&l.netlist, &oracle, cfg.budget()).context("attack")?;
            rows.push(AttackRow::new(format!("LL:{stem}"), Some(e.th), &r));
        }
    }
    for r in &rows {
        println!("{} K={} {} iterations={} {:.3}s", r.pair, r.key_bits, r.result, r.iterations, r.wall_s);
    }
    w.write("attack.csv", attack_csv(&rows))?;
    let exceeded = rows.iter().filter(|r| r.result == AttackResult::BudgetExceeded.as_str()).count();
    let summary = serde_json::json!({ "attacks": rows.len(), "budget_exceeded": exceeded });
    w.finish(Command::Attack, cfg, summary.clone())?;
    Ok(summary)
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<serde_json::Value> {
    let mut w = Writer::new(&cfg.out)?;
    let mut summary = serde_json::Map::new();
    if cfg.checkpoint.is_some() || cfg.dataset.is_some() {
        let params = load_checkpoint(cfg)?;
        let d = load_dataset(cfg)?;
        let test: Vec<(String, AigGraph)> =
            d.manifest.ids(Split::Test).into_iter().map(|id| (id.to_string(), d.get(id).expect("listed").clone())).collect();
        let r = ged_lsd_study(&test, &params, cfg.bins, Duration::from_secs_f64(cfg.ged_timeout_secs)).context("study")?;
        println!("{}", describe(&r));
        w.write("study/pairs.csv", pairs_csv(&r).context("pairs")?)?;
        w.write("study/bins.csv", bins_csv(&r).context("bins")?)?;
        w.write("study/summary.json", summary_json(&r))?;
        summary.insert("study".into(), serde_json::from_str(&summary_json(&r)).expect("valid json"));
    }
    let mut views = Vec::new();
    for (k, (name, g)) in circuits(cfg)?.iter().enumerate() {
        let c = random_covert_insertion(g, InsertionMode::Fraction(cfg.random_fraction), cfg.seed + k as u64)
            .with_context(|| format!("random insertion on {name}"))?;
        w.write(&format!("baselines/{name}_rand.json"), c.to_json())?;
        views.push((name.clone(), c.appearance_view));
    }
    if cfg.netlists.is_some() {
        let (dir, entries) = load_entries(cfg)?;
        let mut unreachable_area = Vec::new();
        for (k, e) in entries.iter().enumerate() {
            let (c, f) = read_entry(&dir, e)?;
            match random_covert_insertion(&f, InsertionMode::MatchArea(e.area_overhead), cfg.seed + k as u64) {
                Ok(r) => w.write(&format!("baselines/{}_randam.json", e.file.trim_end_matches(".json")), r.to_json())?,
                Err(EvalError::Unreachable) => unreachable_area.push(e.file.clone()),
                Err(err) => return Err(anyhow::Error::from(err).context(format!("area-matched insertion for {}", e.file)).into()),
            }
            let family = e.pair.function.split(':').next().unwrap_or_default().to_string();
            views.push((family, c.appearance_view));
        }
        summary.insert("area_match_unreachable".into(), unreachable_area.into());
    }
    export_gnn_dataset(&views, &cfg.out.join("gnn")).context("gnn export")?;
    for f in ["gnn/nodes.csv", "gnn/edges.csv", "gnn/labels.csv", "gnn/README.md"] {
        w.record(f)?;
    }
    summary.insert("gnn_graphs".into(), views.len().into());
    let summary = serde_json::Value::Object(summary);
    w.finish(Command::Eval, cfg, summary.clone())?;
    Ok(summary)
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<serde_json::Value> {
    cfg.validate()?;
    match command {
        Command::Dataset => cmd_dataset(cfg),
        Command::Train => cmd_train(cfg),
        Command::Camouflage => cmd_camouflage(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Attack => cmd_attack(cfg),
        Command::Eval => cmd_eval(cfg),
    }
}

/// Entry point of the `ipcamo` binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .overrides
        .config
        .as_deref()
        .map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
        .and_then(|c| cli.overrides.apply(c))
        .and_then(|c| run(cli.command, &c));
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
