//! Runs the DIP attack on a locked c17 and on a camouflaged cone.

use std::time::Duration;

use ipcamo::aig::extract_cone_tree;
use ipcamo::attack::{dip_attack, keyize, logic_lock, AttackBudget};
use ipcamo::bench;
use ipcamo::camouflage::{camouflage_pipeline, PipelineConfig, Proportion, Threshold};
use ipcamo::netlist::Netlist;
use ipcamo::vae::{ModelDims, VaeParams};

fn main() -> anyhow::Result<()> {
    let budget = AttackBudget { time: Duration::from_secs(20), conflicts: 10_000_000 };
    let g = bench::c17();
    let oracle = Netlist::from_aig(&g);
    let locked = logic_lock(&g, 1.5, 0)?;
    let r = dip_attack(&locked.netlist, &oracle, budget)?;
    println!("locked c17: {} key bits, {} after {} DIPs", locked.key_bits(), r.result.as_str(), r.iterations);

    let f = extract_cone_tree(&g, "N22", 200)?.tree().expect("tree");
    let a = extract_cone_tree(&bench::half_adder(), "carry", 200)?.tree().expect("tree");
    let params = VaeParams::init(ModelDims::small(16), 2);
    let cfg = PipelineConfig { p: Proportion::new(0.5)?, th: Threshold::new(0.03)?, seed: 7 };
    let c = camouflage_pipeline(&f, &a, &params, &cfg)?;
    let d = keyize(&c.appearance_view);
    let r = dip_attack(&d.netlist, &Netlist::from_aig(&f), budget)?;
    println!("camouflaged N22: {} key bits, {} after {} DIPs in {:.2?}", d.key_bits(), r.result.as_str(), r.iterations, r.wall);
    Ok(())
}
