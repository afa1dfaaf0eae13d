//! Camouflages the half-adder sum as a c17 output and checks equivalence.

use ipcamo::aig::extract_cone_tree;
use ipcamo::attack::{check_equivalence, keyize, SolveBudget};
use ipcamo::bench;
use ipcamo::camouflage::{camouflage_pipeline, PipelineConfig, Proportion, Threshold};
use ipcamo::netlist::Netlist;
use ipcamo::vae::{ModelDims, VaeParams};

fn main() -> anyhow::Result<()> {
    let f = extract_cone_tree(&bench::half_adder(), "sum", 200)?.tree().expect("tree");
    let a = extract_cone_tree(&bench::c17(), "N23", 200)?.tree().expect("tree");
    let params = VaeParams::init(ModelDims::small(16), 9);
    let cfg = PipelineConfig { p: Proportion::new(0.5)?, th: Threshold::new(0.05)?, seed: 4 };
    let c = camouflage_pipeline(&f, &a, &params, &cfg)?;
    let eq = check_equivalence(&Netlist::from_aig(&f), &c.functional_netlist(), SolveBudget::default())?;
    println!("placements {}, area overhead {:.2}", c.placements.len(), c.metadata.area_overhead);
    println!("key bits {}, equivalence {:?}", keyize(&c.appearance_view).key_bits(), eq);
    Ok(())
}
