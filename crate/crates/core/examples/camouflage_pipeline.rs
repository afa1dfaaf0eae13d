//! Sweeps the proportion/threshold grid for one pair and prints a summary row per cell.

use ipcamo::aig::extract_cone_tree;
use ipcamo::attack::{check_equivalence, keyize, SolveBudget};
use ipcamo::bench;
use ipcamo::camouflage::{camouflage_pipeline, PipelineConfig, Proportion, Threshold};
use ipcamo::netlist::Netlist;
use ipcamo::vae::{ModelDims, VaeParams};

fn main() -> anyhow::Result<()> {
    let f = extract_cone_tree(&bench::comparator(4), "gt", 200)?.tree().expect("tree");
    let a = extract_cone_tree(&bench::mux_tree(3), "y", 200)?.tree().expect("tree");
    let params = VaeParams::init(ModelDims::small(16), 5);
    let oracle = Netlist::from_aig(&f);
    println!("p,th,placements,area,key_bits,equivalent");
    for p in [0.1, 0.5, 0.9] {
        for th in [0.01, 0.05, 0.09] {
            let cfg = PipelineConfig { p: Proportion::new(p)?, th: Threshold::new(th)?, seed: 1 };
            let c = camouflage_pipeline(&f, &a, &params, &cfg)?;
            let eq = check_equivalence(&oracle, &c.functional_netlist(), SolveBudget::default())?.holds();
            let bits = keyize(&c.appearance_view).key_bits();
            println!("{p},{th},{},{:.2},{bits},{eq}", c.placements.len(), c.metadata.area_overhead);
        }
    }
    Ok(())
}
