//! Correlates latent distance with graph edit distance over random trees.

use std::time::Duration;

use ipcamo::bench;
use ipcamo::eval::{bins_csv, ged_lsd_study};
use ipcamo::vae::{ModelDims, VaeParams};

fn main() -> anyhow::Result<()> {
    let trees = bench::toy_trees(16, 14, 4);
    let params = VaeParams::init(ModelDims::small(16), 0);
    let r = ged_lsd_study(&trees, &params, 10, Duration::from_secs(2))?;
    println!("valid {} discarded {} r {:?} bin-mean r {:?}", r.valid, r.discarded, r.pearson_r, r.bin_mean_r);
    print!("{}", bins_csv(&r)?);
    Ok(())
}
