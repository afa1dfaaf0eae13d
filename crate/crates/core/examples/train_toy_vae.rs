//! Trains a small VAE on random trees and reports reconstruction agreement.

use ipcamo::bench;
use ipcamo::camouflage::Threshold;
use ipcamo::vae::{reconstruction_agreement, split_dataset, train, Hyperparams, ModelDims, VaeParams};

fn main() -> anyhow::Result<()> {
    let trees = bench::toy_trees(60, 16, 2);
    let (tr, te) = split_dataset(&trees, 0.8, 1);
    let graphs = |s: &[(String, ipcamo::aig::AigGraph)]| s.iter().map(|(_, g)| g.clone()).collect::<Vec<_>>();
    let h = Hyperparams { epochs: 15, lr: 3e-3, ..Hyperparams::default() };
    let report = train(VaeParams::init(ModelDims::small(24), 1), &graphs(&tr), &graphs(&te), &h)?;
    for e in &report.history {
        println!("epoch {:>2} train {:.4} val {:?}", e.epoch, e.train_loss, e.val_loss);
    }
    let th = Threshold::new(0.5)?;
    let mut agree = 0.0;
    for (_, g) in &tr {
        agree += reconstruction_agreement(g, &report.params, th)?;
    }
    println!("best epoch {}, train agreement {:.3}", report.best_epoch, agree / tr.len() as f64);
    Ok(())
}
