//! Compares analytic VAE gradients with central finite differences.

use ipcamo::autodiff::gradcheck::check_gradients;
use ipcamo::autodiff::ParamStore;
use ipcamo::bench;
use ipcamo::vae::{loss_with_gradients, Hyperparams, ModelDims, SampleMode, VaeParams};

fn main() {
    let g = bench::random_tree(3, 3, 1);
    let p = VaeParams::init(ModelDims { hidden: 8, latent: 8, mlp_hidden: 8, max_pi: 8 }, 0);
    let h = Hyperparams::default();
    let f = |store: &ParamStore| {
        let q = VaeParams { dims: p.dims, store: store.clone() };
        let (l, grads) = loss_with_gradients(&q, &g, &h, SampleMode::Train, 3).expect("tree input");
        (l.total, grads)
    };
    let r = check_gradients(&p.store, f, 1e-5, 1e-4, 1e-10);
    println!("checked {} partials, {} failures, max rel err {:.2e}", r.checked, r.failures, r.max_rel_err);
    if let Some((name, k, a, n)) = r.worst {
        println!("worst: {name}[{k}] analytic {a:.6e} numeric {n:.6e}");
    }
}
