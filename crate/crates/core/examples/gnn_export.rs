//! Exports randomly camouflaged benchmarks as a labeled GNN dataset.

use ipcamo::bench;
use ipcamo::eval::{export_gnn_dataset, import_gnn_dataset, random_covert_insertion, InsertionMode};

fn main() -> anyhow::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "gnn_export".into());
    let views = bench::suite()
        .into_iter()
        .enumerate()
        .map(|(k, (name, g))| Ok((name, random_covert_insertion(&g, InsertionMode::Fraction(0.05), k as u64)?.appearance_view)))
        .collect::<anyhow::Result<Vec<_>>>()?;
    export_gnn_dataset(&views, dir.as_ref())?;
    let back = import_gnn_dataset(dir.as_ref())?;
    println!("wrote {} graphs to {dir}, read back {}", views.len(), back.len());
    Ok(())
}
