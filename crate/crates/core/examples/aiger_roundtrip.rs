//! Writes a benchmark to ASCII AIGER, parses it back and compares truth tables.

use ipcamo::aig::aiger::{parse_aiger, write_aiger};
use ipcamo::aig::{extract_cone_tree, truth_table};
use ipcamo::bench;

fn main() -> anyhow::Result<()> {
    let g = bench::ripple_adder(3);
    let text = write_aiger(&g)?;
    let back = parse_aiger(&text)?;
    println!("{}", text.lines().next().unwrap_or_default());
    println!("truth tables match: {}", truth_table(&g)? == truth_table(&back)?);
    let cone = extract_cone_tree(&g, "s2", 200)?.tree().expect("cone fits");
    println!("cone s2 as a tree: {} nodes, {} edges", cone.nodes.len(), cone.edges.len());
    Ok(())
}
