pub mod aig;
pub mod attack;
pub mod autodiff;
pub mod bench;
pub mod camouflage;
pub mod cli;
pub mod covert;
pub mod dataset;
pub mod eval;
pub mod netlist;
pub mod vae;
