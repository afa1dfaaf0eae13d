//! SAT-based deobfuscation attack, equivalence checking and the logic-locking
//! baseline.

pub mod cnf;
pub mod dip;
pub mod equiv;
pub mod keyize;
pub mod locking;
pub mod sat;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::NetlistError;

pub use dip::{brute_force_keys, dip_attack, AttackBudget, AttackReport, AttackResult, DipStep};
pub use equiv::{check_equivalence, check_equivalence_with, EquivMethod, Equivalence, EXHAUSTIVE_LIMIT};
pub use keyize::{camouflage_key, keyize, Candidate, KeyedDesign};
pub use locking::{key_gates_for_area, logic_lock, LockedDesign};
pub use sat::{Cnf, SatLit, SolveBudget, SolveResult, Solver};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error("output `{0}` is missing from the compared netlist")]
    MissingOutput(String),
    #[error("oracle input `{0}` is not an input of the locked design")]
    MissingInput(String),
    #[error("netlist still has key inputs")]
    Keyed,
    #[error("{inputs} inputs and {key_bits} key bits are too many to enumerate")]
    TooLarge { inputs: usize, key_bits: usize },
    #[error("{0}")]
    Unreachable(String),
    #[error("no key agrees with the oracle on the collected patterns")]
    Inconsistent,
}

pub type Result<T> = std::result::Result<T, AttackError>;

/// Miter clauses of a keyed netlist against itself, for external solvers.
pub fn export_dimacs(locked: &crate::netlist::Netlist) -> String {
    use cnf::{encode_outputs, encode_xor, Sym};
    use sat::ClauseSink;
    let mut c = Cnf::default();
    let x: Vec<Sym> = (0..locked.inputs().len()).map(|_| Sym::Lit(c.new_var())).collect();
    let k1: Vec<Sym> = (0..locked.key_len()).map(|_| Sym::Lit(c.new_var())).collect();
    let k2: Vec<Sym> = (0..locked.key_len()).map(|_| Sym::Lit(c.new_var())).collect();
    let y1 = encode_outputs(&mut c, locked, &x, &k1);
    let y2 = encode_outputs(&mut c, locked, &x, &k2);
    let mut diff = Vec::new();
    for (a, b) in y1.into_iter().zip(y2) {
        match encode_xor(&mut c, a, b) {
            Sym::Lit(l) => diff.push(l),
            Sym::Const(true) => return Cnf { num_vars: c.num_vars, clauses: vec![] }.to_dimacs(),
            Sym::Const(false) => {}
        }
    }
    c.add_clause(&diff);
    c.to_dimacs()
}

/// One line of the attack results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackRow {
    pub pair: String,
    pub th: Option<f64>,
    #[serde(rename = "K")]
    pub key_bits: usize,
    pub result: String,
    pub iterations: usize,
    pub wall_s: f64,
}

impl AttackRow {
    pub fn new(pair: impl Into<String>, th: Option<f64>, r: &AttackReport) -> Self {
        AttackRow {
            pair: pair.into(),
            th,
            key_bits: r.key_bits,
            result: r.result.as_str().into(),
            iterations: r.iterations,
            wall_s: r.wall.as_secs_f64(),
        }
    }
}

pub fn attack_csv(rows: &[AttackRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 csv")
}
