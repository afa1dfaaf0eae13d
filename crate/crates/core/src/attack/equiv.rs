//! Combinational equivalence: exhaustive simulation for small input counts,
//! a SAT miter otherwise.

use serde::{Deserialize, Serialize};

use crate::aig::sim::pattern_word;
use crate::netlist::Netlist;

use super::cnf::{encode_outputs, encode_xor, Sym};
use super::sat::{ClauseSink, SolveBudget, SolveResult, Solver};
use super::{AttackError, Result};

/// Largest input count checked by exhaustive simulation.
pub const EXHAUSTIVE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquivMethod {
    TruthTable,
    Miter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equivalence {
    Equivalent(EquivMethod),
    Counterexample { inputs: Vec<(String, bool)>, output: String },
    Undecided,
}

impl Equivalence {
    pub fn holds(&self) -> bool {
        matches!(self, Equivalence::Equivalent(_))
    }
}

/// Union of the input names, reference order first.
fn union_inputs(a: &Netlist, b: &Netlist) -> Vec<String> {
    let mut names = a.input_names();
    for n in b.input_names() {
        if !names.contains(&n) {
            names.push(n);
        }
    }
    names
}

/// Positions in `names` of each input of `n`.
fn positions(n: &Netlist, names: &[String]) -> Vec<usize> {
    n.input_names().iter().map(|x| names.iter().position(|y| y == x).expect("union covers all inputs")).collect()
}

/// Output index pairs (reference, candidate) matched by name.
pub(crate) fn match_outputs(reference: &Netlist, candidate: &Netlist) -> Result<Vec<(usize, usize)>> {
    let cand = candidate.output_names();
    reference
        .output_names()
        .iter()
        .enumerate()
        .map(|(i, name)| match cand.iter().position(|c| c == name) {
            Some(j) => Ok((i, j)),
            None => Err(AttackError::MissingOutput(name.clone())),
        })
        .collect()
}

/// Checks that `candidate` computes every output of `reference` over the
/// union of both input sets; an input one side lacks is free for that side.
/// Exhaustive up to [`EXHAUSTIVE_LIMIT`] inputs, miter above.
pub fn check_equivalence(reference: &Netlist, candidate: &Netlist, budget: SolveBudget) -> Result<Equivalence> {
    check_equivalence_with(reference, candidate, None, budget)
}

/// As [`check_equivalence`] with the method forced when `method` is set.
pub fn check_equivalence_with(
    reference: &Netlist,
    candidate: &Netlist,
    method: Option<EquivMethod>,
    budget: SolveBudget,
) -> Result<Equivalence> {
    for n in [reference, candidate] {
        n.check()?;
        if n.key_len() > 0 {
            return Err(AttackError::Keyed);
        }
    }
    let pairs = match_outputs(reference, candidate)?;
    let names = union_inputs(reference, candidate);
    let method = method.unwrap_or(if names.len() <= EXHAUSTIVE_LIMIT { EquivMethod::TruthTable } else { EquivMethod::Miter });
    if method == EquivMethod::TruthTable && names.len() > crate::aig::MAX_TRUTH_TABLE_INPUTS {
        return Err(AttackError::TooLarge { inputs: names.len(), key_bits: 0 });
    }
    if method == EquivMethod::TruthTable {
        exhaustive(reference, candidate, &names, &pairs)
    } else {
        miter(reference, candidate, &names, &pairs, budget)
    }
}

fn exhaustive(r: &Netlist, c: &Netlist, names: &[String], pairs: &[(usize, usize)]) -> Result<Equivalence> {
    let n = names.len();
    let rows = 1usize << n;
    let (pr, pc) = (positions(r, names), positions(c, names));
    for chunk in 0..rows.div_ceil(64) {
        let words: Vec<u64> = (0..n).map(|k| pattern_word(k, n, chunk)).collect();
        let valid = if rows - chunk * 64 >= 64 { !0u64 } else { (1u64 << (rows - chunk * 64)) - 1 };
        let wr: Vec<u64> = pr.iter().map(|&p| words[p]).collect();
        let wc: Vec<u64> = pc.iter().map(|&p| words[p]).collect();
        let or = r.simulate_words(&wr, &[])?;
        let oc = c.simulate_words(&wc, &[])?;
        for &(i, j) in pairs {
            let diff = (or[i] ^ oc[j]) & valid;
            if diff != 0 {
                let row = chunk * 64 + diff.trailing_zeros() as usize;
                let inputs = names.iter().enumerate().map(|(k, x)| (x.clone(), (row >> (n - 1 - k)) & 1 == 1)).collect();
                return Ok(Equivalence::Counterexample { inputs, output: r.outputs[i].0.clone() });
            }
        }
    }
    Ok(Equivalence::Equivalent(EquivMethod::TruthTable))
}

fn miter(r: &Netlist, c: &Netlist, names: &[String], pairs: &[(usize, usize)], budget: SolveBudget) -> Result<Equivalence> {
    let mut s = Solver::new();
    let vars: Vec<Sym> = names.iter().map(|_| Sym::Lit(s.new_var())).collect();
    let ir: Vec<Sym> = positions(r, names).iter().map(|&p| vars[p]).collect();
    let ic: Vec<Sym> = positions(c, names).iter().map(|&p| vars[p]).collect();
    let or = encode_outputs(&mut s, r, &ir, &[]);
    let oc = encode_outputs(&mut s, c, &ic, &[]);
    let mut clause = Vec::new();
    let mut first_diff = None;
    for &(i, j) in pairs {
        match encode_xor(&mut s, or[i], oc[j]) {
            Sym::Const(false) => {}
            Sym::Const(true) => {
                first_diff.get_or_insert(i);
            }
            Sym::Lit(l) => clause.push((i, l)),
        }
    }
    if first_diff.is_none() {
        if clause.is_empty() {
            return Ok(Equivalence::Equivalent(EquivMethod::Miter));
        }
        s.add(&clause.iter().map(|&(_, l)| l).collect::<Vec<_>>());
    }
    match s.solve(&[], budget) {
        SolveResult::Unsat => Ok(Equivalence::Equivalent(EquivMethod::Miter)),
        SolveResult::Unknown => Ok(Equivalence::Undecided),
        SolveResult::Sat => {
            let inputs: Vec<(String, bool)> = names
                .iter()
                .zip(&vars)
                .map(|(x, v)| (x.clone(), matches!(v, Sym::Lit(l) if s.lit_value(*l))))
                .collect();
            let i = first_diff.unwrap_or_else(|| clause.iter().find(|(_, l)| s.lit_value(*l)).expect("miter output set").0);
            Ok(Equivalence::Counterexample { inputs, output: r.outputs[i].0.clone() })
        }
    }
}
