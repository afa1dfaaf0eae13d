//! Oracle-guided distinguishing-input-pattern attack.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::netlist::Netlist;

use super::cnf::{assert_value, encode_outputs, encode_xor, Sym};
use super::equiv::match_outputs;
use super::sat::{ClauseSink, SolveBudget, SolveResult, Solver};
use super::{AttackError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackBudget {
    pub time: Duration,
    pub conflicts: u64,
}

impl Default for AttackBudget {
    fn default() -> Self {
        AttackBudget { time: Duration::from_secs(60), conflicts: 10_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttackResult {
    #[serde(rename = "recovered")]
    Recovered,
    #[serde(rename = "budget-exceeded")]
    BudgetExceeded,
}

impl AttackResult {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackResult::Recovered => "recovered",
            AttackResult::BudgetExceeded => "budget-exceeded",
        }
    }
}

/// One distinguishing input, the oracle's answer and the clauses it added.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DipStep {
    pub input: Vec<bool>,
    pub output: Vec<bool>,
    pub clauses_added: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub result: AttackResult,
    pub trace: Vec<DipStep>,
    pub key: Option<Vec<bool>>,
    pub iterations: usize,
    pub wall: Duration,
    pub conflicts: u64,
    pub key_bits: usize,
}

/// Positions in the locked input list of each oracle input, and oracle
/// input positions that the locked design does not read.
fn input_map(locked: &Netlist, oracle: &Netlist) -> Result<Vec<Option<usize>>> {
    let ln = locked.input_names();
    let on = oracle.input_names();
    for o in &on {
        if !ln.contains(o) {
            return Err(AttackError::MissingInput(o.clone()));
        }
    }
    Ok(ln.iter().map(|l| on.iter().position(|o| o == l)).collect())
}

/// Runs the attack on `locked` with a working chip modeled by `oracle`.
/// Outputs are matched by name; locked inputs the oracle lacks are fed to
/// the search but not to the oracle.
pub fn dip_attack(locked: &Netlist, oracle: &Netlist, budget: AttackBudget) -> Result<AttackReport> {
    locked.check()?;
    oracle.check()?;
    if oracle.key_len() > 0 {
        return Err(AttackError::Keyed);
    }
    let start = Instant::now();
    let deadline = start + budget.time;
    let pairs = match_outputs(oracle, locked)?;
    let to_oracle = input_map(locked, oracle)?;
    let n_oracle_in = oracle.inputs().len();
    let kb = locked.key_len();
    let mut s = Solver::new();
    let x: Vec<Sym> = (0..locked.inputs().len()).map(|_| Sym::Lit(s.new_var())).collect();
    let k1: Vec<Sym> = (0..kb).map(|_| Sym::Lit(s.new_var())).collect();
    let k2: Vec<Sym> = (0..kb).map(|_| Sym::Lit(s.new_var())).collect();
    let y1 = encode_outputs(&mut s, locked, &x, &k1);
    let y2 = encode_outputs(&mut s, locked, &x, &k2);
    let act = s.new_var();
    let mut diff = vec![!act];
    for &(_, j) in &pairs {
        match encode_xor(&mut s, y1[j], y2[j]) {
            Sym::Lit(l) => diff.push(l),
            Sym::Const(true) => diff.push(act),
            Sym::Const(false) => {}
        }
    }
    s.add(&diff);
    let mut trace: Vec<DipStep> = Vec::new();
    let conflicts_at = |s: &Solver| s.stats.conflicts;
    let exceeded = |s: &Solver, trace: Vec<DipStep>| {
        Ok(AttackReport {
            result: AttackResult::BudgetExceeded,
            key: None,
            iterations: trace.len(),
            trace,
            wall: start.elapsed(),
            conflicts: conflicts_at(s),
            key_bits: kb,
        })
    };
    loop {
        let left = budget.conflicts.saturating_sub(s.stats.conflicts);
        if left == 0 || Instant::now() >= deadline {
            return exceeded(&s, trace);
        }
        let sb = SolveBudget { max_conflicts: Some(left), deadline: Some(deadline) };
        match s.solve(&[act], sb) {
            SolveResult::Unknown => return exceeded(&s, trace),
            SolveResult::Unsat => break,
            SolveResult::Sat => {
                let dip: Vec<bool> = x.iter().map(|v| matches!(v, Sym::Lit(l) if s.lit_value(*l))).collect();
                let mut oin = vec![false; n_oracle_in];
                for (k, m) in to_oracle.iter().enumerate() {
                    if let Some(o) = m {
                        oin[*o] = dip[k];
                    }
                }
                let want = oracle.simulate(&oin, &[])?;
                let xs: Vec<Sym> = dip.iter().map(|&b| Sym::Const(b)).collect();
                let before = s.num_clauses();
                for keys in [&k1, &k2] {
                    let ys = encode_outputs(&mut s, locked, &xs, keys);
                    for &(i, j) in &pairs {
                        if !assert_value(&mut s, ys[j], want[i]) {
                            s.add(&[]);
                        }
                    }
                }
                let clauses_added = s.num_clauses() - before;
                trace.push(DipStep { input: dip, output: want, clauses_added });
            }
        }
    }
    let left = budget.conflicts.saturating_sub(s.stats.conflicts);
    let sb = SolveBudget { max_conflicts: Some(left.max(1)), deadline: Some(deadline) };
    match s.solve(&[!act], sb) {
        SolveResult::Sat => {
            let key: Vec<bool> = k1.iter().map(|v| matches!(v, Sym::Lit(l) if s.lit_value(*l))).collect();
            Ok(AttackReport {
                result: AttackResult::Recovered,
                key: Some(key),
                iterations: trace.len(),
                trace,
                wall: start.elapsed(),
                conflicts: s.stats.conflicts,
                key_bits: kb,
            })
        }
        SolveResult::Unknown => exceeded(&s, trace),
        SolveResult::Unsat => Err(AttackError::Inconsistent),
    }
}

/// Every key under which `locked` matches `oracle` on all inputs, by
/// enumeration. Intended for small designs only.
pub fn brute_force_keys(locked: &Netlist, oracle: &Netlist) -> Result<Vec<Vec<bool>>> {
    let kb = locked.key_len();
    let ni = locked.inputs().len();
    if kb > 20 || ni > 16 {
        return Err(AttackError::TooLarge { inputs: ni, key_bits: kb });
    }
    let pairs = match_outputs(oracle, locked)?;
    let to_oracle = input_map(locked, oracle)?;
    let rows = 1usize << ni;
    let mut good = Vec::new();
    for k in 0..1usize << kb {
        let key: Vec<bool> = (0..kb).map(|b| (k >> b) & 1 == 1).collect();
        let ok = (0..rows).all(|r| {
            let ins: Vec<bool> = (0..ni).map(|b| (r >> b) & 1 == 1).collect();
            let mut oin = vec![false; oracle.inputs().len()];
            for (p, m) in to_oracle.iter().enumerate() {
                if let Some(o) = m {
                    oin[*o] = ins[p];
                }
            }
            let a = locked.simulate(&ins, &key).expect("checked netlist");
            let b = oracle.simulate(&oin, &[]).expect("checked netlist");
            pairs.iter().all(|&(i, j)| a[j] == b[i])
        });
        if ok {
            good.push(key);
        }
    }
    Ok(good)
}
