//! Conflict-driven clause-learning SAT solver: two watched literals, first-UIP
//! learning with local minimization, VSIDS, phase saving, Luby restarts,
//! activity-based clause deletion and solving under assumptions.

use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SatLit(u32);

impl SatLit {
    pub fn new(var: usize, negated: bool) -> Self {
        SatLit((var as u32) << 1 | negated as u32)
    }

    pub fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    fn idx(self) -> usize {
        self.0 as usize
    }

    /// Signed 1-based DIMACS form.
    pub fn to_dimacs(self) -> i32 {
        let v = self.var() as i32 + 1;
        if self.is_negated() {
            -v
        } else {
            v
        }
    }

    pub fn from_dimacs(x: i32) -> Self {
        SatLit::new(x.unsigned_abs() as usize - 1, x < 0)
    }
}

impl std::ops::Not for SatLit {
    type Output = SatLit;
    fn not(self) -> SatLit {
        SatLit(self.0 ^ 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveResult {
    Sat,
    Unsat,
    /// Budget ran out first.
    Unknown,
}

/// Limits for one `solve` call.
#[derive(Clone, Copy, Debug, Default)]
pub struct SolveBudget {
    pub max_conflicts: Option<u64>,
    pub deadline: Option<Instant>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

/// Anything that accepts fresh variables and clauses.
pub trait ClauseSink {
    fn new_var(&mut self) -> SatLit;
    fn add_clause(&mut self, lits: &[SatLit]);
}

struct Clause {
    lits: Vec<SatLit>,
    learnt: bool,
    deleted: bool,
    activity: f64,
}

#[derive(Clone, Copy)]
struct Watcher {
    cref: usize,
    blocker: SatLit,
}

const UNDEF: i8 = 0;

pub struct Solver {
    clauses: Vec<Clause>,
    learnts: Vec<usize>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<SatLit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    cla_inc: f64,
    heap: VarHeap,
    polarity: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    model: Vec<bool>,
    max_learnts: f64,
    pub stats: SolverStats,
}

impl Default for Solver {
    fn default() -> Self {
        Self::new()
    }
}

impl ClauseSink for Solver {
    fn new_var(&mut self) -> SatLit {
        let v = self.assigns.len();
        self.assigns.push(UNDEF);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.polarity.push(true);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        self.heap.insert(v, &self.activity);
        SatLit::new(v, false)
    }

    fn add_clause(&mut self, lits: &[SatLit]) {
        self.add(lits);
    }
}

impl Solver {
    pub fn new() -> Self {
        Solver {
            clauses: Vec::new(),
            learnts: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            cla_inc: 1.0,
            heap: VarHeap::default(),
            polarity: Vec::new(),
            seen: Vec::new(),
            ok: true,
            model: Vec::new(),
            max_learnts: 0.0,
            stats: SolverStats::default(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.learnt && !c.deleted).count()
    }

    fn value(&self, l: SatLit) -> i8 {
        let v = self.assigns[l.var()];
        if l.is_negated() {
            -v
        } else {
            v
        }
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    /// Adds a clause at the root level. Returns false once the formula is
    /// known to be unsatisfiable.
    pub fn add(&mut self, lits: &[SatLit]) -> bool {
        if !self.ok {
            return false;
        }
        self.cancel_until(0);
        let mut c: Vec<SatLit> = lits.to_vec();
        for l in &c {
            while l.var() >= self.num_vars() {
                self.new_var();
            }
        }
        c.sort();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return true;
        }
        if c.iter().any(|&l| self.value(l) == 1) {
            return true;
        }
        c.retain(|&l| self.value(l) != -1);
        match c.len() {
            0 => {
                self.ok = false;
                false
            }
            1 => {
                self.enqueue(c[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
                self.ok
            }
            _ => {
                self.attach(c, false);
                true
            }
        }
    }

    fn attach(&mut self, lits: Vec<SatLit>, learnt: bool) -> usize {
        let cref = self.clauses.len();
        self.watches[(!lits[0]).idx()].push(Watcher { cref, blocker: lits[1] });
        self.watches[(!lits[1]).idx()].push(Watcher { cref, blocker: lits[0] });
        self.clauses.push(Clause { lits, learnt, deleted: false, activity: 0.0 });
        if learnt {
            self.learnts.push(cref);
        }
        cref
    }

    fn enqueue(&mut self, l: SatLit, reason: Option<usize>) {
        let v = l.var();
        self.assigns[v] = if l.is_negated() { -1 } else { 1 };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
    }

    /// Watches are indexed by the literal whose falsification triggers a
    /// visit, i.e. the negation of a watched literal.
    fn propagate(&mut self) -> Option<usize> {
        let mut confl = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = !p;
            let mut ws = std::mem::take(&mut self.watches[p.idx()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.value(w.blocker) == 1 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                if self.clauses[w.cref].deleted {
                    continue;
                }
                let c = &mut self.clauses[w.cref].lits;
                if c[0] == false_lit {
                    c.swap(0, 1);
                }
                let first = c[0];
                let nw = Watcher { cref: w.cref, blocker: first };
                if first != w.blocker && self.value(first) == 1 {
                    ws[j] = nw;
                    j += 1;
                    continue;
                }
                let mut moved = false;
                let c = &self.clauses[w.cref].lits;
                for k in 2..c.len() {
                    if self.value(c[k]) != -1 {
                        let c = &mut self.clauses[w.cref].lits;
                        c.swap(1, k);
                        let new_watch = c[1];
                        self.watches[(!new_watch).idx()].push(nw);
                        moved = true;
                        break;
                    }
                }
                if moved {
                    continue;
                }
                ws[j] = nw;
                j += 1;
                if self.value(first) == -1 {
                    confl = Some(w.cref);
                    self.qhead = self.trail.len();
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            let rest = std::mem::replace(&mut self.watches[p.idx()], ws);
            self.watches[p.idx()].extend(rest);
            if confl.is_some() {
                break;
            }
        }
        confl
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.heap.increase(v, &self.activity);
    }

    fn bump_clause(&mut self, cref: usize) {
        let c = &mut self.clauses[cref];
        c.activity += self.cla_inc;
        if c.activity > 1e20 {
            for &r in &self.learnts {
                self.clauses[r].activity *= 1e-20;
            }
            self.cla_inc *= 1e-20;
        }
    }

    fn analyze(&mut self, mut confl: usize) -> (Vec<SatLit>, usize) {
        let mut out = vec![SatLit(0)];
        let mut path = 0;
        let mut p: Option<SatLit> = None;
        let mut idx = self.trail.len();
        let cur = self.decision_level() as u32;
        loop {
            if self.clauses[confl].learnt {
                self.bump_clause(confl);
            }
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl].lits.len() {
                let q = self.clauses[confl].lits[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump_var(v);
                    self.seen[v] = true;
                    if self.level[v] >= cur {
                        path += 1;
                    } else {
                        out.push(q);
                    }
                }
            }
            loop {
                idx -= 1;
                if self.seen[self.trail[idx].var()] {
                    break;
                }
            }
            let pl = self.trail[idx];
            p = Some(pl);
            self.seen[pl.var()] = false;
            path -= 1;
            if path == 0 {
                break;
            }
            confl = self.reason[pl.var()].expect("implied literal has a reason");
        }
        out[0] = !p.unwrap();
        // Drop literals implied by other literals of the clause.
        let mut keep = vec![out[0]];
        for &q in &out[1..] {
            let redundant = match self.reason[q.var()] {
                None => false,
                Some(r) => self.clauses[r].lits[1..].iter().all(|l| self.seen[l.var()] || self.level[l.var()] == 0),
            };
            if !redundant {
                keep.push(q);
            }
        }
        for &q in &out {
            self.seen[q.var()] = false;
        }
        let mut bt = 0;
        if keep.len() > 1 {
            let mut max_i = 1;
            for i in 2..keep.len() {
                if self.level[keep[i].var()] > self.level[keep[max_i].var()] {
                    max_i = i;
                }
            }
            keep.swap(1, max_i);
            bt = self.level[keep[1].var()] as usize;
        }
        (keep, bt)
    }

    fn cancel_until(&mut self, lvl: usize) {
        if self.decision_level() > lvl {
            let lim = self.trail_lim[lvl];
            for k in (lim..self.trail.len()).rev() {
                let l = self.trail[k];
                let v = l.var();
                self.assigns[v] = UNDEF;
                self.reason[v] = None;
                self.polarity[v] = l.is_negated();
                self.heap.insert(v, &self.activity);
            }
            self.trail.truncate(lim);
            self.trail_lim.truncate(lvl);
            self.qhead = lim;
        }
    }

    fn pick_branch(&mut self) -> Option<SatLit> {
        while let Some(v) = self.heap.pop(&self.activity) {
            if self.assigns[v] == UNDEF {
                return Some(SatLit::new(v, self.polarity[v]));
            }
        }
        None
    }

    fn locked(&self, cref: usize) -> bool {
        let c = &self.clauses[cref].lits;
        let v = c[0].var();
        self.value(c[0]) == 1 && self.reason[v] == Some(cref)
    }

    fn reduce_db(&mut self) {
        let mut ls: Vec<usize> = self.learnts.clone();
        ls.sort_by(|&a, &b| self.clauses[a].activity.total_cmp(&self.clauses[b].activity));
        let half = ls.len() / 2;
        let mut kept = Vec::with_capacity(ls.len());
        for (i, &r) in ls.iter().enumerate() {
            if i < half && self.clauses[r].lits.len() > 2 && !self.locked(r) {
                self.clauses[r].deleted = true;
                self.clauses[r].lits = Vec::new();
            } else {
                kept.push(r);
            }
        }
        self.learnts = kept;
    }

    fn luby(mut x: u64) -> u64 {
        let (mut size, mut seq) = (1u64, 0u32);
        while size < x + 1 {
            seq += 1;
            size = 2 * size + 1;
        }
        while size - 1 != x {
            size = (size - 1) >> 1;
            seq -= 1;
            x %= size;
        }
        1 << seq
    }

    /// Solves under `assumptions`. Learned clauses persist between calls.
    pub fn solve(&mut self, assumptions: &[SatLit], budget: SolveBudget) -> SolveResult {
        self.model.clear();
        if !self.ok {
            return SolveResult::Unsat;
        }
        self.cancel_until(0);
        for l in assumptions {
            while l.var() >= self.num_vars() {
                self.new_var();
            }
        }
        if self.max_learnts == 0.0 {
            self.max_learnts = (self.num_clauses() as f64 / 3.0).max(2000.0);
        }
        let start = self.stats.conflicts;
        let mut restart = 0u64;
        loop {
            let limit = 100 * Self::luby(restart);
            match self.search(assumptions, limit, start, &budget) {
                Some(r) => {
                    if r == SolveResult::Sat {
                        self.model = self.assigns.iter().map(|&a| a == 1).collect();
                    }
                    self.cancel_until(0);
                    return r;
                }
                None => {
                    restart += 1;
                    self.stats.restarts += 1;
                    self.max_learnts *= 1.1;
                }
            }
        }
    }

    fn out_of_budget(&self, start: u64, budget: &SolveBudget) -> bool {
        if let Some(m) = budget.max_conflicts {
            if self.stats.conflicts - start >= m {
                return true;
            }
        }
        if let Some(d) = budget.deadline {
            if self.stats.conflicts.is_multiple_of(64) && Instant::now() >= d {
                return true;
            }
        }
        false
    }

    fn search(&mut self, assumptions: &[SatLit], limit: u64, start: u64, budget: &SolveBudget) -> Option<SolveResult> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(SolveResult::Unsat);
                }
                let (learnt, bt) = self.analyze(confl);
                self.cancel_until(bt);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let first = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.bump_clause(cref);
                    self.enqueue(first, Some(cref));
                }
                self.var_inc /= 0.95;
                self.cla_inc /= 0.999;
                if self.out_of_budget(start, budget) {
                    return Some(SolveResult::Unknown);
                }
            } else {
                if conflicts >= limit {
                    self.cancel_until(0);
                    return None;
                }
                if self.learnts.len() as f64 - self.trail.len() as f64 >= self.max_learnts {
                    self.reduce_db();
                }
                let mut next = None;
                while self.decision_level() < assumptions.len() {
                    let a = assumptions[self.decision_level()];
                    match self.value(a) {
                        1 => self.trail_lim.push(self.trail.len()),
                        -1 => return Some(SolveResult::Unsat),
                        _ => {
                            next = Some(a);
                            break;
                        }
                    }
                }
                let lit = match next {
                    Some(l) => l,
                    None => match self.pick_branch() {
                        Some(l) => l,
                        None => return Some(SolveResult::Sat),
                    },
                };
                self.stats.decisions += 1;
                self.trail_lim.push(self.trail.len());
                self.enqueue(lit, None);
            }
        }
    }

    /// Value of `var` in the last satisfying assignment.
    pub fn model_value(&self, var: usize) -> bool {
        self.model.get(var).copied().unwrap_or(false)
    }

    pub fn lit_value(&self, l: SatLit) -> bool {
        self.model_value(l.var()) != l.is_negated()
    }
}

/// Max-heap of variables keyed by activity.
#[derive(Default)]
struct VarHeap {
    heap: Vec<usize>,
    pos: Vec<Option<usize>>,
}

impl VarHeap {
    fn insert(&mut self, v: usize, act: &[f64]) {
        if self.pos.len() <= v {
            self.pos.resize(v + 1, None);
        }
        if self.pos[v].is_some() {
            return;
        }
        self.heap.push(v);
        self.pos[v] = Some(self.heap.len() - 1);
        self.up(self.heap.len() - 1, act);
    }

    fn increase(&mut self, v: usize, act: &[f64]) {
        if let Some(Some(i)) = self.pos.get(v) {
            self.up(*i, act);
        }
    }

    fn pop(&mut self, act: &[f64]) -> Option<usize> {
        if self.heap.is_empty() {
            return None;
        }
        let top = self.heap[0];
        let last = self.heap.pop().unwrap();
        self.pos[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.pos[last] = Some(0);
            self.down(0, act);
        }
        Some(top)
    }

    fn up(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        while i > 0 {
            let parent = (i - 1) / 2;
            let pv = self.heap[parent];
            if act[pv] >= act[v] {
                break;
            }
            self.heap[i] = pv;
            self.pos[pv] = Some(i);
            i = parent;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }

    fn down(&mut self, mut i: usize, act: &[f64]) {
        let v = self.heap[i];
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let c = if r < n && act[self.heap[r]] > act[self.heap[l]] { r } else { l };
            if act[self.heap[c]] <= act[v] {
                break;
            }
            self.heap[i] = self.heap[c];
            self.pos[self.heap[i]] = Some(i);
            i = c;
        }
        self.heap[i] = v;
        self.pos[v] = Some(i);
    }
}

/// Plain clause list, exportable as DIMACS.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cnf {
    pub num_vars: usize,
    pub clauses: Vec<Vec<SatLit>>,
}

impl ClauseSink for Cnf {
    fn new_var(&mut self) -> SatLit {
        self.num_vars += 1;
        SatLit::new(self.num_vars - 1, false)
    }

    fn add_clause(&mut self, lits: &[SatLit]) {
        for l in lits {
            self.num_vars = self.num_vars.max(l.var() + 1);
        }
        self.clauses.push(lits.to_vec());
    }
}

impl Cnf {
    pub fn to_dimacs(&self) -> String {
        let mut s = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                s.push_str(&l.to_dimacs().to_string());
                s.push(' ');
            }
            s.push_str("0\n");
        }
        s
    }

    pub fn from_dimacs(text: &str) -> Result<Cnf, String> {
        let mut cnf = Cnf::default();
        let mut cur = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('c') {
                continue;
            }
            if let Some(rest) = t.strip_prefix("p cnf") {
                let nums: Vec<usize> = rest.split_whitespace().filter_map(|x| x.parse().ok()).collect();
                if nums.len() != 2 {
                    return Err(format!("line {}: malformed problem line", no + 1));
                }
                cnf.num_vars = nums[0];
                continue;
            }
            for tok in t.split_whitespace() {
                let x: i32 = tok.parse().map_err(|_| format!("line {}: bad literal `{tok}`", no + 1))?;
                if x == 0 {
                    cnf.add_clause(&std::mem::take(&mut cur));
                } else {
                    cur.push(SatLit::from_dimacs(x));
                }
            }
        }
        if !cur.is_empty() {
            cnf.add_clause(&cur);
        }
        Ok(cnf)
    }

    pub fn into_solver(&self) -> Solver {
        let mut s = Solver::new();
        for _ in 0..self.num_vars {
            s.new_var();
        }
        for c in &self.clauses {
            s.add(c);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: usize, clauses: &[Vec<SatLit>]) -> bool {
        (0..1u32 << n).any(|m| clauses.iter().all(|c| c.iter().any(|l| ((m >> l.var()) & 1 == 1) != l.is_negated())))
    }

    fn pigeonhole(holes: usize) -> Cnf {
        let pigeons = holes + 1;
        let var = |p: usize, h: usize| SatLit::new(p * holes + h, false);
        let mut cnf = Cnf::default();
        for p in 0..pigeons {
            cnf.add_clause(&(0..holes).map(|h| var(p, h)).collect::<Vec<_>>());
        }
        for h in 0..holes {
            for p in 0..pigeons {
                for q in p + 1..pigeons {
                    cnf.add_clause(&[!var(p, h), !var(q, h)]);
                }
            }
        }
        cnf
    }

    #[test]
    fn pigeonhole_is_unsat() {
        for holes in 2..7 {
            let mut s = pigeonhole(holes).into_solver();
            assert_eq!(s.solve(&[], SolveBudget::default()), SolveResult::Unsat);
        }
    }

    #[test]
    fn budget_stops_hard_instances() {
        let mut s = pigeonhole(9).into_solver();
        let r = s.solve(&[], SolveBudget { max_conflicts: Some(50), deadline: None });
        assert_eq!(r, SolveResult::Unknown);
    }

    #[test]
    fn assumptions_and_incremental_clauses() {
        let mut s = Solver::new();
        let a = s.new_var();
        let b = s.new_var();
        s.add(&[a, b]);
        assert_eq!(s.solve(&[!a], SolveBudget::default()), SolveResult::Sat);
        assert!(s.lit_value(b));
        assert_eq!(s.solve(&[!a, !b], SolveBudget::default()), SolveResult::Unsat);
        assert_eq!(s.solve(&[], SolveBudget::default()), SolveResult::Sat);
        s.add(&[!a]);
        s.add(&[!b]);
        assert_eq!(s.solve(&[], SolveBudget::default()), SolveResult::Unsat);
    }

    #[test]
    fn dimacs_round_trip() {
        let cnf = pigeonhole(3);
        let text = cnf.to_dimacs();
        assert!(text.starts_with("p cnf 12 "));
        assert_eq!(Cnf::from_dimacs(&text).unwrap(), cnf);
        assert!(Cnf::from_dimacs("p cnf 2 1\n1 x 0\n").is_err());
    }

    fn clause_strategy(n: usize) -> impl Strategy<Value = Vec<SatLit>> {
        prop::collection::vec((0..n, any::<bool>()).prop_map(|(v, s)| SatLit::new(v, s)), 1..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn agrees_with_brute_force(n in 1usize..11, clauses in prop::collection::vec(clause_strategy(10), 0..45)) {
            let clauses: Vec<Vec<SatLit>> = clauses.into_iter().map(|c| c.into_iter().map(|l| SatLit::new(l.var() % n, l.is_negated())).collect()).collect();
            let mut s = Solver::new();
            for _ in 0..n { s.new_var(); }
            for c in &clauses { s.add(c); }
            let r = s.solve(&[], SolveBudget::default());
            prop_assert_eq!(r == SolveResult::Sat, brute(n, &clauses));
            if r == SolveResult::Sat {
                for c in &clauses {
                    prop_assert!(c.iter().any(|&l| s.lit_value(l)));
                }
            }
        }
    }
}
