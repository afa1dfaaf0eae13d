//! Exact graph edit distance under unit costs.
//!
//! Nodes are labeled by [`NodeType`], edges by their inversion flag. Node
//! insertion, deletion and relabeling cost 1, as do edge insertion, deletion
//! and relabeling. The search is a depth-first branch and bound over node
//! mappings. The lower bound at every search node is a linear assignment over
//! the unmapped nodes whose costs combine the exact cost of edges into the
//! already mapped part with half the label distance of edges among unmapped
//! nodes.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::{AigGraph, NodeType};

pub const DEFAULT_GED_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GedOutcome {
    Exact(u32),
    /// Search did not finish; `upper` is the best edit cost found so far.
    Timeout { upper: u32 },
}

impl GedOutcome {
    pub fn exact(self) -> Option<u32> {
        match self {
            GedOutcome::Exact(d) => Some(d),
            GedOutcome::Timeout { .. } => None,
        }
    }
}

/// Edge multiset between an ordered node pair: (plain, inverted) counts.
type Pair = [u32; 2];

struct Prepared {
    n: usize,
    kind: Vec<NodeType>,
    adj: Vec<Pair>,
    /// Smallest node interchangeable with each node: same label and the
    /// same edges to every other node, so swapping them is an automorphism.
    twin: Vec<usize>,
}

impl Prepared {
    fn new(g: &AigGraph) -> Self {
        let n = g.node_count();
        let mut adj = vec![[0u32; 2]; n * n];
        for e in &g.edges {
            adj[e.src * n + e.dst][e.inverted as usize] += 1;
        }
        let kind: Vec<NodeType> = g.nodes.iter().map(|v| v.kind).collect();
        let mut p = Prepared { n, kind, adj, twin: (0..n).collect() };
        for x in 0..n {
            if let Some(t) = (0..x).find(|&y| p.twin[y] == y && p.swappable(x, y)) {
                p.twin[x] = t;
            }
        }
        p
    }

    fn swappable(&self, x: usize, y: usize) -> bool {
        self.kind[x] == self.kind[y]
            && self.e(x, y) == self.e(y, x)
            && self.e(x, x) == self.e(y, y)
            && (0..self.n).filter(|&w| w != x && w != y).all(|w| self.e(x, w) == self.e(y, w) && self.e(w, x) == self.e(w, y))
    }

    fn e(&self, s: usize, d: usize) -> Pair {
        self.adj[s * self.n + d]
    }
}

fn size(p: Pair) -> u64 {
    (p[0] + p[1]) as u64
}

/// Edit distance between two edge-label multisets.
fn dist(a: Pair, b: Pair) -> u64 {
    (size(a).max(size(b))) - a[0].min(b[0]) as u64 - a[1].min(b[1]) as u64
}

fn add(a: Pair, b: Pair) -> Pair {
    [a[0] + b[0], a[1] + b[1]]
}

/// Exact cost of the edit path induced by a node mapping.
fn mapping_cost(g1: &Prepared, g2: &Prepared, map: &[Option<usize>]) -> u64 {
    let mut used = vec![false; g2.n];
    let mut cost = 0;
    for (u, m) in map.iter().enumerate() {
        match m {
            Some(x) => {
                used[*x] = true;
                cost += (g1.kind[u] != g2.kind[*x]) as u64;
            }
            None => cost += 1,
        }
    }
    cost += used.iter().filter(|&&b| !b).count() as u64;
    for a in 0..g1.n {
        for b in 0..g1.n {
            cost += match (map[a], map[b]) {
                (Some(x), Some(y)) => dist(g1.e(a, b), g2.e(x, y)),
                _ => size(g1.e(a, b)),
            };
        }
    }
    for x in 0..g2.n {
        for y in 0..g2.n {
            if !used[x] || !used[y] {
                cost += size(g2.e(x, y));
            }
        }
    }
    cost
}

const INF: i64 = 1 << 40;

/// Minimum-cost perfect assignment on a square matrix. Returns the row to
/// column map and the total.
fn hungarian(n: usize, c: &[i64]) -> (Vec<usize>, i64) {
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF * 4; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF * 4;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = c[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut row_to_col = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    let total = (0..n).map(|i| c[i * n + row_to_col[i]]).sum();
    (row_to_col, total)
}

struct Search<'a> {
    g1: &'a Prepared,
    g2: &'a Prepared,
    map: Vec<Option<usize>>,
    assigned: Vec<bool>,
    used: Vec<bool>,
    best: u64,
    deadline: Instant,
    timed_out: bool,
}

/// Lower bound data for one search node.
struct Bound {
    rem1: Vec<usize>,
    rem2: Vec<usize>,
    /// Doubled costs, (r1 + r2) square.
    cost: Vec<i64>,
    /// Doubled lower bound on the remaining cost.
    value: i64,
    assignment: Vec<usize>,
}

impl Search<'_> {
    /// Exact cost of mapping `u` to `x` (or deleting it) with respect to
    /// nodes already mapped: node relabel plus edges to mapped nodes.
    fn anchored(&self, u: usize, x: Option<usize>) -> u64 {
        let (g1, g2) = (self.g1, self.g2);
        let mut c = match x {
            Some(x) => (g1.kind[u] != g2.kind[x]) as u64,
            None => 1,
        };
        for a in 0..g1.n {
            if !self.assigned[a] {
                continue;
            }
            c += match (self.map[a], x) {
                (Some(y), Some(x)) => dist(g1.e(a, u), g2.e(y, x)) + dist(g1.e(u, a), g2.e(x, y)),
                _ => size(g1.e(a, u)) + size(g1.e(u, a)),
            };
        }
        c
    }

    fn inserted_anchor(&self, x: usize) -> u64 {
        let g2 = self.g2;
        1 + (0..g2.n).filter(|&y| self.used[y]).map(|y| size(g2.e(y, x)) + size(g2.e(x, y))).sum::<u64>()
    }

    fn bound(&self) -> Bound {
        let (g1, g2) = (self.g1, self.g2);
        let rem1: Vec<usize> = (0..g1.n).filter(|&u| !self.assigned[u]).collect();
        let rem2: Vec<usize> = (0..g2.n).filter(|&x| !self.used[x]).collect();
        let (r1, r2) = (rem1.len(), rem2.len());
        let m = r1 + r2;
        let io = |g: &Prepared, rem: &[usize], v: usize| -> (Pair, Pair) {
            let mut i = [0, 0];
            let mut o = [0, 0];
            for &w in rem {
                i = add(i, g.e(w, v));
                o = add(o, g.e(v, w));
            }
            (i, o)
        };
        let io1: Vec<(Pair, Pair)> = rem1.iter().map(|&u| io(g1, &rem1, u)).collect();
        let io2: Vec<(Pair, Pair)> = rem2.iter().map(|&x| io(g2, &rem2, x)).collect();
        let mut cost = vec![INF; m * m];
        for (a, &u) in rem1.iter().enumerate() {
            for (b, &x) in rem2.iter().enumerate() {
                let inner = dist(io1[a].0, io2[b].0) + dist(io1[a].1, io2[b].1);
                cost[a * m + b] = (2 * self.anchored(u, Some(x)) + inner) as i64;
            }
            let inner = size(io1[a].0) + size(io1[a].1);
            cost[a * m + r2 + a] = (2 * self.anchored(u, None) + inner) as i64;
        }
        for (b, &x) in rem2.iter().enumerate() {
            let inner = size(io2[b].0) + size(io2[b].1);
            cost[(r1 + b) * m + b] = (2 * self.inserted_anchor(x) + inner) as i64;
            for e in 0..r1 {
                cost[(r1 + b) * m + r2 + e] = 0;
            }
        }
        let (assignment, value) = if m == 0 { (Vec::new(), 0) } else { hungarian(m, &cost) };
        Bound { rem1, rem2, cost, value, assignment }
    }

    fn complete_from(&self, b: &Bound) -> Vec<Option<usize>> {
        let mut map = self.map.clone();
        for (a, &u) in b.rem1.iter().enumerate() {
            let col = b.assignment[a];
            map[u] = if col < b.rem2.len() { Some(b.rem2[col]) } else { None };
        }
        map
    }

    fn run(&mut self, g: u64) {
        if self.timed_out {
            return;
        }
        if Instant::now() >= self.deadline {
            self.timed_out = true;
            return;
        }
        let b = self.bound();
        let lb = (b.value as u64).div_ceil(2);
        if g + lb >= self.best {
            return;
        }
        let full = self.complete_from(&b);
        let ub = mapping_cost(self.g1, self.g2, &full);
        if ub < self.best {
            self.best = ub;
        }
        if b.rem1.is_empty() || g + lb >= self.best {
            return;
        }
        // Branch on the unmapped node most tied to the mapped part.
        let pick = (0..b.rem1.len())
            .max_by_key(|&a| {
                let u = b.rem1[a];
                let tied = (0..self.g1.n)
                    .filter(|&w| self.assigned[w])
                    .map(|w| size(self.g1.e(w, u)) + size(self.g1.e(u, w)))
                    .sum::<u64>();
                let deg = (0..self.g1.n).map(|w| size(self.g1.e(w, u)) + size(self.g1.e(u, w))).sum::<u64>();
                (tied, deg, std::cmp::Reverse(u))
            })
            .unwrap();
        let u = b.rem1[pick];
        let m = b.rem1.len() + b.rem2.len();
        let mut options: Vec<(i64, Option<usize>)> =
            b.rem2.iter().enumerate().map(|(k, &x)| (b.cost[pick * m + k], Some(x))).collect();
        options.push((b.cost[pick * m + b.rem2.len() + pick], None));
        options.sort_by_key(|&(c, x)| (c, x.map_or(usize::MAX, |x| x)));
        let mut tried: Vec<usize> = Vec::new();
        for (_, x) in options {
            if let Some(x) = x {
                let t = self.g2.twin[x];
                if tried.contains(&t) {
                    continue;
                }
                tried.push(t);
            }
            let step = self.anchored(u, x);
            if g + step >= self.best {
                continue;
            }
            self.assigned[u] = true;
            self.map[u] = x;
            if let Some(x) = x {
                self.used[x] = true;
            }
            self.run(g + step);
            self.assigned[u] = false;
            self.map[u] = None;
            if let Some(x) = x {
                self.used[x] = false;
            }
            if self.timed_out {
                return;
            }
        }
    }
}

pub fn graph_edit_distance(g1: &AigGraph, g2: &AigGraph, timeout: Duration) -> GedOutcome {
    let p1 = Prepared::new(g1);
    let p2 = Prepared::new(g2);
    let mut s = Search {
        g1: &p1,
        g2: &p2,
        map: vec![None; p1.n],
        assigned: vec![false; p1.n],
        used: vec![false; p2.n],
        best: u64::MAX,
        deadline: Instant::now() + timeout,
        timed_out: false,
    };
    s.best = mapping_cost(&p1, &p2, &vec![None; p1.n]);
    s.run(0);
    let best = s.best as u32;
    if s.timed_out {
        GedOutcome::Timeout { upper: best }
    } else {
        GedOutcome::Exact(best)
    }
}
