//! Built-in combinational benchmark circuits and random tree generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aig::{AigGraph, Fanin, NodeType};

/// Incremental AIG construction over literals.
#[derive(Default)]
pub struct Builder {
    pub g: AigGraph,
}

impl Builder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn input(&mut self, name: impl Into<String>) -> Fanin {
        Fanin::plain(self.g.add_pi(name))
    }

    pub fn and(&mut self, a: Fanin, b: Fanin) -> Fanin {
        Fanin::plain(self.g.add_and(a, b))
    }

    pub fn or(&mut self, a: Fanin, b: Fanin) -> Fanin {
        not(self.and(not(a), not(b)))
    }

    pub fn nand(&mut self, a: Fanin, b: Fanin) -> Fanin {
        not(self.and(a, b))
    }

    pub fn xor(&mut self, a: Fanin, b: Fanin) -> Fanin {
        let x = self.and(a, not(b));
        let y = self.and(not(a), b);
        self.or(x, y)
    }

    pub fn mux(&mut self, s: Fanin, t: Fanin, e: Fanin) -> Fanin {
        let x = self.and(s, t);
        let y = self.and(not(s), e);
        self.or(x, y)
    }

    pub fn output(&mut self, name: impl Into<String>, f: Fanin) {
        self.g.add_po(name, f);
    }

    pub fn finish(self) -> AigGraph {
        self.g
    }
}

pub fn not(f: Fanin) -> Fanin {
    Fanin { node: f.node, inverted: !f.inverted }
}

/// The five-input, two-output NAND benchmark.
pub fn c17() -> AigGraph {
    let mut b = Builder::new();
    let i: Vec<Fanin> = ["1", "2", "3", "6", "7"].iter().map(|n| b.input(format!("N{n}"))).collect();
    let n10 = b.nand(i[0], i[2]);
    let n11 = b.nand(i[2], i[3]);
    let n16 = b.nand(i[1], n11);
    let n19 = b.nand(n11, i[4]);
    let n22 = b.nand(n10, n16);
    let n23 = b.nand(n16, n19);
    b.output("N22", n22);
    b.output("N23", n23);
    b.finish()
}

/// Sum and carry of one bit.
pub fn half_adder() -> AigGraph {
    let mut b = Builder::new();
    let x = b.input("a");
    let y = b.input("b");
    let s = b.xor(x, y);
    let c = b.and(x, y);
    b.output("sum", s);
    b.output("carry", c);
    b.finish()
}

fn full_add(b: &mut Builder, x: Fanin, y: Fanin, c: Fanin) -> (Fanin, Fanin) {
    let t = b.xor(x, y);
    let s = b.xor(t, c);
    let g = b.and(x, y);
    let p = b.and(t, c);
    (s, b.or(g, p))
}

/// `bits`-wide ripple-carry adder with carry-in.
pub fn ripple_adder(bits: usize) -> AigGraph {
    let mut b = Builder::new();
    let xs: Vec<Fanin> = (0..bits).map(|k| b.input(format!("a{k}"))).collect();
    let ys: Vec<Fanin> = (0..bits).map(|k| b.input(format!("b{k}"))).collect();
    let mut c = b.input("cin");
    for k in 0..bits {
        let (s, co) = full_add(&mut b, xs[k], ys[k], c);
        b.output(format!("s{k}"), s);
        c = co;
    }
    b.output("cout", c);
    b.finish()
}

/// Unsigned `a > b` and `a == b` over `bits` bits.
pub fn comparator(bits: usize) -> AigGraph {
    let mut b = Builder::new();
    let xs: Vec<Fanin> = (0..bits).map(|k| b.input(format!("a{k}"))).collect();
    let ys: Vec<Fanin> = (0..bits).map(|k| b.input(format!("b{k}"))).collect();
    let mut gt: Option<Fanin> = None;
    let mut eq: Option<Fanin> = None;
    for k in 0..bits {
        let g = b.and(xs[k], not(ys[k]));
        let d = b.xor(xs[k], ys[k]);
        let e = not(d);
        gt = Some(match gt {
            None => g,
            Some(lower) => {
                let keep = b.and(e, lower);
                b.or(g, keep)
            }
        });
        eq = Some(match eq {
            None => e,
            Some(prev) => b.and(prev, e),
        });
    }
    b.output("gt", gt.expect("bits > 0"));
    b.output("eq", eq.expect("bits > 0"));
    b.finish()
}

/// `2^sel`-to-1 multiplexer.
pub fn mux_tree(sel: usize) -> AigGraph {
    let mut b = Builder::new();
    let s: Vec<Fanin> = (0..sel).map(|k| b.input(format!("s{k}"))).collect();
    let mut layer: Vec<Fanin> = (0..1usize << sel).map(|k| b.input(format!("d{k}"))).collect();
    for &sk in &s {
        layer = layer.chunks(2).map(|p| b.mux(sk, p[1], p[0])).collect();
    }
    b.output("y", layer[0]);
    b.finish()
}

/// `bits` x `bits` unsigned array multiplier.
pub fn multiplier(bits: usize) -> AigGraph {
    let mut b = Builder::new();
    let xs: Vec<Fanin> = (0..bits).map(|k| b.input(format!("a{k}"))).collect();
    let ys: Vec<Fanin> = (0..bits).map(|k| b.input(format!("b{k}"))).collect();
    let mut cols: Vec<Vec<Fanin>> = vec![Vec::new(); 2 * bits];
    for i in 0..bits {
        for j in 0..bits {
            let p = b.and(xs[i], ys[j]);
            cols[i + j].push(p);
        }
    }
    for k in 0..2 * bits {
        while cols[k].len() > 1 {
            let x = cols[k].remove(0);
            let y = cols[k].remove(0);
            if let Some(z) = (!cols[k].is_empty()).then(|| cols[k].remove(0)) {
                let (s, c) = full_add(&mut b, x, y, z);
                cols[k].push(s);
                if k + 1 < 2 * bits {
                    cols[k + 1].push(c);
                }
            } else {
                let s = b.xor(x, y);
                let c = b.and(x, y);
                cols[k].push(s);
                if k + 1 < 2 * bits {
                    cols[k + 1].push(c);
                }
            }
        }
    }
    for (k, col) in cols.into_iter().enumerate() {
        if let Some(&f) = col.first() {
            b.output(format!("p{k}"), f);
        }
    }
    b.finish()
}

/// Majority of three and odd parity of `n` inputs.
pub fn majority_parity(n: usize) -> AigGraph {
    let mut b = Builder::new();
    let xs: Vec<Fanin> = (0..n).map(|k| b.input(format!("x{k}"))).collect();
    let ab = b.and(xs[0], xs[1]);
    let bc = b.and(xs[1], xs[2]);
    let ac = b.and(xs[0], xs[2]);
    let t = b.or(ab, bc);
    let maj = b.or(t, ac);
    b.output("maj", maj);
    let mut p = xs[0];
    for &x in &xs[1..] {
        p = b.xor(p, x);
    }
    b.output("par", p);
    b.finish()
}

/// Random multi-output AIG: each AND reads two distinct earlier literals
/// with random polarity; outputs read the last `outputs` AND nodes.
pub fn random_aig(inputs: usize, ands: usize, outputs: usize, seed: u64) -> AigGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    let mut pool: Vec<Fanin> = (0..inputs).map(|k| b.input(format!("x{k}"))).collect();
    for _ in 0..ands {
        let i = rng.random_range(0..pool.len());
        let mut j = rng.random_range(0..pool.len() - 1);
        if j >= i {
            j += 1;
        }
        let x = Fanin { node: pool[i].node, inverted: rng.random() };
        let y = Fanin { node: pool[j].node, inverted: rng.random() };
        let z = b.and(x, y);
        pool.push(z);
    }
    let last = pool.len();
    for k in 0..outputs.min(ands) {
        let f = Fanin { node: pool[last - 1 - k].node, inverted: rng.random() };
        b.output(format!("y{k}"), f);
    }
    b.finish()
}

/// Random single-output tree with `leaves` leaf copies drawn from `pis`
/// input names, in block layout. It has `2 * leaves` nodes.
pub fn random_tree(leaves: usize, pis: usize, seed: u64) -> AigGraph {
    assert!(leaves >= 1 && pis >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = Builder::new();
    let mut pool: Vec<Fanin> = (0..leaves).map(|_| b.input(format!("x{}", rng.random_range(0..pis)))).collect();
    while pool.len() > 1 {
        let i = rng.random_range(0..pool.len());
        let x = pool.swap_remove(i);
        let j = rng.random_range(0..pool.len());
        let y = pool.swap_remove(j);
        let z = b.and(Fanin { inverted: rng.random(), ..x }, Fanin { inverted: rng.random(), ..y });
        pool.push(z);
    }
    let root = pool[0];
    b.output("y", Fanin { inverted: rng.random(), ..root });
    let (g, _) = b.finish().to_block_layout();
    debug_assert!(g.is_tree() && g.count(NodeType::Po) == 1);
    g
}

/// `count` random trees with 2 to `max_nodes / 2` leaves over up to six
/// inputs, named `t000`, `t001`, ...
pub fn toy_trees(count: usize, max_nodes: usize, seed: u64) -> Vec<(String, AigGraph)> {
    assert!(max_nodes >= 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let leaves = rng.random_range(2..=max_nodes / 2);
            let pis = rng.random_range(2..=6usize.min(leaves));
            (format!("t{k:03}"), random_tree(leaves, pis, rng.random()))
        })
        .collect()
}

/// Named circuits used when no benchmark directory is supplied.
pub fn suite() -> Vec<(String, AigGraph)> {
    vec![
        ("c17".into(), c17()),
        ("half_adder".into(), half_adder()),
        ("adder4".into(), ripple_adder(4)),
        ("adder8".into(), ripple_adder(8)),
        ("cmp4".into(), comparator(4)),
        ("cmp6".into(), comparator(6)),
        ("mux8".into(), mux_tree(3)),
        ("mult3".into(), multiplier(3)),
        ("mult4".into(), multiplier(4)),
        ("majpar5".into(), majority_parity(5)),
        ("rand_a".into(), random_aig(8, 40, 4, 1)),
        ("rand_b".into(), random_aig(10, 60, 5, 2)),
    ]
}
