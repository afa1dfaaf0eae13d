//! Tseitin encoding of netlists with constant folding.

use crate::covert::{keyed_eval, ApparentCell};
use crate::netlist::{Gate, Lit, Netlist};

use super::sat::{ClauseSink, SatLit};

/// Symbolic value of a net: a known constant or a solver literal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sym {
    Const(bool),
    Lit(SatLit),
}

impl Sym {
    pub fn negate(self) -> Sym {
        match self {
            Sym::Const(b) => Sym::Const(!b),
            Sym::Lit(l) => Sym::Lit(!l),
        }
    }

    fn with(self, neg: bool) -> Sym {
        if neg {
            self.negate()
        } else {
            self
        }
    }
}

/// Encodes `n` into `sink`. `inputs[k]` is the value of the k-th input in
/// gate order and `key[k]` of key bit k. Returns the value of every net.
pub fn encode_nets<S: ClauseSink>(sink: &mut S, n: &Netlist, inputs: &[Sym], key: &[Sym]) -> Vec<Sym> {
    let mut val: Vec<Sym> = Vec::with_capacity(n.gates.len());
    let mut next_input = 0;
    let lit = |val: &[Sym], l: Lit| val[l.net].with(l.neg);
    for g in &n.gates {
        let v = match g {
            Gate::Input(_) => {
                next_input += 1;
                inputs[next_input - 1]
            }
            Gate::Key(k) => key[*k],
            Gate::Const(b) => Sym::Const(*b),
            Gate::And { inputs, negate } => {
                let ins: Vec<Sym> = inputs.iter().map(|&l| lit(&val, l)).collect();
                encode_and(sink, &ins).with(*negate)
            }
            Gate::Xor(a, b) => encode_xor(sink, lit(&val, *a), lit(&val, *b)),
            Gate::Keyed { cell, inputs, key: kb } => {
                let mut args = vec![val[kb[0]], val[kb[1]]];
                args.extend(inputs.iter().map(|&i| val[i]));
                encode_keyed(sink, *cell, &args)
            }
        };
        val.push(v);
    }
    val
}

/// Values of the outputs of `n`.
pub fn encode_outputs<S: ClauseSink>(sink: &mut S, n: &Netlist, inputs: &[Sym], key: &[Sym]) -> Vec<Sym> {
    let val = encode_nets(sink, n, inputs, key);
    n.outputs.iter().map(|(_, l)| val[l.net].with(l.neg)).collect()
}

pub fn encode_and<S: ClauseSink>(sink: &mut S, ins: &[Sym]) -> Sym {
    let mut lits: Vec<SatLit> = Vec::new();
    for &s in ins {
        match s {
            Sym::Const(false) => return Sym::Const(false),
            Sym::Const(true) => {}
            Sym::Lit(l) => lits.push(l),
        }
    }
    lits.sort();
    lits.dedup();
    if lits.windows(2).any(|w| w[0] == !w[1]) {
        return Sym::Const(false);
    }
    match lits.len() {
        0 => Sym::Const(true),
        1 => Sym::Lit(lits[0]),
        _ => {
            let y = sink.new_var();
            let mut big = vec![y];
            for &l in &lits {
                sink.add_clause(&[!y, l]);
                big.push(!l);
            }
            sink.add_clause(&big);
            Sym::Lit(y)
        }
    }
}

pub fn encode_xor<S: ClauseSink>(sink: &mut S, a: Sym, b: Sym) -> Sym {
    match (a, b) {
        (Sym::Const(x), s) | (s, Sym::Const(x)) => s.with(x),
        (Sym::Lit(x), Sym::Lit(y)) => {
            if x == y {
                return Sym::Const(false);
            }
            if x == !y {
                return Sym::Const(true);
            }
            let z = sink.new_var();
            sink.add_clause(&[!z, x, y]);
            sink.add_clause(&[!z, !x, !y]);
            sink.add_clause(&[z, !x, y]);
            sink.add_clause(&[z, x, !y]);
            Sym::Lit(z)
        }
    }
}

/// `args` are the two key bits followed by the cell inputs. Constant
/// arguments are folded in; the remaining function is encoded by its truth
/// table over the free literals.
pub fn encode_keyed<S: ClauseSink>(sink: &mut S, cell: ApparentCell, args: &[Sym]) -> Sym {
    let mut free: Vec<SatLit> = Vec::new();
    let mut slot = Vec::with_capacity(args.len());
    for a in args {
        slot.push(match a {
            Sym::Const(_) => None,
            Sym::Lit(l) => {
                let v = SatLit::new(l.var(), false);
                Some(match free.iter().position(|&f| f == v) {
                    Some(i) => i,
                    None => {
                        free.push(v);
                        free.len() - 1
                    }
                })
            }
        });
    }
    let eval = |row: usize| {
        let vals: Vec<bool> = args
            .iter()
            .zip(&slot)
            .map(|(a, s)| match (a, s) {
                (Sym::Const(b), _) => *b,
                (Sym::Lit(l), Some(i)) => ((row >> i) & 1 == 1) != l.is_negated(),
                _ => unreachable!(),
            })
            .collect();
        keyed_eval(cell, [vals[0], vals[1]], &vals[2..])
    };
    let rows = 1usize << free.len();
    let outs: Vec<bool> = (0..rows).map(eval).collect();
    if outs.iter().all(|&o| o) {
        return Sym::Const(true);
    }
    if outs.iter().all(|&o| !o) {
        return Sym::Const(false);
    }
    for (i, &f) in free.iter().enumerate() {
        if (0..rows).all(|r| outs[r] == ((r >> i) & 1 == 1)) {
            return Sym::Lit(f);
        }
        if (0..rows).all(|r| outs[r] != ((r >> i) & 1 == 1)) {
            return Sym::Lit(!f);
        }
    }
    let y = sink.new_var();
    for (r, &o) in outs.iter().enumerate() {
        let mut c: Vec<SatLit> = free.iter().enumerate().map(|(i, &f)| if (r >> i) & 1 == 1 { !f } else { f }).collect();
        c.push(if o { y } else { !y });
        sink.add_clause(&c);
    }
    Sym::Lit(y)
}

/// Adds clauses forcing `s` to `value`; returns false if `s` is a constant
/// of the opposite value.
pub fn assert_value<S: ClauseSink>(sink: &mut S, s: Sym, value: bool) -> bool {
    match s {
        Sym::Const(b) => b == value,
        Sym::Lit(l) => {
            sink.add_clause(&[if value { l } else { !l }]);
            true
        }
    }
}

/// Literal equal to `s`, allocating a fixed variable for constants.
pub fn to_lit<S: ClauseSink>(sink: &mut S, s: Sym) -> SatLit {
    match s {
        Sym::Lit(l) => l,
        Sym::Const(b) => {
            let v = sink.new_var();
            sink.add_clause(&[if b { v } else { !v }]);
            v
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::sat::{SolveBudget, SolveResult, Solver};
    use crate::netlist::NetId;

    /// For every assignment, forcing inputs and keys and solving must give
    /// the simulated outputs.
    fn check(n: &Netlist) {
        let ni = n.inputs().len();
        let nk = n.key_len();
        for r in 0..1usize << (ni + nk) {
            let bits: Vec<bool> = (0..ni + nk).map(|b| (r >> b) & 1 == 1).collect();
            let mut s = Solver::new();
            let ins: Vec<Sym> = (0..ni).map(|_| Sym::Lit(s.new_var())).collect();
            let keys: Vec<Sym> = (0..nk).map(|_| Sym::Lit(s.new_var())).collect();
            let outs = encode_outputs(&mut s, n, &ins, &keys);
            for (sym, &b) in ins.iter().chain(&keys).zip(&bits) {
                assert_value(&mut s, *sym, b);
            }
            assert_eq!(s.solve(&[], SolveBudget::default()), SolveResult::Sat);
            let want = n.simulate(&bits[..ni], &bits[ni..]).unwrap();
            for (o, w) in outs.iter().zip(want) {
                let got = match o {
                    Sym::Const(b) => *b,
                    Sym::Lit(l) => s.lit_value(*l),
                };
                assert_eq!(got, w);
            }
        }
    }

    #[test]
    fn encodings_match_simulation() {
        for cell in [ApparentCell::Inverter, ApparentCell::Buffer, ApparentCell::Nand] {
            let mut n = Netlist::new();
            let a = n.input("a");
            let b = n.input("b");
            let k0 = n.add(Gate::Key(0));
            let k1 = n.add(Gate::Key(1));
            let ins: Vec<NetId> = if cell == ApparentCell::Nand { vec![a, b] } else { vec![a] };
            let y = n.add(Gate::Keyed { cell, inputs: ins, key: [k0, k1] });
            let t = n.add(Gate::Const(true));
            let z = n.add(Gate::And { inputs: vec![Lit::pos(y), Lit::neg(b), Lit::pos(t)], negate: true });
            let k2 = n.add(Gate::Key(2));
            let x = n.add(Gate::Xor(Lit::pos(z), Lit::neg(k2)));
            let w = n.add(Gate::And { inputs: vec![Lit::pos(a), Lit::neg(a)], negate: false });
            n.add_output("x", Lit::pos(x));
            n.add_output("y", Lit::neg(y));
            n.add_output("w", Lit::pos(w));
            check(&n);
        }
    }

    #[test]
    fn constants_fold() {
        let mut cnf = crate::attack::sat::Cnf::default();
        let a = Sym::Lit(cnf.new_var());
        assert_eq!(encode_and(&mut cnf, &[a, Sym::Const(false)]), Sym::Const(false));
        assert_eq!(encode_and(&mut cnf, &[a, Sym::Const(true)]), a);
        assert_eq!(encode_xor(&mut cnf, a, Sym::Const(true)), a.negate());
        assert_eq!(encode_keyed(&mut cnf, ApparentCell::Inverter, &[Sym::Const(true), Sym::Const(false), a]), Sym::Const(true));
        assert_eq!(encode_keyed(&mut cnf, ApparentCell::Inverter, &[Sym::Const(false), Sym::Const(false), a]), a.negate());
        assert!(cnf.clauses.is_empty());
    }
}
