//! ASCII AIGER (`aag`) reader and writer, combinational subset.
//!
//! Symbol-table names are kept on PI and PO nodes. Several inputs may share a
//! symbol name; they are read back as leaf copies of one primary input, which
//! is how cone trees with duplicated leaves survive a round trip.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{AigError, AigGraph, Fanin, NodeType, Result};

struct Header {
    max_var: u64,
    inputs: usize,
    outputs: usize,
    ands: usize,
}

fn parse_header(line: &str) -> Result<Header> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let bad = |msg: &str| AigError::MalformedHeader { line: 1, msg: msg.to_string() };
    match toks.first() {
        None => return Err(AigError::MissingHeader),
        Some(&"aag") => {}
        Some(&"aig") => return Err(bad("binary AIGER is not supported")),
        Some(t) => return Err(bad(&format!("expected `aag`, found `{t}`"))),
    }
    if toks.len() < 6 {
        return Err(bad("expected `aag M I L O A`"));
    }
    let mut nums = Vec::with_capacity(toks.len() - 1);
    for t in &toks[1..] {
        nums.push(t.parse::<u64>().map_err(|_| bad(&format!("`{t}` is not a number")))?);
    }
    if nums[2] != 0 {
        return Err(AigError::LatchesUnsupported { line: 1 });
    }
    if nums[5..].iter().any(|&x| x != 0) {
        return Err(bad("bad-state, constraint, justice and fairness sections are not supported"));
    }
    let h = Header {
        max_var: nums[0],
        inputs: nums[1] as usize,
        outputs: nums[3] as usize,
        ands: nums[4] as usize,
    };
    if (h.inputs + h.ands) as u64 > h.max_var {
        return Err(bad("M is smaller than I + L + A"));
    }
    Ok(h)
}

fn parse_lits(line: &str, lineno: usize, count: usize) -> Result<Vec<u64>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != count {
        return Err(AigError::Syntax {
            line: lineno,
            msg: format!("expected {count} literal(s), found {}", toks.len()),
        });
    }
    toks.iter()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| AigError::Syntax { line: lineno, msg: format!("`{t}` is not a literal") })
        })
        .collect()
}

#[derive(Clone, Copy)]
enum VarDef {
    Input(usize),
    And(usize),
}

/// Parses an ASCII AIGER file into a block-layout graph (PIs, ANDs, POs).
pub fn parse_aiger(text: &str) -> Result<AigGraph> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let header = match lines.next() {
        Some((_, l)) if !l.trim().is_empty() => parse_header(l)?,
        _ => return Err(AigError::MissingHeader),
    };
    let eof_line = text.lines().count() + 1;
    let mut next = |what: &str| -> Result<(usize, &str)> {
        lines.next().ok_or_else(|| AigError::Syntax {
            line: eof_line,
            msg: format!("unexpected end of file while reading {what}"),
        })
    };

    let mut defs: HashMap<u64, VarDef> = HashMap::new();
    for k in 0..header.inputs {
        let (ln, l) = next("inputs")?;
        let lit = parse_lits(l, ln, 1)?[0];
        if lit < 2 || lit % 2 != 0 || lit / 2 > header.max_var {
            return Err(AigError::Syntax { line: ln, msg: format!("invalid input literal {lit}") });
        }
        if defs.insert(lit / 2, VarDef::Input(k)).is_some() {
            return Err(AigError::Syntax { line: ln, msg: format!("variable {} defined twice", lit / 2) });
        }
    }
    let mut outputs = Vec::with_capacity(header.outputs);
    for _ in 0..header.outputs {
        let (ln, l) = next("outputs")?;
        outputs.push((ln, parse_lits(l, ln, 1)?[0]));
    }
    let mut ands = Vec::with_capacity(header.ands);
    for k in 0..header.ands {
        let (ln, l) = next("and gates")?;
        let v = parse_lits(l, ln, 3)?;
        if v[0] < 2 || v[0] % 2 != 0 || v[0] / 2 > header.max_var {
            return Err(AigError::Syntax { line: ln, msg: format!("invalid and-gate literal {}", v[0]) });
        }
        if defs.insert(v[0] / 2, VarDef::And(k)).is_some() {
            return Err(AigError::Syntax { line: ln, msg: format!("variable {} defined twice", v[0] / 2) });
        }
        ands.push((ln, v[0], v[1], v[2]));
    }

    let mut in_names: Vec<Option<String>> = vec![None; header.inputs];
    let mut out_names: Vec<Option<String>> = vec![None; header.outputs];
    for (ln, l) in lines {
        if l == "c" || l.starts_with("c ") {
            break;
        }
        if l.trim().is_empty() {
            continue;
        }
        let (tag, name) = l.split_once(' ').ok_or_else(|| AigError::Syntax {
            line: ln,
            msg: "symbol entry without a name".into(),
        })?;
        let (kind, idx) = tag.split_at(1);
        let idx: usize = idx
            .parse()
            .map_err(|_| AigError::Syntax { line: ln, msg: format!("bad symbol tag `{tag}`") })?;
        let slot = match kind {
            "i" => in_names.get_mut(idx),
            "o" => out_names.get_mut(idx),
            "l" => return Err(AigError::LatchesUnsupported { line: ln }),
            _ => None,
        }
        .ok_or_else(|| AigError::Syntax { line: ln, msg: format!("bad symbol tag `{tag}`") })?;
        *slot = Some(name.to_string());
    }

    let check = |lit: u64, ln: usize| -> Result<()> {
        if lit / 2 == 0 || defs.contains_key(&(lit / 2)) {
            Ok(())
        } else {
            Err(AigError::DanglingLiteral { line: ln, literal: lit })
        }
    };
    for &(ln, _, a, b) in &ands {
        check(a, ln)?;
        check(b, ln)?;
    }
    for &(ln, lit) in &outputs {
        check(lit, ln)?;
    }
    let uses_const = ands.iter().any(|&(_, _, a, b)| a < 2 || b < 2) || outputs.iter().any(|&(_, l)| l < 2);

    // Topological order of and gates (definition order when already sorted).
    let mut order = Vec::with_capacity(ands.len());
    let mut state = vec![0u8; ands.len()];
    for root in 0..ands.len() {
        if state[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, false)];
        while let Some((k, expanded)) = stack.pop() {
            if expanded {
                state[k] = 2;
                order.push(k);
                continue;
            }
            if state[k] != 0 {
                continue;
            }
            state[k] = 1;
            stack.push((k, true));
            let (ln, _, a, b) = ands[k];
            for lit in [b, a] {
                if let Some(VarDef::And(c)) = defs.get(&(lit / 2)) {
                    match state[*c] {
                        0 => stack.push((*c, false)),
                        1 => return Err(AigError::Syntax { line: ln, msg: "combinational cycle".into() }),
                        _ => {}
                    }
                }
            }
        }
    }

    let mut g = AigGraph::new();
    for name in in_names {
        g.add_node(NodeType::Pi, name);
    }
    let const_node = uses_const.then(|| g.add_node(NodeType::And, None));
    let mut and_node = vec![0usize; ands.len()];
    let resolve = |lit: u64, and_node: &[usize]| -> Fanin {
        let inverted = lit % 2 == 1;
        match defs.get(&(lit / 2)) {
            None => Fanin { node: const_node.unwrap(), inverted: !inverted },
            Some(VarDef::Input(k)) => Fanin { node: *k, inverted },
            Some(VarDef::And(k)) => Fanin { node: and_node[*k], inverted },
        }
    };
    for &k in &order {
        let (_, _, a, b) = ands[k];
        let fa = resolve(a, &and_node);
        let fb = resolve(b, &and_node);
        and_node[k] = g.add_and(fa, fb);
    }
    for (k, &(_, lit)) in outputs.iter().enumerate() {
        let f = resolve(lit, &and_node);
        let id = g.add_node(NodeType::Po, out_names[k].clone());
        g.add_edge(f.node, id, f.inverted);
    }
    Ok(g)
}

/// Writes a canonical graph as ASCII AIGER. The graph is emitted in block
/// layout; zero-fanin AND nodes are written as the constant literal.
pub fn write_aiger(g: &AigGraph) -> Result<String> {
    g.ensure_canonical()?;
    let (g, _) = g.to_block_layout();
    let fanins = g.fanins();
    let mut lit = vec![0u64; g.node_count()];
    let mut next_var = 1u64;
    let pis = g.ids_of(NodeType::Pi);
    for &v in &pis {
        lit[v] = 2 * next_var;
        next_var += 1;
    }
    let mut gates = Vec::new();
    for v in g.ids_of(NodeType::And) {
        if fanins[v].is_empty() {
            lit[v] = 1;
        } else {
            lit[v] = 2 * next_var;
            next_var += 1;
            gates.push(v);
        }
    }
    let flit = |f: &super::Fanin| lit[f.node] ^ (f.inverted as u64);
    let pos = g.ids_of(NodeType::Po);

    let mut out = String::new();
    let _ = writeln!(out, "aag {} {} 0 {} {}", next_var - 1, pis.len(), pos.len(), gates.len());
    for &v in &pis {
        let _ = writeln!(out, "{}", lit[v]);
    }
    for &v in &pos {
        let _ = writeln!(out, "{}", flit(&fanins[v][0]));
    }
    for &v in &gates {
        let mut a = flit(&fanins[v][0]);
        let mut b = flit(&fanins[v][1]);
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
        let _ = writeln!(out, "{} {} {}", lit[v], a, b);
    }
    for (k, &v) in pis.iter().enumerate() {
        if let Some(n) = &g.nodes[v].name {
            let _ = writeln!(out, "i{k} {n}");
        }
    }
    for (k, &v) in pos.iter().enumerate() {
        if let Some(n) = &g.nodes[v].name {
            let _ = writeln!(out, "o{k} {n}");
        }
    }
    Ok(out)
}
