//! Text serialization of compiled circuits.
//!
//! One node per line, children before parents:
//!
//! ```text
//! sdd 5
//! 0 F
//! 1 T
//! 2 L A
//! 3 L !A
//! 4 D 1 2,1 3,0
//! root 4
//! ```
//!
//! Decision lines carry the vtree node id followed by `prime,sub` pairs.
//! Elements are ordered by the lexicographically smallest model of their
//! prime and nodes are numbered in post-order, so equal circuits over the
//! same vtree always serialize to the same bytes.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::logic::{PartialAssignment, Scenario, VarId};

use super::sdd::{Node, NodeId, SddManager};
use super::vtree::{Vtree, VtreeId};
use super::{Circuit, CircuitError};

impl Circuit {
    pub fn to_text(&self, scenario: &Scenario) -> String {
        let m = &self.manager;
        let mut keys: HashMap<NodeId, Vec<bool>> = HashMap::new();
        let mut ids: HashMap<NodeId, u32> = HashMap::new();
        let mut lines: Vec<String> = vec!["0 F".into(), "1 T".into()];
        ids.insert(NodeId::FALSE, 0);
        ids.insert(NodeId::TRUE, 1);
        emit(m, self.root.node(), scenario, &mut keys, &mut ids, &mut lines);
        let mut out = format!("sdd {}\n", lines.len());
        for l in &lines {
            out.push_str(l);
            out.push('\n');
        }
        let _ = writeln!(out, "root {}", ids[&self.root.node()]);
        out
    }

    /// Reads a circuit written by [`Circuit::to_text`]. The vtree must be the
    /// one the circuit was compiled against; every decision node is checked.
    pub fn from_text(text: &str, vtree: Vtree, scenario: &Scenario) -> Result<Circuit, CircuitError> {
        let mut manager = SddManager::new(vtree);
        let mut table: Vec<NodeId> = Vec::new();
        let mut root = None;
        let mut declared = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| CircuitError::Parse { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let mut toks = raw.split_whitespace();
            let head = toks.next().unwrap();
            if head == "sdd" {
                declared = Some(parse_num(toks.next(), line)? as usize);
                continue;
            }
            if head == "root" {
                let id = parse_num(toks.next(), line)? as usize;
                root = Some(*table.get(id).ok_or_else(|| err(format!("root {id} is undefined")))?);
                continue;
            }
            let id: usize = head.parse().map_err(|_| err(format!("bad node id `{head}`")))?;
            if id != table.len() {
                return Err(err(format!("expected node id {}, found {id}", table.len())));
            }
            let kind = toks.next().ok_or_else(|| err("missing node kind".into()))?;
            let node = match kind {
                "F" => NodeId::FALSE,
                "T" => NodeId::TRUE,
                "L" => {
                    let lit = toks.next().ok_or_else(|| err("missing literal".into()))?;
                    let (name, positive) = match lit.strip_prefix('!') {
                        Some(n) => (n, false),
                        None => (lit, true),
                    };
                    let v = scenario.var(name).ok_or_else(|| err(format!("unknown variable `{name}`")))?;
                    manager.literal(v, positive).node()
                }
                "D" => {
                    let v = parse_num(toks.next(), line)?;
                    if v as usize >= manager.vtree().num_nodes() {
                        return Err(err(format!("vtree node {v} out of range")));
                    }
                    let mut elements = Vec::new();
                    for pair in toks.by_ref() {
                        let (p, s) = pair.split_once(',').ok_or_else(|| err(format!("bad element `{pair}`")))?;
                        let lookup = |t: &str| -> Result<NodeId, CircuitError> {
                            let k: usize = t.parse().map_err(|_| err(format!("bad node reference `{t}`")))?;
                            table.get(k).copied().ok_or_else(|| err(format!("node {k} referenced before definition")))
                        };
                        elements.push((lookup(p)?, lookup(s)?));
                    }
                    manager
                        .decision_from_parts(VtreeId(v), elements)
                        .map_err(|e| err(e.to_string()))?
                }
                other => return Err(err(format!("unknown node kind `{other}`"))),
            };
            if toks.next().is_some() {
                return Err(err("trailing tokens".into()));
            }
            table.push(node);
        }
        if let Some(n) = declared {
            if n != table.len() {
                return Err(CircuitError::Parse { line: 1, message: format!("header declares {n} nodes, found {}", table.len()) });
            }
        }
        let root = root.ok_or_else(|| CircuitError::Parse { line: text.lines().count(), message: "missing root line".into() })?;
        let mut c = Circuit { root: manager.sdd(root), manager };
        c.validate()?;
        Ok(c)
    }
}

fn parse_num(tok: Option<&str>, line: usize) -> Result<u32, CircuitError> {
    let t = tok.ok_or_else(|| CircuitError::Parse { line, message: "missing number".into() })?;
    t.parse().map_err(|_| CircuitError::Parse { line, message: format!("bad number `{t}`") })
}

fn emit(
    m: &SddManager,
    n: NodeId,
    sc: &Scenario,
    keys: &mut HashMap<NodeId, Vec<bool>>,
    ids: &mut HashMap<NodeId, u32>,
    lines: &mut Vec<String>,
) {
    if ids.contains_key(&n) {
        return;
    }
    let line = match m.raw(n).clone() {
        Node::Literal { var, positive } => format!("L {}{}", if positive { "" } else { "!" }, sc.name(var)),
        Node::Decision { vtree, elements } => {
            let left = m.vtree().left(vtree);
            let mut sorted: Vec<(Vec<bool>, NodeId, NodeId)> =
                elements.iter().map(|&(p, s)| (min_model(m, p, left, keys), p, s)).collect();
            sorted.sort();
            let mut text = format!("D {}", vtree.0);
            for (_, p, s) in &sorted {
                emit(m, *p, sc, keys, ids, lines);
                emit(m, *s, sc, keys, ids, lines);
                let _ = write!(text, " {},{}", ids[p], ids[s]);
            }
            text
        }
        Node::False | Node::True => unreachable!(),
    };
    let id = lines.len() as u32;
    ids.insert(n, id);
    lines.push(format!("{id} {line}"));
}

/// Smallest model of `n` over the variables below `v`, sorted by id, with
/// false before true.
fn min_model(m: &SddManager, n: NodeId, v: VtreeId, keys: &mut HashMap<NodeId, Vec<bool>>) -> Vec<bool> {
    if let Some(k) = keys.get(&n) {
        return k.clone();
    }
    let mut vars: Vec<VarId> = m.vtree().vars_below(v).to_vec();
    vars.sort();
    let mut ev = PartialAssignment::empty(m.num_vars());
    let s = m.sdd(n);
    let mut key = Vec::with_capacity(vars.len());
    for x in vars {
        ev.set(x, false);
        if m.model_count_with(s, &ev) == 0u32.into() {
            ev.set(x, true);
            key.push(true);
        } else {
            key.push(false);
        }
    }
    keys.insert(n, key.clone());
    key
}
