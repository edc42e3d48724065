//! Text serialization of fitted models.
//!
//! ```text
//! psdd 3
//! 0 D b T F 1.0000000000000000e0 0.0000000000000000e0
//! 1 D b T T 5.0000000000000000e-1 5.0000000000000000e-1
//! 2 D a 0 1 2.5000000000000000e-1 7.5000000000000000e-1
//! root 2
//! ```
//!
//! Each decision line lists the decided variable, the `¬x` and `x` branch
//! targets (`F`, `T` or a node id) and their parameters. Parameters are
//! written with 17 significant digits so they parse back to the same bits.

use std::fmt::Write as _;

use crate::circuits::Circuit;
use crate::logic::Scenario;

use super::{Child, Psdd, PsddError};

impl Psdd {
    pub fn to_text(&self, scenario: &Scenario) -> String {
        let mut out = format!("psdd {}\n", self.nodes.len());
        let child = |c: Child| match c {
            Child::Bottom => "F".to_string(),
            Child::Top => "T".to_string(),
            Child::Node(i) => i.to_string(),
        };
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i} D {} {} {} {:.16e} {:.16e}",
                scenario.name(n.var),
                child(n.children[0]),
                child(n.children[1]),
                n.theta[0],
                n.theta[1]
            );
        }
        let _ = writeln!(out, "root {}", self.root());
        out
    }

    /// Reads a model written by [`Psdd::to_text`] and checks that its
    /// structure is the one `circuit` induces.
    pub fn from_text(text: &str, circuit: &Circuit, scenario: &Scenario) -> Result<Psdd, PsddError> {
        let mut p = Psdd::skeleton(circuit)?;
        let mut seen = 0usize;
        let mut root = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| PsddError::Parse { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = raw.split_whitespace().collect();
            match toks[0] {
                "psdd" => {
                    let n: usize = toks.get(1).and_then(|t| t.parse().ok()).ok_or_else(|| err("bad header".into()))?;
                    if n != p.nodes.len() {
                        return Err(PsddError::Mismatch(format!("{n} nodes in file, circuit induces {}", p.nodes.len())));
                    }
                }
                "root" => {
                    root = Some(toks.get(1).and_then(|t| t.parse::<usize>().ok()).ok_or_else(|| err("bad root".into()))?);
                }
                _ => {
                    if toks.len() != 7 || toks[1] != "D" {
                        return Err(err(format!("expected `id D var lo hi θlo θhi`, found `{raw}`")));
                    }
                    let id: usize = toks[0].parse().map_err(|_| err(format!("bad node id `{}`", toks[0])))?;
                    if id != seen {
                        return Err(err(format!("expected node {seen}, found {id}")));
                    }
                    let node = p.nodes.get_mut(id).ok_or_else(|| PsddError::Mismatch(format!("extra node {id}")))?;
                    let var = scenario.var(toks[2]).ok_or_else(|| err(format!("unknown variable `{}`", toks[2])))?;
                    let children = [parse_child(toks[3]), parse_child(toks[4])];
                    if var != node.var || children != [Some(node.children[0]), Some(node.children[1])] {
                        return Err(PsddError::Mismatch(format!("node {id} differs from the circuit's support")));
                    }
                    for b in 0..2 {
                        let t: f64 = toks[5 + b].parse().map_err(|_| err(format!("bad parameter `{}`", toks[5 + b])))?;
                        if !(0.0..=1.0).contains(&t) {
                            return Err(err(format!("parameter {t} outside [0, 1]")));
                        }
                        if node.children[b] == Child::Bottom && t != 0.0 {
                            return Err(err("false-terminal element with nonzero parameter".into()));
                        }
                        node.theta[b] = t;
                    }
                    if (node.theta[0] + node.theta[1] - 1.0).abs() > 1e-9 {
                        return Err(err("parameters do not sum to 1".into()));
                    }
                    node.refresh_logs();
                    seen += 1;
                }
            }
        }
        if seen != p.nodes.len() {
            return Err(PsddError::Mismatch(format!("file has {seen} nodes, circuit induces {}", p.nodes.len())));
        }
        if root != Some(p.root()) {
            return Err(PsddError::Mismatch("root line missing or wrong".into()));
        }
        Ok(p)
    }
}

fn parse_child(t: &str) -> Option<Child> {
    match t {
        "F" => Some(Child::Bottom),
        "T" => Some(Child::Top),
        _ => t.parse().ok().map(Child::Node),
    }
}
