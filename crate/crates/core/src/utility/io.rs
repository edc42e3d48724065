//! Utility file format.
//!
//! ```text
//! form linear
//! outcomes L_1 L_5 L_Y
//! L_1 0.2
//! L_5 1
//! ```
//!
//! Tabular files list `bitstring value` lines instead, one bit per outcome
//! variable. Context-relative files add a `contexts` line and start each
//! table with `[context <bitstring>]`. In linear tables unlisted variables
//! weigh 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::logic::{Scenario, VarId};

use super::{bits, Table, UtilityError, UtilityFunction};

impl UtilityFunction {
    pub fn to_text(&self, scenario: &Scenario) -> String {
        let names = |vs: &[VarId]| vs.iter().map(|v| scenario.name(*v)).collect::<Vec<_>>().join(" ");
        let mut out = String::from("# utilities are normalized so the best supported outcome scores 1\n");
        let _ = writeln!(out, "form {}", if self.linear { "linear" } else { "tabular" });
        let _ = writeln!(out, "outcomes {}", names(&self.outcomes));
        if let Some(c) = &self.contexts {
            let _ = writeln!(out, "contexts {}", names(c));
        }
        for (ctx, table) in &self.tables {
            if self.contexts.is_some() {
                let _ = writeln!(out, "[context {}]", bits(ctx));
            }
            match table {
                // `{:?}` is the shortest text that parses back to the same f64
                Table::Linear(w) => {
                    for (v, x) in self.outcomes.iter().zip(w) {
                        let _ = writeln!(out, "{} {:?}", scenario.name(*v), x);
                    }
                }
                Table::Tabular(t) => {
                    for (o, x) in t {
                        let _ = writeln!(out, "{} {:?}", bits(o), x);
                    }
                }
            }
        }
        out
    }

    /// Parses a utility file. Without an `outcomes` line the scenario's
    /// outcome variables are used.
    pub fn from_text(text: &str, scenario: &Scenario) -> Result<UtilityFunction, UtilityError> {
        let mut linear = None;
        let mut outcomes: Option<Vec<VarId>> = None;
        let mut contexts: Option<Vec<VarId>> = None;
        let mut tables: BTreeMap<Vec<bool>, Table> = BTreeMap::new();
        let mut current: Option<Vec<bool>> = None;
        let resolve = |names: &[&str]| -> Result<Vec<VarId>, UtilityError> {
            names.iter().map(|n| scenario.var(n).ok_or_else(|| UtilityError::UnknownVariable(n.to_string()))).collect()
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| UtilityError::Parse { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = raw.split_whitespace().collect();
            match toks[0] {
                "form" => {
                    linear = Some(match toks.get(1) {
                        Some(&"linear") => true,
                        Some(&"tabular") => false,
                        other => return Err(err(format!("unknown form {other:?}"))),
                    })
                }
                "outcomes" => outcomes = Some(resolve(&toks[1..])?),
                "contexts" => contexts = Some(resolve(&toks[1..])?),
                "[context" => {
                    let b = toks.get(1).and_then(|t| t.strip_suffix(']')).ok_or_else(|| err("expected `[context <bits>]`".into()))?;
                    let key = parse_bits(b).ok_or_else(|| err(format!("bad context bits `{b}`")))?;
                    if contexts.is_none() {
                        return Err(err("context section before the `contexts` line".into()));
                    }
                    current = Some(key);
                }
                _ => {
                    if toks.len() != 2 {
                        return Err(err(format!("expected `key value`, found `{raw}`")));
                    }
                    let value: f64 = toks[1].parse().map_err(|_| err(format!("bad value `{}`", toks[1])))?;
                    if !(value.is_finite() && value >= 0.0) {
                        return Err(UtilityError::Negative { key: toks[0].to_string(), value });
                    }
                    let is_linear = *linear.get_or_insert(true);
                    let outs = outcomes.get_or_insert_with(|| scenario.utility_outcomes());
                    let key = match (&contexts, &current) {
                        (Some(_), None) => return Err(err("value outside a `[context ...]` section".into())),
                        (_, Some(k)) => k.clone(),
                        (None, None) => Vec::new(),
                    };
                    let table = tables.entry(key).or_insert_with(|| {
                        if is_linear {
                            Table::Linear(vec![0.0; outs.len()])
                        } else {
                            Table::Tabular(BTreeMap::new())
                        }
                    });
                    match table {
                        Table::Linear(w) => {
                            let v = scenario.var(toks[0]).ok_or_else(|| UtilityError::UnknownVariable(toks[0].to_string()))?;
                            let k = outs
                                .iter()
                                .position(|o| *o == v)
                                .ok_or_else(|| err(format!("`{}` is not a listed outcome", toks[0])))?;
                            w[k] = value;
                        }
                        Table::Tabular(t) => {
                            let o = parse_bits(toks[0]).ok_or_else(|| err(format!("bad outcome bits `{}`", toks[0])))?;
                            t.insert(o, value);
                        }
                    }
                }
            }
        }
        let linear = linear.unwrap_or(true);
        let outcomes = outcomes.unwrap_or_else(|| scenario.utility_outcomes());
        if tables.is_empty() && contexts.is_none() {
            let empty = if linear { Table::Linear(vec![0.0; outcomes.len()]) } else { Table::Tabular(BTreeMap::new()) };
            tables.insert(Vec::new(), empty);
        }
        let u = UtilityFunction { outcomes, contexts, linear, tables };
        u.check_shapes()?;
        Ok(u)
    }
}

fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}
