use std::collections::BTreeMap;

use crate::logic::{PartialAssignment, Role, Scenario};
use crate::psdd::Psdd;

use super::sum::Sum;
use super::BlameError;

/// The distribution over contexts used in back-door sums.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextDistribution {
    /// Pr(X) from the model.
    Model,
    /// User-supplied weights over complete context assignments (bits over
    /// the scenario's context variables, in declaration order).
    Explicit(Vec<(Vec<bool>, f64)>),
    /// Pr(X | evidence) from the model, for evidence on context variables.
    Conditioned(PartialAssignment),
}

impl ContextDistribution {
    /// Parses `weight name...` lines; each names the true context variables
    /// of one context, all others being false.
    pub fn parse_table(text: &str, scenario: &Scenario) -> Result<ContextDistribution, BlameError> {
        let mut out = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            out.push(parse_entry(raw, scenario).map_err(|message| BlameError::Parse { line: i + 1, message })?);
        }
        Ok(ContextDistribution::Explicit(out))
    }

    /// Context weights as a map from context bits to probability.
    pub(crate) fn weights(&self, psdd: &Psdd, scenario: &Scenario) -> Result<(BTreeMap<Vec<bool>, f64>, usize), BlameError> {
        let contexts = scenario.contexts();
        match self {
            ContextDistribution::Explicit(table) => {
                let mut out: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
                for (x, w) in table {
                    if x.len() != contexts.len() {
                        return Err(BlameError::InvalidContexts(format!(
                            "context has {} values, expected {}",
                            x.len(),
                            contexts.len()
                        )));
                    }
                    if !(w.is_finite() && *w >= 0.0) {
                        return Err(BlameError::InvalidContexts(format!("weight {w} is negative or not finite")));
                    }
                    *out.entry(x.clone()).or_default() += w;
                }
                let total: Sum = out.values().copied().collect();
                if (total.value() - 1.0).abs() > 1e-9 {
                    return Err(BlameError::InvalidContexts(format!("weights sum to {}", total.value())));
                }
                let mut visited = 0;
                for (x, w) in &out {
                    if *w <= 0.0 {
                        continue;
                    }
                    let ev = PartialAssignment::from_pairs(scenario.num_vars(), contexts.iter().copied().zip(x.iter().copied()));
                    let mut consistent = false;
                    visited += psdd.for_each_model(&ev, &mut |_, _| consistent = true);
                    if !consistent {
                        return Err(BlameError::InvalidContexts(format!(
                            "{} is inconsistent with the constraints",
                            crate::utility::context_label(scenario, &contexts, x)
                        )));
                    }
                }
                Ok((out, visited))
            }
            ContextDistribution::Model | ContextDistribution::Conditioned(_) => {
                let ev = match self {
                    ContextDistribution::Conditioned(ev) => {
                        for (i, b) in ev.values().iter().enumerate() {
                            if b.is_some() && scenario.role(i.into()) != Role::Context {
                                return Err(BlameError::InvalidContexts(format!(
                                    "`{}` is not a context variable",
                                    scenario.name(i.into())
                                )));
                            }
                        }
                        ev.clone()
                    }
                    _ => PartialAssignment::empty(scenario.num_vars()),
                };
                let mut sums: BTreeMap<Vec<bool>, Sum> = BTreeMap::new();
                let visited = psdd.for_each_world(&ev, &mut |w, p| {
                    sums.entry(contexts.iter().map(|v| w[v.index()]).collect()).or_default().add(p);
                });
                let total: Sum = sums.values().map(Sum::value).collect();
                let total = total.value();
                if total <= 0.0 {
                    return Err(BlameError::ZeroContextMass);
                }
                Ok((sums.into_iter().map(|(x, s)| (x, s.value() / total)).collect(), visited))
            }
        }
    }
}

fn parse_entry(raw: &str, scenario: &Scenario) -> Result<(Vec<bool>, f64), String> {
    let mut toks = raw.split_whitespace();
    let w = toks.next().unwrap_or_default();
    let weight: f64 = w.parse().map_err(|_| format!("bad weight `{w}`"))?;
    let contexts = scenario.contexts();
    let mut bits = vec![false; contexts.len()];
    for name in toks {
        let v = scenario.var(name).ok_or_else(|| format!("unknown variable `{name}`"))?;
        let k = contexts.iter().position(|c| *c == v).ok_or_else(|| format!("`{name}` is not a context variable"))?;
        bits[k] = true;
    }
    Ok((bits, weight))
}
