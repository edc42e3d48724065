//! Utility functions over outcomes and their estimation from a fitted model.
//!
//! Utilities are learned under the assumption that an agent picks a decision
//! with probability proportional to its expected utility: regressing
//! `Pr(D | X)` on `Pr(O | D, X)` with nonnegative weights recovers the
//! utility up to a positive scale, which normalization then removes.

mod io;
mod nnls;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::logic::{PartialAssignment, Scenario, VarId};
use crate::psdd::Psdd;

pub use nnls::{nnls, ridge_nnls, Solution, MAX_ITERATIONS, TOLERANCE};

pub const DEFAULT_LAMBDA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UtilityError {
    #[error("utility is context-relative but no context was given")]
    MissingContext,
    #[error("utility is not context-relative but a context was given")]
    ExtraneousContext,
    #[error("no utility table for context {0}")]
    UnknownContext(String),
    #[error("expected {expected} {what} values, found {found}")]
    Length { what: &'static str, expected: usize, found: usize },
    #[error("negative utility {value} for `{key}`")]
    Negative { key: String, value: f64 },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("utility file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("the model gives no decision positive probability")]
    NoSupport,
    #[error("regularization must be finite and nonnegative, got {0}")]
    BadLambda(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilitySpec {
    pub context_relative: bool,
    pub linear: bool,
    pub lambda: f64,
}

impl Default for UtilitySpec {
    fn default() -> Self {
        UtilitySpec { context_relative: false, linear: true, lambda: DEFAULT_LAMBDA }
    }
}

/// Utility values for one context (or for all, when not context-relative).
#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    /// One weight per outcome variable; the utility is the weighted count of
    /// true outcome variables.
    Linear(Vec<f64>),
    /// One value per complete outcome assignment; unlisted assignments are 0.
    Tabular(BTreeMap<Vec<bool>, f64>),
}

impl Table {
    fn eval(&self, outcome: &[bool]) -> f64 {
        match self {
            Table::Linear(w) => w.iter().zip(outcome).filter(|(_, o)| **o).map(|(w, _)| w).sum(),
            Table::Tabular(t) => t.get(outcome).copied().unwrap_or(0.0),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            Table::Linear(w) => w.clone(),
            Table::Tabular(t) => t.values().copied().collect(),
        }
    }

    fn scaled(&self, k: f64) -> Table {
        match self {
            Table::Linear(w) => Table::Linear(w.iter().map(|x| x * k).collect()),
            Table::Tabular(t) => Table::Tabular(t.iter().map(|(o, x)| (o.clone(), x * k)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UtilityFunction {
    outcomes: Vec<VarId>,
    /// Context variables keying the tables, when context-relative.
    contexts: Option<Vec<VarId>>,
    linear: bool,
    /// Keyed by the context assignment; the single key is empty otherwise.
    tables: BTreeMap<Vec<bool>, Table>,
}

impl UtilityFunction {
    pub fn linear(outcomes: Vec<VarId>, weights: Vec<f64>) -> Result<Self, UtilityError> {
        if weights.len() != outcomes.len() {
            return Err(UtilityError::Length { what: "weight", expected: outcomes.len(), found: weights.len() });
        }
        let u = UtilityFunction {
            outcomes,
            contexts: None,
            linear: true,
            tables: BTreeMap::from([(Vec::new(), Table::Linear(weights))]),
        };
        u.check_nonnegative()?;
        Ok(u)
    }

    pub fn tabular(outcomes: Vec<VarId>, values: BTreeMap<Vec<bool>, f64>) -> Result<Self, UtilityError> {
        let u = UtilityFunction {
            contexts: None,
            linear: false,
            tables: BTreeMap::from([(Vec::new(), Table::Tabular(values))]),
            outcomes,
        };
        u.check_shapes()?;
        u.check_nonnegative()?;
        Ok(u)
    }

    /// A context-relative function with one table per context assignment.
    pub fn per_context(
        outcomes: Vec<VarId>,
        contexts: Vec<VarId>,
        linear: bool,
        tables: BTreeMap<Vec<bool>, Table>,
    ) -> Result<Self, UtilityError> {
        let u = UtilityFunction { outcomes, contexts: Some(contexts), linear, tables };
        u.check_shapes()?;
        u.check_nonnegative()?;
        Ok(u)
    }

    fn check_shapes(&self) -> Result<(), UtilityError> {
        let nc = self.contexts.as_ref().map_or(0, Vec::len);
        for (ctx, t) in &self.tables {
            if ctx.len() != nc {
                return Err(UtilityError::Length { what: "context", expected: nc, found: ctx.len() });
            }
            match t {
                Table::Linear(w) if !self.linear || w.len() != self.outcomes.len() => {
                    return Err(UtilityError::Length { what: "weight", expected: self.outcomes.len(), found: w.len() })
                }
                Table::Tabular(_) if self.linear => {
                    return Err(UtilityError::Parse { line: 0, message: "tabular table in a linear function".into() })
                }
                Table::Tabular(m) => {
                    if let Some(o) = m.keys().find(|o| o.len() != self.outcomes.len()) {
                        return Err(UtilityError::Length { what: "outcome", expected: self.outcomes.len(), found: o.len() });
                    }
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn check_nonnegative(&self) -> Result<(), UtilityError> {
        for (ctx, t) in &self.tables {
            if let Some(v) = t.values().into_iter().find(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(UtilityError::Negative { key: bits(ctx), value: v });
            }
        }
        Ok(())
    }

    pub fn outcomes(&self) -> &[VarId] {
        &self.outcomes
    }

    pub fn contexts(&self) -> Option<&[VarId]> {
        self.contexts.as_deref()
    }

    pub fn is_context_relative(&self) -> bool {
        self.contexts.is_some()
    }

    pub fn is_linear(&self) -> bool {
        self.linear
    }

    pub fn tables(&self) -> &BTreeMap<Vec<bool>, Table> {
        &self.tables
    }

    /// U(outcome) or U(outcome; context).
    pub fn eval(&self, outcome: &[bool], context: Option<&[bool]>) -> Result<f64, UtilityError> {
        if outcome.len() != self.outcomes.len() {
            return Err(UtilityError::Length { what: "outcome", expected: self.outcomes.len(), found: outcome.len() });
        }
        let key: &[bool] = match (&self.contexts, context) {
            (Some(_), None) => return Err(UtilityError::MissingContext),
            (None, Some(_)) => return Err(UtilityError::ExtraneousContext),
            (None, None) => &[],
            (Some(c), Some(x)) => {
                if x.len() != c.len() {
                    return Err(UtilityError::Length { what: "context", expected: c.len(), found: x.len() });
                }
                x
            }
        };
        let t = self.tables.get(key).ok_or_else(|| UtilityError::UnknownContext(bits(key)))?;
        Ok(t.eval(outcome))
    }

    /// Utility of the outcome (and context) of a complete world.
    pub fn eval_world(&self, world: &[bool]) -> Result<f64, UtilityError> {
        let outcome: Vec<bool> = self.outcomes.iter().map(|v| world[v.index()]).collect();
        match &self.contexts {
            None => self.eval(&outcome, None),
            Some(c) => {
                let ctx: Vec<bool> = c.iter().map(|v| world[v.index()]).collect();
                self.eval(&outcome, Some(&ctx))
            }
        }
    }
}

/// Anything that assigns a utility to a complete world.
pub trait Utility {
    fn utility(&self, world: &[bool]) -> Result<f64, UtilityError>;
}

impl Utility for UtilityFunction {
    fn utility(&self, world: &[bool]) -> Result<f64, UtilityError> {
        self.eval_world(world)
    }
}

impl<F: Fn(&[bool]) -> f64> Utility for F {
    fn utility(&self, world: &[bool]) -> Result<f64, UtilityError> {
        Ok(self(world))
    }
}

/// Side information from [`learn_utility`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnReport {
    pub spec: UtilitySpec,
    /// Regression rows (one per supported context/decision pair).
    pub rows: usize,
    /// Weights before normalization, per context key (empty key when pooled).
    pub raw: BTreeMap<String, Vec<f64>>,
    /// Factor each table was divided by.
    pub scale: BTreeMap<String, f64>,
    /// Contexts that fell back to uniform weights, with the reason.
    pub fallbacks: Vec<String>,
    pub iterations: usize,
    pub converged: bool,
    pub normalization: &'static str,
}

type OutcomeMass = BTreeMap<Vec<bool>, f64>;

/// Per-context aggregates of the model's support.
#[derive(Default)]
struct ContextStats {
    mass: f64,
    /// decision assignment → (mass, outcome assignment → mass)
    decisions: BTreeMap<Vec<bool>, (f64, OutcomeMass)>,
}

/// Fits a utility function to the decisions encoded in `p`.
pub fn learn_utility(p: &Psdd, scenario: &Scenario, spec: UtilitySpec) -> Result<(UtilityFunction, LearnReport), UtilityError> {
    if !spec.lambda.is_finite() || spec.lambda < 0.0 {
        return Err(UtilityError::BadLambda(spec.lambda));
    }
    let outcomes = scenario.utility_outcomes();
    let decisions = scenario.decisions();
    let contexts = scenario.contexts();
    let pick = |w: &[bool], vs: &[VarId]| -> Vec<bool> { vs.iter().map(|v| w[v.index()]).collect() };

    let mut stats: BTreeMap<Vec<bool>, ContextStats> = BTreeMap::new();
    p.for_each_model(&PartialAssignment::empty(p.num_vars()), &mut |w, pr| {
        let s = stats.entry(pick(w, &contexts)).or_default();
        s.mass += pr;
        let d = s.decisions.entry(pick(w, &decisions)).or_default();
        d.0 += pr;
        *d.1.entry(pick(w, &outcomes)).or_default() += pr;
    });

    let groups: Vec<(Vec<bool>, Vec<&Vec<bool>>)> = if spec.context_relative {
        stats.keys().map(|x| (x.clone(), vec![x])).collect()
    } else {
        vec![(Vec::new(), stats.keys().collect())]
    };

    let mut report = LearnReport {
        spec,
        rows: 0,
        raw: BTreeMap::new(),
        scale: BTreeMap::new(),
        fallbacks: Vec::new(),
        iterations: 0,
        converged: true,
        normalization: "maximum utility over supported outcomes is 1",
    };
    let mut tables = BTreeMap::new();
    for (key, members) in groups {
        // outcome assignments the theory allows in this group
        let support: Vec<Vec<bool>> = {
            let mut s: Vec<Vec<bool>> =
                members.iter().flat_map(|x| stats[*x].decisions.values().flat_map(|d| d.1.keys().cloned())).collect();
            s.sort();
            s.dedup();
            s
        };
        let columns = if spec.linear { outcomes.len() } else { support.len() };
        let mut features: Vec<f64> = Vec::new();
        let mut targets: Vec<f64> = Vec::new();
        for x in &members {
            let s = &stats[*x];
            if s.mass <= 0.0 {
                continue;
            }
            for (d_mass, os) in s.decisions.values() {
                if *d_mass <= 0.0 {
                    continue;
                }
                targets.push(d_mass / s.mass);
                if spec.linear {
                    for i in 0..outcomes.len() {
                        features.push(os.iter().filter(|(o, _)| o[i]).map(|(_, m)| m).sum::<f64>() / d_mass);
                    }
                } else {
                    for o in &support {
                        features.push(os.get(o).copied().unwrap_or(0.0) / d_mass);
                    }
                }
            }
        }
        report.rows += targets.len();
        let label = if spec.context_relative { context_label(scenario, &contexts, &key) } else { "all contexts".into() };
        let raw = if targets.is_empty() {
            report.fallbacks.push(format!("{label}: no decision with positive probability"));
            None
        } else {
            let a = DMatrix::from_row_slice(targets.len(), columns, &features);
            let sol = ridge_nnls(&a, &DVector::from_vec(targets), spec.lambda);
            report.iterations += sol.iterations;
            report.converged &= sol.converged;
            Some(sol.x.iter().map(|v| v.max(0.0)).collect::<Vec<f64>>())
        };
        let table_of = |w: &[f64]| -> Table {
            if spec.linear {
                Table::Linear(w.to_vec())
            } else {
                Table::Tabular(support.iter().cloned().zip(w.iter().copied()).collect())
            }
        };
        let raw_table = raw.as_ref().map(|w| table_of(w));
        let top = raw_table.as_ref().map_or(0.0, |t| support.iter().map(|o| t.eval(o)).fold(0.0, f64::max));
        let (table, scale) = if top > 0.0 {
            (raw_table.unwrap().scaled(1.0 / top), top)
        } else {
            if raw.is_some() {
                report.fallbacks.push(format!("{label}: all learned weights are zero"));
            }
            let uniform = table_of(&vec![1.0; columns]);
            let top = support.iter().map(|o| uniform.eval(o)).fold(0.0, f64::max);
            let k = if top > 0.0 { 1.0 / top } else { 1.0 };
            (uniform.scaled(k), 0.0)
        };
        report.raw.insert(bits(&key), raw.unwrap_or_default());
        report.scale.insert(bits(&key), scale);
        tables.insert(key, table);
    }
    if report.rows == 0 {
        return Err(UtilityError::NoSupport);
    }
    let u = UtilityFunction {
        outcomes,
        contexts: spec.context_relative.then_some(contexts),
        linear: spec.linear,
        tables,
    };
    Ok((u, report))
}

pub(crate) fn bits(b: &[bool]) -> String {
    b.iter().map(|x| if *x { '1' } else { '0' }).collect()
}

/// Names of the true context variables, for messages.
pub fn context_label(scenario: &Scenario, contexts: &[VarId], key: &[bool]) -> String {
    let on: Vec<&str> = contexts.iter().zip(key).filter(|(_, b)| **b).map(|(v, _)| scenario.name(*v)).collect();
    if on.is_empty() {
        "context with no true variables".into()
    } else {
        format!("context {}", on.join(" "))
    }
}
