//! Brute-force reference implementations over an explicit joint table.
//!
//! Every quantity is a plain sum over listed worlds. Nothing here walks a
//! circuit after the table is built, so agreement with the fast path is
//! evidence rather than a restatement of the same code.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::blame::{BlameError, BlameModel, ContextDistribution};
use crate::circuits::Circuit;
use crate::logic::{Action, Formula, PartialAssignment, Role, Scenario};
use crate::psdd::{Psdd, PsddError, MAX_SUPPORT};
use crate::utility::Utility;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("support of {0} models exceeds the oracle limit of {MAX_SUPPORT}")]
    TooLarge(String),
    #[error("joint table probabilities sum to {0}")]
    NotNormalized(f64),
    #[error(transparent)]
    Psdd(#[from] PsddError),
    #[error(transparent)]
    Blame(#[from] BlameError),
}

/// Explicit (world, probability) rows over the support of a circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    rows: Vec<(Vec<bool>, f64)>,
}

impl JointTable {
    /// Evaluates the model on every model of the circuit.
    pub fn build(psdd: &Psdd, circuit: &Circuit) -> Result<JointTable, OracleError> {
        let count = circuit.model_count();
        if count > MAX_SUPPORT.into() {
            return Err(OracleError::TooLarge(count.to_string()));
        }
        let mut rows = Vec::new();
        for w in circuit.enumerate_models(&PartialAssignment::empty(circuit.num_vars())) {
            let p = psdd.evaluate(&w)?;
            rows.push((w, p));
        }
        JointTable::from_rows(rows)
    }

    pub fn from_rows(rows: Vec<(Vec<bool>, f64)>) -> Result<JointTable, OracleError> {
        let total: f64 = rows.iter().map(|r| r.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(OracleError::NotNormalized(total));
        }
        Ok(JointTable { rows })
    }

    pub fn rows(&self) -> &[(Vec<bool>, f64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn mass(&self, keep: impl Fn(&[bool]) -> bool) -> f64 {
        self.rows.iter().filter(|(w, _)| keep(w)).map(|(_, p)| p).sum()
    }
}

fn agrees(ev: &PartialAssignment, w: &[bool]) -> bool {
    ev.values().iter().zip(w).all(|(e, b)| e.is_none_or(|e| e == *b))
}

pub fn oracle_marginal(t: &JointTable, evidence: &PartialAssignment) -> f64 {
    t.mass(|w| agrees(evidence, w))
}

/// `None` when the conditioning event has probability zero.
pub fn oracle_conditional(t: &JointTable, query: &PartialAssignment, given: &PartialAssignment) -> Option<f64> {
    let denominator = oracle_marginal(t, given);
    if denominator <= 0.0 {
        return None;
    }
    Some(t.mass(|w| agrees(given, w) && agrees(query, w)) / denominator)
}

/// Most probable world extending the evidence; near-ties (relative
/// 1e-12) go to the lexicographically smallest world.
pub fn oracle_mpe(t: &JointTable, evidence: &PartialAssignment) -> Option<(Vec<bool>, f64)> {
    let candidates: Vec<&(Vec<bool>, f64)> = t.rows.iter().filter(|(w, p)| *p > 0.0 && agrees(evidence, w)).collect();
    let max = candidates.iter().map(|r| r.1).fold(0.0, f64::max);
    candidates.into_iter().filter(|r| r.1 >= max * (1.0 - 1e-12)).min_by(|a, b| a.0.cmp(&b.0)).cloned()
}

fn context_of(sc: &Scenario, w: &[bool]) -> Vec<bool> {
    sc.contexts().iter().map(|v| w[v.index()]).collect()
}

fn does(sc: &Scenario, a: &Action, w: &[bool]) -> bool {
    sc.action_fixes(a).iter().all(|(v, b)| w[v.index()] == *b)
}

/// Pr'(X) for each context with positive weight.
fn context_weights(t: &JointTable, sc: &Scenario, ctx: &ContextDistribution) -> Result<BTreeMap<Vec<bool>, f64>, BlameError> {
    let mut out: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
    match ctx {
        ContextDistribution::Explicit(table) => {
            for (x, w) in table {
                *out.entry(x.clone()).or_default() += w;
            }
        }
        ContextDistribution::Model | ContextDistribution::Conditioned(_) => {
            let ev = match ctx {
                ContextDistribution::Conditioned(ev) => {
                    if ev.values().iter().enumerate().any(|(i, e)| e.is_some() && sc.role(i.into()) != Role::Context) {
                        return Err(BlameError::InvalidContexts("evidence on a non-context variable".into()));
                    }
                    ev.clone()
                }
                _ => PartialAssignment::empty(sc.num_vars()),
            };
            let total = oracle_marginal(t, &ev);
            if total <= 0.0 {
                return Err(BlameError::ZeroContextMass);
            }
            for (w, p) in &t.rows {
                if *p > 0.0 && agrees(&ev, w) {
                    *out.entry(context_of(sc, w)).or_default() += p / total;
                }
            }
        }
    }
    out.retain(|_, w| *w > 0.0);
    Ok(out)
}

/// Σ_X Pr'(X) · Pr(φ ∧ a ∧ X) / Pr(a ∧ X), skipping contexts with Pr(a ∧ X) = 0.
pub fn oracle_prob_do(t: &JointTable, sc: &Scenario, a: &Action, phi: &Formula, ctx: &ContextDistribution) -> Result<f64, BlameError> {
    let weights = context_weights(t, sc, ctx)?;
    let mut total = 0.0;
    for (x, weight) in &weights {
        let in_x = |w: &[bool]| does(sc, a, w) && context_of(sc, w) == *x;
        let pa = t.mass(in_x);
        if pa > 0.0 {
            let pphi = t.mass(|w| in_x(w) && phi.eval(w).unwrap_or(false));
            total += weight * pphi / pa;
        }
    }
    Ok(total)
}

pub fn oracle_delta(t: &JointTable, sc: &Scenario, a: &Action, alt: &Action, phi: &Formula, ctx: &ContextDistribution) -> Result<f64, BlameError> {
    Ok((oracle_prob_do(t, sc, a, phi, ctx)? - oracle_prob_do(t, sc, alt, phi, ctx)?).max(0.0))
}

/// −Σ_X Pr'(X) Σ_w U(w) Pr(w | a, X).
pub fn oracle_cost(t: &JointTable, sc: &Scenario, u: &dyn Utility, a: &Action, ctx: &ContextDistribution) -> Result<f64, BlameError> {
    let weights = context_weights(t, sc, ctx)?;
    let mut total = 0.0;
    let mut supported = false;
    for (x, weight) in &weights {
        let rows: Vec<&(Vec<bool>, f64)> = t.rows.iter().filter(|(w, _)| does(sc, a, w) && context_of(sc, w) == *x).collect();
        let pa: f64 = rows.iter().map(|r| r.1).sum();
        if pa > 0.0 {
            supported = true;
            for (w, p) in rows {
                total += weight * u.utility(w)? * p / pa;
            }
        }
    }
    if !supported {
        return Err(BlameError::ZeroSupportAction(sc.action_name(a)));
    }
    Ok(-total)
}

/// δ · (N − max(c(a′) − c(a), 0)) / N, with the same N bound as the fast path.
#[allow(clippy::too_many_arguments)]
pub fn oracle_db(
    t: &JointTable,
    sc: &Scenario,
    u: &dyn Utility,
    a: &Action,
    alt: &Action,
    phi: &Formula,
    n: f64,
    ctx: &ContextDistribution,
) -> Result<f64, BlameError> {
    let mut min = f64::INFINITY;
    for b in sc.actions(a.group) {
        match oracle_cost(t, sc, u, &b, ctx) {
            Ok(c) => min = min.min(c),
            Err(BlameError::ZeroSupportAction(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let floor = -min;
    if !(n.is_finite() && n > floor && n > 0.0) {
        return Err(BlameError::NBound { n, floor });
    }
    let delta = oracle_delta(t, sc, a, alt, phi, ctx)?;
    let diff = oracle_cost(t, sc, u, alt, ctx)? - oracle_cost(t, sc, u, a, ctx)?;
    Ok(delta * (n - diff.max(0.0)) / n)
}

/// Largest absolute deviations between the fast path and the oracle.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Agreement {
    pub marginal: f64,
    pub conditional: f64,
    pub mpe: f64,
    pub mpe_mismatches: usize,
    pub delta: f64,
    pub cost: f64,
    pub db: f64,
    pub checks: usize,
}

impl Agreement {
    pub fn max_deviation(&self) -> f64 {
        [self.marginal, self.conditional, self.mpe, self.delta, self.cost, self.db].into_iter().fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_deviation() <= tolerance && self.mpe_mismatches == 0
    }

    fn note(slot: &mut f64, checks: &mut usize, x: f64, y: f64) {
        *slot = slot.max((x - y).abs());
        *checks += 1;
    }
}

/// Runs the agreement suite: marginals and MPE under every single-literal
/// evidence, conditionals over literal pairs, and δ, c and db_N for every
/// ordered action pair against every outcome literal under the model's
/// context distribution.
pub fn agreement(psdd: &Psdd, circuit: &Circuit, sc: &Scenario, utility: Option<&dyn Utility>) -> Result<Agreement, OracleError> {
    let t = JointTable::build(psdd, circuit)?;
    let n = sc.num_vars();
    let mut r = Agreement::default();
    let literal = |v: usize, b: bool| PartialAssignment::from_pairs(n, [(v.into(), b)]);

    let mut evidence = vec![PartialAssignment::empty(n)];
    for v in 0..n {
        evidence.push(literal(v, false));
        evidence.push(literal(v, true));
    }
    for ev in &evidence {
        Agreement::note(&mut r.marginal, &mut r.checks, psdd.marginal(ev), oracle_marginal(&t, ev));
        match (psdd.mpe(ev), oracle_mpe(&t, ev)) {
            (Ok((w, p)), Some((ow, op))) => {
                Agreement::note(&mut r.mpe, &mut r.checks, p, op);
                if w != ow {
                    r.mpe_mismatches += 1;
                }
            }
            (Err(_), None) => {}
            _ => r.mpe_mismatches += 1,
        }
    }
    for q in &evidence[1..] {
        for g in &evidence[1..] {
            if let Some(o) = oracle_conditional(&t, q, g) {
                let fast = psdd.conditional(q, g)?;
                Agreement::note(&mut r.conditional, &mut r.checks, fast, o);
            }
        }
    }

    let ctx = ContextDistribution::Model;
    for (gi, g) in sc.action_groups().iter().enumerate() {
        let own = g.vars();
        let events: Vec<Formula> = sc
            .outcomes()
            .into_iter()
            .chain(sc.decisions())
            .filter(|v| !own.contains(v))
            .flat_map(|v| [Formula::atom(v), Formula::not(Formula::atom(v))])
            .collect();
        let actions = sc.actions(gi);
        let model = match utility {
            Some(u) => BlameModel::new(psdd, sc).with_utility(u),
            None => BlameModel::new(psdd, sc),
        };
        let supported: Vec<&Action> = actions
            .iter()
            .filter(|a| oracle_marginal(&t, &PartialAssignment::from_pairs(n, sc.action_fixes(a))) > 0.0)
            .collect();
        if let Some(u) = utility {
            for a in &supported {
                Agreement::note(&mut r.cost, &mut r.checks, model.cost(a, &ctx)?, oracle_cost(&t, sc, u, a, &ctx)?);
            }
        }
        let bound = match utility {
            Some(_) if !supported.is_empty() => model.n_floor(gi, &ctx)?,
            _ => 0.0,
        };
        let n_value = if bound > 0.0 { 1.1 * bound } else { 1.0 };
        for a in &supported {
            for b in &actions {
                if *a == b {
                    continue;
                }
                for phi in &events {
                    let fast = model.delta(a, b, phi, &ctx)?;
                    Agreement::note(&mut r.delta, &mut r.checks, fast, oracle_delta(&t, sc, a, b, phi, &ctx)?);
                    if let Some(u) = utility {
                        match model.blameworthiness(a, b, phi, n_value, &ctx) {
                            Ok(fast) => {
                                Agreement::note(&mut r.db, &mut r.checks, fast, oracle_db(&t, sc, u, a, b, phi, n_value, &ctx)?)
                            }
                            Err(BlameError::ZeroSupportAction(_)) => {}
                            Err(e) => return Err(e.into()),
                        }
                    }
                }
            }
        }
    }
    Ok(r)
}
