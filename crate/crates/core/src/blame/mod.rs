//! Interventional probabilities, costs and degrees of blameworthiness.
//!
//! Contexts are a sufficient back-door set, so
//! `Pr(φ | do(a)) = Σ_X Pr'(X) Pr(φ | a, X)`. Every sum runs over the worlds
//! the model gives positive probability; contexts in which the action never
//! occurs contribute nothing and are reported as skipped.

mod context;
mod query;
mod report;
mod sum;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::logic::{Action, Formula, LogicError, PartialAssignment, Scenario};
use crate::psdd::Psdd;
use crate::utility::{context_label, Utility, UtilityError};

pub use context::ContextDistribution;
pub use query::BlameQuery;
pub use report::{ActionCost, ActionProbability, BlameReport, Pairwise};
pub use sum::Sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlameError {
    #[error("`{0}` and `{1}` belong to different action groups")]
    GroupMismatch(String, String),
    #[error("the event mentions `{0}`, a variable of the action's own group")]
    EventMentionsAction(String),
    #[error("the action group has a single value; there is no alternative")]
    NoAlternative,
    #[error("invalid context distribution: {0}")]
    InvalidContexts(String),
    #[error("the context evidence has probability zero")]
    ZeroContextMass,
    #[error("action `{0}` has probability zero in every weighted context")]
    ZeroSupportAction(String),
    #[error("N = {n} is not admissible; it must exceed {floor} (the negative minimum cost)")]
    NBound { n: f64, floor: f64 },
    #[error("a utility function is required for costs")]
    MissingUtility,
    #[error("query line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}

/// Pr(φ | do(a)) together with what the sum skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct Intervention {
    pub probability: f64,
    /// Weighted contexts in which the action has probability zero.
    pub skipped: Vec<Vec<bool>>,
    /// Worlds visited across all sweeps behind this number.
    pub worlds: usize,
}

/// Per-context sums for one action, from a single sweep of its worlds.
#[derive(Debug, Clone, Default)]
struct ActionSweep {
    /// context → (Pr(a, X), Pr(a, X, φ), Σ U·Pr over worlds with a, X)
    by_context: BTreeMap<Vec<bool>, (Sum, Sum, Sum)>,
    worlds: usize,
}

/// A fitted model, its scenario and optionally a utility function.
#[derive(Clone, Copy)]
pub struct BlameModel<'a> {
    psdd: &'a Psdd,
    scenario: &'a Scenario,
    utility: Option<&'a dyn Utility>,
}

impl<'a> BlameModel<'a> {
    pub fn new(psdd: &'a Psdd, scenario: &'a Scenario) -> Self {
        BlameModel { psdd, scenario, utility: None }
    }

    pub fn with_utility(mut self, u: &'a dyn Utility) -> Self {
        self.utility = Some(u);
        self
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    fn check_event(&self, a: &Action, phi: Option<&Formula>) -> Result<(), BlameError> {
        if let Some(phi) = phi {
            let own = self.scenario.action_groups()[a.group].vars();
            if let Some(v) = phi.atoms().into_iter().find(|v| own.contains(v)) {
                return Err(BlameError::EventMentionsAction(self.scenario.name(v).to_string()));
            }
        }
        Ok(())
    }

    fn sweep(&self, a: &Action, phi: Option<&Formula>) -> Result<ActionSweep, BlameError> {
        self.check_event(a, phi)?;
        let sc = self.scenario;
        let ev = PartialAssignment::from_pairs(sc.num_vars(), sc.action_fixes(a));
        let contexts = sc.contexts();
        let mut out = ActionSweep::default();
        let mut failure = None;
        out.worlds = self.psdd.for_each_world(&ev, &mut |w, p| {
            if failure.is_some() {
                return;
            }
            let entry = out.by_context.entry(contexts.iter().map(|v| w[v.index()]).collect()).or_default();
            entry.0.add(p);
            if let Some(phi) = phi {
                match phi.eval(w) {
                    Ok(true) => entry.1.add(p),
                    Ok(false) => {}
                    Err(e) => failure = Some(BlameError::from(e)),
                }
            }
            if let Some(u) = self.utility {
                match u.utility(w) {
                    Ok(x) => entry.2.add(x * p),
                    Err(e) => failure = Some(e.into()),
                }
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }

    /// Pr(φ | do(a)) under the back-door adjustment.
    pub fn prob_do(&self, a: &Action, phi: &Formula, ctx: &ContextDistribution) -> Result<Intervention, BlameError> {
        let (weights, ctx_worlds) = ctx.weights(self.psdd, self.scenario)?;
        let s = self.sweep(a, Some(phi))?;
        Ok(self.intervention(&s, &weights, ctx_worlds))
    }

    fn intervention(&self, s: &ActionSweep, weights: &BTreeMap<Vec<bool>, f64>, ctx_worlds: usize) -> Intervention {
        let mut total = Sum::default();
        let mut skipped = Vec::new();
        for (x, w) in weights {
            if *w <= 0.0 {
                continue;
            }
            match s.by_context.get(x) {
                Some((pa, pphi, _)) if pa.value() > 0.0 => total.add(w * pphi.value() / pa.value()),
                _ => skipped.push(x.clone()),
            }
        }
        Intervention { probability: total.value().clamp(0.0, 1.0), skipped, worlds: s.worlds + ctx_worlds }
    }

    fn cost_of(&self, a: &Action, s: &ActionSweep, weights: &BTreeMap<Vec<bool>, f64>) -> Result<f64, BlameError> {
        let mut total = Sum::default();
        let mut any = false;
        for (x, w) in weights {
            if *w <= 0.0 {
                continue;
            }
            if let Some((pa, _, pu)) = s.by_context.get(x) {
                if pa.value() > 0.0 {
                    any = true;
                    total.add(w * pu.value() / pa.value());
                }
            }
        }
        if !any {
            return Err(BlameError::ZeroSupportAction(self.scenario.action_name(a)));
        }
        Ok(-total.value())
    }

    /// δ(a, a′, φ) = max(Pr(φ | do(a)) − Pr(φ | do(a′)), 0).
    pub fn delta(&self, a: &Action, alt: &Action, phi: &Formula, ctx: &ContextDistribution) -> Result<f64, BlameError> {
        self.same_group(a, alt)?;
        let pa = self.prob_do(a, phi, ctx)?.probability;
        let pb = self.prob_do(alt, phi, ctx)?.probability;
        Ok((pa - pb).max(0.0))
    }

    /// c(a) = −Σ_X Pr'(X) Σ_O U(O; X) Pr(O | a, X).
    pub fn cost(&self, a: &Action, ctx: &ContextDistribution) -> Result<f64, BlameError> {
        if self.utility.is_none() {
            return Err(BlameError::MissingUtility);
        }
        let (weights, _) = ctx.weights(self.psdd, self.scenario)?;
        let s = self.sweep(a, None)?;
        self.cost_of(a, &s, &weights)
    }

    fn same_group(&self, a: &Action, b: &Action) -> Result<(), BlameError> {
        if a.group != b.group {
            return Err(BlameError::GroupMismatch(self.scenario.action_name(a), self.scenario.action_name(b)));
        }
        Ok(())
    }

    /// db_N(a, a′, φ) = δ · (N − max(c(a′) − c(a), 0)) / N.
    pub fn blameworthiness(&self, a: &Action, alt: &Action, phi: &Formula, n: f64, ctx: &ContextDistribution) -> Result<f64, BlameError> {
        let q = BlameQuery { action: *a, alternatives: Some(vec![*alt]), event: phi.clone(), n: Some(n), contexts: ctx.clone() };
        Ok(self.report(&q)?.pairwise[0].db)
    }

    /// Maximum of db_N over every alternative in the action's group, with
    /// the first maximizing alternative in declaration order.
    pub fn overall_blame(&self, a: &Action, phi: &Formula, n: f64, ctx: &ContextDistribution) -> Result<(f64, Action), BlameError> {
        let q = BlameQuery { action: *a, alternatives: None, event: phi.clone(), n: Some(n), contexts: ctx.clone() };
        let r = self.report(&q)?;
        let best = r.overall_alternative.ok_or(BlameError::NoAlternative)?;
        Ok((r.overall_db, self.scenario.parse_action(&best)?))
    }

    /// Smallest admissible N is anything above this value.
    pub fn n_floor(&self, group: usize, ctx: &ContextDistribution) -> Result<f64, BlameError> {
        let (weights, _) = ctx.weights(self.psdd, self.scenario)?;
        let mut min = f64::INFINITY;
        for a in self.scenario.actions(group) {
            let s = self.sweep(&a, None)?;
            match self.cost_of(&a, &s, &weights) {
                Ok(c) => min = min.min(c),
                Err(BlameError::ZeroSupportAction(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(-min)
    }

    /// Evaluates a query completely.
    pub fn report(&self, q: &BlameQuery) -> Result<BlameReport, BlameError> {
        if self.utility.is_none() {
            return Err(BlameError::MissingUtility);
        }
        let sc = self.scenario;
        let a = q.action;
        self.check_event(&a, Some(&q.event))?;
        let all = sc.actions(a.group);
        let alternatives: Vec<Action> = match &q.alternatives {
            Some(alts) => {
                for b in alts {
                    self.same_group(&a, b)?;
                }
                alts.clone()
            }
            None => all.iter().copied().filter(|b| *b != a).collect(),
        };
        if alternatives.is_empty() {
            return Err(BlameError::NoAlternative);
        }
        let (weights, ctx_worlds) = q.contexts.weights(self.psdd, sc)?;
        let contexts = sc.contexts();

        let mut sweeps = Vec::with_capacity(all.len());
        for b in &all {
            sweeps.push(self.sweep(b, Some(&q.event))?);
        }
        let index = |b: &Action| all.iter().position(|x| x == b).expect("action of the group");
        let mut costs = Vec::new();
        for (b, s) in all.iter().zip(&sweeps) {
            match self.cost_of(b, s, &weights) {
                Ok(c) => costs.push(Some(c)),
                Err(BlameError::ZeroSupportAction(_)) => costs.push(None),
                Err(e) => return Err(e),
            }
        }
        let floor = -costs.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let cost = |b: &Action| costs[index(b)].ok_or_else(|| BlameError::ZeroSupportAction(sc.action_name(b)));
        let c_a = cost(&a)?;
        let n = match q.n {
            Some(n) => n,
            None if floor > 0.0 => 1.1 * floor,
            None => 1.0,
        };
        if !(n.is_finite() && n > floor && n > 0.0) {
            return Err(BlameError::NBound { n, floor });
        }

        let mut skipped = Vec::new();
        let mut note_skips = |b: &Action, iv: &Intervention| {
            for x in &iv.skipped {
                skipped.push(format!("do({}): {}", sc.action_name(b), context_label(sc, &contexts, x)));
            }
        };
        let ia = self.intervention(&sweeps[index(&a)], &weights, ctx_worlds);
        note_skips(&a, &ia);
        let mut probabilities = vec![ActionProbability { action: sc.action_name(&a), probability: ia.probability }];
        let mut pairwise = Vec::new();
        for b in &alternatives {
            let ib = self.intervention(&sweeps[index(b)], &weights, ctx_worlds);
            note_skips(b, &ib);
            probabilities.push(ActionProbability { action: sc.action_name(b), probability: ib.probability });
            let delta = (ia.probability - ib.probability).max(0.0);
            let difference = cost(b)? - c_a;
            // factored so db never rounds above delta
            let db = delta * (1.0 - difference.max(0.0) / n);
            pairwise.push(Pairwise { alternative: sc.action_name(b), delta, cost_difference: difference, db });
        }
        let mut best: Option<&Pairwise> = None;
        for p in &pairwise {
            if best.is_none_or(|b| p.db > b.db) {
                best = Some(p);
            }
        }
        let best = best.expect("at least one alternative");
        let worlds_per_sweep = sweeps.iter().map(|s| s.worlds).max().unwrap_or(0).max(ctx_worlds);
        let mut r = BlameReport {
            action: sc.action_name(&a),
            event: q.event.pretty(sc).to_string(),
            n,
            n_floor: floor,
            n_margin: n - floor,
            probabilities,
            costs: all
                .iter()
                .zip(&costs)
                .filter_map(|(b, c)| c.map(|c| ActionCost { action: sc.action_name(b), cost: c }))
                .collect(),
            pairwise: pairwise.clone(),
            overall_db: best.db,
            overall_alternative: Some(best.alternative.clone()),
            skipped,
            worlds_visited: sweeps.iter().map(|s| s.worlds).sum::<usize>() + ctx_worlds,
            max_worlds_per_sweep: worlds_per_sweep,
            sentences: Vec::new(),
        };
        r.sentences = r.render_sentences();
        Ok(r)
    }
}
