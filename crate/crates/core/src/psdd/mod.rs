//! Probabilistic SDDs: parameter fitting from complete data and exact
//! inference (joint, marginal, conditional, MPE).
//!
//! The circuit is a decision tree over the variables in declaration order
//! whose paths are exactly the models of the compiled theory. Every internal
//! node decides one variable and carries a two-entry parameter vector; a
//! missing branch is the false terminal and has parameter 0. Because no node
//! is shared, maximum-likelihood parameters reproduce the empirical
//! distribution of the data exactly on the support.

// branch indices 0 and 1 address several parallel two-entry arrays
#![allow(clippy::needless_range_loop)]

mod io;

use thiserror::Error;

use crate::circuits::Circuit;
use crate::data::Dataset;
use crate::logic::{PartialAssignment, VarId};

/// Largest support the trie is built for.
pub const MAX_SUPPORT: u64 = 1 << 20;

/// Bounds applied to free terminal biases when smoothing is active.
pub const BIAS_EPSILON: f64 = 1e-6;

/// Relative tolerance under which two MPE candidates count as tied.
pub const MPE_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PsddError {
    #[error("the constraint theory is unsatisfiable")]
    Unsatisfiable,
    #[error("support of {models} models exceeds the limit of {limit}")]
    TooLarge { models: String, limit: u64 },
    #[error("row {row} is not a model of the constraint theory")]
    RowViolation { row: usize },
    #[error("row {row} has {found} values, expected {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("smoothing must be finite and nonnegative, got {0}")]
    BadSmoothing(f64),
    #[error("assignment covers {found} of {expected} variables")]
    Incomplete { expected: usize, found: usize },
    #[error("conditioning event has probability zero")]
    ZeroProbability,
    #[error("joint weight function returned {0}")]
    BadWeight(f64),
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model does not match circuit: {0}")]
    Mismatch(String),
    #[error("parameter invariant violated: {0}")]
    Invariant(String),
}

/// Branch target of a decision node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Child {
    /// False terminal: no model continues this way.
    Bottom,
    /// True terminal: the path is complete.
    Top,
    Node(u32),
}

/// Decision on one variable: index 0 is the `¬x` element, index 1 is `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionNode {
    pub var: VarId,
    pub children: [Child; 2],
    pub theta: [f64; 2],
    log_theta: [f64; 2],
}

impl DecisionNode {
    fn feasible(&self) -> usize {
        self.children.iter().filter(|c| **c != Child::Bottom).count()
    }

    /// Both branches end at the true terminal: a literal-bias terminal.
    pub fn is_bias(&self) -> bool {
        self.children == [Child::Top, Child::Top]
    }
}

/// Node-visit statistics of one query.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Visits(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Psdd {
    num_vars: usize,
    /// Children before parents; the root is last.
    nodes: Vec<DecisionNode>,
    support: usize,
}

impl Psdd {
    /// Parameters maximizing likelihood of `data` with additive smoothing.
    ///
    /// Each feasible element receives `smoothing` pseudo-counts; elements
    /// leading to the false terminal are pinned to 0.
    pub fn fit(circuit: &Circuit, data: &Dataset, smoothing: f64) -> Result<Psdd, PsddError> {
        if !smoothing.is_finite() || smoothing < 0.0 {
            return Err(PsddError::BadSmoothing(smoothing));
        }
        let mut p = Psdd::skeleton(circuit)?;
        let mut counts = vec![[0.0f64; 2]; p.nodes.len()];
        for (i, row) in data.rows().iter().enumerate() {
            if row.len() != p.num_vars {
                return Err(PsddError::RowLength { row: i, expected: p.num_vars, found: row.len() });
            }
            if !p.add_path(row, 1.0, &mut counts) {
                return Err(PsddError::RowViolation { row: i });
            }
        }
        p.set_parameters(&counts, smoothing);
        Ok(p)
    }

    /// The distribution proportional to `weight` on the models of the
    /// circuit. Models with zero total weight in a subtree get uniform
    /// parameters there.
    pub fn from_joint(circuit: &Circuit, weight: impl Fn(&[bool]) -> f64) -> Result<Psdd, PsddError> {
        let mut p = Psdd::skeleton(circuit)?;
        let mut counts = vec![[0.0f64; 2]; p.nodes.len()];
        let mut models = Vec::with_capacity(p.support);
        circuit.for_each_model(&PartialAssignment::empty(p.num_vars), &mut |w| models.push(w.to_vec()));
        for w in &models {
            let x = weight(w);
            if !x.is_finite() || x < 0.0 {
                return Err(PsddError::BadWeight(x));
            }
            p.add_path(w, x, &mut counts);
        }
        p.set_parameters(&counts, 0.0);
        Ok(p)
    }

    fn skeleton(circuit: &Circuit) -> Result<Psdd, PsddError> {
        if circuit.is_unsatisfiable() {
            return Err(PsddError::Unsatisfiable);
        }
        let count = circuit.model_count();
        if count > MAX_SUPPORT.into() {
            return Err(PsddError::TooLarge { models: count.to_string(), limit: MAX_SUPPORT });
        }
        let n = circuit.num_vars();
        let mut models = Vec::new();
        circuit.for_each_model(&PartialAssignment::empty(n), &mut |w| models.push(w.to_vec()));
        models.sort_unstable();
        let mut nodes = Vec::new();
        build(&models, 0, n, &mut nodes);
        Ok(Psdd { num_vars: n, nodes, support: models.len() })
    }

    /// Adds `weight` along the path of `world`; `false` if it is not a model.
    fn add_path(&self, world: &[bool], weight: f64, counts: &mut [[f64; 2]]) -> bool {
        let mut at = self.root();
        loop {
            let b = world[self.nodes[at].var.index()] as usize;
            match self.nodes[at].children[b] {
                Child::Bottom => return false,
                Child::Top => break,
                Child::Node(c) => at = c as usize,
            }
        }
        let mut at = self.root();
        loop {
            let b = world[self.nodes[at].var.index()] as usize;
            counts[at][b] += weight;
            match self.nodes[at].children[b] {
                Child::Node(c) => at = c as usize,
                _ => return true,
            }
        }
    }

    fn set_parameters(&mut self, counts: &[[f64; 2]], smoothing: f64) {
        for (node, c) in self.nodes.iter_mut().zip(counts) {
            let k = node.feasible() as f64;
            let mut pseudo = [0.0; 2];
            for b in 0..2 {
                if node.children[b] != Child::Bottom {
                    pseudo[b] = c[b] + smoothing;
                }
            }
            let total = pseudo[0] + pseudo[1];
            for b in 0..2 {
                node.theta[b] = if node.children[b] == Child::Bottom {
                    0.0
                } else if total > 0.0 {
                    pseudo[b] / total
                } else {
                    1.0 / k
                };
            }
            if smoothing > 0.0 && node.is_bias() {
                let hi = node.theta[1].clamp(BIAS_EPSILON, 1.0 - BIAS_EPSILON);
                node.theta = [1.0 - hi, hi];
            }
            node.refresh_logs();
        }
    }

    fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[DecisionNode] {
        &self.nodes
    }

    /// Number of models of the underlying theory.
    pub fn support_size(&self) -> usize {
        self.support
    }

    /// Number of parameters attached to feasible elements.
    pub fn parameter_count(&self) -> usize {
        self.nodes.iter().map(DecisionNode::feasible).sum()
    }

    /// Pr(world) for a complete assignment; 0 for non-models.
    pub fn evaluate(&self, world: &[bool]) -> Result<f64, PsddError> {
        self.evaluate_counted(world).map(|r| r.0)
    }

    pub fn evaluate_counted(&self, world: &[bool]) -> Result<(f64, Visits), PsddError> {
        if world.len() != self.num_vars {
            return Err(PsddError::Incomplete { expected: self.num_vars, found: world.len() });
        }
        let mut log_p = 0.0;
        let mut visits = 0;
        let mut at = self.root();
        loop {
            visits += 1;
            let node = &self.nodes[at];
            let b = world[node.var.index()] as usize;
            match node.children[b] {
                Child::Bottom => return Ok((0.0, Visits(visits))),
                Child::Top => {
                    log_p += node.log_theta[b];
                    return Ok((log_p.exp(), Visits(visits)));
                }
                Child::Node(c) => {
                    log_p += node.log_theta[b];
                    at = c as usize;
                }
            }
        }
    }

    /// Evaluates a partial assignment that happens to assign every variable.
    pub fn evaluate_assignment(&self, w: &PartialAssignment) -> Result<f64, PsddError> {
        let world: Option<Vec<bool>> = (0..self.num_vars).map(|i| w.get(VarId::from(i))).collect();
        match world {
            Some(world) if w.len() == self.num_vars => self.evaluate(&world),
            _ => Err(PsddError::Incomplete {
                expected: self.num_vars,
                found: w.values().iter().filter(|v| v.is_some()).count(),
            }),
        }
    }

    /// Probability of the evidence, summing out unassigned variables.
    pub fn marginal(&self, evidence: &PartialAssignment) -> f64 {
        self.marginal_counted(evidence).0
    }

    pub fn marginal_counted(&self, evidence: &PartialAssignment) -> (f64, Visits) {
        let mut value = vec![f64::NEG_INFINITY; self.nodes.len()];
        let mut visits = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            visits += 1;
            let mut terms = [f64::NEG_INFINITY; 2];
            for b in 0..2 {
                if evidence.get(node.var).is_some_and(|e| e != (b == 1)) {
                    continue;
                }
                let child = match node.children[b] {
                    Child::Bottom => continue,
                    Child::Top => 0.0,
                    Child::Node(c) => value[c as usize],
                };
                terms[b] = node.log_theta[b] + child;
            }
            value[i] = log_add(terms[0], terms[1]);
        }
        (value[self.root()].exp(), Visits(visits))
    }

    /// Pr(query | given).
    pub fn conditional(&self, query: &PartialAssignment, given: &PartialAssignment) -> Result<f64, PsddError> {
        let denominator = self.marginal(given);
        if denominator <= 0.0 {
            return Err(PsddError::ZeroProbability);
        }
        match query.union(given) {
            None => Ok(0.0),
            Some(joint) => Ok((self.marginal(&joint) / denominator).min(1.0)),
        }
    }

    /// Most probable complete assignment extending `evidence`, with its
    /// probability. Among tied assignments the lexicographically smallest
    /// (false before true, variables in declaration order) wins.
    pub fn mpe(&self, evidence: &PartialAssignment) -> Result<(Vec<bool>, f64), PsddError> {
        self.mpe_counted(evidence).map(|(w, p, _)| (w, p))
    }

    pub fn mpe_counted(&self, evidence: &PartialAssignment) -> Result<(Vec<bool>, f64, Visits), PsddError> {
        let mut best = vec![f64::NEG_INFINITY; self.nodes.len()];
        let mut choice = vec![0u8; self.nodes.len()];
        let mut visits = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            visits += 1;
            let mut terms = [f64::NEG_INFINITY; 2];
            for b in 0..2 {
                if evidence.get(node.var).is_some_and(|e| e != (b == 1)) {
                    continue;
                }
                let child = match node.children[b] {
                    Child::Bottom => continue,
                    Child::Top => 0.0,
                    Child::Node(c) => best[c as usize],
                };
                terms[b] = node.log_theta[b] + child;
            }
            let pick_true = terms[1] > terms[0] + MPE_TIE_TOLERANCE || (terms[0] == f64::NEG_INFINITY && terms[1] > f64::NEG_INFINITY);
            choice[i] = pick_true as u8;
            best[i] = terms[pick_true as usize];
        }
        let root = self.root();
        if best[root] == f64::NEG_INFINITY {
            return Err(PsddError::ZeroProbability);
        }
        let mut world = vec![false; self.num_vars];
        let mut at = root;
        loop {
            let b = choice[at] as usize;
            world[self.nodes[at].var.index()] = b == 1;
            match self.nodes[at].children[b] {
                Child::Node(c) => at = c as usize,
                _ => break,
            }
        }
        Ok((world, best[root].exp(), Visits(visits)))
    }

    /// Calls `visit` with every world of positive probability that extends
    /// `evidence`, in lexicographic order. Returns the number of worlds.
    pub fn for_each_world(&self, evidence: &PartialAssignment, visit: &mut dyn FnMut(&[bool], f64)) -> usize {
        let mut world = vec![false; self.num_vars];
        let mut count = 0;
        self.walk(self.root(), 0.0, evidence, false, &mut world, &mut count, visit);
        count
    }

    /// Like [`Psdd::for_each_world`] but also visits models of the theory
    /// that the parameters give probability zero.
    pub fn for_each_model(&self, evidence: &PartialAssignment, visit: &mut dyn FnMut(&[bool], f64)) -> usize {
        let mut world = vec![false; self.num_vars];
        let mut count = 0;
        self.walk(self.root(), 0.0, evidence, true, &mut world, &mut count, visit);
        count
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        &self,
        at: usize,
        log_p: f64,
        ev: &PartialAssignment,
        include_zero: bool,
        world: &mut Vec<bool>,
        count: &mut usize,
        visit: &mut dyn FnMut(&[bool], f64),
    ) {
        let node = &self.nodes[at];
        for b in 0..2 {
            if node.children[b] == Child::Bottom || (node.theta[b] <= 0.0 && !include_zero) || ev.get(node.var).is_some_and(|e| e != (b == 1)) {
                continue;
            }
            world[node.var.index()] = b == 1;
            let lp = log_p + node.log_theta[b];
            match node.children[b] {
                Child::Bottom => {}
                Child::Top => {
                    *count += 1;
                    visit(world, lp.exp());
                }
                Child::Node(c) => self.walk(c as usize, lp, ev, include_zero, world, count, visit),
            }
        }
    }

    /// Worlds of positive probability extending `evidence`.
    pub fn worlds(&self, evidence: &PartialAssignment) -> Vec<(Vec<bool>, f64)> {
        let mut out = Vec::new();
        self.for_each_world(evidence, &mut |w, p| out.push((w.to_vec(), p)));
        out
    }

    /// Checks the parameter invariants: every vector is nonnegative and sums
    /// to 1, parameters vanish exactly on false-terminal elements, and free
    /// terminal biases lie strictly inside (0, 1).
    pub fn check_invariants(&self) -> Result<(), PsddError> {
        for (i, node) in self.nodes.iter().enumerate() {
            let bad = |m: String| PsddError::Invariant(format!("node {i}: {m}"));
            let sum = node.theta[0] + node.theta[1];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(bad(format!("parameters sum to {sum}")));
            }
            for b in 0..2 {
                let t = node.theta[b];
                if !(0.0..=1.0).contains(&t) {
                    return Err(bad(format!("parameter {t} outside [0, 1]")));
                }
                if (t == 0.0) != (node.children[b] == Child::Bottom) {
                    return Err(bad(format!("parameter {b} is {t} but the element is {:?}", node.children[b])));
                }
            }
        }
        Ok(())
    }
}

impl DecisionNode {
    fn refresh_logs(&mut self) {
        self.log_theta = self.theta.map(f64::ln);
    }
}

/// Builds the subtrie of the sorted `models` below `depth`.
fn build(models: &[Vec<bool>], depth: usize, n: usize, nodes: &mut Vec<DecisionNode>) -> Child {
    if models.is_empty() {
        return Child::Bottom;
    }
    if depth == n {
        return Child::Top;
    }
    let split = models.partition_point(|w| !w[depth]);
    let lo = build(&models[..split], depth + 1, n, nodes);
    let hi = build(&models[split..], depth + 1, n, nodes);
    nodes.push(DecisionNode {
        var: VarId::from(depth),
        children: [lo, hi],
        theta: [0.0; 2],
        log_theta: [f64::NEG_INFINITY; 2],
    });
    Child::Node(nodes.len() as u32 - 1)
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}
