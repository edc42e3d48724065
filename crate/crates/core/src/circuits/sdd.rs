//! SDD manager: node store, unique table and the apply operation.
//!
//! Nodes are kept compressed (no two elements of a decision node share a sub)
//! and trimmed (no `{(⊤, s)}` or `{(p, ⊤), (¬p, ⊥)}` nodes), which makes them
//! canonical for the manager's vtree: equal functions get equal ids.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, Ordering};

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::logic::{Formula, PartialAssignment, VarId};

use super::vtree::{Vtree, VtreeId};
use super::CircuitError;

static NEXT_MANAGER: AtomicU32 = AtomicU32::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const FALSE: NodeId = NodeId(0);
    pub const TRUE: NodeId = NodeId(1);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Node {
    False,
    True,
    Literal { var: VarId, positive: bool },
    /// Prime/sub pairs, sorted by (prime, sub) id.
    Decision { vtree: VtreeId, elements: Box<[(NodeId, NodeId)]> },
}

/// Handle to a node of a particular manager.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sdd {
    manager: u32,
    node: NodeId,
}

impl Sdd {
    pub fn node(self) -> NodeId {
        self.node
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    And,
    Or,
}

/// Decision node identity: vtree node plus its sorted elements.
type UniqueKey = (VtreeId, Box<[(NodeId, NodeId)]>);

#[derive(Debug, Clone)]
pub struct SddManager {
    id: u32,
    vtree: Vtree,
    nodes: Vec<Node>,
    unique: HashMap<UniqueKey, NodeId>,
    literals: Vec<[Option<NodeId>; 2]>,
    apply_cache: HashMap<(Op, NodeId, NodeId), NodeId>,
    negations: HashMap<NodeId, NodeId>,
}

impl SddManager {
    pub fn new(vtree: Vtree) -> Self {
        let n = vtree.num_vars();
        SddManager {
            id: NEXT_MANAGER.fetch_add(1, Ordering::Relaxed),
            vtree,
            nodes: vec![Node::False, Node::True],
            unique: HashMap::new(),
            literals: vec![[None; 2]; n],
            apply_cache: HashMap::new(),
            negations: HashMap::new(),
        }
    }

    pub fn vtree(&self) -> &Vtree {
        &self.vtree
    }

    pub fn num_vars(&self) -> usize {
        self.vtree.num_vars()
    }

    /// Total nodes ever created, including garbage from intermediate results.
    pub fn store_size(&self) -> usize {
        self.nodes.len()
    }

    fn handle(&self, node: NodeId) -> Sdd {
        Sdd { manager: self.id, node }
    }

    fn check(&self, s: Sdd) -> Result<NodeId, CircuitError> {
        if s.manager == self.id {
            Ok(s.node)
        } else {
            Err(CircuitError::VtreeMismatch)
        }
    }

    pub fn node(&self, s: Sdd) -> &Node {
        &self.nodes[s.node.index()]
    }

    pub(crate) fn raw(&self, n: NodeId) -> &Node {
        &self.nodes[n.index()]
    }

    pub fn sdd(&self, n: NodeId) -> Sdd {
        assert!(n.index() < self.nodes.len(), "node id out of range");
        self.handle(n)
    }

    pub fn tt(&self) -> Sdd {
        self.handle(NodeId::TRUE)
    }

    pub fn ff(&self) -> Sdd {
        self.handle(NodeId::FALSE)
    }

    pub fn is_false(&self, s: Sdd) -> bool {
        s.node == NodeId::FALSE
    }

    pub fn is_true(&self, s: Sdd) -> bool {
        s.node == NodeId::TRUE
    }

    pub fn literal(&mut self, var: VarId, positive: bool) -> Sdd {
        let n = self.lit(var, positive);
        self.handle(n)
    }

    fn lit(&mut self, var: VarId, positive: bool) -> NodeId {
        let slot = &mut self.literals[var.index()][positive as usize];
        if let Some(n) = *slot {
            return n;
        }
        let n = NodeId(self.nodes.len() as u32);
        *slot = Some(n);
        self.nodes.push(Node::Literal { var, positive });
        n
    }

    /// Vtree node a non-terminal node is normalized for.
    pub(crate) fn vtree_of(&self, n: NodeId) -> Option<VtreeId> {
        match &self.nodes[n.index()] {
            Node::False | Node::True => None,
            Node::Literal { var, .. } => Some(self.vtree.leaf(*var)),
            Node::Decision { vtree, .. } => Some(*vtree),
        }
    }

    pub fn apply(&mut self, x: Sdd, y: Sdd, op: Op) -> Result<Sdd, CircuitError> {
        let (a, b) = (self.check(x)?, self.check(y)?);
        let n = self.apply_nodes(a, b, op);
        Ok(self.handle(n))
    }

    pub fn negate(&mut self, x: Sdd) -> Result<Sdd, CircuitError> {
        let a = self.check(x)?;
        let n = self.neg(a);
        Ok(self.handle(n))
    }

    fn neg(&mut self, a: NodeId) -> NodeId {
        match a {
            NodeId::FALSE => return NodeId::TRUE,
            NodeId::TRUE => return NodeId::FALSE,
            _ => {}
        }
        if let Some(&n) = self.negations.get(&a) {
            return n;
        }
        let n = match self.nodes[a.index()].clone() {
            Node::Literal { var, positive } => self.lit(var, !positive),
            Node::Decision { vtree, elements } => {
                let negated: Vec<_> = elements.iter().map(|&(p, s)| (p, self.neg(s))).collect();
                // subs stay distinct, so the node is still compressed and trimmed
                self.intern(vtree, negated)
            }
            Node::False | Node::True => unreachable!(),
        };
        self.negations.insert(a, n);
        self.negations.insert(n, a);
        n
    }

    fn apply_nodes(&mut self, a: NodeId, b: NodeId, op: Op) -> NodeId {
        match op {
            Op::And => {
                if a == NodeId::FALSE || b == NodeId::FALSE {
                    return NodeId::FALSE;
                }
                if a == NodeId::TRUE || a == b {
                    return b;
                }
                if b == NodeId::TRUE {
                    return a;
                }
            }
            Op::Or => {
                if a == NodeId::TRUE || b == NodeId::TRUE {
                    return NodeId::TRUE;
                }
                if a == NodeId::FALSE || a == b {
                    return b;
                }
                if b == NodeId::FALSE {
                    return a;
                }
            }
        }
        let key = if a <= b { (op, a, b) } else { (op, b, a) };
        if let Some(&n) = self.apply_cache.get(&key) {
            return n;
        }
        let va = self.vtree_of(a).unwrap();
        let vb = self.vtree_of(b).unwrap();
        let result = if va == vb && self.vtree.is_leaf(va) {
            // distinct literals of one variable: x and ¬x
            match op {
                Op::And => NodeId::FALSE,
                Op::Or => NodeId::TRUE,
            }
        } else {
            let v = self.vtree.lca(va, vb);
            let ea = self.expand(a, v);
            let eb = self.expand(b, v);
            let mut elements = Vec::with_capacity(ea.len() * eb.len());
            for &(p, s) in &ea {
                for &(q, t) in &eb {
                    let prime = self.apply_nodes(p, q, Op::And);
                    if prime == NodeId::FALSE {
                        continue;
                    }
                    let sub = self.apply_nodes(s, t, op);
                    elements.push((prime, sub));
                }
            }
            self.make_decision(v, elements)
        };
        self.apply_cache.insert(key, result);
        result
    }

    /// Elements of `n` viewed as a decision node for vtree node `v`.
    fn expand(&mut self, n: NodeId, v: VtreeId) -> Vec<(NodeId, NodeId)> {
        let u = self.vtree_of(n).unwrap();
        if u == v {
            match &self.nodes[n.index()] {
                Node::Decision { elements, .. } => elements.to_vec(),
                _ => unreachable!("leaf vtree nodes never host decisions"),
            }
        } else if self.vtree.in_left(v, u) {
            let not_n = self.neg(n);
            vec![(n, NodeId::TRUE), (not_n, NodeId::FALSE)]
        } else {
            debug_assert!(self.vtree.in_right(v, u));
            vec![(NodeId::TRUE, n)]
        }
    }

    /// Compresses, trims and interns a partition for vtree node `v`.
    fn make_decision(&mut self, v: VtreeId, elements: Vec<(NodeId, NodeId)>) -> NodeId {
        let mut merged: Vec<(NodeId, NodeId)> = Vec::with_capacity(elements.len());
        for (p, s) in elements {
            if p == NodeId::FALSE {
                continue;
            }
            match merged.iter().position(|e| e.1 == s) {
                Some(i) => merged[i].0 = self.apply_nodes(merged[i].0, p, Op::Or),
                None => merged.push((p, s)),
            }
        }
        match merged.len() {
            0 => NodeId::FALSE,
            1 => merged[0].1,
            2 if merged.iter().any(|e| e.1 == NodeId::TRUE) && merged.iter().any(|e| e.1 == NodeId::FALSE) => {
                merged.iter().find(|e| e.1 == NodeId::TRUE).unwrap().0
            }
            _ => self.intern(v, merged),
        }
    }

    fn intern(&mut self, v: VtreeId, mut elements: Vec<(NodeId, NodeId)>) -> NodeId {
        elements.sort_unstable();
        let elements = elements.into_boxed_slice();
        if let Some(&n) = self.unique.get(&(v, elements.clone())) {
            return n;
        }
        let n = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node::Decision { vtree: v, elements: elements.clone() });
        self.unique.insert((v, elements), n);
        n
    }

    /// Rebuilds a decision node from serialized elements, re-normalizing it.
    pub(crate) fn decision_from_parts(
        &mut self,
        v: VtreeId,
        elements: Vec<(NodeId, NodeId)>,
    ) -> Result<NodeId, CircuitError> {
        if self.vtree.is_leaf(v) {
            return Err(CircuitError::Malformed("decision node on a vtree leaf".into()));
        }
        for &(p, s) in &elements {
            for (n, side_ok) in [(p, true), (s, false)] {
                if n.index() >= self.nodes.len() {
                    return Err(CircuitError::Malformed(format!("dangling node reference {}", n.0)));
                }
                if let Some(u) = self.vtree_of(n) {
                    let ok = if side_ok { self.vtree.in_left(v, u) } else { self.vtree.in_right(v, u) };
                    if !ok {
                        return Err(CircuitError::Malformed("element not normalized for its vtree node".into()));
                    }
                }
            }
        }
        let k = elements.len();
        let n = self.make_decision(v, elements);
        match &self.nodes[n.index()] {
            Node::Decision { vtree, elements } if *vtree == v && elements.len() == k => Ok(n),
            _ => Err(CircuitError::Malformed("decision node is not compressed and trimmed".into())),
        }
    }

    pub fn compile_formula(&mut self, f: &Formula) -> Sdd {
        let n = self.formula_node(f);
        self.handle(n)
    }

    fn formula_node(&mut self, f: &Formula) -> NodeId {
        match f {
            Formula::Atom(v) => self.lit(*v, true),
            Formula::Not(g) => {
                let n = self.formula_node(g);
                self.neg(n)
            }
            Formula::And(gs) => gs.iter().fold(NodeId::TRUE, |acc, g| {
                let n = self.formula_node(g);
                self.apply_nodes(acc, n, Op::And)
            }),
            Formula::Or(gs) => gs.iter().fold(NodeId::FALSE, |acc, g| {
                let n = self.formula_node(g);
                self.apply_nodes(acc, n, Op::Or)
            }),
            Formula::Implies(a, b) => {
                let a = self.formula_node(a);
                let b = self.formula_node(b);
                let na = self.neg(a);
                self.apply_nodes(na, b, Op::Or)
            }
            Formula::Iff(a, b) => {
                let a = self.formula_node(a);
                let b = self.formula_node(b);
                let both = self.apply_nodes(a, b, Op::And);
                let (na, nb) = (self.neg(a), self.neg(b));
                let neither = self.apply_nodes(na, nb, Op::And);
                self.apply_nodes(both, neither, Op::Or)
            }
        }
    }

    /// Conjunction of all constraints.
    pub fn compile(&mut self, constraints: &[Formula]) -> Sdd {
        let mut acc = NodeId::TRUE;
        for f in constraints {
            let n = self.formula_node(f);
            acc = self.apply_nodes(acc, n, Op::And);
        }
        self.handle(acc)
    }

    /// Nodes reachable from `s` in post-order (children before parents).
    pub fn reachable(&self, s: Sdd) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack = vec![(s.node, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                out.push(n);
                continue;
            }
            if seen[n.index()] {
                continue;
            }
            seen[n.index()] = true;
            stack.push((n, true));
            if let Node::Decision { elements, .. } = &self.nodes[n.index()] {
                for &(p, s) in elements.iter().rev() {
                    stack.push((s, false));
                    stack.push((p, false));
                }
            }
        }
        out
    }

    /// Number of distinct nodes reachable from `s`.
    pub fn size(&self, s: Sdd) -> usize {
        self.reachable(s).len()
    }

    pub fn model_count(&self, s: Sdd) -> BigUint {
        self.model_count_with(s, &PartialAssignment::empty(self.num_vars()))
    }

    /// Models of `s` that extend `evidence`, over all manager variables.
    pub fn model_count_with(&self, s: Sdd, evidence: &PartialAssignment) -> BigUint {
        // free[v] = variables below v that the evidence leaves open
        let mut free = vec![0usize; self.vtree.num_nodes()];
        for (i, f) in free.iter_mut().enumerate() {
            *f = self.vtree.vars_below(VtreeId(i as u32)).iter().filter(|v| evidence.get(**v).is_none()).count();
        }
        let mut memo: HashMap<NodeId, BigUint> = HashMap::new();
        self.count_at(s.node, self.vtree.root(), evidence, &free, &mut memo)
    }

    fn count_at(
        &self,
        n: NodeId,
        v: VtreeId,
        ev: &PartialAssignment,
        free: &[usize],
        memo: &mut HashMap<NodeId, BigUint>,
    ) -> BigUint {
        match n {
            NodeId::FALSE => return BigUint::zero(),
            NodeId::TRUE => return BigUint::one() << free[v.index()],
            _ => {}
        }
        let u = self.vtree_of(n).unwrap();
        let own = if let Some(c) = memo.get(&n) {
            c.clone()
        } else {
            let c = match &self.nodes[n.index()] {
                Node::Literal { var, positive } => {
                    if ev.get(*var).is_none_or(|b| b == *positive) {
                        BigUint::one()
                    } else {
                        BigUint::zero()
                    }
                }
                Node::Decision { elements, .. } => {
                    let (l, r) = (self.vtree.left(u), self.vtree.right(u));
                    let mut total = BigUint::zero();
                    for &(p, s) in elements.iter() {
                        let cp = self.count_at(p, l, ev, free, memo);
                        if cp.is_zero() {
                            continue;
                        }
                        total += cp * self.count_at(s, r, ev, free, memo);
                    }
                    total
                }
                Node::False | Node::True => unreachable!(),
            };
            memo.insert(n, c.clone());
            c
        };
        own << (free[v.index()] - free[u.index()])
    }

    /// Calls `visit` once per model of `s` extending `evidence`.
    ///
    /// Models are produced in a fixed order determined by the circuit; the
    /// slice passed to `visit` is indexed by variable id.
    pub fn for_each_model(&self, s: Sdd, evidence: &PartialAssignment, visit: &mut dyn FnMut(&[bool])) {
        let mut world = vec![false; self.num_vars()];
        self.walk(s.node, self.vtree.root(), evidence, &mut world, &mut |w: &mut Vec<bool>| visit(w));
    }

    pub fn enumerate_models(&self, s: Sdd, evidence: &PartialAssignment) -> Vec<Vec<bool>> {
        let mut out = Vec::new();
        self.for_each_model(s, evidence, &mut |w| out.push(w.to_vec()));
        out
    }

    fn walk(
        &self,
        n: NodeId,
        v: VtreeId,
        ev: &PartialAssignment,
        world: &mut Vec<bool>,
        k: &mut dyn FnMut(&mut Vec<bool>),
    ) {
        if n == NodeId::FALSE {
            return;
        }
        if n == NodeId::TRUE {
            let vars = self.vtree.vars_below(v);
            Self::free_vars(vars, ev, world, k);
            return;
        }
        let u = self.vtree_of(n).unwrap();
        if u != v {
            // variables of v outside u are unconstrained by n
            let gap: Vec<VarId> = self
                .vtree
                .vars_below(v)
                .iter()
                .copied()
                .filter(|x| !self.vtree.contains(u, self.vtree.leaf(*x)))
                .collect();
            Self::free_vars(&gap, ev, world, &mut |w: &mut Vec<bool>| self.walk(n, u, ev, w, k));
            return;
        }
        match &self.nodes[n.index()] {
            Node::Literal { var, positive } => {
                if ev.get(*var).is_none_or(|b| b == *positive) {
                    world[var.index()] = *positive;
                    k(world);
                }
            }
            Node::Decision { elements, .. } => {
                let (l, r) = (self.vtree.left(u), self.vtree.right(u));
                for &(p, s) in elements.iter() {
                    if s == NodeId::FALSE {
                        continue;
                    }
                    self.walk(p, l, ev, world, &mut |w: &mut Vec<bool>| self.walk(s, r, ev, w, k));
                }
            }
            Node::False | Node::True => unreachable!(),
        }
    }

    fn free_vars(vars: &[VarId], ev: &PartialAssignment, world: &mut Vec<bool>, k: &mut dyn FnMut(&mut Vec<bool>)) {
        match vars.split_first() {
            None => k(world),
            Some((x, rest)) => {
                for b in [false, true] {
                    if ev.get(*x).is_none_or(|e| e == b) {
                        world[x.index()] = b;
                        Self::free_vars(rest, ev, world, k);
                    }
                }
            }
        }
    }

    /// Checks the structural invariants of every decision node under `s`:
    /// primes are consistent, pairwise disjoint and exhaustive; subs are
    /// distinct; primes and subs are normalized for the children of the
    /// node's vtree node; no trimmable node survives.
    pub fn validate(&mut self, s: Sdd) -> Result<(), CircuitError> {
        let root = self.check(s)?;
        for n in self.reachable(self.handle(root)) {
            let Node::Decision { vtree: v, elements } = self.nodes[n.index()].clone() else { continue };
            let bad = |msg: &str| CircuitError::Malformed(format!("node {}: {msg}", n.0));
            if elements.len() < 2 {
                return Err(bad("fewer than two elements"));
            }
            let mut cover = NodeId::FALSE;
            for (i, &(p, s)) in elements.iter().enumerate() {
                if p == NodeId::FALSE {
                    return Err(bad("inconsistent prime"));
                }
                let pv = self.vtree_of(p).ok_or_else(|| bad("terminal prime"))?;
                if !self.vtree.in_left(v, pv) {
                    return Err(bad("prime not normalized for left child"));
                }
                if let Some(sv) = self.vtree_of(s) {
                    if !self.vtree.in_right(v, sv) {
                        return Err(bad("sub not normalized for right child"));
                    }
                }
                for &(q, t) in &elements[i + 1..] {
                    if self.apply_nodes(p, q, Op::And) != NodeId::FALSE {
                        return Err(bad("primes overlap"));
                    }
                    if s == t {
                        return Err(bad("node is not compressed"));
                    }
                }
                cover = self.apply_nodes(cover, p, Op::Or);
            }
            if cover != NodeId::TRUE {
                return Err(bad("primes are not exhaustive"));
            }
            if elements.len() == 2 {
                let subs: Vec<NodeId> = elements.iter().map(|e| e.1).collect();
                if subs.contains(&NodeId::TRUE) && subs.contains(&NodeId::FALSE) {
                    return Err(bad("node is not trimmed"));
                }
            }
        }
        Ok(())
    }

    /// Same vtree shape (used when checking loaded artifacts).
    pub fn same_vtree(&self, other: &Vtree) -> bool {
        self.vtree.same_shape(other)
    }
}
