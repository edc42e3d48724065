use std::fmt::Write as _;

use crate::logic::{Scenario, VarId};

use super::CircuitError;

/// Shape of the generated vtree. Leaves always follow declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VtreeStrategy {
    #[default]
    Balanced,
    RightLinear,
}

impl std::str::FromStr for VtreeStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "balanced" => Ok(VtreeStrategy::Balanced),
            "right-linear" => Ok(VtreeStrategy::RightLinear),
            other => Err(format!("unknown vtree strategy `{other}`")),
        }
    }
}

/// Vtree node index. Nodes are numbered in-order, so every subtree occupies a
/// contiguous id range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VtreeId(pub u32);

impl VtreeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct VNode {
    left: Option<VtreeId>,
    right: Option<VtreeId>,
    parent: Option<VtreeId>,
    var: Option<VarId>,
    lo: u32,
    hi: u32,
    depth: u32,
    first_leaf: u32,
    leaves: u32,
}

/// Full binary tree whose leaves are labelled with variables, each exactly once.
#[derive(Debug, Clone)]
pub struct Vtree {
    nodes: Vec<VNode>,
    root: VtreeId,
    leaf_of: Vec<VtreeId>,
    leaf_vars: Vec<VarId>,
}

enum Shape {
    Leaf(VarId),
    Inner(Box<Shape>, Box<Shape>),
}

impl Vtree {
    pub fn build(scenario: &Scenario, strategy: VtreeStrategy) -> Result<Vtree, CircuitError> {
        let order: Vec<VarId> = (0..scenario.num_vars()).map(VarId::from).collect();
        Self::from_order(&order, strategy)
    }

    pub fn from_order(order: &[VarId], strategy: VtreeStrategy) -> Result<Vtree, CircuitError> {
        if order.is_empty() {
            return Err(CircuitError::EmptyVtree);
        }
        fn shape(vars: &[VarId], strategy: VtreeStrategy) -> Shape {
            if vars.len() == 1 {
                return Shape::Leaf(vars[0]);
            }
            let split = match strategy {
                VtreeStrategy::Balanced => vars.len() / 2,
                VtreeStrategy::RightLinear => 1,
            };
            Shape::Inner(Box::new(shape(&vars[..split], strategy)), Box::new(shape(&vars[split..], strategy)))
        }
        Self::from_shape(shape(order, strategy), order.len())
    }

    fn from_shape(shape: Shape, num_vars: usize) -> Result<Vtree, CircuitError> {
        let mut vt = Vtree { nodes: Vec::new(), root: VtreeId(0), leaf_of: Vec::new(), leaf_vars: Vec::new() };
        let root = vt.place(&shape, None, 0);
        vt.root = root;
        let mut seen = vec![false; num_vars];
        for &v in &vt.leaf_vars {
            if v.index() >= num_vars || seen[v.index()] {
                return Err(CircuitError::BadVtree(format!("variable {v} labels zero or several leaves")));
            }
            seen[v.index()] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(CircuitError::BadVtree("vtree does not cover every variable".into()));
        }
        vt.leaf_of = vec![VtreeId(0); num_vars];
        for (i, n) in vt.nodes.iter().enumerate() {
            if let Some(v) = n.var {
                vt.leaf_of[v.index()] = VtreeId(i as u32);
            }
        }
        Ok(vt)
    }

    /// Lays out `shape` with in-order ids; returns the id of its root.
    fn place(&mut self, shape: &Shape, parent: Option<VtreeId>, depth: u32) -> VtreeId {
        match shape {
            Shape::Leaf(v) => {
                let id = VtreeId(self.nodes.len() as u32);
                let first_leaf = self.leaf_vars.len() as u32;
                self.leaf_vars.push(*v);
                self.nodes.push(VNode {
                    left: None,
                    right: None,
                    parent,
                    var: Some(*v),
                    lo: id.0,
                    hi: id.0,
                    depth,
                    first_leaf,
                    leaves: 1,
                });
                id
            }
            Shape::Inner(l, r) => {
                let first_leaf = self.leaf_vars.len() as u32;
                let left = self.place(l, None, depth + 1);
                let id = VtreeId(self.nodes.len() as u32);
                self.nodes.push(VNode {
                    left: Some(left),
                    right: None,
                    parent,
                    var: None,
                    lo: self.nodes[left.index()].lo,
                    hi: 0,
                    depth,
                    first_leaf,
                    leaves: 0,
                });
                self.nodes[left.index()].parent = Some(id);
                let right = self.place(r, Some(id), depth + 1);
                let hi = self.nodes[right.index()].hi;
                let n = &mut self.nodes[id.index()];
                n.right = Some(right);
                n.hi = hi;
                let leaves = self.nodes[left.index()].leaves + self.nodes[right.index()].leaves;
                self.nodes[id.index()].leaves = leaves;
                id
            }
        }
    }

    /// Parses nested parentheses of variable names, e.g. `((A B) (C D))`.
    pub fn parse(text: &str, scenario: &Scenario) -> Result<Vtree, CircuitError> {
        let tokens: Vec<String> = text
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut pos = 0;
        fn parse_shape(t: &[String], pos: &mut usize, sc: &Scenario) -> Result<Shape, CircuitError> {
            let tok = t.get(*pos).ok_or_else(|| CircuitError::BadVtree("unexpected end of vtree".into()))?;
            *pos += 1;
            if tok == "(" {
                let l = parse_shape(t, pos, sc)?;
                let r = parse_shape(t, pos, sc)?;
                if t.get(*pos).map(String::as_str) != Some(")") {
                    return Err(CircuitError::BadVtree("internal vtree nodes need exactly two children".into()));
                }
                *pos += 1;
                Ok(Shape::Inner(Box::new(l), Box::new(r)))
            } else if tok == ")" {
                Err(CircuitError::BadVtree("unexpected `)`".into()))
            } else {
                sc.var(tok)
                    .map(Shape::Leaf)
                    .ok_or_else(|| CircuitError::BadVtree(format!("unknown variable `{tok}` in vtree")))
            }
        }
        let shape = parse_shape(&tokens, &mut pos, scenario)?;
        if pos != tokens.len() {
            return Err(CircuitError::BadVtree("trailing tokens after vtree".into()));
        }
        Self::from_shape(shape, scenario.num_vars())
    }

    pub fn to_text(&self, scenario: &Scenario) -> String {
        let mut out = String::new();
        self.write_node(self.root, scenario, &mut out);
        out.push('\n');
        out
    }

    fn write_node(&self, v: VtreeId, sc: &Scenario, out: &mut String) {
        match self.var(v) {
            Some(var) => out.push_str(sc.name(var)),
            None => {
                out.push('(');
                self.write_node(self.left(v), sc, out);
                out.push(' ');
                self.write_node(self.right(v), sc, out);
                out.push(')');
            }
        }
    }

    pub fn root(&self) -> VtreeId {
        self.root
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_vars(&self) -> usize {
        self.leaf_vars.len()
    }

    pub fn is_leaf(&self, v: VtreeId) -> bool {
        self.nodes[v.index()].var.is_some()
    }

    pub fn var(&self, v: VtreeId) -> Option<VarId> {
        self.nodes[v.index()].var
    }

    pub fn left(&self, v: VtreeId) -> VtreeId {
        self.nodes[v.index()].left.expect("leaf has no children")
    }

    pub fn right(&self, v: VtreeId) -> VtreeId {
        self.nodes[v.index()].right.expect("leaf has no children")
    }

    pub fn parent(&self, v: VtreeId) -> Option<VtreeId> {
        self.nodes[v.index()].parent
    }

    pub fn leaf(&self, var: VarId) -> VtreeId {
        self.leaf_of[var.index()]
    }

    pub fn depth(&self, v: VtreeId) -> u32 {
        self.nodes[v.index()].depth
    }

    /// Height of the tree (a single leaf has height 0).
    pub fn height(&self) -> u32 {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Number of variables below `v`.
    pub fn var_count(&self, v: VtreeId) -> usize {
        self.nodes[v.index()].leaves as usize
    }

    /// Variables below `v`, left to right.
    pub fn vars_below(&self, v: VtreeId) -> &[VarId] {
        let n = &self.nodes[v.index()];
        &self.leaf_vars[n.first_leaf as usize..(n.first_leaf + n.leaves) as usize]
    }

    /// All variables left to right.
    pub fn leaf_order(&self) -> &[VarId] {
        &self.leaf_vars
    }

    /// Rank of the leftmost leaf below `v` in [`Vtree::leaf_order`].
    pub fn first_leaf_rank(&self, v: VtreeId) -> usize {
        self.nodes[v.index()].first_leaf as usize
    }

    /// `true` when `u` lies in the subtree rooted at `v` (including `v`).
    pub fn contains(&self, v: VtreeId, u: VtreeId) -> bool {
        let n = &self.nodes[v.index()];
        n.lo <= u.0 && u.0 <= n.hi
    }

    /// `true` when `u` lies strictly inside the left subtree of `v`.
    pub fn in_left(&self, v: VtreeId, u: VtreeId) -> bool {
        let n = &self.nodes[v.index()];
        n.left.is_some() && n.lo <= u.0 && u.0 < v.0
    }

    /// `true` when `u` lies strictly inside the right subtree of `v`.
    pub fn in_right(&self, v: VtreeId, u: VtreeId) -> bool {
        let n = &self.nodes[v.index()];
        n.right.is_some() && v.0 < u.0 && u.0 <= n.hi
    }

    pub fn lca(&self, mut a: VtreeId, mut b: VtreeId) -> VtreeId {
        while self.depth(a) > self.depth(b) {
            a = self.parent(a).unwrap();
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent(b).unwrap();
        }
        while a != b {
            a = self.parent(a).unwrap();
            b = self.parent(b).unwrap();
        }
        a
    }

    /// Rough structural fingerprint used to detect manager mismatches.
    pub(crate) fn same_shape(&self, other: &Vtree) -> bool {
        self.leaf_vars == other.leaf_vars
            && self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| a.left == b.left && a.right == b.right)
    }

    /// Indented dump, handy when debugging.
    pub fn describe(&self, scenario: &Scenario) -> String {
        let mut s = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(
                s,
                "{}{} {}",
                "  ".repeat(n.depth as usize),
                i,
                n.var.map(|v| scenario.name(v).to_string()).unwrap_or_default()
            );
        }
        s
    }
}
