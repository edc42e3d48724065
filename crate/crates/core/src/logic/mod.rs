//! Propositional formulas, the prefix constraint notation and scenario
//! descriptions (partitioned, one-hot encoded variable spaces).

mod formula;
mod parser;
mod scenario;

use std::fmt;

use thiserror::Error;

pub use formula::{Formula, Prefix, Pretty};
pub use parser::parse_formula;
pub use scenario::{Action, ActionGroup, ActionKind, Choice, OneHotGroup, Role, Scenario, ScenarioBuilder, Variable};

/// Index of a scenario variable, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VarId {
    fn from(i: usize) -> Self {
        VarId(i as u32)
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Assignment to a subset of the variables, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialAssignment(Vec<Option<bool>>);

impl PartialAssignment {
    pub fn empty(num_vars: usize) -> Self {
        PartialAssignment(vec![None; num_vars])
    }

    pub fn from_pairs(num_vars: usize, pairs: impl IntoIterator<Item = (VarId, bool)>) -> Self {
        let mut p = Self::empty(num_vars);
        for (v, b) in pairs {
            p.set(v, b);
        }
        p
    }

    pub fn from_world(world: &[bool]) -> Self {
        PartialAssignment(world.iter().map(|b| Some(*b)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, v: VarId) -> Option<bool> {
        self.0.get(v.index()).copied().flatten()
    }

    pub fn set(&mut self, v: VarId, b: bool) {
        self.0[v.index()] = Some(b);
    }

    pub fn values(&self) -> &[Option<bool>] {
        &self.0
    }

    /// Merges two partial assignments; `None` when they disagree on a variable.
    pub fn union(&self, other: &PartialAssignment) -> Option<PartialAssignment> {
        let mut out = self.clone();
        for (i, b) in other.0.iter().enumerate() {
            if let Some(b) = b {
                match out.0[i] {
                    Some(a) if a != *b => return None,
                    _ => out.0[i] = Some(*b),
                }
            }
        }
        Some(out)
    }

    pub fn is_complete(&self) -> bool {
        self.0.iter().all(Option::is_some)
    }

    /// `true` when the complete assignment `world` extends this one.
    pub fn agrees_with(&self, world: &[bool]) -> bool {
        self.0.iter().zip(world).all(|(e, w)| e.is_none_or(|e| e == *w))
    }

    /// Parses `A=1, B=0` (or `A, !B`) against a scenario.
    pub fn parse(text: &str, scenario: &Scenario) -> Result<Self, LogicError> {
        let mut p = Self::empty(scenario.num_vars());
        for item in text.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            let (name, value) = match item.split_once('=') {
                Some((n, "1")) => (n, true),
                Some((n, "0")) => (n, false),
                Some(_) => return Err(LogicError::Evidence(format!("bad value in `{item}`"))),
                None => match item.strip_prefix('!') {
                    Some(n) => (n, false),
                    None => (item, true),
                },
            };
            let v = scenario.var(name.trim()).ok_or_else(|| LogicError::Evidence(format!("unknown variable `{name}`")))?;
            if p.get(v).is_some_and(|b| b != value) {
                return Err(LogicError::Evidence(format!("`{name}` assigned twice")));
            }
            p.set(v, value);
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("undeclared variable `{name}` at byte {position}")]
    UndeclaredAtom { name: String, position: usize },
    #[error("variable {0} is unassigned")]
    Unassigned(VarId),
    #[error("scenario line {line}: {message}")]
    Scenario { line: usize, message: String },
    #[error("`{0}` is not an action of any declared action group")]
    UnknownAction(String),
    #[error("evidence: {0}")]
    Evidence(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evidence_parsing() {
        let sc = Scenario::builder().outcomes(["A", "B", "C"]).build().unwrap();
        let e = PartialAssignment::parse("A=1, B=0", &sc).unwrap();
        assert_eq!(e.values(), &[Some(true), Some(false), None]);
        assert_eq!(PartialAssignment::parse("A !B", &sc).unwrap(), e);
        assert!(PartialAssignment::parse("A=2", &sc).is_err());
        assert!(PartialAssignment::parse("A=1,A=0", &sc).is_err());
        assert!(PartialAssignment::parse("D", &sc).is_err());
    }

    #[test]
    fn union_detects_conflicts() {
        let a = PartialAssignment::from_pairs(3, [(VarId(0), true)]);
        let b = PartialAssignment::from_pairs(3, [(VarId(1), false)]);
        let c = PartialAssignment::from_pairs(3, [(VarId(0), false)]);
        assert_eq!(a.union(&b).unwrap().values(), &[Some(true), Some(false), None]);
        assert!(a.union(&c).is_none());
    }
}
