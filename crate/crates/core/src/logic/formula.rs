use std::collections::BTreeSet;
use std::fmt;

use super::{LogicError, Scenario, VarId};

/// Propositional formula over scenario variables.
///
/// `And` and `Or` are n-ary; an empty `And` is valid and an empty `Or` is
/// unsatisfiable, although the parser never produces either.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(VarId),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(v: VarId) -> Self {
        Formula::Atom(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Evaluates the formula on a complete assignment indexed by variable id.
    ///
    /// Runs in time linear in the number of connectives.
    pub fn eval(&self, world: &[bool]) -> Result<bool, LogicError> {
        Ok(match self {
            Formula::Atom(v) => *world.get(v.index()).ok_or(LogicError::Unassigned(*v))?,
            Formula::Not(f) => !f.eval(world)?,
            Formula::And(fs) => {
                // evaluate every operand so unassigned atoms always surface
                let mut acc = true;
                for f in fs {
                    acc &= f.eval(world)?;
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = false;
                for f in fs {
                    acc |= f.eval(world)?;
                }
                acc
            }
            Formula::Implies(a, b) => {
                let a = a.eval(world)?;
                let b = b.eval(world)?;
                !a || b
            }
            Formula::Iff(a, b) => a.eval(world)? == b.eval(world)?,
        })
    }

    /// All variables mentioned by the formula.
    pub fn atoms(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Formula::Atom(v) => {
                out.insert(*v);
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
            Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Number of boolean connectives.
    pub fn connective_count(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) => 1 + f.connective_count(),
            Formula::And(fs) | Formula::Or(fs) => {
                fs.len().saturating_sub(1).max(1) + fs.iter().map(Formula::connective_count).sum::<usize>()
            }
            Formula::Implies(a, b) | Formula::Iff(a, b) => 1 + a.connective_count() + b.connective_count(),
        }
    }

    /// Prefix notation accepted by [`super::parse_formula`].
    pub fn prefix<'a>(&'a self, scenario: &'a Scenario) -> Prefix<'a> {
        Prefix { formula: self, scenario }
    }

    /// Infix rendering with logical symbols, for human-readable reports.
    pub fn pretty<'a>(&'a self, scenario: &'a Scenario) -> Pretty<'a> {
        Pretty { formula: self, scenario }
    }
}

pub struct Prefix<'a> {
    formula: &'a Formula,
    scenario: &'a Scenario,
}

impl fmt::Display for Prefix<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prefix(self.formula, self.scenario, f)
    }
}

fn write_prefix(formula: &Formula, sc: &Scenario, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let list = |op: &str, fs: &[&Formula], f: &mut fmt::Formatter<'_>| -> fmt::Result {
        write!(f, "{op}(")?;
        for (i, g) in fs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write_prefix(g, sc, f)?;
        }
        f.write_str(")")
    };
    match formula {
        Formula::Atom(v) => f.write_str(sc.name(*v)),
        Formula::Not(g) => list("!", &[g], f),
        Formula::And(gs) => list("&", &gs.iter().collect::<Vec<_>>(), f),
        Formula::Or(gs) => list("|", &gs.iter().collect::<Vec<_>>(), f),
        Formula::Implies(a, b) => list(">", &[a, b], f),
        Formula::Iff(a, b) => list("=", &[a, b], f),
    }
}

pub struct Pretty<'a> {
    formula: &'a Formula,
    scenario: &'a Scenario,
}

impl fmt::Display for Pretty<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_pretty(self.formula, self.scenario, f, true)
    }
}

fn write_pretty(formula: &Formula, sc: &Scenario, f: &mut fmt::Formatter<'_>, top: bool) -> fmt::Result {
    let infix = |sep: &str, gs: &[&Formula], f: &mut fmt::Formatter<'_>| -> fmt::Result {
        if !top {
            f.write_str("(")?;
        }
        for (i, g) in gs.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write_pretty(g, sc, f, false)?;
        }
        if !top {
            f.write_str(")")?;
        }
        Ok(())
    };
    match formula {
        Formula::Atom(v) => f.write_str(sc.name(*v)),
        Formula::Not(g) => {
            f.write_str("¬")?;
            write_pretty(g, sc, f, false)
        }
        Formula::And(gs) if gs.is_empty() => f.write_str("⊤"),
        Formula::Or(gs) if gs.is_empty() => f.write_str("⊥"),
        Formula::And(gs) => infix(" ∧ ", &gs.iter().collect::<Vec<_>>(), f),
        Formula::Or(gs) => infix(" ∨ ", &gs.iter().collect::<Vec<_>>(), f),
        Formula::Implies(a, b) => infix(" → ", &[a, b], f),
        Formula::Iff(a, b) => infix(" ↔ ", &[a, b], f),
    }
}
