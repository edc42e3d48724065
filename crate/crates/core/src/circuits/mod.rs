//! Vtrees, bottom-up SDD compilation, model counting and model enumeration.

mod io;
mod sdd;
mod vtree;

use num_bigint::BigUint;
use thiserror::Error;

use crate::logic::{Formula, PartialAssignment, Scenario};

pub use sdd::{Node, NodeId, Op, Sdd, SddManager};
pub use vtree::{Vtree, VtreeId, VtreeStrategy};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CircuitError {
    #[error("cannot build a vtree over zero variables")]
    EmptyVtree,
    #[error("invalid vtree: {0}")]
    BadVtree(String),
    #[error("operands belong to different managers (vtree mismatch)")]
    VtreeMismatch,
    #[error("malformed circuit: {0}")]
    Malformed(String),
    #[error("circuit file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A compiled constraint theory: manager plus root.
#[derive(Debug, Clone)]
pub struct Circuit {
    manager: SddManager,
    root: Sdd,
}

impl Circuit {
    pub fn manager(&self) -> &SddManager {
        &self.manager
    }

    pub fn manager_mut(&mut self) -> &mut SddManager {
        &mut self.manager
    }

    pub fn root(&self) -> Sdd {
        self.root
    }

    pub fn vtree(&self) -> &Vtree {
        self.manager.vtree()
    }

    pub fn num_vars(&self) -> usize {
        self.manager.num_vars()
    }

    /// `true` when the theory has no models.
    pub fn is_unsatisfiable(&self) -> bool {
        self.manager.is_false(self.root)
    }

    pub fn model_count(&self) -> BigUint {
        self.manager.model_count(self.root)
    }

    pub fn model_count_with(&self, evidence: &PartialAssignment) -> BigUint {
        self.manager.model_count_with(self.root, evidence)
    }

    /// `true` when some model extends `evidence`.
    pub fn is_consistent(&self, evidence: &PartialAssignment) -> bool {
        self.model_count_with(evidence) > BigUint::from(0u32)
    }

    pub fn is_model(&self, world: &[bool]) -> bool {
        world.len() == self.num_vars() && self.is_consistent(&PartialAssignment::from_world(world))
    }

    pub fn enumerate_models(&self, evidence: &PartialAssignment) -> Vec<Vec<bool>> {
        self.manager.enumerate_models(self.root, evidence)
    }

    pub fn for_each_model(&self, evidence: &PartialAssignment, visit: &mut dyn FnMut(&[bool])) {
        self.manager.for_each_model(self.root, evidence, visit)
    }

    /// Nodes reachable from the root.
    pub fn size(&self) -> usize {
        self.manager.size(self.root)
    }

    pub fn validate(&mut self) -> Result<(), CircuitError> {
        let root = self.root;
        self.manager.validate(root)
    }
}

/// Compiles the conjunction of `constraints` over `vtree`.
///
/// An unsatisfiable theory yields a circuit whose root is the false
/// terminal; see [`Circuit::is_unsatisfiable`].
pub fn compile(constraints: &[Formula], vtree: Vtree) -> Circuit {
    let mut manager = SddManager::new(vtree);
    let root = manager.compile(constraints);
    Circuit { manager, root }
}

/// Compiles the full theory of a scenario (declared constraints plus
/// one-hot groups).
pub fn compile_scenario(scenario: &Scenario, strategy: VtreeStrategy) -> Result<Circuit, CircuitError> {
    let vtree = Vtree::build(scenario, strategy)?;
    Ok(compile(&scenario.theory(), vtree))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_formula, VarId};
    use proptest::prelude::*;

    fn vars(n: usize) -> Scenario {
        Scenario::builder().outcomes((0..n).map(|i| format!("x{i}"))).build().unwrap()
    }

    fn brute_models(fs: &[Formula], n: usize) -> Vec<Vec<bool>> {
        let models = (0u32..1 << n)
            .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|w| fs.iter().all(|f| f.eval(w).unwrap()))
            .collect();
        sorted(models)
    }

    fn sorted(mut v: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
        v.sort();
        v
    }

    #[test]
    fn tautology_has_all_assignments() {
        let sc = vars(7);
        let c = compile_scenario(&sc, VtreeStrategy::Balanced).unwrap();
        assert_eq!(c.model_count(), BigUint::from(128u32));
    }

    #[test]
    fn unsatisfiable_theory_is_false() {
        let sc = vars(3);
        let fs = [parse_formula("x0", &sc).unwrap(), parse_formula("!(x0)", &sc).unwrap()];
        let c = compile(&fs, Vtree::build(&sc, VtreeStrategy::Balanced).unwrap());
        assert!(c.is_unsatisfiable());
        assert!(c.enumerate_models(&PartialAssignment::empty(3)).is_empty());
    }

    #[test]
    fn one_hot_groups_join_the_theory() {
        let sc = Scenario::builder().decisions(["a", "b", "c"]).one_hot("G", ["a", "b", "c"]).build().unwrap();
        let c = compile_scenario(&sc, VtreeStrategy::Balanced).unwrap();
        assert_eq!(c.model_count(), BigUint::from(3u32));
        assert!(c.is_model(&[false, true, false]));
        assert!(!c.is_model(&[true, true, false]));
    }

    fn arb_formula(atoms: u32) -> impl Strategy<Value = Formula> {
        let leaf = (0..atoms).prop_map(|i| Formula::Atom(VarId(i)));
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::And),
                prop::collection::vec(inner.clone(), 1..4).prop_map(Formula::Or),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::iff(a, b)),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn apply_matches_truth_tables(f in arb_formula(8), g in arb_formula(8), balanced in any::<bool>()) {
            let sc = vars(8);
            let strategy = if balanced { VtreeStrategy::Balanced } else { VtreeStrategy::RightLinear };
            let mut m = SddManager::new(Vtree::build(&sc, strategy).unwrap());
            let (x, y) = (m.compile_formula(&f), m.compile_formula(&g));
            let and = m.apply(x, y, Op::And).unwrap();
            let or = m.apply(x, y, Op::Or).unwrap();
            let empty = PartialAssignment::empty(8);
            let want_and = brute_models(&[Formula::And(vec![f.clone(), g.clone()])], 8);
            let want_or = brute_models(&[Formula::Or(vec![f.clone(), g.clone()])], 8);
            prop_assert_eq!(sorted(m.enumerate_models(and, &empty)), want_and.clone());
            prop_assert_eq!(sorted(m.enumerate_models(or, &empty)), want_or);
            prop_assert_eq!(m.model_count(and), BigUint::from(want_and.len()));
            // commutativity is syntactic thanks to canonicity
            prop_assert_eq!(m.apply(y, x, Op::And).unwrap(), and);
            m.validate(and).unwrap();
            m.validate(or).unwrap();
        }

        #[test]
        fn counts_match_brute_force(fs in prop::collection::vec(arb_formula(10), 1..5)) {
            let sc = vars(10);
            let c = compile(&fs, Vtree::build(&sc, VtreeStrategy::Balanced).unwrap());
            let brute = brute_models(&fs, 10);
            prop_assert_eq!(c.model_count(), BigUint::from(brute.len()));
            let ev = PartialAssignment::from_pairs(10, [(VarId(3), true), (VarId(7), false)]);
            let filtered: Vec<Vec<bool>> = brute.iter().filter(|w| w[3] && !w[7]).cloned().collect();
            prop_assert_eq!(sorted(c.enumerate_models(&ev)), filtered.clone());
            prop_assert_eq!(c.model_count_with(&ev), BigUint::from(filtered.len()));
        }

        #[test]
        fn equivalent_theories_compile_identically(fs in prop::collection::vec(arb_formula(6), 1..4)) {
            let sc = vars(6);
            let a = compile(&fs, Vtree::build(&sc, VtreeStrategy::Balanced).unwrap());
            let mut rev = fs.clone();
            rev.reverse();
            let b = compile(&[Formula::And(rev)], Vtree::build(&sc, VtreeStrategy::Balanced).unwrap());
            prop_assert_eq!(a.to_text(&sc), b.to_text(&sc));
        }
    }
}
