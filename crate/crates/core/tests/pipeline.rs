use std::collections::BTreeMap;

use blameworthy::blame::{BlameModel, BlameQuery, ContextDistribution};
use blameworthy::circuits::{compile_scenario, Circuit, Vtree, VtreeStrategy};
use blameworthy::data::{generate_trolley, load_dataset, TrolleyParams, TROLLEY};
use blameworthy::logic::{parse_formula, Scenario};
use blameworthy::psdd::Psdd;
use blameworthy::utility::{learn_utility, UtilityFunction, UtilitySpec};

/// Binary action `a`, one outcome `o`: Pr(o | a) = 0.9, Pr(o | ¬a) = 0.5.
fn two_action_model() -> (Scenario, Psdd) {
    let sc = Scenario::builder().decisions(["a"]).outcomes(["o"]).action("a").build().unwrap();
    let c = compile_scenario(&sc, VtreeStrategy::Balanced).unwrap();
    let p = Psdd::from_joint(&c, |w| match (w[0], w[1]) {
        (true, true) => 0.45,
        (true, false) => 0.05,
        (false, true) => 0.25,
        (false, false) => 0.25,
    })
    .unwrap();
    (sc, p)
}

#[test]
fn db_follows_the_closed_form() {
    let (sc, p) = two_action_model();
    // E[U | a] - E[U | ¬a] = 0.25 * 0.4 = 0.1; the floor is 0.025
    let u = |w: &[bool]| if w[1] { 0.05 } else { -0.2 };
    let m = BlameModel::new(&p, &sc).with_utility(&u);
    let (a, not_a) = (sc.parse_action("a").unwrap(), sc.parse_action("!a").unwrap());
    let o = parse_formula("o", &sc).unwrap();
    let ctx = ContextDistribution::Model;
    assert!((m.delta(&a, &not_a, &o, &ctx).unwrap() - 0.4).abs() < 1e-12);
    assert!((m.cost(&not_a, &ctx).unwrap() - m.cost(&a, &ctx).unwrap() - 0.1).abs() < 1e-12);
    for (n, want) in [(0.2, 0.2), (1.0, 0.36), (100.0, 0.3996)] {
        let db = m.blameworthiness(&a, &not_a, &o, n, &ctx).unwrap();
        assert!((db - want).abs() < 1e-12, "N = {n}: {db}");
    }
    // δ = 0 in the other direction, whatever the costs
    assert_eq!(m.blameworthiness(&not_a, &a, &o, 1.0, &ctx).unwrap(), 0.0);
    let (overall, alt) = m.overall_blame(&a, &o, 1.0, &ctx).unwrap();
    assert_eq!(alt, not_a);
    assert_eq!(overall, m.blameworthiness(&a, &not_a, &o, 1.0, &ctx).unwrap());
}

#[test]
fn report_sentences_are_fixed_templates() {
    let (sc, p) = two_action_model();
    let u = |w: &[bool]| if w[1] { 0.05 } else { -0.2 };
    let m = BlameModel::new(&p, &sc).with_utility(&u);
    let q = BlameQuery::parse("action = a\nevent = o\nN = 1\n", &sc).unwrap();
    let r = m.report(&q).unwrap();
    assert_eq!(
        r.sentences,
        [
            "Agent is blameworthy to degree 0.360 for o, relative to alternative ¬a.",
            "Overall, agent is blameworthy to degree 0.360 for o by doing a (maximized by alternative ¬a).",
        ]
    );
    assert_eq!(r.n_floor, 0.025);
}

#[test]
fn persisted_trolley_model_answers_bit_exactly() {
    let sc = TROLLEY.scenario();
    let circuit = compile_scenario(&sc, VtreeStrategy::Balanced).unwrap();
    let data = generate_trolley(800, 21, &TrolleyParams::default()).unwrap();
    let data = load_dataset(data.to_csv_string().as_bytes(), &sc).unwrap();
    let p = Psdd::fit(&circuit, &data, 1.0).unwrap();
    let (u, _) = learn_utility(&p, &sc, UtilitySpec { context_relative: true, ..Default::default() }).unwrap();

    let sc2 = Scenario::parse(&sc.to_text()).unwrap();
    let vtree = Vtree::parse(&circuit.vtree().to_text(&sc), &sc2).unwrap();
    let circuit2 = Circuit::from_text(&circuit.to_text(&sc), vtree, &sc2).unwrap();
    let p2 = Psdd::from_text(&p.to_text(&sc), &circuit2, &sc2).unwrap();
    let u2 = UtilityFunction::from_text(&u.to_text(&sc), &sc2).unwrap();

    let mut answers: BTreeMap<&str, [String; 2]> = BTreeMap::new();
    for (i, (sc, p, u)) in [(&sc, &p, &u), (&sc2, &p2, &u2)].into_iter().enumerate() {
        let m = BlameModel::new(p, sc).with_utility(u);
        for (name, text) in [
            ("five", "action = F\nevent = !(L_5)\ncontexts = given A_5 B_1\n"),
            ("pet", "action = P\nevent = !(L_Pet)\nN = 2\n"),
        ] {
            let r = m.report(&BlameQuery::parse(text, sc).unwrap()).unwrap();
            answers.entry(name).or_default()[i] = r.to_json();
        }
    }
    for [a, b] in answers.values() {
        assert_eq!(a, b);
    }
}
