mod common;

use condtab::prefixed::closure_witness;
use condtab::semantics::{check_conditions, satisfies_prefixed, Condition};
use condtab::{Assignment, Branch, Formula, Index, PrefixedFormula, PriestModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::Top),
        Just(Formula::Bottom),
        prop::sample::select(vec!["p", "q", "r", "s1", "long_name"]).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(6, 64, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::nec(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::poss(a, b)),
        ]
    })
}

fn arb_model() -> impl Strategy<Value = PriestModel> {
    (1u32..=3, any::<u64>()).prop_map(|(n, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = PriestModel { worlds: (1..=n).collect(), ..PriestModel::default() };
        for atom in common::ATOMS {
            m.valuation.insert(atom.to_string(), (1..=n).filter(|_| rng.gen_bool(0.5)).collect());
        }
        for key in ["p", "q", "p & q", "true", "[p]q"] {
            let pairs = (1..=n).flat_map(|x| (1..=n).map(move |y| (x, y))).filter(|_| rng.gen_bool(0.4)).collect();
            m.access.insert(key.parse().unwrap(), pairs);
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn print_then_parse_is_identity(f in arb_formula()) {
        let back: Formula = f.to_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn json_round_trip(f in arb_formula()) {
        let text = serde_json::to_string(&f).unwrap();
        prop_assert_eq!(serde_json::from_str::<Formula>(&text).unwrap(), f);
    }

    #[test]
    fn subformulas_are_downward_closed(f in arb_formula()) {
        let subs = f.subformulas();
        prop_assert!(subs.contains(&f));
        for s in &subs {
            prop_assert!(s.subformulas().iter().all(|t| subs.contains(t)));
        }
    }

    #[test]
    fn possibility_is_dual_to_necessity(m in arb_model(), a in arb_formula(), b in arb_formula()) {
        for &x in &m.worlds {
            let poss = m.eval(x, &Formula::poss(a.clone(), b.clone())).unwrap();
            let nec = m.eval(x, &Formula::nec(a.clone(), Formula::not(b.clone()))).unwrap();
            prop_assert_eq!(poss, !nec);
        }
    }

    #[test]
    fn condition_counterexamples_reproduce(m in arb_model()) {
        let vocab: Vec<Formula> = m.default_vocab();
        let report = m.check(&vocab, &[Condition::C1, Condition::C2, Condition::C3, Condition::C4,
            Condition::C5, Condition::C6, Condition::Uniqueness, Condition::Extensional]);
        for outcome in &report.outcomes {
            if let Some(c) = &outcome.counterexample {
                prop_assert!(c.reproduces(&m), "{}", c);
            }
        }
        prop_assert_eq!(check_conditions(&m, &vocab).all_hold(),
            Condition::TABLE.iter().all(|c| report.outcome(*c).unwrap().holds()));
    }

    #[test]
    fn model_text_and_json_round_trip(m in arb_model()) {
        prop_assert_eq!(m.to_string().parse::<PriestModel>().unwrap(), m.clone());
        prop_assert_eq!(PriestModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn closed_item_sets_have_no_model(m in arb_model(), f in arb_formula(), i in 1u32..=2, j in 1u32..=2) {
        let items = vec![
            PrefixedFormula::At(Index(i), f.clone()),
            PrefixedFormula::Rel(Index(1), Index(2), Formula::atom("p")),
            PrefixedFormula::At(Index(j), f.negated()),
            PrefixedFormula::At(Index(2), Formula::Top),
        ];
        if closure_witness(&items).is_some() {
            for &w1 in &m.worlds {
                for &w2 in &m.worlds {
                    let asg = Assignment([(Index(1), w1), (Index(2), w2)].into());
                    prop_assert!(!satisfies_prefixed(&m, &asg, &items).unwrap());
                }
            }
        }
    }

    #[test]
    fn fresh_indices_never_collide(ops in prop::collection::vec((any::<bool>(), 1u32..6), 1..40)) {
        let mut b = Branch::from_items([PrefixedFormula::At(Index(1), Formula::atom("p"))]);
        let mut drawn = Vec::new();
        for (draw, i) in ops {
            if draw {
                let k = b.fresh_index();
                prop_assert!(!b.indices().contains(&k));
                prop_assert!(!drawn.contains(&k));
                drawn.push(k);
            } else {
                b.insert(PrefixedFormula::At(Index(i), Formula::atom("q")));
            }
        }
    }
}

#[test]
fn branch_items_keep_insertion_order_without_duplicates() {
    let items: Vec<PrefixedFormula> =
        ["1: p", "r(1,2): q", "1: p", "2: q", "r(1,2): q"].iter().map(|s| s.parse().unwrap()).collect();
    let b = Branch::from_items(items);
    let shown: Vec<String> = b.items().iter().map(|pf| pf.to_string()).collect();
    assert_eq!(shown, ["1: p", "r(1,2): q", "2: q"]);
    assert!(b.indices().contains(&Index(1)));
}
