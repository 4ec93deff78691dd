mod common;

use condtab::engine::{assumptions, Verdict};
use condtab::rulesets::{applicable, apply};
use condtab::semantics::{brute_force_valid, extract_model, satisfies_prefixed, BruteForce, BruteForceResult};
use condtab::{corpus, prove, replay, saturate, Branch, CutPolicy, Formula, Limits, Logic, LogicPreset, Saturation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f(s: &str) -> Formula {
    s.parse().unwrap()
}

fn closed_proof(v: &Verdict) -> &condtab::Proof {
    v.proof().unwrap_or_else(|| panic!("expected closed, got {v:?}"))
}

fn summary(v: &Verdict) -> (String, Vec<String>) {
    let items = match v {
        Verdict::Closed { proof, .. } => proof.to_string().lines().map(str::to_string).collect(),
        Verdict::Open { open, .. } => open.branch.items().iter().map(|pf| pf.to_string()).collect(),
        Verdict::ResourceOut { limit, .. } => vec![limit.to_string()],
    };
    (format!("{:?}", v.stats()), items)
}

#[test]
fn identical_queries_give_identical_proofs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for logic in [Logic::Ck, Logic::CK, Logic::Vc, Logic::VCS] {
        let preset = LogicPreset::new(logic);
        for e in corpus::entries() {
            let a = prove(&e.premises, &e.goal, &preset, Limits::default());
            let b = prove(&e.premises, &e.goal, &preset, Limits::default());
            assert_eq!(a.proof(), b.proof(), "{} under {logic}", e.name);
            assert_eq!(a.stats(), b.stats());
        }
        for _ in 0..20 {
            let goal = common::formula(&mut rng, 3, 3, true);
            let a = prove(&[], &goal, &preset, Limits::default());
            let b = prove(&[], &goal, &preset, Limits::default());
            assert_eq!(summary(&a), summary(&b), "{goal}");
        }
    }
}

#[test]
fn ck_corpus_closes_in_every_extension_within_four_times_the_nodes() {
    for e in corpus::entries().into_iter().filter(|e| e.logic == Logic::Ck) {
        let base = prove(&e.premises, &e.goal, &LogicPreset::new(Logic::Ck), Limits::default());
        let budget = base.stats().nodes * 4;
        for logic in [Logic::CkCut, Logic::CK, Logic::Vc, Logic::VC, Logic::VCS] {
            let limits = Limits { max_nodes: budget, ..Limits::default() };
            let preset = LogicPreset::new(logic);
            let v = prove(&e.premises, &e.goal, &preset, limits);
            assert_eq!(replay(closed_proof(&v), &preset), Ok(()), "{} under {logic}", e.name);
        }
    }
}

#[test]
fn closed_corpus_sequents_have_no_small_countermodel() {
    for e in corpus::entries() {
        let phi = match e.premises.iter().cloned().reduce(Formula::and) {
            Some(p) => Formula::imp(p, e.goal.clone()),
            None => e.goal.clone(),
        };
        let opts = BruteForce { max_worlds: 3, conditions: e.logic.conditions(), ..BruteForce::default() };
        assert_eq!(brute_force_valid(&phi, &opts), Ok(BruteForceResult::ValidUpTo(3)), "{}", e.name);
    }
}

#[test]
fn saturation_without_cut_or_ea_terminates_on_the_corpus() {
    for logic in [Logic::Ck, Logic::Vc] {
        let preset = LogicPreset::new(logic);
        for e in corpus::entries() {
            let v = prove(&e.premises, &e.goal, &preset, Limits::default());
            assert!(!matches!(v, Verdict::ResourceOut { .. }), "{} under {logic}: {v:?}", e.name);
        }
    }
}

#[test]
fn open_ck_branches_of_the_corpus_satisfy_their_models() {
    let preset = LogicPreset::new(Logic::Ck);
    let mut open = 0;
    for e in corpus::entries().into_iter().filter(|e| e.logic != Logic::Ck) {
        let Verdict::Open { open: o, .. } = prove(&e.premises, &e.goal, &preset, Limits::default()) else {
            panic!("{} should be open in Ck", e.name);
        };
        assert!(o.saturated);
        let (m, asg) = extract_model(&o.branch);
        assert!(satisfies_prefixed(&m, &asg, o.branch.items()).unwrap(), "{}", e.name);
        assert!(o.certified);
        open += 1;
    }
    assert_eq!(open, 7);
}

#[test]
fn entailment_lifts_under_a_conditional_on_the_corpus() {
    let preset = LogicPreset::new(Logic::Ck);
    for e in corpus::entries().into_iter().filter(|e| e.logic == Logic::Ck && e.premises.len() == 1) {
        let phi = f("s");
        let lifted = prove(
            &[Formula::nec(phi.clone(), e.premises[0].clone())],
            &Formula::nec(phi, e.goal.clone()),
            &preset,
            Limits::default(),
        );
        assert_eq!(replay(closed_proof(&lifted), &preset), Ok(()), "{}", e.name);
    }
}

#[test]
fn modus_ponens_splices_through_a_hinted_cut() {
    // [p](q & r) |- [p]q & [p]r and [p]q & [p]r |- [p]q
    let gamma = vec![f("[p](q & r)")];
    let middle = f("[p]q & [p]r");
    let goal = f("[p]q");
    let ck = LogicPreset::new(Logic::Ck);
    assert!(prove(&gamma, &middle, &ck, Limits::default()).is_closed());
    assert!(prove(std::slice::from_ref(&middle), &goal, &ck, Limits::default()).is_closed());

    let hinted = LogicPreset::new(Logic::CkCut).with_cut_policy(CutPolicy::Hinted(vec![middle]));
    let v = prove(&gamma, &goal, &hinted, Limits::default());
    let proof = closed_proof(&v);
    assert_eq!(replay(proof, &hinted), Ok(()));
}

#[test]
fn ea_prime_variant_also_distinguishes_ck_from_ck_plus_ea() {
    let preset = LogicPreset::new(Logic::CK).with_ea_prime();
    assert!(!preset.has(condtab::RuleId::Box));
    let v = prove(&[f("[p & q]r")], &f("[q & p]r"), &preset, Limits::default());
    assert_eq!(replay(closed_proof(&v), &preset), Ok(()));
}

#[test]
fn generated_indices_are_fresh_in_every_apply_result() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for logic in [Logic::VC, Logic::VCS] {
        let preset = LogicPreset::new(logic);
        for _ in 0..30 {
            let goal = common::formula(&mut rng, 3, 3, true);
            let limits = Limits { max_nodes: 60, ..Limits::default() };
            let b = match saturate(&Branch::from_items(assumptions(&[], &goal)), &preset, limits) {
                Saturation::Open(b) | Saturation::Unsaturated(b, _) => b,
                Saturation::Closed(_) => Branch::from_items(assumptions(&[], &goal)),
            };
            for inst in applicable(&b, &preset) {
                let Some(k) = inst.fresh else { continue };
                assert!(!b.indices().contains(&k), "{inst} reuses {k:?}");
                for (alt, child) in inst.alternatives.iter().zip(apply(&inst, &b).unwrap()) {
                    if alt.iter().any(|pf| pf.mentions(k)) {
                        assert!(child.indices().contains(&k));
                    }
                }
            }
        }
    }
}
