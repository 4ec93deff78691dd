//! Hand-written closed tableaux for the characteristic axioms, used as a
//! regression corpus: each must replay, and the prover must close the same
//! sequent.

use crate::engine::{self, Proof, ProofFormatError};
use crate::formula::Formula;
use crate::rulesets::Logic;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    /// The smallest preset whose rules the tableau uses.
    pub logic: Logic,
    pub premises: Vec<Formula>,
    pub goal: Formula,
    pub tableau: &'static str,
}

impl CorpusEntry {
    pub fn proof(&self) -> Result<Proof, ProofFormatError> {
        self.tableau.parse()
    }

    /// True when the tableau's assumptions are exactly the premises and the
    /// negated goal at index 1.
    pub fn assumptions_match(&self) -> bool {
        self.proof().is_ok_and(|p| p.assumptions == engine::assumptions(&self.premises, &self.goal))
    }

    pub fn sequent(&self) -> String {
        let ps: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        format!("{} |- {}", ps.join(", "), self.goal)
    }
}

fn entry(name: &'static str, logic: Logic, premises: &[&str], goal: &str, tableau: &'static str) -> CorpusEntry {
    CorpusEntry {
        name,
        logic,
        premises: premises.iter().map(|p| p.parse().expect("corpus premise")).collect(),
        goal: goal.parse().expect("corpus goal"),
        tableau,
    }
}

pub fn entries() -> Vec<CorpusEntry> {
    vec![
        entry("CM", Logic::Ck, &["[p](q & r)"], "[p]q & [p]r", include_str!("../corpus/cm.tab")),
        entry("CC", Logic::Ck, &["[p]q & [p]r"], "[p](q & r)", include_str!("../corpus/cc.tab")),
        entry("CN", Logic::Ck, &[], "[p]true", include_str!("../corpus/cn.tab")),
        entry("S1", Logic::Vc, &[], "[p]p", include_str!("../corpus/s1.tab")),
        entry("S2", Logic::Vc, &["<p>q"], "<q>true", include_str!("../corpus/s2.tab")),
        entry("S3", Logic::Vc, &["p"], "[true]p", include_str!("../corpus/s3.tab")),
        entry("S4", Logic::Vc, &["p"], "<true>p", include_str!("../corpus/s4.tab")),
        entry("S5", Logic::Vc, &["[p & q]r"], "[p](q -> r)", include_str!("../corpus/s5.tab")),
        entry("S6", Logic::Vc, &["<p>q", "[p](q -> r)"], "[p & q]r", include_str!("../corpus/s6.tab")),
        entry("CEM", Logic::VCS, &[], "[p]q | [p]~q", include_str!("../corpus/cem.tab")),
    ]
}

pub fn get(name: &str) -> Option<CorpusEntry> {
    entries().into_iter().find(|e| e.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::replay;
    use crate::rulesets::LogicPreset;

    #[test]
    fn every_tableau_parses_and_matches_its_sequent() {
        for e in entries() {
            assert!(e.proof().is_ok(), "{}: {:?}", e.name, e.proof().err());
            assert!(e.assumptions_match(), "{}", e.name);
        }
    }

    #[test]
    fn every_tableau_replays_in_its_logic() {
        for e in entries() {
            let proof = e.proof().unwrap();
            assert_eq!(replay(&proof, &LogicPreset::new(e.logic)), Ok(()), "{}", e.name);
        }
    }

    #[test]
    fn vc_tableaux_do_not_replay_in_ck() {
        for e in entries().into_iter().filter(|e| e.logic != Logic::Ck) {
            assert!(replay(&e.proof().unwrap(), &LogicPreset::new(Logic::Ck)).is_err(), "{}", e.name);
        }
    }
}
