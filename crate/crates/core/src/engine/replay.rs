//! Proof checking against the rule schemas, written independently of the
//! instance generator used by search.

use std::collections::BTreeSet;

use thiserror::Error;

use super::proof::{BlockEnd, Justification, Proof, ProofBlock};
use crate::formula::Formula;
use crate::prefixed::{Branch, Index, PrefixedFormula};
use crate::rulesets::{LogicPreset, RuleId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ReplayError {
    /// Number of the first offending line, as in the text format.
    pub line: usize,
    pub message: String,
}

/// Checks that every step of `proof` is an instance of a rule of `preset`
/// whose premises lie on the path above it, that fresh indices really are
/// new, and that every leaf is closed.
pub fn replay(proof: &Proof, preset: &LogicPreset) -> Result<(), ReplayError> {
    let mut branch = Branch::new();
    for a in &proof.assumptions {
        branch.insert(a.clone());
    }
    let mut checker = Checker { preset, line: proof.assumptions.len() };
    checker.block(&proof.root, branch)
}

struct Checker<'a> {
    preset: &'a LogicPreset,
    line: usize,
}

impl Checker<'_> {
    fn block(&mut self, block: &ProofBlock, mut branch: Branch) -> Result<(), ReplayError> {
        for step in &block.steps {
            let first = self.line + 1;
            check_step(self.preset, &branch, &step.justification, &[&step.added])
                .map_err(|message| ReplayError { line: first, message })?;
            for pf in &step.added {
                self.line += 1;
                branch.insert(pf.clone());
            }
        }
        match &block.end {
            BlockEnd::Closed(witness) => {
                for item in witness.items() {
                    if !branch.contains(&item) {
                        return Err(ReplayError {
                            line: self.line,
                            message: format!("closure cites `{item}`, which is not on the branch"),
                        });
                    }
                }
                Ok(())
            }
            BlockEnd::Split { justification, alternatives } => {
                let added: Vec<&[PrefixedFormula]> = alternatives.iter().map(|a| a.added.as_slice()).collect();
                let first = self.line + 1;
                check_step(self.preset, &branch, justification, &added)
                    .map_err(|message| ReplayError { line: first, message })?;
                for alt in alternatives {
                    let mut child = branch.clone();
                    for pf in &alt.added {
                        self.line += 1;
                        child.insert(pf.clone());
                    }
                    self.block(&alt.block, child)?;
                }
                Ok(())
            }
        }
    }
}

fn check_step(
    preset: &LogicPreset,
    branch: &Branch,
    just: &Justification,
    added: &[&[PrefixedFormula]],
) -> Result<(), String> {
    let rule = just.rule;
    if !preset.has(rule) {
        return Err(format!("rule {} is not part of {}", rule.label(), preset.logic));
    }
    for p in &just.premises {
        if !branch.contains(p) {
            return Err(format!("premise `{p}` is not on the branch"));
        }
    }
    let first = added.first().and_then(|a| a.first());
    let index = match (rule, first) {
        (RuleId::Cut, Some(PrefixedFormula::At(i, _))) => Some(*i),
        (RuleId::R4, Some(PrefixedFormula::Rel(i, _, _))) => Some(*i),
        (RuleId::Cut | RuleId::R4, _) => return Err(format!("{} step adds nothing usable", rule.label())),
        _ => None,
    };
    if let Some(i) = index {
        if !branch.indices().contains(&i) {
            return Err(format!("index {i} does not occur on the branch"));
        }
    }
    let new: BTreeSet<Index> = added
        .iter()
        .flat_map(|a| a.iter())
        .flat_map(|pf| pf.indices())
        .filter(|i| !branch.indices().contains(i))
        .collect();
    let generative = matches!(rule, RuleId::Nbox | RuleId::Diamond | RuleId::R2 | RuleId::Ea | RuleId::EaPrime);
    let fresh = if generative {
        match new.len() {
            1 => *new.iter().next().unwrap(),
            0 => return Err(format!("{} needs an index new to the branch", rule.label())),
            _ => return Err(format!("{} introduces more than one new index", rule.label())),
        }
    } else {
        if let Some(i) = new.iter().next() {
            return Err(format!("{} cannot introduce the new index {i}", rule.label()));
        }
        Index(0)
    };
    let instantiation = just.instantiation.clone().or_else(|| match (rule, first) {
        (RuleId::Cut, Some(PrefixedFormula::At(_, phi))) => Some(phi.clone()),
        (RuleId::Ea, _) => added.get(2).and_then(|a| a.first()).map(|pf| pf.formula().clone()),
        _ => None,
    });

    let mut tried_any = false;
    for perm in permutations(&just.premises) {
        let Some(expected) = schema(rule, &perm, instantiation.as_ref(), index, fresh) else { continue };
        tried_any = true;
        if expected.len() == added.len()
            && expected.iter().zip(added).all(|(exp, got)| {
                got.iter().all(|pf| exp.contains(pf)) && exp.iter().all(|pf| got.contains(pf) || branch.contains(pf))
            })
        {
            return Ok(());
        }
    }
    if tried_any {
        Err(format!("lines added do not match the conclusions of {}", rule.label()))
    } else {
        Err(format!("premises do not fit the {} schema", rule.label()))
    }
}

fn permutations(items: &[PrefixedFormula]) -> Vec<Vec<PrefixedFormula>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head.clone());
            out.push(tail);
        }
    }
    out
}

/// Conclusion alternatives of `rule` for premises in schema order.
fn schema(
    rule: RuleId,
    premises: &[PrefixedFormula],
    instantiation: Option<&Formula>,
    index: Option<Index>,
    k: Index,
) -> Option<Vec<Vec<PrefixedFormula>>> {
    use Formula as F;
    use PrefixedFormula::{At, Rel};
    let not = |f: &F| F::not(f.clone());
    let un = |f: &F| -> Option<F> {
        match f {
            F::Not(a) => Some((**a).clone()),
            _ => None,
        }
    };
    match (rule, premises) {
        (RuleId::Conj, [At(i, F::And(a, b))]) => Some(vec![vec![At(*i, (**a).clone()), At(*i, (**b).clone())]]),
        (RuleId::Disj, [At(i, F::Or(a, b))]) => Some(vec![vec![At(*i, (**a).clone())], vec![At(*i, (**b).clone())]]),
        (RuleId::Imp, [At(i, F::Imp(a, b))]) => Some(vec![vec![At(*i, not(a))], vec![At(*i, (**b).clone())]]),
        (RuleId::Nconj, [At(i, f)]) => match un(f)? {
            F::And(a, b) => Some(vec![vec![At(*i, not(&a))], vec![At(*i, not(&b))]]),
            _ => None,
        },
        (RuleId::Ndisj, [At(i, f)]) => match un(f)? {
            F::Or(a, b) => Some(vec![vec![At(*i, not(&a)), At(*i, not(&b))]]),
            _ => None,
        },
        (RuleId::Nimp, [At(i, f)]) => match un(f)? {
            F::Imp(a, b) => Some(vec![vec![At(*i, (*a).clone()), At(*i, not(&b))]]),
            _ => None,
        },
        (RuleId::Dneg, [At(i, f)]) => Some(vec![vec![At(*i, un(&un(f)?)?)]]),
        (RuleId::Box, [At(i, F::Nec(a, c)), Rel(i2, j, a2)]) if i == i2 && **a == *a2 => {
            Some(vec![vec![At(*j, (**c).clone())]])
        }
        (RuleId::Ndiamond, [At(i, f), Rel(i2, j, a2)]) if i == i2 => match un(f)? {
            F::Poss(a, c) if *a == *a2 => Some(vec![vec![At(*j, not(&c))]]),
            _ => None,
        },
        (RuleId::Nbox, [At(i, f)]) => match un(f)? {
            F::Nec(a, c) => Some(vec![vec![Rel(*i, k, (*a).clone()), At(k, not(&c))]]),
            _ => None,
        },
        (RuleId::Diamond, [At(i, F::Poss(a, c))]) => Some(vec![vec![Rel(*i, k, (**a).clone()), At(k, (**c).clone())]]),
        (RuleId::Cut, []) => {
            let (i, phi) = (index?, instantiation?);
            Some(vec![vec![At(i, phi.clone())], vec![At(i, not(phi))]])
        }
        (RuleId::Ea, [Rel(i, j, phi)]) => {
            let psi = instantiation?;
            Some(vec![
                vec![At(k, not(phi)), At(k, psi.clone())],
                vec![At(k, phi.clone()), At(k, not(psi))],
                vec![Rel(*i, *j, psi.clone())],
            ])
        }
        (RuleId::EaPrime, [At(i, F::Nec(psi, theta)), Rel(i2, j, phi)]) if i == i2 => Some(vec![
            vec![At(k, not(phi)), At(k, (**psi).clone())],
            vec![At(k, phi.clone()), At(k, not(psi))],
            vec![At(*j, (**theta).clone())],
        ]),
        (RuleId::R1, [Rel(_, j, phi)]) => Some(vec![vec![At(*j, phi.clone())]]),
        (RuleId::R2, [Rel(i, j, _), At(j2, psi)]) if j == j2 => Some(vec![vec![Rel(*i, k, psi.clone())]]),
        (RuleId::R3, [At(i, phi), At(j, negphi), Rel(i2, j2, F::Top)])
            if i == i2 && j == j2 && un(negphi).as_ref() == Some(phi) =>
        {
            Some(vec![vec![At(*j, phi.clone())]])
        }
        (RuleId::R4, []) => {
            let i = index?;
            Some(vec![vec![Rel(i, i, F::Top)]])
        }
        (RuleId::R5, [Rel(i, j, phi), At(j2, psi)]) if j == j2 => {
            Some(vec![vec![Rel(*i, *j, F::and(phi.clone(), psi.clone()))]])
        }
        (RuleId::R6, [Rel(i, j, phi), At(j2, psi), Rel(i2, k2, F::And(a, b))])
            if i == i2 && j == j2 && **a == *phi && **b == *psi =>
        {
            Some(vec![vec![At(*k2, psi.clone()), Rel(*i, *k2, phi.clone())]])
        }
        (RuleId::Cem, [Rel(i, j, phi), Rel(i2, k2, phi2), At(j2, psi)])
            if i == i2 && phi == phi2 && j == j2 && j != k2 =>
        {
            Some(vec![vec![At(*k2, psi.clone())]])
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulesets::Logic;

    fn ck() -> LogicPreset {
        LogicPreset::new(Logic::Ck)
    }

    #[test]
    fn accepts_a_small_closed_tableau() {
        let proof: Proof = "\
1. 1: [p](q & r)  [Ass]
2. 1: ~[p]q  [Ass]
3. r(1,2): p  [¬□: 2]
4. 2: ~q  [¬□: 2]
5. 2: q & r  [□: 1, 3]
6. 2: q  [∧: 5]
7. 2: r  [∧: 5]
closed: 6, 4
"
        .parse()
        .unwrap();
        assert_eq!(replay(&proof, &ck()), Ok(()));
    }

    #[test]
    fn rejects_a_reused_index() {
        let proof: Proof = "\
1. 1: ~[p]q  [Ass]
2. 2: q  [Ass]
3. r(1,2): p  [¬□: 1]
4. 2: ~q  [¬□: 1]
closed: 2, 4
"
        .parse()
        .unwrap();
        let err = replay(&proof, &ck()).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn rejects_rules_outside_the_logic() {
        let proof: Proof = "\
1. r(1,2): p  [Ass]
2. 2: ~p  [Ass]
3. 2: p  [R1: 1]
closed: 3, 2
"
        .parse()
        .unwrap();
        let err = replay(&proof, &ck()).unwrap_err();
        assert_eq!(err.line, 3);
        assert!(replay(&proof, &LogicPreset::new(Logic::Vc)).is_ok());
    }

    #[test]
    fn premise_order_does_not_matter() {
        let proof: Proof = "\
1. 1: [p]q  [Ass]
2. r(1,2): p  [Ass]
3. 2: ~q  [Ass]
4. 2: q  [□: 2, 1]
closed: 4, 3
"
        .parse()
        .unwrap();
        assert_eq!(replay(&proof, &ck()), Ok(()));
    }
}
