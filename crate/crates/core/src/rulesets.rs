//! Branch-extension rules, their instances on a branch, and the logic presets.
//!
//! Instance generation is a pure function of the branch. Instances come out
//! ordered by priority class (non-branching analytic, branching analytic,
//! index-generating, ea, cut), then rule id, then the branch positions of
//! their premises.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::prefixed::{Branch, Index, PrefixedFormula};
use crate::semantics::Condition;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RuleId {
    Conj,
    Nconj,
    Disj,
    Ndisj,
    Imp,
    Nimp,
    Dneg,
    Box,
    Nbox,
    Diamond,
    Ndiamond,
    Cut,
    Ea,
    EaPrime,
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    Cem,
}

impl RuleId {
    pub const ALL: [RuleId; 21] = [
        RuleId::Conj,
        RuleId::Nconj,
        RuleId::Disj,
        RuleId::Ndisj,
        RuleId::Imp,
        RuleId::Nimp,
        RuleId::Dneg,
        RuleId::Box,
        RuleId::Nbox,
        RuleId::Diamond,
        RuleId::Ndiamond,
        RuleId::Cut,
        RuleId::Ea,
        RuleId::EaPrime,
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::Cem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::Conj => "conj",
            RuleId::Nconj => "nconj",
            RuleId::Disj => "disj",
            RuleId::Ndisj => "ndisj",
            RuleId::Imp => "imp",
            RuleId::Nimp => "nimp",
            RuleId::Dneg => "dneg",
            RuleId::Box => "box",
            RuleId::Nbox => "nbox",
            RuleId::Diamond => "diamond",
            RuleId::Ndiamond => "ndiamond",
            RuleId::Cut => "cut",
            RuleId::Ea => "ea",
            RuleId::EaPrime => "eaPrime",
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::R4 => "R4",
            RuleId::R5 => "R5",
            RuleId::R6 => "R6",
            RuleId::Cem => "cem",
        }
    }

    /// The label used in printed tableaux.
    pub fn label(self) -> &'static str {
        match self {
            RuleId::Conj => "∧",
            RuleId::Nconj => "¬∧",
            RuleId::Disj => "∨",
            RuleId::Ndisj => "¬∨",
            RuleId::Imp => "⊃",
            RuleId::Nimp => "¬⊃",
            RuleId::Dneg => "¬",
            RuleId::Box => "□",
            RuleId::Nbox => "¬□",
            RuleId::Diamond => "◇",
            RuleId::Ndiamond => "¬◇",
            RuleId::EaPrime => "ea'",
            other => other.name(),
        }
    }

    /// Priority class; lower runs first.
    pub fn class(self) -> u8 {
        match self {
            RuleId::Conj
            | RuleId::Ndisj
            | RuleId::Nimp
            | RuleId::Dneg
            | RuleId::Box
            | RuleId::Ndiamond
            | RuleId::R1
            | RuleId::R3
            | RuleId::R4
            | RuleId::R5
            | RuleId::R6
            | RuleId::Cem => 0,
            RuleId::Nconj | RuleId::Disj | RuleId::Imp => 1,
            RuleId::Nbox | RuleId::Diamond | RuleId::R2 => 2,
            RuleId::Ea | RuleId::EaPrime => 3,
            RuleId::Cut => 4,
        }
    }

    /// Rules whose conclusions mention an index new to the branch.
    pub fn is_generative(self) -> bool {
        matches!(self, RuleId::Nbox | RuleId::Diamond | RuleId::Ea | RuleId::EaPrime | RuleId::R2)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for RuleId {
    type Err = UnknownRule;

    /// Accepts both the ASCII names and the printed labels.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let alias = match s {
            "~&" | "~∧" => Some(RuleId::Nconj),
            "&" => Some(RuleId::Conj),
            "|" => Some(RuleId::Disj),
            "~|" | "~∨" => Some(RuleId::Ndisj),
            "->" => Some(RuleId::Imp),
            "~->" | "~⊃" => Some(RuleId::Nimp),
            "~" | "~~" | "¬¬" => Some(RuleId::Dneg),
            "[]" => Some(RuleId::Box),
            "~[]" | "~□" => Some(RuleId::Nbox),
            "<>" => Some(RuleId::Diamond),
            "~<>" | "~◇" => Some(RuleId::Ndiamond),
            "ea′" => Some(RuleId::EaPrime),
            _ => None,
        };
        alias
            .or_else(|| RuleId::ALL.into_iter().find(|r| r.name() == s || r.label() == s))
            .ok_or_else(|| UnknownRule(s.to_string()))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Logic {
    Ck,
    CkCut,
    CK,
    Vc,
    VC,
    VCS,
}

impl Logic {
    pub const ALL: [Logic; 6] = [Logic::Ck, Logic::CkCut, Logic::CK, Logic::Vc, Logic::VC, Logic::VCS];

    pub fn name(self) -> &'static str {
        match self {
            Logic::Ck => "Ck",
            Logic::CkCut => "Ck+cut",
            Logic::CK => "CK",
            Logic::Vc => "Vc",
            Logic::VC => "VC",
            Logic::VCS => "VCS",
        }
    }

    pub fn rules(self) -> BTreeSet<RuleId> {
        use RuleId::*;
        let mut rules: BTreeSet<RuleId> =
            [Conj, Nconj, Disj, Ndisj, Imp, Nimp, Dneg, Box, Nbox, Diamond, Ndiamond].into();
        if matches!(self, Logic::CkCut | Logic::CK | Logic::VC | Logic::VCS) {
            rules.insert(Cut);
        }
        if matches!(self, Logic::CK | Logic::VC | Logic::VCS) {
            rules.insert(Ea);
        }
        if matches!(self, Logic::Vc | Logic::VC | Logic::VCS) {
            rules.extend([R1, R2, R3, R4, R5, R6]);
        }
        if self == Logic::VCS {
            rules.insert(Cem);
        }
        rules
    }

    /// Model conditions an extracted countermodel must meet to count for
    /// this logic.
    pub fn conditions(self) -> Vec<Condition> {
        use Condition::*;
        match self {
            Logic::Ck | Logic::CkCut => vec![],
            Logic::CK => vec![Extensional],
            Logic::Vc => vec![C1, C2, C3, C4, C5, C6],
            Logic::VC => vec![C1, C2, C3, C4, C5, C6, Extensional],
            Logic::VCS => vec![C1, C2, C3, C4, C5, C6, Extensional, Uniqueness],
        }
    }

    /// Every rule of `self` is a rule of `other`.
    pub fn is_included_in(self, other: Logic) -> bool {
        self.rules().is_subset(&other.rules())
    }
}

impl fmt::Display for Logic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown logic `{0}` (expected one of ck, ck+cut, CK, vc, VC, VCS)")]
pub struct UnknownLogic(pub String);

impl FromStr for Logic {
    type Err = UnknownLogic;

    /// Lower case means the syntax-sensitive logic (`ck`, `vc`); upper case
    /// the one closed under RCEA (`CK`, `VC`). `vcs` has no lower-case twin.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "ck" | "Ck" => Ok(Logic::Ck),
            "ck+cut" | "Ck+cut" | "ckcut" | "CkCut" => Ok(Logic::CkCut),
            "CK" => Ok(Logic::CK),
            "vc" | "Vc" => Ok(Logic::Vc),
            "VC" => Ok(Logic::VC),
            "VCS" | "vcs" => Ok(Logic::VCS),
            other => Err(UnknownLogic(other.to_string())),
        }
    }
}

/// Which cut formulas proof search may try.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub enum CutPolicy {
    Off,
    /// Subformulas of the `i: φ` items on the branch.
    #[default]
    Analytic,
    /// Only the given formulas, at every index of the branch.
    Hinted(Vec<Formula>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad cut policy `{0}` (expected off, analytic or hints=F1;F2)")]
pub struct BadCutPolicy(pub String);

impl FromStr for CutPolicy {
    type Err = BadCutPolicy;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "off" => Ok(CutPolicy::Off),
            "analytic" => Ok(CutPolicy::Analytic),
            _ => {
                let list = s.strip_prefix("hints=").ok_or_else(|| BadCutPolicy(s.to_string()))?;
                list.split(';')
                    .filter(|part| !part.trim().is_empty())
                    .map(|part| part.parse::<Formula>().map_err(|e| BadCutPolicy(format!("{s}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()
                    .map(CutPolicy::Hinted)
            }
        }
    }
}

/// A logic together with its rule set and instantiation policy.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LogicPreset {
    pub logic: Logic,
    pub rules: BTreeSet<RuleId>,
    pub cut: CutPolicy,
}

impl LogicPreset {
    pub fn new(logic: Logic) -> Self {
        LogicPreset { logic, rules: logic.rules(), cut: CutPolicy::Analytic }
    }

    /// Replaces the cut policy. A hinted policy also enables cut in logics
    /// that lack it, so hints work with plain `Ck`.
    pub fn with_cut_policy(mut self, cut: CutPolicy) -> Self {
        if matches!(cut, CutPolicy::Hinted(_)) {
            self.rules.insert(RuleId::Cut);
        }
        self.cut = cut;
        self
    }

    /// Swaps `box` (and `ea`, when present) for `eaPrime`.
    pub fn with_ea_prime(mut self) -> Self {
        self.rules.remove(&RuleId::Box);
        self.rules.remove(&RuleId::Ea);
        self.rules.insert(RuleId::EaPrime);
        self
    }

    pub fn has(&self, rule: RuleId) -> bool {
        self.rules.contains(&rule)
    }

    /// Rules of the preset in the order the strategy consults them.
    pub fn schedule(&self) -> Vec<RuleId> {
        let mut rules: Vec<RuleId> = self.rules.iter().copied().collect();
        rules.sort_by_key(|r| (r.class(), *r));
        rules
    }
}

/// Identity of a rule instance, up to the choice of fresh index.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Fingerprint {
    pub rule: RuleId,
    pub premises: Vec<PrefixedFormula>,
    pub formula: Option<Formula>,
    pub index: Option<Index>,
}

/// One way of applying a rule on a branch.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleInstance {
    pub rule: RuleId,
    pub premises: Vec<PrefixedFormula>,
    /// Branch positions of the premises, same order.
    pub positions: Vec<usize>,
    /// The instantiated formula of cut (the cut formula) and ea (ψ).
    pub formula: Option<Formula>,
    /// The index of cut and R4, which have no premises.
    pub index: Option<Index>,
    /// The new index of a generative rule.
    pub fresh: Option<Index>,
    /// One conclusion set per child branch.
    pub alternatives: Vec<Vec<PrefixedFormula>>,
    tiebreak: Vec<usize>,
}

impl RuleInstance {
    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint {
            rule: self.rule,
            premises: self.premises.clone(),
            formula: self.formula.clone(),
            index: self.index,
        }
    }

    fn sort_key(&self) -> (u8, RuleId, &[usize], &[usize]) {
        (self.rule.class(), self.rule, &self.positions, &self.tiebreak)
    }

    /// Already applied, or some alternative free of the fresh index is
    /// already on the branch (so applying it could not change anything
    /// along that child).
    fn is_redundant(&self, b: &Branch) -> bool {
        if b.was_applied(&self.fingerprint()) {
            return true;
        }
        self.alternatives
            .iter()
            .any(|alt| alt.iter().all(|pf| self.fresh.is_none_or(|k| !pf.mentions(k)) && b.contains(pf)))
    }
}

impl fmt::Display for RuleInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule)?;
        let premises: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
        if !premises.is_empty() {
            write!(f, " on {}", premises.join(", "))?;
        }
        if let Some(index) = self.index {
            write!(f, " at {index}")?;
        }
        if let Some(formula) = &self.formula {
            write!(f, " with {formula}")?;
        }
        let alts: Vec<String> = self
            .alternatives
            .iter()
            .map(|alt| alt.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))
            .collect();
        write!(f, " => {{{}}}", alts.join("} | {"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("stale instance: premise `{0}` is not on the branch")]
    Stale(PrefixedFormula),
}

struct Gen<'a> {
    b: &'a Branch,
    out: Vec<RuleInstance>,
}

impl Gen<'_> {
    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        rule: RuleId,
        premises: Vec<(usize, PrefixedFormula)>,
        formula: Option<Formula>,
        index: Option<Index>,
        fresh: Option<Index>,
        alternatives: Vec<Vec<PrefixedFormula>>,
        tiebreak: Vec<usize>,
    ) {
        let (positions, premises) = premises.into_iter().unzip();
        let inst = RuleInstance { rule, premises, positions, formula, index, fresh, alternatives, tiebreak };
        if !inst.is_redundant(self.b) {
            self.out.push(inst);
        }
    }

    fn item(&self, pos: usize) -> &PrefixedFormula {
        &self.b.items()[pos]
    }

    fn at_items(&self) -> impl Iterator<Item = (usize, Index, &Formula)> {
        self.b.items().iter().enumerate().filter_map(|(pos, pf)| match pf {
            PrefixedFormula::At(i, f) => Some((pos, *i, f)),
            _ => None,
        })
    }

    fn rel_items(&self) -> impl Iterator<Item = (usize, Index, Index, &Formula)> {
        self.b.items().iter().enumerate().filter_map(|(pos, pf)| match pf {
            PrefixedFormula::Rel(i, j, f) => Some((pos, *i, *j, f)),
            _ => None,
        })
    }

    /// `r(i, j): key` items for a given source and key.
    fn rels_from(&self, i: Index, key: &Formula) -> Vec<(usize, Index)> {
        self.b
            .rel_positions_from(i)
            .iter()
            .filter_map(|&pos| match self.item(pos) {
                PrefixedFormula::Rel(_, j, f) if f == key => Some((pos, *j)),
                _ => None,
            })
            .collect()
    }

    fn at_positions(&self, i: Index) -> Vec<(usize, Formula)> {
        self.b.positions_at(i).iter().map(|&pos| (pos, self.item(pos).formula().clone())).collect()
    }

    fn generate(&mut self, rule: RuleId, cut: &CutPolicy) {
        use PrefixedFormula::{At, Rel};
        let fresh = self.b.peek_fresh();
        match rule {
            RuleId::Conj
            | RuleId::Nconj
            | RuleId::Disj
            | RuleId::Ndisj
            | RuleId::Imp
            | RuleId::Nimp
            | RuleId::Dneg
            | RuleId::Nbox
            | RuleId::Diamond => {
                let found: Vec<_> = self
                    .at_items()
                    .filter_map(|(pos, i, f)| {
                        propositional_or_witness(rule, i, f, fresh).map(|alts| (pos, i, f.clone(), alts))
                    })
                    .collect();
                for (pos, i, f, alts) in found {
                    let gen_fresh = rule.is_generative().then_some(fresh);
                    self.push(rule, vec![(pos, At(i, f))], None, None, gen_fresh, alts, vec![]);
                }
            }
            RuleId::Box | RuleId::Ndiamond => {
                let found: Vec<_> = self
                    .at_items()
                    .filter_map(|(pos, i, f)| match (rule, f) {
                        (RuleId::Box, Formula::Nec(a, c)) => Some((pos, i, f.clone(), a.clone(), (**c).clone())),
                        (RuleId::Ndiamond, Formula::Not(inner)) => match &**inner {
                            Formula::Poss(a, c) => Some((pos, i, f.clone(), a.clone(), c.negated())),
                            _ => None,
                        },
                        _ => None,
                    })
                    .collect();
                for (pos, i, f, a, conclusion) in found {
                    for (rpos, j) in self.rels_from(i, &a) {
                        self.push(
                            rule,
                            vec![(pos, At(i, f.clone())), (rpos, Rel(i, j, (*a).clone()))],
                            None,
                            None,
                            None,
                            vec![vec![At(j, conclusion.clone())]],
                            vec![],
                        );
                    }
                }
            }
            RuleId::EaPrime => {
                let found: Vec<_> = self
                    .at_items()
                    .filter_map(|(pos, i, f)| match f {
                        Formula::Nec(a, c) => Some((pos, i, f.clone(), (**a).clone(), (**c).clone())),
                        _ => None,
                    })
                    .collect();
                for (pos, i, f, psi, theta) in found {
                    for &rpos in self.b.rel_positions_from(i) {
                        let Rel(_, j, phi) = self.item(rpos).clone() else { continue };
                        let alts = vec![
                            vec![At(fresh, phi.negated()), At(fresh, psi.clone())],
                            vec![At(fresh, phi.clone()), At(fresh, psi.negated())],
                            vec![At(j, theta.clone())],
                        ];
                        self.push(
                            rule,
                            vec![(pos, At(i, f.clone())), (rpos, Rel(i, j, phi))],
                            None,
                            None,
                            Some(fresh),
                            alts,
                            vec![],
                        );
                    }
                }
            }
            RuleId::Ea => {
                let antecedents: Vec<Formula> = self.b.antecedents().iter().cloned().collect();
                let rels: Vec<_> = self.rel_items().map(|(p, i, j, f)| (p, i, j, f.clone())).collect();
                for (pos, i, j, phi) in rels {
                    for (n, psi) in antecedents.iter().enumerate() {
                        if *psi == phi {
                            continue;
                        }
                        let alts = vec![
                            vec![At(fresh, phi.negated()), At(fresh, psi.clone())],
                            vec![At(fresh, phi.clone()), At(fresh, psi.negated())],
                            vec![Rel(i, j, psi.clone())],
                        ];
                        self.push(
                            rule,
                            vec![(pos, Rel(i, j, phi.clone()))],
                            Some(psi.clone()),
                            None,
                            Some(fresh),
                            alts,
                            vec![n],
                        );
                    }
                }
            }
            RuleId::Cut => {
                let candidates: Vec<Formula> = match cut {
                    CutPolicy::Off => vec![],
                    CutPolicy::Analytic => {
                        self.b.subformulas().iter().filter(|f| !matches!(f, Formula::Not(_))).cloned().collect()
                    }
                    CutPolicy::Hinted(hints) => hints.clone(),
                };
                let indices: Vec<Index> = self.b.indices().iter().copied().collect();
                for i in indices {
                    for (n, phi) in candidates.iter().enumerate() {
                        let pos = At(i, phi.clone());
                        let neg = At(i, phi.negated());
                        if self.b.contains(&pos) || self.b.contains(&neg) {
                            continue;
                        }
                        self.push(
                            rule,
                            vec![],
                            Some(phi.clone()),
                            Some(i),
                            None,
                            vec![vec![pos], vec![neg]],
                            vec![i.0 as usize, n],
                        );
                    }
                }
            }
            RuleId::R1 => {
                let rels: Vec<_> = self.rel_items().map(|(p, i, j, f)| (p, i, j, f.clone())).collect();
                for (pos, i, j, phi) in rels {
                    self.push(
                        rule,
                        vec![(pos, Rel(i, j, phi.clone()))],
                        None,
                        None,
                        None,
                        vec![vec![At(j, phi)]],
                        vec![],
                    );
                }
            }
            RuleId::R2 | RuleId::R5 => {
                let rels: Vec<_> = self.rel_items().map(|(p, i, j, f)| (p, i, j, f.clone())).collect();
                for (pos, i, j, phi) in rels {
                    for (apos, psi) in self.at_positions(j) {
                        let premises = vec![(pos, Rel(i, j, phi.clone())), (apos, At(j, psi.clone()))];
                        if rule == RuleId::R2 {
                            if !self.b.antecedents().contains(&psi) || !self.rels_from(i, &psi).is_empty() {
                                continue;
                            }
                            self.push(rule, premises, None, None, Some(fresh), vec![vec![Rel(i, fresh, psi)]], vec![]);
                        } else {
                            let conj = Formula::and(phi.clone(), psi);
                            if !self.b.antecedents().contains(&conj) {
                                continue;
                            }
                            self.push(rule, premises, None, None, None, vec![vec![Rel(i, j, conj)]], vec![]);
                        }
                    }
                }
            }
            RuleId::R3 => {
                let ats: Vec<_> = self.at_items().map(|(p, i, f)| (p, i, f.clone())).collect();
                for (pos, i, phi) in ats {
                    for (rpos, j) in self.rels_from(i, &Formula::Top) {
                        let neg = At(j, phi.negated());
                        let Some(npos) = self.b.position(&neg) else { continue };
                        self.push(
                            rule,
                            vec![(pos, At(i, phi.clone())), (npos, neg), (rpos, Rel(i, j, Formula::Top))],
                            None,
                            None,
                            None,
                            vec![vec![At(j, phi.clone())]],
                            vec![],
                        );
                    }
                }
            }
            RuleId::R4 => {
                let indices: Vec<Index> = self.b.indices().iter().copied().collect();
                for i in indices {
                    let relevant = !self.b.rel_positions_from(i).is_empty()
                        || self.b.positions_at(i).iter().any(|&pos| {
                            let f = self.item(pos).formula();
                            f.is_conditional() || matches!(f, Formula::Not(inner) if inner.is_conditional())
                        });
                    if relevant {
                        self.push(
                            rule,
                            vec![],
                            None,
                            Some(i),
                            None,
                            vec![vec![Rel(i, i, Formula::Top)]],
                            vec![i.0 as usize],
                        );
                    }
                }
            }
            RuleId::R6 => {
                let rels: Vec<_> = self.rel_items().map(|(p, i, k, f)| (p, i, k, f.clone())).collect();
                for (kpos, i, k, key) in rels {
                    let Formula::And(phi, psi) = &key else { continue };
                    for (jpos, j) in self.rels_from(i, phi) {
                        let at = At(j, (**psi).clone());
                        let Some(apos) = self.b.position(&at) else { continue };
                        self.push(
                            rule,
                            vec![(jpos, Rel(i, j, (**phi).clone())), (apos, at), (kpos, Rel(i, k, key.clone()))],
                            None,
                            None,
                            None,
                            vec![vec![At(k, (**psi).clone()), Rel(i, k, (**phi).clone())]],
                            vec![],
                        );
                    }
                }
            }
            RuleId::Cem => {
                let rels: Vec<_> = self.rel_items().map(|(p, i, j, f)| (p, i, j, f.clone())).collect();
                for (jpos, i, j, phi) in rels {
                    for (kpos, k) in self.rels_from(i, &phi) {
                        if k == j {
                            continue;
                        }
                        for (apos, psi) in self.at_positions(j) {
                            self.push(
                                rule,
                                vec![
                                    (jpos, Rel(i, j, phi.clone())),
                                    (kpos, Rel(i, k, phi.clone())),
                                    (apos, At(j, psi.clone())),
                                ],
                                None,
                                None,
                                None,
                                vec![vec![At(k, psi)]],
                                vec![],
                            );
                        }
                    }
                }
            }
        }
    }
}

/// Conclusions of the single-premise Table 1 rules (propositional rules,
/// `nbox` and `diamond`), or None when `f` has the wrong shape.
fn propositional_or_witness(rule: RuleId, i: Index, f: &Formula, fresh: Index) -> Option<Vec<Vec<PrefixedFormula>>> {
    use PrefixedFormula::{At, Rel};
    let at = |g: &Formula| At(i, g.clone());
    let neg = |g: &Formula| At(i, g.negated());
    let inner = match f {
        Formula::Not(inner) => Some(&**inner),
        _ => None,
    };
    match (rule, f, inner) {
        (RuleId::Conj, Formula::And(a, b), _) => Some(vec![vec![at(a), at(b)]]),
        (RuleId::Disj, Formula::Or(a, b), _) => Some(vec![vec![at(a)], vec![at(b)]]),
        (RuleId::Imp, Formula::Imp(a, b), _) => Some(vec![vec![neg(a)], vec![at(b)]]),
        (RuleId::Nconj, _, Some(Formula::And(a, b))) => Some(vec![vec![neg(a)], vec![neg(b)]]),
        (RuleId::Ndisj, _, Some(Formula::Or(a, b))) => Some(vec![vec![neg(a), neg(b)]]),
        (RuleId::Nimp, _, Some(Formula::Imp(a, b))) => Some(vec![vec![at(a), neg(b)]]),
        (RuleId::Dneg, _, Some(Formula::Not(a))) => Some(vec![vec![at(a)]]),
        (RuleId::Nbox, _, Some(Formula::Nec(a, b))) => {
            Some(vec![vec![Rel(i, fresh, (**a).clone()), At(fresh, b.negated())]])
        }
        (RuleId::Diamond, Formula::Poss(a, b), _) => {
            Some(vec![vec![Rel(i, fresh, (**a).clone()), At(fresh, (**b).clone())]])
        }
        _ => None,
    }
}

fn instances_of(b: &Branch, rule: RuleId, cut: &CutPolicy) -> Vec<RuleInstance> {
    let mut gen = Gen { b, out: Vec::new() };
    gen.generate(rule, cut);
    let mut out = gen.out;
    out.sort_by(|x, y| x.sort_key().cmp(&y.sort_key()));
    out
}

/// Every instance of the preset's rules that is applicable on `b` and not
/// yet applied, in strategy order.
pub fn applicable(b: &Branch, preset: &LogicPreset) -> Vec<RuleInstance> {
    preset.schedule().into_iter().flat_map(|rule| instances_of(b, rule, &preset.cut)).collect()
}

/// The first element of [`applicable`], computed lazily.
pub fn next_instance(b: &Branch, preset: &LogicPreset) -> Option<RuleInstance> {
    preset.schedule().into_iter().find_map(|rule| instances_of(b, rule, &preset.cut).into_iter().next())
}

/// Unapplied instances of a single rule on `b`.
pub fn instances(b: &Branch, rule: RuleId, cut: &CutPolicy) -> Vec<RuleInstance> {
    instances_of(b, rule, cut)
}

/// Instances of the VCS rule `cem`.
pub fn cem_instances(b: &Branch) -> Vec<RuleInstance> {
    instances_of(b, RuleId::Cem, &CutPolicy::Off)
}

/// One child per alternative, each with the instance marked as applied.
pub fn apply(inst: &RuleInstance, b: &Branch) -> Result<Vec<Branch>, ApplyError> {
    if let Some(missing) = inst.premises.iter().find(|p| !b.contains(p)) {
        return Err(ApplyError::Stale(missing.clone()));
    }
    Ok(inst
        .alternatives
        .iter()
        .map(|alt| {
            let mut child = b.clone();
            extend(&mut child, inst, alt);
            child
        })
        .collect())
}

/// Adds one alternative to `b` in place and returns the items that were new.
pub(crate) fn extend(b: &mut Branch, inst: &RuleInstance, alt: &[PrefixedFormula]) -> Vec<PrefixedFormula> {
    if let Some(k) = inst.fresh {
        b.reserve_index(k);
    }
    b.mark_applied(inst.fingerprint());
    alt.iter().filter(|pf| b.insert((*pf).clone())).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pf(s: &str) -> PrefixedFormula {
        s.parse().unwrap()
    }

    fn branch(items: &[&str]) -> Branch {
        Branch::from_items(items.iter().map(|s| pf(s)))
    }

    fn alts(inst: &RuleInstance) -> Vec<Vec<String>> {
        inst.alternatives.iter().map(|a| a.iter().map(|p| p.to_string()).collect()).collect()
    }

    fn of_rule(b: &Branch, preset: &LogicPreset, rule: RuleId) -> Vec<RuleInstance> {
        applicable(b, preset).into_iter().filter(|i| i.rule == rule).collect()
    }

    #[test]
    fn presets_have_the_stated_rules() {
        let table1 = Logic::Ck.rules();
        assert_eq!(table1.len(), 11);
        assert!(Logic::Ck.is_included_in(Logic::CkCut));
        assert!(Logic::CkCut.is_included_in(Logic::CK));
        assert!(Logic::Ck.is_included_in(Logic::Vc));
        assert!(Logic::Vc.is_included_in(Logic::VC));
        assert!(Logic::CK.is_included_in(Logic::VC));
        assert!(Logic::VC.is_included_in(Logic::VCS));
        assert!(!Logic::Vc.is_included_in(Logic::CK));
        assert_eq!(Logic::VCS.rules().len(), 11 + 2 + 6 + 1);
        let prime = LogicPreset::new(Logic::CK).with_ea_prime();
        assert!(prime.has(RuleId::EaPrime) && !prime.has(RuleId::Box) && !prime.has(RuleId::Ea));
    }

    #[test]
    fn names_parse_back() {
        for rule in RuleId::ALL {
            assert_eq!(rule.name().parse::<RuleId>().unwrap(), rule);
            assert_eq!(rule.label().parse::<RuleId>().unwrap(), rule);
        }
        for logic in Logic::ALL {
            assert_eq!(logic.name().parse::<Logic>().unwrap(), logic);
        }
        assert_eq!("vcs".parse::<Logic>().unwrap(), Logic::VCS);
        assert!("Foo".parse::<Logic>().is_err());
    }

    #[test]
    fn box_instance_on_matching_relation() {
        let b = branch(&["1: [p]q", "r(1,2): p"]);
        let found = of_rule(&b, &LogicPreset::new(Logic::Ck), RuleId::Box);
        assert_eq!(found.len(), 1);
        assert_eq!(alts(&found[0]), vec![vec!["2: q"]]);
        // different index formula: nothing
        let b = branch(&["1: [p]q", "r(1,2): p & p"]);
        assert!(of_rule(&b, &LogicPreset::new(Logic::Ck), RuleId::Box).is_empty());
    }

    #[test]
    fn nbox_instance_uses_a_fresh_index() {
        let b = branch(&["1: ~[p]q"]);
        let found = of_rule(&b, &LogicPreset::new(Logic::Ck), RuleId::Nbox);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].fresh, Some(Index(2)));
        assert_eq!(alts(&found[0]), vec![vec!["r(1,2): p", "2: ~q"]]);
    }

    #[test]
    fn r5_instance_for_conjunctive_antecedent() {
        let b = branch(&["1: ~[p & q]r", "r(1,2): p", "2: q"]);
        let found = of_rule(&b, &LogicPreset::new(Logic::Vc), RuleId::R5);
        assert_eq!(found.len(), 1);
        assert_eq!(alts(&found[0]), vec![vec!["r(1,2): p & q"]]);
    }

    #[test]
    fn r4_adds_reflexive_top() {
        let b = branch(&["1: ~<p>true"]);
        let found = of_rule(&b, &LogicPreset::new(Logic::Vc), RuleId::R4);
        assert_eq!(found.len(), 1);
        let children = apply(&found[0], &b).unwrap();
        assert_eq!(children.len(), 1);
        assert!(children[0].contains(&pf("r(1,1): true")));
        assert!(of_rule(&children[0], &LogicPreset::new(Logic::Vc), RuleId::R4).is_empty());
    }

    #[test]
    fn cut_splits_in_two() {
        let preset = LogicPreset::new(Logic::CkCut).with_cut_policy(CutPolicy::Hinted(vec!["p".parse().unwrap()]));
        let b = branch(&["1: q"]);
        let found = of_rule(&b, &preset, RuleId::Cut);
        assert_eq!(found.len(), 1);
        let children = apply(&found[0], &b).unwrap();
        assert_eq!(children[0].items(), &[pf("1: q"), pf("1: p")]);
        assert_eq!(children[1].items(), &[pf("1: q"), pf("1: ~p")]);
    }

    #[test]
    fn ea_has_three_alternatives() {
        let b = branch(&["1: [q]s", "r(1,2): p"]);
        let found = of_rule(&b, &LogicPreset::new(Logic::CK), RuleId::Ea);
        assert_eq!(found.len(), 1);
        assert_eq!(alts(&found[0]), vec![vec!["3: ~p", "3: q"], vec!["3: p", "3: ~q"], vec!["r(1,2): q"]]);
        let children = apply(&found[0], &b).unwrap();
        assert_eq!(children.len(), 3);
        for child in &children {
            assert!(!b.indices().contains(&Index(3)));
            assert!(child.was_applied(&found[0].fingerprint()));
            assert!(of_rule(child, &LogicPreset::new(Logic::CK), RuleId::Ea).is_empty());
        }
    }

    #[test]
    fn cem_needs_distinct_successors_and_equal_keys() {
        let b = branch(&["r(1,2): p", "r(1,3): p", "2: q"]);
        let found = cem_instances(&b);
        assert_eq!(found.len(), 1);
        assert_eq!(alts(&found[0]), vec![vec!["3: q"]]);
        assert!(cem_instances(&branch(&["r(1,2): p", "2: q"])).is_empty());
        assert!(cem_instances(&branch(&["r(1,2): p", "r(1,3): q", "2: s"])).is_empty());
    }

    #[test]
    fn r2_is_blocked_by_an_existing_successor() {
        let b = branch(&["1: <p>q", "1: ~<q>true", "r(1,2): p", "2: q"]);
        let found = of_rule(&b, &LogicPreset::new(Logic::Vc), RuleId::R2);
        assert_eq!(found.len(), 1);
        assert_eq!(alts(&found[0]), vec![vec!["r(1,3): q"]]);
        let blocked = b.add(pf("r(1,5): q"));
        assert!(of_rule(&blocked, &LogicPreset::new(Logic::Vc), RuleId::R2).is_empty());
    }

    #[test]
    fn stale_instances_are_rejected() {
        let b = branch(&["1: p & q"]);
        let inst = next_instance(&b, &LogicPreset::new(Logic::Ck)).unwrap();
        assert!(matches!(apply(&inst, &branch(&["1: p"])), Err(ApplyError::Stale(_))));
    }

    #[test]
    fn non_branching_rules_come_first() {
        let b = branch(&["1: p | q", "1: ~[r]s", "1: p & q"]);
        let order: Vec<RuleId> = applicable(&b, &LogicPreset::new(Logic::Ck)).iter().map(|i| i.rule).collect();
        assert_eq!(order, vec![RuleId::Conj, RuleId::Disj, RuleId::Nbox]);
    }

    #[test]
    fn satisfied_instances_are_not_applicable() {
        let b = branch(&["1: p & q", "1: p", "1: q"]);
        assert!(applicable(&b, &LogicPreset::new(Logic::Ck)).is_empty());
    }
}
