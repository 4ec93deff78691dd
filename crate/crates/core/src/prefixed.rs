//! Prefixed formulas `i: φ` / `r(i,j): φ`, tableau branches and closure.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::formula::{Formula, ParseError};
use crate::rulesets::Fingerprint;

/// A world label on a branch. The assumptions of a query live at index 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Index(pub u32);

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrefixedFormula {
    /// `i: φ`, φ is true at i.
    At(Index, Formula),
    /// `r(i,j): φ`, j is φ-accessible from i.
    Rel(Index, Index, Formula),
}

impl PrefixedFormula {
    pub fn at(i: u32, formula: Formula) -> Self {
        PrefixedFormula::At(Index(i), formula)
    }

    pub fn rel(i: u32, j: u32, formula: Formula) -> Self {
        PrefixedFormula::Rel(Index(i), Index(j), formula)
    }

    pub fn formula(&self) -> &Formula {
        match self {
            PrefixedFormula::At(_, f) | PrefixedFormula::Rel(_, _, f) => f,
        }
    }

    pub fn indices(&self) -> Vec<Index> {
        match self {
            PrefixedFormula::At(i, _) => vec![*i],
            PrefixedFormula::Rel(i, j, _) => vec![*i, *j],
        }
    }

    pub fn mentions(&self, index: Index) -> bool {
        self.indices().contains(&index)
    }

    /// Adds `by` to every index. Used to splice a closed tableau below an
    /// existing one, never by the prover itself.
    pub fn shifted(&self, by: u32) -> Self {
        match self {
            PrefixedFormula::At(i, f) => PrefixedFormula::At(Index(i.0 + by), f.clone()),
            PrefixedFormula::Rel(i, j, f) => PrefixedFormula::Rel(Index(i.0 + by), Index(j.0 + by), f.clone()),
        }
    }
}

impl fmt::Display for PrefixedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrefixedFormula::At(i, phi) => write!(f, "{i}: {phi}"),
            PrefixedFormula::Rel(i, j, phi) => write!(f, "r({i},{j}): {phi}"),
        }
    }
}

impl fmt::Debug for PrefixedFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixedParseError {
    #[error("expected `i: FORMULA` or `r(i,j): FORMULA`, got `{0}`")]
    Shape(String),
    #[error("bad index `{0}`")]
    Index(String),
    #[error(transparent)]
    Formula(#[from] ParseError),
}

fn parse_index(text: &str) -> Result<Index, PrefixedParseError> {
    let text = text.trim();
    match text.parse::<u32>() {
        Ok(n) if n > 0 => Ok(Index(n)),
        _ => Err(PrefixedParseError::Index(text.to_string())),
    }
}

impl FromStr for PrefixedFormula {
    type Err = PrefixedParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (prefix, body) = s.split_once(':').ok_or_else(|| PrefixedParseError::Shape(s.to_string()))?;
        let formula: Formula = body.parse()?;
        let prefix = prefix.trim();
        if let Some(args) = prefix.strip_prefix("r(").and_then(|rest| rest.strip_suffix(')')) {
            let (i, j) = args.split_once(',').ok_or_else(|| PrefixedParseError::Shape(s.to_string()))?;
            Ok(PrefixedFormula::Rel(parse_index(i)?, parse_index(j)?, formula))
        } else {
            Ok(PrefixedFormula::At(parse_index(prefix)?, formula))
        }
    }
}

impl Serialize for PrefixedFormula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PrefixedFormula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Why a branch is closed.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureWitness {
    /// Both `i: φ` and `i: ~φ`.
    Contradiction { index: Index, formula: Formula },
    /// `i: _|_`
    Bottom { index: Index },
    /// `i: ~true`
    NegatedTop { index: Index },
}

impl ClosureWitness {
    /// The prefixed formulas the witness points at.
    pub fn items(&self) -> Vec<PrefixedFormula> {
        match self {
            ClosureWitness::Contradiction { index, formula } => {
                vec![PrefixedFormula::At(*index, formula.clone()), PrefixedFormula::At(*index, formula.negated())]
            }
            ClosureWitness::Bottom { index } => vec![PrefixedFormula::At(*index, Formula::Bottom)],
            ClosureWitness::NegatedTop { index } => {
                vec![PrefixedFormula::At(*index, Formula::not(Formula::Top))]
            }
        }
    }

    /// Recognises a witness from the formulas it consists of, in any order.
    pub fn from_items(items: &[PrefixedFormula]) -> Option<ClosureWitness> {
        match items {
            [PrefixedFormula::At(i, Formula::Bottom)] => Some(ClosureWitness::Bottom { index: *i }),
            [PrefixedFormula::At(i, Formula::Not(t))] if **t == Formula::Top => {
                Some(ClosureWitness::NegatedTop { index: *i })
            }
            [PrefixedFormula::At(i, a), PrefixedFormula::At(j, b)] if i == j => {
                if let Formula::Not(inner) = b {
                    if **inner == *a {
                        return Some(ClosureWitness::Contradiction { index: *i, formula: a.clone() });
                    }
                }
                if let Formula::Not(inner) = a {
                    if **inner == *b {
                        return Some(ClosureWitness::Contradiction { index: *i, formula: b.clone() });
                    }
                }
                None
            }
            _ => None,
        }
    }
}

fn immediate_witness(index: Index, formula: &Formula) -> Option<ClosureWitness> {
    match formula {
        Formula::Bottom => Some(ClosureWitness::Bottom { index }),
        Formula::Not(inner) if **inner == Formula::Top => Some(ClosureWitness::NegatedTop { index }),
        _ => None,
    }
}

/// Scans a set of prefixed formulas for a contradiction, `i: _|_` or
/// `i: ~true`, reporting the first one in list order.
pub fn closure_witness(items: &[PrefixedFormula]) -> Option<ClosureWitness> {
    let present: HashSet<&PrefixedFormula> = items.iter().collect();
    for item in items {
        let PrefixedFormula::At(i, phi) = item else { continue };
        if let Some(w) = immediate_witness(*i, phi) {
            return Some(w);
        }
        if let Formula::Not(inner) = phi {
            if present.contains(&PrefixedFormula::At(*i, (**inner).clone())) {
                return Some(ClosureWitness::Contradiction { index: *i, formula: (**inner).clone() });
            }
        }
    }
    None
}

/// One root-to-leaf path of a tableau.
///
/// Items keep insertion order and are never duplicated. Cloning a branch
/// gives an independent snapshot, which is how sibling branches are made.
#[derive(Clone, Debug, Default)]
pub struct Branch {
    items: Vec<PrefixedFormula>,
    positions: HashMap<PrefixedFormula, usize>,
    at_by_index: HashMap<Index, Vec<usize>>,
    rel_by_source: HashMap<Index, Vec<usize>>,
    indices: BTreeSet<Index>,
    subformulas: IndexSet<Formula>,
    antecedents: IndexSet<Formula>,
    applied: HashSet<Fingerprint>,
    next_index: u32,
    closure: Option<ClosureWitness>,
}

impl Branch {
    pub fn new() -> Self {
        Branch { next_index: 1, ..Default::default() }
    }

    pub fn from_items<I: IntoIterator<Item = PrefixedFormula>>(items: I) -> Self {
        let mut branch = Branch::new();
        for item in items {
            branch.insert(item);
        }
        branch
    }

    /// Persistent extension: returns a copy with `item` added.
    pub fn add(&self, item: PrefixedFormula) -> Branch {
        let mut next = self.clone();
        next.insert(item);
        next
    }

    /// Adds `item` in place; returns false when it was already present.
    pub fn insert(&mut self, item: PrefixedFormula) -> bool {
        if self.positions.contains_key(&item) {
            return false;
        }
        let pos = self.items.len();
        for index in item.indices() {
            self.indices.insert(index);
            self.next_index = self.next_index.max(index.0 + 1);
        }
        match &item {
            PrefixedFormula::At(i, phi) => {
                if self.closure.is_none() {
                    self.closure = immediate_witness(*i, phi)
                        .or_else(|| match phi {
                            Formula::Not(inner) => {
                                let positive = PrefixedFormula::At(*i, (**inner).clone());
                                self.positions
                                    .contains_key(&positive)
                                    .then(|| ClosureWitness::Contradiction { index: *i, formula: (**inner).clone() })
                            }
                            _ => None,
                        })
                        .or_else(|| {
                            let negative = PrefixedFormula::At(*i, phi.negated());
                            self.positions
                                .contains_key(&negative)
                                .then(|| ClosureWitness::Contradiction { index: *i, formula: phi.clone() })
                        });
                }
                self.at_by_index.entry(*i).or_default().push(pos);
                let before = self.subformulas.len();
                phi.collect_subformulas(&mut self.subformulas);
                for sub in self.subformulas.iter().skip(before) {
                    if let Formula::Nec(a, _) | Formula::Poss(a, _) = sub {
                        self.antecedents.insert((**a).clone());
                    }
                }
            }
            PrefixedFormula::Rel(i, _, _) => {
                self.rel_by_source.entry(*i).or_default().push(pos);
            }
        }
        self.positions.insert(item.clone(), pos);
        self.items.push(item);
        true
    }

    pub fn items(&self) -> &[PrefixedFormula] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: &PrefixedFormula) -> bool {
        self.positions.contains_key(item)
    }

    pub fn position(&self, item: &PrefixedFormula) -> Option<usize> {
        self.positions.get(item).copied()
    }

    /// Indices occurring in the items.
    pub fn indices(&self) -> &BTreeSet<Index> {
        &self.indices
    }

    pub fn max_index(&self) -> u32 {
        self.indices.iter().next_back().map_or(0, |i| i.0)
    }

    /// Positions of the `i: φ` items at `index`, ascending.
    pub fn positions_at(&self, index: Index) -> &[usize] {
        self.at_by_index.get(&index).map_or(&[], Vec::as_slice)
    }

    /// Positions of the `r(index, j): φ` items, ascending.
    pub fn rel_positions_from(&self, index: Index) -> &[usize] {
        self.rel_by_source.get(&index).map_or(&[], Vec::as_slice)
    }

    /// Subformulas of the `i: φ` items, in order of first occurrence.
    pub fn subformulas(&self) -> &IndexSet<Formula> {
        &self.subformulas
    }

    /// Antecedents of the conditionals occurring in `i: φ` items.
    pub fn antecedents(&self) -> &IndexSet<Formula> {
        &self.antecedents
    }

    /// The next index not used on this branch, without drawing it.
    pub fn peek_fresh(&self) -> Index {
        Index(self.next_index)
    }

    /// Draws an index that occurs nowhere on the branch. Successive draws
    /// are strictly increasing.
    pub fn fresh_index(&mut self) -> Index {
        let index = Index(self.next_index);
        self.next_index += 1;
        index
    }

    pub(crate) fn reserve_index(&mut self, index: Index) {
        self.next_index = self.next_index.max(index.0 + 1);
    }

    pub fn closure_witness(&self) -> Option<&ClosureWitness> {
        self.closure.as_ref()
    }

    pub fn is_closed(&self) -> bool {
        self.closure.is_some()
    }

    pub fn was_applied(&self, fingerprint: &Fingerprint) -> bool {
        self.applied.contains(fingerprint)
    }

    pub(crate) fn mark_applied(&mut self, fingerprint: Fingerprint) {
        self.applied.insert(fingerprint);
    }

    pub fn applied_count(&self) -> usize {
        self.applied.len()
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            writeln!(f, "{item}")?;
        }
        Ok(())
    }
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

    #[test]
    fn textual_form_round_trips() {
        for text in ["1: [p](q & r)", "r(1,2): p & q", "12: ~true"] {
            assert_eq!(pf(text).to_string(), text);
        }
        assert!("0: p".parse::<PrefixedFormula>().is_err());
        assert!("r(1): p".parse::<PrefixedFormula>().is_err());
        assert!("p".parse::<PrefixedFormula>().is_err());
    }

    #[test]
    fn closure_on_complementary_pair() {
        let b = branch(&["1: p", "1: ~p"]);
        let w = ClosureWitness::Contradiction { index: Index(1), formula: "p".parse().unwrap() };
        assert_eq!(b.closure_witness(), Some(&w));
        assert_eq!(closure_witness(b.items()), Some(w));
    }

    #[test]
    fn closure_on_bottom_and_negated_top() {
        let b = branch(&["1: _|_"]);
        assert_eq!(b.closure_witness(), Some(&ClosureWitness::Bottom { index: Index(1) }));
        let b = branch(&["2: q", "2: ~true"]);
        assert_eq!(b.closure_witness(), Some(&ClosureWitness::NegatedTop { index: Index(2) }));
        // nothing special about a positive ⊤
        assert!(branch(&["1: true"]).closure_witness().is_none());
    }

    #[test]
    fn different_prefixes_do_not_close() {
        let b = branch(&["1: p", "2: ~p"]);
        assert!(b.closure_witness().is_none());
        assert!(closure_witness(b.items()).is_none());
    }

    #[test]
    fn negation_arriving_first_still_closes() {
        let b = branch(&["1: ~[p]q", "1: [p]q"]);
        let w = ClosureWitness::Contradiction { index: Index(1), formula: "[p]q".parse().unwrap() };
        assert_eq!(b.closure_witness(), Some(&w));
    }

    #[test]
    fn fresh_indices() {
        assert_eq!(branch(&["1: p", "r(1,2): q"]).peek_fresh(), Index(3));
        let mut b = branch(&["1: p"]);
        assert_eq!(b.fresh_index(), Index(2));
        assert_eq!(b.fresh_index(), Index(3));
        b.insert(pf("2: q"));
        assert_eq!(b.fresh_index(), Index(4));
    }

    #[test]
    fn add_is_persistent_and_idempotent() {
        let b = branch(&["1: p"]);
        let c = b.add(pf("1: q"));
        assert_eq!(c.items(), &[pf("1: p"), pf("1: q")]);
        assert_eq!(b.items(), &[pf("1: p")]);
        assert_eq!(b.add(pf("1: p")).items(), &[pf("1: p")]);
        assert_eq!(Branch::new().add(pf("r(1,2): p")).items(), &[pf("r(1,2): p")]);
    }

    #[test]
    fn witness_items_are_recognised() {
        for w in [
            ClosureWitness::Contradiction { index: Index(3), formula: "~q".parse().unwrap() },
            ClosureWitness::Bottom { index: Index(1) },
            ClosureWitness::NegatedTop { index: Index(2) },
        ] {
            assert_eq!(ClosureWitness::from_items(&w.items()), Some(w.clone()));
            let mut reversed = w.items();
            reversed.reverse();
            assert_eq!(ClosureWitness::from_items(&reversed), Some(w));
        }
    }

    #[test]
    fn antecedents_tracked_incrementally() {
        let b = branch(&["1: [p & q]r", "1: ~<s>t", "r(1,2): u"]);
        let ants: Vec<String> = b.antecedents().iter().map(|f| f.to_string()).collect();
        assert_eq!(ants, vec!["p & q", "s"]);
    }
}
