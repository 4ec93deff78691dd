//! The conditional language: atoms, `⊥`, `⊤`, the Boolean connectives and
//! the indexed modalities `[φ]ψ` / `<φ>ψ`.
//!
//! Formulas are compared syntactically. In `Ck` two antecedents that are
//! logically equivalent still index different accessibility relations, so
//! no normalisation ever happens behind the caller's back.

mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use indexmap::IndexSet;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use parser::{parse, ParseError};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Arc<str>),
    Bottom,
    Top,
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Imp(Arc<Formula>, Arc<Formula>),
    /// `[antecedent]consequent`
    Nec(Arc<Formula>, Arc<Formula>),
    /// `<antecedent>consequent`
    Poss(Arc<Formula>, Arc<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Arc::from(name))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Formula {
        Formula::Imp(Arc::new(a), Arc::new(b))
    }

    pub fn nec(antecedent: Formula, consequent: Formula) -> Formula {
        Formula::Nec(Arc::new(antecedent), Arc::new(consequent))
    }

    pub fn poss(antecedent: Formula, consequent: Formula) -> Formula {
        Formula::Poss(Arc::new(antecedent), Arc::new(consequent))
    }

    /// `φ ≡ ψ`, expanded to `(φ ⊃ ψ) ∧ (ψ ⊃ φ)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    /// `□φ`, expanded to `[¬φ]⊥`.
    pub fn necessarily(f: Formula) -> Formula {
        Formula::nec(Formula::not(f), Formula::Bottom)
    }

    /// `◇φ`, expanded to `¬[φ]⊥`.
    pub fn possibly(f: Formula) -> Formula {
        Formula::not(Formula::nec(f, Formula::Bottom))
    }

    pub fn negated(&self) -> Formula {
        Formula::not(self.clone())
    }

    pub fn is_conditional(&self) -> bool {
        matches!(self, Formula::Nec(..) | Formula::Poss(..))
    }

    /// Immediate subterms, antecedents included, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Bottom | Formula::Top => vec![],
            Formula::Not(a) => vec![a],
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) | Formula::Nec(a, b) | Formula::Poss(a, b) => {
                vec![a, b]
            }
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    /// Reflexive-transitive closure of the immediate-subterm relation, in
    /// preorder of first occurrence.
    pub fn subformulas(&self) -> IndexSet<Formula> {
        let mut out = IndexSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    /// [`Formula::subformulas`] plus the negation of every member.
    pub fn subformulas_with_negations(&self) -> IndexSet<Formula> {
        let base = self.subformulas();
        let mut out = base.clone();
        for f in base {
            out.insert(f.negated());
        }
        out
    }

    pub(crate) fn collect_subformulas(&self, out: &mut IndexSet<Formula>) {
        if out.insert(self.clone()) {
            for c in self.children() {
                c.collect_subformulas(out);
            }
        }
    }

    /// Antecedents of every conditional subformula, in preorder.
    pub fn antecedents(&self) -> IndexSet<Formula> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Formula::Nec(a, _) | Formula::Poss(a, _) => Some((*a).clone()),
                _ => None,
            })
            .collect()
    }

    pub fn atoms(&self) -> BTreeSet<Arc<str>> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Arc<str>>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_atoms(out);
                }
            }
        }
    }

    /// True when no conditional occurs in the formula.
    pub fn is_propositional(&self) -> bool {
        !self.is_conditional() && self.children().iter().all(|c| c.is_propositional())
    }
}

const PREC_IMP: u8 = 2;
const PREC_OR: u8 = 3;
const PREC_AND: u8 = 4;
const PREC_PREFIX: u8 = 5;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Imp(..) => PREC_IMP,
        Formula::Or(..) => PREC_OR,
        Formula::And(..) => PREC_AND,
        _ => PREC_PREFIX,
    }
}

fn write_formula(f: &Formula, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let wrap = precedence(f) < min;
    if wrap {
        out.write_str("(")?;
    }
    match f {
        Formula::Atom(name) => out.write_str(name)?,
        Formula::Bottom => out.write_str("_|_")?,
        Formula::Top => out.write_str("true")?,
        Formula::Not(a) => {
            out.write_str("~")?;
            write_formula(a, PREC_PREFIX, out)?;
        }
        Formula::Nec(a, b) | Formula::Poss(a, b) => {
            let (open, close) = if matches!(f, Formula::Nec(..)) { ("[", "]") } else { ("<", ">") };
            out.write_str(open)?;
            write_formula(a, 0, out)?;
            out.write_str(close)?;
            write_formula(b, PREC_PREFIX, out)?;
        }
        Formula::And(a, b) => {
            write_formula(a, PREC_AND, out)?;
            out.write_str(" & ")?;
            write_formula(b, PREC_PREFIX, out)?;
        }
        Formula::Or(a, b) => {
            write_formula(a, PREC_OR, out)?;
            out.write_str(" | ")?;
            write_formula(b, PREC_AND, out)?;
        }
        Formula::Imp(a, b) => {
            write_formula(a, PREC_OR, out)?;
            out.write_str(" -> ")?;
            write_formula(b, PREC_IMP, out)?;
        }
    }
    if wrap {
        out.write_str(")")?;
    }
    Ok(())
}

/// Chellas syntax with minimal parentheses; `parse` inverts it.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, 0, f)
    }
}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "`{self}`")
    }
}

impl FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl Serialize for Formula {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Formula {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    #[test]
    fn prints_with_minimal_parentheses() {
        let p = Formula::atom("p");
        let q = Formula::atom("q");
        let r = Formula::atom("r");
        assert_eq!(Formula::nec(p.clone(), Formula::and(q.clone(), r)).to_string(), "[p](q & r)");
        let cem = Formula::or(Formula::nec(p.clone(), q.clone()), Formula::nec(p.clone(), Formula::not(q.clone())));
        assert_eq!(cem.to_string(), "[p]q | [p]~q");
        assert_eq!(Formula::Bottom.to_string(), "_|_");
        assert_eq!(Formula::imp(Formula::imp(p.clone(), q.clone()), p.clone()).to_string(), "(p -> q) -> p");
        assert_eq!(Formula::imp(p.clone(), Formula::imp(q.clone(), p.clone())).to_string(), "p -> q -> p");
        assert_eq!(Formula::and(p.clone(), Formula::and(q.clone(), p.clone())).to_string(), "p & (q & p)");
        assert_eq!(Formula::not(Formula::and(p.clone(), q.clone())).to_string(), "~(p & q)");
        assert_eq!(Formula::nec(Formula::and(p.clone(), q), p).to_string(), "[p & q]p");
    }

    #[test]
    fn subformulas_of_atom_and_conditional() {
        assert_eq!(f("p").subformulas().into_iter().collect::<Vec<_>>(), vec![f("p")]);
        let subs: BTreeSet<Formula> = f("[p]q").subformulas().into_iter().collect();
        assert_eq!(subs, [f("[p]q"), f("p"), f("q")].into_iter().collect());
    }

    #[test]
    fn subformulas_of_s2_axiom() {
        // Hand enumeration: the implication, both conditionals, p, q and ⊤.
        let whole = f("<p>q -> <q>true");
        let subs: BTreeSet<Formula> = whole.subformulas().into_iter().collect();
        let expected: BTreeSet<Formula> =
            [whole.clone(), f("<p>q"), f("<q>true"), f("p"), f("q"), Formula::Top].into_iter().collect();
        assert_eq!(subs, expected);
    }

    #[test]
    fn subformulas_with_negations_adds_one_negation_per_member() {
        let subs = f("~p").subformulas_with_negations();
        let expected: BTreeSet<Formula> = [f("~p"), f("p"), f("~~p")].into_iter().collect();
        assert_eq!(subs.into_iter().collect::<BTreeSet<_>>(), expected);
    }

    #[test]
    fn antecedents_include_nested_conditionals() {
        let ants: Vec<Formula> = f("[p & q]<r>s | ~[[t]u]v").antecedents().into_iter().collect();
        assert_eq!(ants, vec![f("p & q"), f("r"), f("[t]u"), f("t")]);
    }

    #[test]
    fn serde_uses_the_concrete_syntax() {
        let json = serde_json::to_string(&f("[p](q -> r)")).unwrap();
        assert_eq!(json, "\"[p](q -> r)\"");
        let back: Formula = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f("[p](q -> r)"));
    }
}
