//! Frame conditions on formula-indexed models, checked relative to a finite
//! vocabulary of formulas.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dense::{Compiled, Interp, WorldSet};
use crate::formula::Formula;

/// A condition on formula-indexed models. `Rf φ x` is the set of
/// φ-successors of x and `[φ]` the truth set of φ.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Condition {
    /// (1) `Rf φ x ⊆ [φ]`
    C1,
    /// (2) `Rf φ x ∩ [ψ] ≠ ∅ ⇒ Rf ψ x ≠ ∅`
    C2,
    /// (3) `Rf ⊤ x ⊆ {x}`
    C3,
    /// (4) `x ∈ Rf ⊤ x`
    C4,
    /// (5) `Rf φ x ∩ [ψ] ⊆ Rf (φ∧ψ) x`
    C5,
    /// (6) `Rf φ x ∩ [ψ] ≠ ∅ ⇒ Rf (φ∧ψ) x ⊆ Rf φ x ∩ [ψ]`
    C6,
    /// At most one φ-successor (the condition behind cem).
    Uniqueness,
    /// `[φ] = [ψ] ⇒ Rf φ = Rf ψ` (the condition behind ea).
    Extensional,
}

impl Condition {
    pub const TABLE: [Condition; 6] =
        [Condition::C1, Condition::C2, Condition::C3, Condition::C4, Condition::C5, Condition::C6];

    pub fn name(self) -> &'static str {
        match self {
            Condition::C1 => "(1)",
            Condition::C2 => "(2)",
            Condition::C3 => "(3)",
            Condition::C4 => "(4)",
            Condition::C5 => "(5)",
            Condition::C6 => "(6)",
            Condition::Uniqueness => "uniqueness",
            Condition::Extensional => "extensionality",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Condition::C1 => "Rf A x ⊆ [A]",
            Condition::C2 => "Rf A x ∩ [B] ≠ ∅ ⇒ Rf B x ≠ ∅",
            Condition::C3 => "Rf ⊤ x ⊆ {x}",
            Condition::C4 => "x ∈ Rf ⊤ x",
            Condition::C5 => "Rf A x ∩ [B] ⊆ Rf (A∧B) x",
            Condition::C6 => "Rf A x ∩ [B] ≠ ∅ ⇒ Rf (A∧B) x ⊆ Rf A x ∩ [B]",
            Condition::Uniqueness => "|Rf A x| ≤ 1",
            Condition::Extensional => "[A] = [B] ⇒ Rf A = Rf B",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Condition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bare = s.trim_start_matches('(').trim_end_matches(')');
        match bare {
            "1" => Ok(Condition::C1),
            "2" => Ok(Condition::C2),
            "3" => Ok(Condition::C3),
            "4" => Ok(Condition::C4),
            "5" => Ok(Condition::C5),
            "6" => Ok(Condition::C6),
            "uniqueness" | "cem" => Ok(Condition::Uniqueness),
            "extensionality" | "extensional" | "ea" => Ok(Condition::Extensional),
            _ => Err(format!("unknown condition `{s}`")),
        }
    }
}

/// Vocabulary plus interpretation, ready for condition checks.
pub(crate) struct View<'a> {
    pub compiled: &'a Compiled,
    pub interp: &'a Interp,
    pub truth: &'a [WorldSet],
}

/// A violated instance, in dense world numbering.
pub(crate) struct Violation {
    pub world: usize,
    pub other: Option<usize>,
    pub formulas: Vec<Formula>,
}

/// Registers everything the checks over `vocab` will look up. `top` adds
/// the ⊤ key that (3) and (4) read.
pub(crate) fn register(compiled: &mut Compiled, vocab: &[Formula], top: bool) {
    for f in vocab {
        compiled.add_key(f);
        if let Formula::And(a, _) = f {
            compiled.add_key(a);
        }
    }
    if top {
        compiled.add_key(&Formula::Top);
    }
}

impl View<'_> {
    fn truth_of(&self, f: &Formula) -> &WorldSet {
        &self.truth[self.compiled.id(f).expect("formula registered")]
    }

    fn succ(&self, key: &Formula, x: usize) -> &WorldSet {
        &self.interp.succ[self.compiled.key(key).expect("key registered")][x]
    }

    /// Checks one instance; on failure returns the witness world, if the
    /// condition has one.
    pub fn instance(&self, cond: Condition, x: usize, fs: &[Formula]) -> Result<(), Option<usize>> {
        let n = self.interp.n;
        match cond {
            Condition::C1 => {
                let bad = self.succ(&fs[0], x).minus(self.truth_of(&fs[0]));
                bad.first().map_or(Ok(()), |y| Err(Some(y)))
            }
            Condition::C2 => {
                let meet = self.succ(&fs[0], x).and(self.truth_of(&fs[1]));
                match meet.first() {
                    Some(y) if self.succ(&fs[1], x).is_empty() => Err(Some(y)),
                    _ => Ok(()),
                }
            }
            Condition::C3 => {
                let mut own = WorldSet::empty(n);
                own.insert(x);
                let bad = self.succ(&Formula::Top, x).minus(&own);
                bad.first().map_or(Ok(()), |y| Err(Some(y)))
            }
            Condition::C4 => {
                if self.succ(&Formula::Top, x).contains(x) {
                    Ok(())
                } else {
                    Err(None)
                }
            }
            Condition::C5 | Condition::C6 => {
                let conj = Formula::and(fs[0].clone(), fs[1].clone());
                let meet = self.succ(&fs[0], x).and(self.truth_of(&fs[1]));
                let target = self.succ(&conj, x);
                let bad = if cond == Condition::C5 {
                    meet.minus(target)
                } else if meet.is_empty() {
                    WorldSet::empty(n)
                } else {
                    target.minus(&meet)
                };
                bad.first().map_or(Ok(()), |y| Err(Some(y)))
            }
            Condition::Uniqueness => {
                let succ = self.succ(&fs[0], x);
                if succ.len() > 1 {
                    Err(succ.iter().nth(1))
                } else {
                    Ok(())
                }
            }
            Condition::Extensional => {
                if self.truth_of(&fs[0]) != self.truth_of(&fs[1]) {
                    return Ok(());
                }
                let (a, b) = (self.succ(&fs[0], x), self.succ(&fs[1], x));
                let diff = a.minus(b).first().or_else(|| b.minus(a).first());
                diff.map_or(Ok(()), |y| Err(Some(y)))
            }
        }
    }

    /// First violated instance of `cond` with formulas drawn from `vocab`.
    pub fn first_violation(&self, cond: Condition, vocab: &[Formula]) -> Option<Violation> {
        for fs in instances(cond, vocab) {
            for x in 0..self.interp.n {
                if let Err(other) = self.instance(cond, x, &fs) {
                    return Some(Violation { world: x, other, formulas: fs });
                }
            }
        }
        None
    }
}

/// The formula tuples `cond` quantifies over, given `vocab`.
pub(crate) fn instances(cond: Condition, vocab: &[Formula]) -> Vec<Vec<Formula>> {
    match cond {
        Condition::C1 | Condition::Uniqueness => vocab.iter().map(|f| vec![f.clone()]).collect(),
        Condition::C3 | Condition::C4 => vec![vec![Formula::Top]],
        Condition::C2 => pairs(vocab).collect(),
        Condition::Extensional => pairs(vocab).filter(|p| p[0] != p[1]).collect(),
        Condition::C5 | Condition::C6 => vocab
            .iter()
            .filter_map(|f| match f {
                Formula::And(a, b) => Some(vec![(**a).clone(), (**b).clone()]),
                _ => None,
            })
            .collect(),
    }
}

/// Accessibility keys an instance of `cond` over `fs` looks at.
pub(crate) fn keys_read(cond: Condition, fs: &[Formula]) -> Vec<Formula> {
    match cond {
        Condition::C1 | Condition::Uniqueness | Condition::C3 | Condition::C4 => vec![fs[0].clone()],
        Condition::C2 | Condition::Extensional => vec![fs[0].clone(), fs[1].clone()],
        Condition::C5 | Condition::C6 => vec![fs[0].clone(), Formula::and(fs[0].clone(), fs[1].clone())],
    }
}

fn pairs(vocab: &[Formula]) -> impl Iterator<Item = Vec<Formula>> + '_ {
    vocab.iter().flat_map(move |a| vocab.iter().map(move |b| vec![a.clone(), b.clone()]))
}
