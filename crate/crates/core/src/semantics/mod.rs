//! Formula-indexed models: evaluation, satisfaction of prefixed formulas,
//! countermodel extraction, frame conditions and a small-model search.

mod conditions;
mod dense;
mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::prefixed::{Branch, Index, PrefixedFormula};

pub use conditions::Condition;
pub use search::{brute_force_valid, BruteForce, BruteForceResult, BudgetExceeded};

use conditions::View;
use dense::{Compiled, Interp};

pub type World = u32;

/// Worlds, an accessibility relation per (syntactic) formula and a
/// valuation. Formulas missing from `access` have empty relations.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PriestModel {
    pub worlds: BTreeSet<World>,
    pub access: BTreeMap<Formula, BTreeSet<(World, World)>>,
    pub valuation: BTreeMap<String, BTreeSet<World>>,
}

/// Maps branch indices to worlds.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Assignment(pub BTreeMap<Index, World>);

impl Assignment {
    pub fn identity<'a>(indices: impl IntoIterator<Item = &'a Index>) -> Assignment {
        Assignment(indices.into_iter().map(|i| (*i, i.0)).collect())
    }

    pub fn get(&self, index: Index) -> Option<World> {
        self.0.get(&index).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("world {0} is not in the model")]
    UnknownWorld(World),
    #[error("index {0} has no world assigned")]
    Unassigned(Index),
}

impl PriestModel {
    pub fn relation(&self, key: &Formula) -> impl Iterator<Item = &(World, World)> {
        self.access.get(key).into_iter().flatten()
    }

    /// Checks that every world mentioned is declared.
    pub fn validate(&self) -> Result<(), SemanticsError> {
        let mentioned =
            self.valuation.values().flatten().chain(self.access.values().flatten().flat_map(|(a, b)| [a, b]));
        for w in mentioned {
            if !self.worlds.contains(w) {
                return Err(SemanticsError::UnknownWorld(*w));
            }
        }
        Ok(())
    }

    fn embed(&self, compiled: &Compiled) -> (Interp, Vec<World>) {
        let ids: Vec<World> = self.worlds.iter().copied().collect();
        let pos: BTreeMap<World, usize> = ids.iter().enumerate().map(|(k, w)| (*w, k)).collect();
        let n = ids.len();
        let mut interp = Interp::blank(n, compiled);
        for (slot, atom) in compiled.atoms.iter().enumerate() {
            if let Some(ws) = self.valuation.get(&**atom) {
                for w in ws {
                    if let Some(&x) = pos.get(w) {
                        interp.val[slot].insert(x);
                    }
                }
            }
        }
        for (slot, key) in compiled.keys.iter().enumerate() {
            for (a, b) in self.relation(key) {
                if let (Some(&x), Some(&y)) = (pos.get(a), pos.get(b)) {
                    interp.succ[slot][x].insert(y);
                }
            }
        }
        (interp, ids)
    }

    /// Truth of `formula` at world `x`.
    pub fn eval(&self, x: World, formula: &Formula) -> Result<bool, SemanticsError> {
        if !self.worlds.contains(&x) {
            return Err(SemanticsError::UnknownWorld(x));
        }
        let mut compiled = Compiled::default();
        let id = compiled.add(formula);
        let (interp, ids) = self.embed(&compiled);
        let truth = compiled.truth(&interp);
        let x = ids.iter().position(|w| *w == x).expect("world present");
        Ok(truth[id].contains(x))
    }

    /// The worlds where `formula` holds.
    pub fn truth_set(&self, formula: &Formula) -> BTreeSet<World> {
        let mut compiled = Compiled::default();
        let id = compiled.add(formula);
        let (interp, ids) = self.embed(&compiled);
        compiled.truth(&interp)[id].iter().map(|x| ids[x]).collect()
    }

    /// Checks the given conditions over `vocab` (⊤ is always available to
    /// the conditions that mention it).
    pub fn check(&self, vocab: &[Formula], conditions: &[Condition]) -> ConditionReport {
        let vocab: Vec<Formula> = vocab.iter().cloned().collect::<indexmap::IndexSet<_>>().into_iter().collect();
        let mut compiled = Compiled::default();
        conditions::register(&mut compiled, &vocab, true);
        let (interp, ids) = self.embed(&compiled);
        let truth = compiled.truth(&interp);
        let view = View { compiled: &compiled, interp: &interp, truth: &truth };
        let outcomes = conditions
            .iter()
            .map(|&condition| ConditionOutcome {
                condition,
                counterexample: view.first_violation(condition, &vocab).map(|v| Counterexample {
                    condition,
                    world: ids[v.world],
                    other: v.other.map(|y| ids[y]),
                    formulas: v.formulas,
                }),
            })
            .collect();
        ConditionReport { outcomes }
    }

    /// Every formula used as an accessibility key, plus ⊤.
    pub fn default_vocab(&self) -> Vec<Formula> {
        let mut vocab: Vec<Formula> = self.access.keys().cloned().collect();
        if !vocab.contains(&Formula::Top) {
            vocab.push(Formula::Top);
        }
        vocab
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ModelJson::from(self)).expect("model serialises")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<PriestModel, ModelFormatError> {
        let json: ModelJson =
            serde_json::from_value(value.clone()).map_err(|e| ModelFormatError::Json(e.to_string()))?;
        let model = PriestModel::from(json);
        model.validate()?;
        Ok(model)
    }
}

/// Every condition of Table (1)–(6) over `vocab`.
pub fn check_conditions(model: &PriestModel, vocab: &[Formula]) -> ConditionReport {
    model.check(vocab, &Condition::TABLE)
}

/// A single condition; `None` when it holds.
pub fn check_condition(model: &PriestModel, vocab: &[Formula], condition: Condition) -> Option<Counterexample> {
    model.check(vocab, &[condition]).outcomes.remove(0).counterexample
}

pub fn eval(model: &PriestModel, x: World, formula: &Formula) -> Result<bool, SemanticsError> {
    model.eval(x, formula)
}

/// The first item of `items` that `model` and `f` fail to satisfy.
pub fn first_unsatisfied(
    model: &PriestModel,
    f: &Assignment,
    items: &[PrefixedFormula],
) -> Result<Option<PrefixedFormula>, SemanticsError> {
    let world = |i: Index| -> Result<World, SemanticsError> {
        let w = f.get(i).ok_or(SemanticsError::Unassigned(i))?;
        if model.worlds.contains(&w) {
            Ok(w)
        } else {
            Err(SemanticsError::UnknownWorld(w))
        }
    };
    let mut compiled = Compiled::default();
    for item in items {
        if let PrefixedFormula::At(_, phi) = item {
            compiled.add(phi);
        }
    }
    let (interp, ids) = model.embed(&compiled);
    let truth = compiled.truth(&interp);
    for item in items {
        let ok = match item {
            PrefixedFormula::At(i, phi) => {
                let w = world(*i)?;
                let x = ids.iter().position(|v| *v == w).expect("world present");
                truth[compiled.id(phi).expect("compiled")].contains(x)
            }
            PrefixedFormula::Rel(i, j, phi) => {
                let pair = (world(*i)?, world(*j)?);
                model.access.get(phi).is_some_and(|rel| rel.contains(&pair))
            }
        };
        if !ok {
            return Ok(Some(item.clone()));
        }
    }
    Ok(None)
}

/// Whether `model` and `f` satisfy every item.
pub fn satisfies_prefixed(
    model: &PriestModel,
    f: &Assignment,
    items: &[PrefixedFormula],
) -> Result<bool, SemanticsError> {
    first_unsatisfied(model, f, items).map(|bad| bad.is_none())
}

/// Reads a model off a branch: its indices are the worlds, `i: p` puts i in
/// V(p) and `r(i,j): φ` puts (i,j) in the φ relation. The assignment is the
/// identity.
pub fn extract_model(branch: &Branch) -> (PriestModel, Assignment) {
    let mut model = PriestModel { worlds: branch.indices().iter().map(|i| i.0).collect(), ..Default::default() };
    for item in branch.items() {
        match item {
            PrefixedFormula::At(i, Formula::Atom(p)) => {
                model.valuation.entry(p.to_string()).or_default().insert(i.0);
            }
            PrefixedFormula::Rel(i, j, phi) => {
                model.access.entry(phi.clone()).or_default().insert((i.0, j.0));
            }
            _ => {}
        }
    }
    (model, Assignment::identity(branch.indices()))
}

/// A violated condition instance.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Counterexample {
    pub condition: Condition,
    pub world: World,
    /// The successor or member world showing the failure, if any.
    pub other: Option<World>,
    pub formulas: Vec<Formula>,
}

impl Counterexample {
    /// Re-checks exactly this instance on `model`; true when it still fails.
    pub fn reproduces(&self, model: &PriestModel) -> bool {
        let mut vocab = self.formulas.clone();
        if matches!(self.condition, Condition::C5 | Condition::C6) && vocab.len() == 2 {
            vocab.push(Formula::and(vocab[0].clone(), vocab[1].clone()));
        }
        let mut compiled = Compiled::default();
        conditions::register(&mut compiled, &vocab, true);
        let (interp, ids) = model.embed(&compiled);
        let Some(x) = ids.iter().position(|w| *w == self.world) else { return false };
        let truth = compiled.truth(&interp);
        let view = View { compiled: &compiled, interp: &interp, truth: &truth };
        view.instance(self.condition, x, &self.formulas).is_err()
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fs: Vec<String> = self.formulas.iter().map(|f| f.to_string()).collect();
        write!(f, "{} fails at world {}", self.condition, self.world)?;
        if let Some(y) = self.other {
            write!(f, " (witness {y})")?;
        }
        write!(f, " for {}", fs.join(", "))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ConditionOutcome {
    pub condition: Condition,
    pub counterexample: Option<Counterexample>,
}

impl ConditionOutcome {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
pub struct ConditionReport {
    pub outcomes: Vec<ConditionOutcome>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.outcomes.iter().all(ConditionOutcome::holds)
    }

    pub fn first_violation(&self) -> Option<&Counterexample> {
        self.outcomes.iter().find_map(|o| o.counterexample.as_ref())
    }

    pub fn outcome(&self, condition: Condition) -> Option<&ConditionOutcome> {
        self.outcomes.iter().find(|o| o.condition == condition)
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            match &o.counterexample {
                None => writeln!(f, "{:<15} holds     {}", o.condition.name(), o.condition.statement())?,
                Some(c) => writeln!(f, "{:<15} VIOLATED  {c}", o.condition.name())?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelFormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("bad model JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    worlds: Vec<World>,
    #[serde(default)]
    valuation: BTreeMap<String, Vec<World>>,
    #[serde(default)]
    access: Vec<(Formula, World, World)>,
    /// Keys listed with no pairs, so the key set survives a round trip.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    empty_access: Vec<Formula>,
}

impl From<&PriestModel> for ModelJson {
    fn from(m: &PriestModel) -> Self {
        ModelJson {
            worlds: m.worlds.iter().copied().collect(),
            valuation: m.valuation.iter().map(|(k, v)| (k.clone(), v.iter().copied().collect())).collect(),
            access: m
                .access
                .iter()
                .flat_map(|(f, pairs)| pairs.iter().map(move |(a, b)| (f.clone(), *a, *b)))
                .collect(),
            empty_access: m.access.iter().filter(|(_, pairs)| pairs.is_empty()).map(|(f, _)| f.clone()).collect(),
        }
    }
}

impl From<ModelJson> for PriestModel {
    fn from(j: ModelJson) -> Self {
        let mut m = PriestModel { worlds: j.worlds.into_iter().collect(), ..Default::default() };
        for (atom, ws) in j.valuation {
            m.valuation.insert(atom, ws.into_iter().collect());
        }
        for f in j.empty_access {
            m.access.entry(f).or_default();
        }
        for (f, a, b) in j.access {
            m.access.entry(f).or_default().insert((a, b));
        }
        m
    }
}

/// Text format, one declaration per line:
///
/// ```text
/// worlds: 1 2
/// valuation p: 1
/// access p & q: (1,2) (2,2)
/// ```
impl fmt::Display for PriestModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let worlds: Vec<String> = self.worlds.iter().map(|w| w.to_string()).collect();
        writeln!(f, "worlds: {}", worlds.join(" "))?;
        for (atom, ws) in &self.valuation {
            let ws: Vec<String> = ws.iter().map(|w| w.to_string()).collect();
            writeln!(f, "valuation {atom}: {}", ws.join(" "))?;
        }
        for (key, pairs) in &self.access {
            let pairs: Vec<String> = pairs.iter().map(|(a, b)| format!("({a},{b})")).collect();
            writeln!(f, "access {key}: {}", pairs.join(" "))?;
        }
        Ok(())
    }
}

fn parse_worlds(text: &str, line: usize) -> Result<Vec<World>, ModelFormatError> {
    text.split_whitespace()
        .map(|w| w.parse().map_err(|_| ModelFormatError::Line { line, message: format!("bad world `{w}`") }))
        .collect()
}

fn parse_pairs(text: &str, line: usize) -> Result<Vec<(World, World)>, ModelFormatError> {
    let err = |message: String| ModelFormatError::Line { line, message };
    let compact: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Ok(vec![]);
    }
    let inner = compact
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| err(format!("expected pairs like (1,2), got `{text}`")))?;
    inner
        .split(")(")
        .map(|pair| {
            let (a, b) = pair.split_once(',').ok_or_else(|| err(format!("bad pair `({pair})`")))?;
            let a = a.parse().map_err(|_| err(format!("bad world `{a}`")))?;
            let b = b.parse().map_err(|_| err(format!("bad world `{b}`")))?;
            Ok((a, b))
        })
        .collect()
}

impl FromStr for PriestModel {
    type Err = ModelFormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut model = PriestModel::default();
        for (n, raw) in s.lines().enumerate() {
            let line = n + 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let (head, body) =
                text.rsplit_once(':').ok_or_else(|| ModelFormatError::Line { line, message: "missing `:`".into() })?;
            let head = head.trim();
            if head == "worlds" {
                model.worlds.extend(parse_worlds(body, line)?);
            } else if let Some(atom) = head.strip_prefix("valuation ") {
                let atom = atom.trim();
                match atom.parse::<Formula>() {
                    Ok(Formula::Atom(_)) => {}
                    _ => return Err(ModelFormatError::Line { line, message: format!("`{atom}` is not an atom") }),
                }
                model.valuation.entry(atom.to_string()).or_default().extend(parse_worlds(body, line)?);
            } else if let Some(key) = head.strip_prefix("access ") {
                let key: Formula = key.parse().map_err(|e| ModelFormatError::Line { line, message: format!("{e}") })?;
                model.access.entry(key).or_default().extend(parse_pairs(body, line)?);
            } else {
                return Err(ModelFormatError::Line { line, message: format!("unknown declaration `{head}`") });
            }
        }
        model.validate()?;
        Ok(model)
    }
}
