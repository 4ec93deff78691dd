//! Closed tableaux as data, with a numbered-line text format and JSON.
//!
//! Text layout, one prefixed formula per line:
//!
//! ```text
//! 1. 1: [p](q & r)  [Ass]
//! 2. 1: ~([p]q & [p]r)  [Ass]
//!   3. 1: ~[p]q  [¬∧: 2]
//!   ...
//!   closed: 6, 7
//!   8. 1: ~[p]r  [¬∧: 2]
//!   ...
//! ```
//!
//! Each alternative of a branching step is a block indented one level
//! deeper than its parent; its first lines are the alternative's
//! conclusions. Consecutive lines with the same justification form one step.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::prefixed::{ClosureWitness, PrefixedFormula};
use crate::rulesets::RuleId;

/// Why some lines were added: a rule applied to earlier lines, with the
/// instantiated formula of `cut` or `ea` when there is one.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Justification {
    pub rule: RuleId,
    pub premises: Vec<PrefixedFormula>,
    pub instantiation: Option<Formula>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofStep {
    pub justification: Justification,
    pub added: Vec<PrefixedFormula>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Alternative {
    pub added: Vec<PrefixedFormula>,
    pub block: ProofBlock,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum BlockEnd {
    Closed(ClosureWitness),
    Split { justification: Justification, alternatives: Vec<Alternative> },
}

/// A run of non-branching steps ending in closure or a split.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProofBlock {
    pub steps: Vec<ProofStep>,
    pub end: BlockEnd,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Proof {
    pub assumptions: Vec<PrefixedFormula>,
    pub root: ProofBlock,
}

impl ProofBlock {
    fn count(&self) -> (usize, usize) {
        let mut lines: usize = self.steps.iter().map(|s| s.added.len()).sum();
        let mut leaves = 0;
        match &self.end {
            BlockEnd::Closed(_) => leaves += 1,
            BlockEnd::Split { alternatives, .. } => {
                for alt in alternatives {
                    let (l, c) = alt.block.count();
                    lines += alt.added.len() + l;
                    leaves += c;
                }
            }
        }
        (lines, leaves)
    }

    fn rules_used(&self, out: &mut Vec<RuleId>) {
        out.extend(self.steps.iter().map(|s| s.justification.rule));
        if let BlockEnd::Split { justification, alternatives } = &self.end {
            out.push(justification.rule);
            for alt in alternatives {
                alt.block.rules_used(out);
            }
        }
    }
}

impl Proof {
    /// Tableau nodes: assumption lines plus every added line.
    pub fn node_count(&self) -> usize {
        self.assumptions.len() + self.root.count().0
    }

    pub fn leaf_count(&self) -> usize {
        self.root.count().1
    }

    /// Rules in the order their applications appear (with repeats).
    pub fn rules_used(&self) -> Vec<RuleId> {
        let mut out = Vec::new();
        self.root.rules_used(&mut out);
        out
    }

    pub fn uses(&self, rule: RuleId) -> bool {
        self.rules_used().contains(&rule)
    }

    /// The flat numbered-line form.
    pub fn lines(&self) -> Vec<ProofLine> {
        let mut w = LineWriter::default();
        for a in &self.assumptions {
            w.emit(0, a, None);
        }
        w.block(0, &self.root);
        w.out
    }

    pub fn from_lines(lines: &[ProofLine]) -> Result<Proof, ProofFormatError> {
        LineReader::new(lines).proof()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.lines()).expect("proof lines serialise")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Proof, ProofFormatError> {
        let lines: Vec<ProofLine> =
            serde_json::from_value(value.clone()).map_err(|e| ProofFormatError::new(0, e.to_string()))?;
        Proof::from_lines(&lines)
    }
}

/// A line's justification, premises given as line numbers. `None` marks an
/// assumption.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LineJustification {
    pub rule: RuleId,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub premises: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instantiation: Option<Formula>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProofLine {
    Node {
        n: usize,
        depth: usize,
        formula: PrefixedFormula,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        justification: Option<LineJustification>,
    },
    Closed {
        depth: usize,
        lines: Vec<usize>,
    },
}

impl ProofLine {
    fn depth(&self) -> usize {
        match self {
            ProofLine::Node { depth, .. } | ProofLine::Closed { depth, .. } => *depth,
        }
    }
}

#[derive(Default)]
struct LineWriter {
    out: Vec<ProofLine>,
    numbers: HashMap<PrefixedFormula, usize>,
    next: usize,
}

impl LineWriter {
    fn emit(&mut self, depth: usize, pf: &PrefixedFormula, just: Option<&Justification>) {
        self.next += 1;
        let n = self.next;
        let justification = just.map(|j| LineJustification {
            rule: j.rule,
            premises: j.premises.iter().map(|p| self.numbers.get(p).copied().unwrap_or(0)).collect(),
            instantiation: j.instantiation.clone(),
        });
        self.out.push(ProofLine::Node { n, depth, formula: pf.clone(), justification });
        self.numbers.insert(pf.clone(), n);
    }

    fn block(&mut self, depth: usize, block: &ProofBlock) {
        let saved = self.numbers.clone();
        for step in &block.steps {
            for pf in &step.added {
                self.emit(depth, pf, Some(&step.justification));
            }
        }
        match &block.end {
            BlockEnd::Closed(w) => {
                let lines = w.items().iter().map(|p| self.numbers.get(p).copied().unwrap_or(0)).collect();
                self.out.push(ProofLine::Closed { depth, lines });
            }
            BlockEnd::Split { justification, alternatives } => {
                for alt in alternatives {
                    let inner = self.numbers.clone();
                    for pf in &alt.added {
                        self.emit(depth + 1, pf, Some(justification));
                    }
                    self.block(depth + 1, &alt.block);
                    self.numbers = inner;
                }
            }
        }
        self.numbers = saved;
    }
}

struct LineReader<'a> {
    lines: &'a [ProofLine],
    pos: usize,
    path: HashMap<usize, PrefixedFormula>,
}

fn singleton_rule(rule: RuleId) -> bool {
    matches!(rule, RuleId::Cut | RuleId::R4)
}

impl<'a> LineReader<'a> {
    fn new(lines: &'a [ProofLine]) -> Self {
        LineReader { lines, pos: 0, path: HashMap::new() }
    }

    fn err(&self, message: impl Into<String>) -> ProofFormatError {
        let line = match self.lines.get(self.pos) {
            Some(ProofLine::Node { n, .. }) => *n,
            _ => 0,
        };
        ProofFormatError::new(line, message)
    }

    fn peek(&self) -> Option<&'a ProofLine> {
        self.lines.get(self.pos)
    }

    fn resolve(&self, j: &LineJustification) -> Result<Justification, ProofFormatError> {
        let premises = j
            .premises
            .iter()
            .map(|n| self.path.get(n).cloned().ok_or_else(|| self.err(format!("premise line {n} is not above"))))
            .collect::<Result<_, _>>()?;
        Ok(Justification { rule: j.rule, premises, instantiation: j.instantiation.clone() })
    }

    fn proof(mut self) -> Result<Proof, ProofFormatError> {
        let mut assumptions = Vec::new();
        while let Some(ProofLine::Node { n, depth: 0, formula, justification: None }) = self.peek() {
            assumptions.push(formula.clone());
            self.path.insert(*n, formula.clone());
            self.pos += 1;
        }
        let root = self.block(0)?;
        if self.pos != self.lines.len() {
            return Err(self.err("unexpected line after the end of the tableau"));
        }
        Ok(Proof { assumptions, root })
    }

    /// Reads lines at `depth` sharing `lead`'s justification.
    fn run(&mut self, depth: usize, lead: &LineJustification) -> Vec<PrefixedFormula> {
        let mut added = Vec::new();
        while let Some(ProofLine::Node { n, depth: d, formula, justification: Some(j) }) = self.peek() {
            if *d != depth || j != lead || (singleton_rule(j.rule) && !added.is_empty()) {
                break;
            }
            added.push(formula.clone());
            self.path.insert(*n, formula.clone());
            self.pos += 1;
        }
        added
    }

    /// Reads the rest of a block at `depth`.
    fn block(&mut self, depth: usize) -> Result<ProofBlock, ProofFormatError> {
        let mut steps = Vec::new();
        loop {
            match self.peek() {
                None => return Err(self.err("tableau ends on an open branch")),
                Some(ProofLine::Closed { depth: d, lines }) if *d == depth => {
                    let items = lines
                        .iter()
                        .map(|n| {
                            self.path.get(n).cloned().ok_or_else(|| self.err(format!("closing line {n} is not above")))
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    let witness = ClosureWitness::from_items(&items)
                        .ok_or_else(|| self.err(format!("lines {lines:?} do not close the branch")))?;
                    self.pos += 1;
                    return Ok(ProofBlock { steps, end: BlockEnd::Closed(witness) });
                }
                Some(ProofLine::Node { depth: d, justification: Some(j), .. }) if *d == depth => {
                    let just = self.resolve(j)?;
                    let added = self.run(depth, j);
                    steps.push(ProofStep { justification: just, added });
                }
                Some(ProofLine::Node { depth: d, justification: Some(j), .. }) if *d == depth + 1 => {
                    let j = j.clone();
                    let justification = self.resolve(&j)?;
                    let mut alternatives = Vec::new();
                    while let Some(line) = self.peek() {
                        if line.depth() != depth + 1 {
                            break;
                        }
                        let ProofLine::Node { justification: Some(lead), .. } = line else {
                            return Err(self.err("alternative must start with a justified line"));
                        };
                        if *lead != j {
                            return Err(self.err("alternatives of one split must share a justification"));
                        }
                        let saved = self.path.clone();
                        let added = self.run(depth + 1, &j);
                        let block = self.block(depth + 1)?;
                        alternatives.push(Alternative { added, block });
                        self.path = saved;
                    }
                    return Ok(ProofBlock { steps, end: BlockEnd::Split { justification, alternatives } });
                }
                Some(line) => {
                    return Err(self.err(format!("unexpected line at depth {} (block depth {depth})", line.depth())))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("proof line {line}: {message}")]
pub struct ProofFormatError {
    pub line: usize,
    pub message: String,
}

impl ProofFormatError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ProofFormatError { line, message: message.into() }
    }
}

impl fmt::Display for LineJustification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rule.label())?;
        if !self.premises.is_empty() {
            let ps: Vec<String> = self.premises.iter().map(|n| n.to_string()).collect();
            write!(f, ": {}", ps.join(", "))?;
        }
        if let Some(inst) = &self.instantiation {
            write!(f, "; {inst}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Proof {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.lines() {
            let indent = "  ".repeat(line.depth());
            match line {
                ProofLine::Node { n, formula, justification, .. } => {
                    let just = justification.map_or("Ass".to_string(), |j| j.to_string());
                    writeln!(f, "{indent}{n}. {formula}  [{just}]")?;
                }
                ProofLine::Closed { lines, .. } => {
                    let ls: Vec<String> = lines.iter().map(|n| n.to_string()).collect();
                    writeln!(f, "{indent}closed: {}", ls.join(", "))?;
                }
            }
        }
        Ok(())
    }
}

fn parse_justification(text: &str, line: usize) -> Result<Option<LineJustification>, ProofFormatError> {
    let text = text.trim();
    if text == "Ass" {
        return Ok(None);
    }
    let (head, inst) = match text.split_once(';') {
        Some((h, i)) => (h, Some(i)),
        None => (text, None),
    };
    let (label, premises) = match head.split_once(':') {
        Some((l, p)) => (l, p),
        None => (head, ""),
    };
    let rule: RuleId = label.parse().map_err(|e| ProofFormatError::new(line, format!("{e}")))?;
    let premises = premises
        .split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse().map_err(|_| ProofFormatError::new(line, format!("bad premise line `{p}`"))))
        .collect::<Result<_, _>>()?;
    let instantiation =
        inst.map(|i| i.parse::<Formula>().map_err(|e| ProofFormatError::new(line, format!("{e}")))).transpose()?;
    Ok(Some(LineJustification { rule, premises, instantiation }))
}

/// Splits `body  [justification]` at the bracket that balances the final `]`.
fn split_justification(text: &str) -> Option<(&str, &str)> {
    let text = text.trim_end();
    if !text.ends_with(']') {
        return None;
    }
    let mut depth = 0i32;
    for (k, c) in text.char_indices().rev() {
        match c {
            ']' => depth += 1,
            '[' => {
                depth -= 1;
                if depth == 0 {
                    return Some((&text[..k], &text[k + 1..text.len() - 1]));
                }
            }
            _ => {}
        }
    }
    None
}

fn parse_line(raw: &str, line: usize) -> Result<Option<ProofLine>, ProofFormatError> {
    let err = |m: &str| ProofFormatError::new(line, m.to_string());
    let content = raw.trim_start();
    if content.trim().is_empty() || content.starts_with('#') {
        return Ok(None);
    }
    let depth = (raw.len() - content.len()) / 2;
    let content = content.trim_end();
    for prefix in ["closed:", "close:"] {
        if let Some(rest) = content.strip_prefix(prefix) {
            let lines = rest
                .split(',')
                .map(|p| p.trim().parse().map_err(|_| err("bad closing line number")))
                .collect::<Result<_, _>>()?;
            return Ok(Some(ProofLine::Closed { depth, lines }));
        }
    }
    let (num, rest) = content.split_once('.').ok_or_else(|| err("expected `n. i: formula  [rule: lines]`"))?;
    let n: usize = num.trim().parse().map_err(|_| err("bad line number"))?;
    let (body, just) = split_justification(rest).ok_or_else(|| err("missing [justification]"))?;
    let formula: PrefixedFormula = body.trim().parse().map_err(|e| err(&format!("{e}")))?;
    let justification = parse_justification(just, n)?;
    Ok(Some(ProofLine::Node { n, depth, formula, justification }))
}

impl FromStr for Proof {
    type Err = ProofFormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = Vec::new();
        for (k, raw) in s.lines().enumerate() {
            if let Some(line) = parse_line(raw, k + 1)? {
                lines.push(line);
            }
        }
        Proof::from_lines(&lines)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPLIT: &str = "\
1. 1: ~(p & ~p)  [Ass]
  2. 1: ~p  [¬∧: 1]
  closed: 3, 2
";

    #[test]
    fn bracket_matching_skips_formula_brackets() {
        assert_eq!(split_justification("1: [p]q  [□: 1, 2]"), Some(("1: [p]q  ", "□: 1, 2")));
        assert_eq!(split_justification("1: ~p  [ea: 2; [q]r]"), Some(("1: ~p  ", "ea: 2; [q]r")));
    }

    #[test]
    fn premises_must_be_above() {
        assert!(SPLIT.parse::<Proof>().is_err());
    }

    #[test]
    fn text_round_trip_with_split() {
        let text = "\
1. 1: p | q  [Ass]
2. 1: ~p  [Ass]
3. 1: ~q  [Ass]
  4. 1: p  [∨: 1]
  closed: 4, 2
  5. 1: q  [∨: 1]
  closed: 5, 3
";
        let proof: Proof = text.parse().unwrap();
        assert_eq!(proof.to_string(), text);
        assert_eq!(proof.node_count(), 5);
        assert_eq!(proof.leaf_count(), 2);
        let BlockEnd::Split { alternatives, .. } = &proof.root.end else { panic!() };
        assert_eq!(alternatives.len(), 2);
        assert_eq!(Proof::from_json(&proof.to_json()).unwrap(), proof);
    }

    #[test]
    fn consecutive_lines_of_one_rule_form_one_step() {
        let text = "\
1. 1: p & q  [Ass]
2. 1: ~p  [Ass]
3. 1: p  [∧: 1]
4. 1: q  [∧: 1]
closed: 3, 2
";
        let proof: Proof = text.parse().unwrap();
        assert_eq!(proof.root.steps.len(), 1);
        assert_eq!(proof.root.steps[0].added.len(), 2);
    }

    #[test]
    fn ascii_labels_are_accepted() {
        let text = "1. 1: ~~p  [Ass]\n2. 1: ~p  [Ass]\n3. 1: p  [dneg: 1]\nclosed: 3, 2\n";
        let proof: Proof = text.parse().unwrap();
        assert_eq!(proof.root.steps[0].justification.rule, RuleId::Dneg);
    }
}
