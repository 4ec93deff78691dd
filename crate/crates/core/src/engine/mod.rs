//! Proof search: saturation with priorities, depth-first over branches,
//! with node, index and depth budgets.

mod proof;
mod replay;

use std::fmt;

use indexmap::IndexSet;
use serde::Serialize;

use crate::formula::Formula;
use crate::prefixed::{Branch, ClosureWitness, Index, PrefixedFormula};
use crate::rulesets::{self, LogicPreset, RuleInstance};
use crate::semantics::{self, Assignment, ConditionReport, PriestModel};

pub use proof::{
    Alternative, BlockEnd, Justification, LineJustification, Proof, ProofBlock, ProofFormatError, ProofLine, ProofStep,
};
pub use replay::{replay, ReplayError};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Limits {
    /// Tableau lines, assumptions included, over the whole tree.
    pub max_nodes: usize,
    /// Largest index any branch may use.
    pub max_indices: u32,
    /// Longest branch, in lines.
    pub max_depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_nodes: 10_000, max_indices: 64, max_depth: 2_000 }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Nodes,
    Indices,
    Depth,
}

impl fmt::Display for LimitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitKind::Nodes => "node limit",
            LimitKind::Indices => "index limit",
            LimitKind::Depth => "depth limit",
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Stats {
    pub nodes: usize,
    pub rule_applications: usize,
    pub closed_leaves: usize,
    pub max_index: u32,
}

/// An open saturated branch and the model read off it.
#[derive(Clone, Debug)]
pub struct OpenBranch {
    pub branch: Branch,
    pub saturated: bool,
    pub countermodel: PriestModel,
    pub assignment: Assignment,
    /// The model satisfies the branch and meets the logic's conditions.
    pub certified: bool,
    /// First branch item the model fails, if any.
    pub unsatisfied: Option<PrefixedFormula>,
    /// The logic's conditions over the branch vocabulary.
    pub conditions: ConditionReport,
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Closed { proof: Proof, stats: Stats },
    Open { open: Box<OpenBranch>, stats: Stats },
    ResourceOut { limit: LimitKind, stats: Stats },
}

impl Verdict {
    pub fn is_closed(&self) -> bool {
        matches!(self, Verdict::Closed { .. })
    }

    pub fn is_open(&self) -> bool {
        matches!(self, Verdict::Open { .. })
    }

    pub fn stats(&self) -> &Stats {
        match self {
            Verdict::Closed { stats, .. } | Verdict::Open { stats, .. } | Verdict::ResourceOut { stats, .. } => stats,
        }
    }

    pub fn proof(&self) -> Option<&Proof> {
        match self {
            Verdict::Closed { proof, .. } => Some(proof),
            _ => None,
        }
    }

    pub fn open(&self) -> Option<&OpenBranch> {
        match self {
            Verdict::Open { open, .. } => Some(open),
            _ => None,
        }
    }
}

/// Result of saturating a single starting branch.
#[derive(Clone, Debug)]
pub enum Saturation {
    /// Every branch below closed.
    Closed(ProofBlock),
    /// The first open branch on which nothing more applies.
    Open(Branch),
    /// A limit tripped on the branch returned.
    Unsaturated(Branch, LimitKind),
}

/// The assumptions of `Γ ⊢ φ`: every premise and the negated goal at index 1.
pub fn assumptions(premises: &[Formula], goal: &Formula) -> Vec<PrefixedFormula> {
    let mut out: IndexSet<PrefixedFormula> =
        premises.iter().map(|g| PrefixedFormula::At(Index(1), g.clone())).collect();
    out.insert(PrefixedFormula::At(Index(1), goal.negated()));
    out.into_iter().collect()
}

/// Searches for a closed tableau for `premises ⊢ goal`.
pub fn prove(premises: &[Formula], goal: &Formula, preset: &LogicPreset, limits: Limits) -> Verdict {
    let assumptions = assumptions(premises, goal);
    let start = Branch::from_items(assumptions.iter().cloned());
    let mut stats = Stats { nodes: assumptions.len(), ..Default::default() };
    match search(start, preset, limits, &mut stats) {
        Saturation::Closed(root) => Verdict::Closed { proof: Proof { assumptions, root }, stats },
        Saturation::Open(branch) => Verdict::Open { open: Box::new(certify(branch, preset)), stats },
        Saturation::Unsaturated(_, limit) => Verdict::ResourceOut { limit, stats },
    }
}

/// Saturates `branch`, exploring the alternatives of branching rules depth
/// first, left to right.
pub fn saturate(branch: &Branch, preset: &LogicPreset, limits: Limits) -> Saturation {
    let mut stats = Stats { nodes: branch.len(), ..Default::default() };
    search(branch.clone(), preset, limits, &mut stats)
}

/// Extracts the model of an open branch and checks it.
pub fn certify(branch: Branch, preset: &LogicPreset) -> OpenBranch {
    let (model, assignment) = semantics::extract_model(&branch);
    let unsatisfied = semantics::first_unsatisfied(&model, &assignment, branch.items()).unwrap_or_else(|e| {
        panic!("extracted model must cover the branch: {e}");
    });
    let vocab = branch_vocab(&branch);
    let conditions = model.check(&vocab, &preset.logic.conditions());
    let certified = unsatisfied.is_none() && conditions.all_hold();
    OpenBranch { branch, saturated: true, countermodel: model, assignment, certified, unsatisfied, conditions }
}

/// Antecedents on the branch, accessibility keys and ⊤.
pub fn branch_vocab(branch: &Branch) -> Vec<Formula> {
    let mut vocab: IndexSet<Formula> = branch.antecedents().iter().cloned().collect();
    for item in branch.items() {
        if let PrefixedFormula::Rel(_, _, f) = item {
            vocab.insert(f.clone());
        }
    }
    vocab.insert(Formula::Top);
    vocab.into_iter().collect()
}

struct PendingSplit {
    justification: Justification,
    children: Vec<(Vec<PrefixedFormula>, Branch)>,
    done: Vec<Alternative>,
}

struct Frame {
    branch: Branch,
    steps: Vec<ProofStep>,
    split: Option<PendingSplit>,
}

fn justification(inst: &RuleInstance) -> Justification {
    Justification { rule: inst.rule, premises: inst.premises.clone(), instantiation: inst.formula.clone() }
}

enum Step {
    Closed(ClosureWitness),
    Open,
    Limit(LimitKind),
    Split(PendingSplit),
}

fn search(start: Branch, preset: &LogicPreset, limits: Limits, stats: &mut Stats) -> Saturation {
    let mut stack = vec![Frame { branch: start, steps: Vec::new(), split: None }];
    loop {
        let top = stack.last_mut().expect("stack never empties before returning");
        let finished = if let Some(split) = &mut top.split {
            if split.done.len() < split.children.len() {
                let (_, child) = split.children[split.done.len()].clone();
                stack.push(Frame { branch: child, steps: Vec::new(), split: None });
                continue;
            }
            let split = top.split.take().expect("split present");
            let alternatives = split.done;
            ProofBlock {
                steps: std::mem::take(&mut top.steps),
                end: BlockEnd::Split { justification: split.justification, alternatives },
            }
        } else {
            match run_block(top, preset, limits, stats) {
                Step::Closed(witness) => {
                    stats.closed_leaves += 1;
                    ProofBlock { steps: std::mem::take(&mut top.steps), end: BlockEnd::Closed(witness) }
                }
                Step::Open => return Saturation::Open(stack.pop().unwrap().branch),
                Step::Limit(limit) => return Saturation::Unsaturated(stack.pop().unwrap().branch, limit),
                Step::Split(split) => {
                    top.split = Some(split);
                    continue;
                }
            }
        };
        stack.pop();
        match stack.last_mut() {
            None => return Saturation::Closed(finished),
            Some(parent) => {
                let split = parent.split.as_mut().expect("parent is splitting");
                let added = split.children[split.done.len()].0.clone();
                split.done.push(Alternative { added, block: finished });
            }
        }
    }
}

/// Applies non-branching instances in place until the branch closes,
/// saturates, trips a limit or meets a branching instance.
fn run_block(frame: &mut Frame, preset: &LogicPreset, limits: Limits, stats: &mut Stats) -> Step {
    loop {
        if let Some(w) = frame.branch.closure_witness() {
            return Step::Closed(w.clone());
        }
        if stats.nodes > limits.max_nodes {
            return Step::Limit(LimitKind::Nodes);
        }
        if frame.branch.len() > limits.max_depth {
            return Step::Limit(LimitKind::Depth);
        }
        let Some(inst) = rulesets::next_instance(&frame.branch, preset) else { return Step::Open };
        if let Some(k) = inst.fresh {
            if k.0 > limits.max_indices {
                return Step::Limit(LimitKind::Indices);
            }
            stats.max_index = stats.max_index.max(k.0);
        }
        stats.rule_applications += 1;
        if inst.alternatives.len() == 1 {
            let added = rulesets::extend(&mut frame.branch, &inst, &inst.alternatives[0]);
            stats.nodes += added.len();
            frame.steps.push(ProofStep { justification: justification(&inst), added });
            continue;
        }
        let children = inst
            .alternatives
            .iter()
            .map(|alt| {
                let mut child = frame.branch.clone();
                let added = rulesets::extend(&mut child, &inst, alt);
                stats.nodes += added.len();
                (added, child)
            })
            .collect();
        return Step::Split(PendingSplit { justification: justification(&inst), children, done: Vec::new() });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulesets::{Logic, RuleId};

    fn f(s: &str) -> Formula {
        s.parse().unwrap()
    }

    fn branch(items: &[&str]) -> Branch {
        Branch::from_items(items.iter().map(|s| s.parse().unwrap()))
    }

    #[test]
    fn conjunction_saturates() {
        let Saturation::Open(b) = saturate(&branch(&["1: p & q"]), &LogicPreset::new(Logic::Ck), Limits::default())
        else {
            panic!("expected open")
        };
        assert!(b.contains(&"1: p".parse().unwrap()) && b.contains(&"1: q".parse().unwrap()));
    }

    #[test]
    fn double_negation_saturates() {
        let Saturation::Open(b) = saturate(&branch(&["1: ~~p"]), &LogicPreset::new(Logic::Ck), Limits::default())
        else {
            panic!("expected open")
        };
        assert!(b.contains(&"1: p".parse().unwrap()));
    }

    #[test]
    fn bottom_closes_at_once() {
        let Saturation::Closed(block) = saturate(&branch(&["1: _|_"]), &LogicPreset::new(Logic::Ck), Limits::default())
        else {
            panic!("expected closed")
        };
        assert!(block.steps.is_empty());
    }

    #[test]
    fn monotonicity_closes_in_ck() {
        let v = prove(&[f("[p](q & r)")], &f("[p]q & [p]r"), &LogicPreset::new(Logic::Ck), Limits::default());
        let proof = v.proof().expect("closed");
        assert_eq!(replay(proof, &LogicPreset::new(Logic::Ck)), Ok(()));
    }

    #[test]
    fn identity_is_open_in_ck_with_certified_model() {
        let v = prove(&[], &f("[p]p"), &LogicPreset::new(Logic::Ck), Limits::default());
        let open = v.open().expect("open");
        assert!(open.saturated && open.certified);
        assert!(!open.countermodel.eval(1, &f("[p]p")).unwrap());
    }

    #[test]
    fn identity_closes_in_vc_by_r1() {
        let v = prove(&[], &f("[p]p"), &LogicPreset::new(Logic::Vc), Limits::default());
        assert!(v.proof().expect("closed").uses(RuleId::R1));
    }

    #[test]
    fn limits_give_resource_out() {
        let limits = Limits { max_nodes: 3, ..Limits::default() };
        let v = prove(&[], &f("(p -> q) -> (q -> r) -> p -> r"), &LogicPreset::new(Logic::Ck), limits);
        assert!(matches!(v, Verdict::ResourceOut { limit: LimitKind::Nodes, .. }));
    }
}
