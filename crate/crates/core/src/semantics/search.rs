//! Exhaustive search for small countermodels.

use thiserror::Error;

use super::conditions::{self, Condition, View};
use super::dense::{Compiled, Interp, WorldSet};
use super::{PriestModel, World};
use crate::formula::Formula;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForce {
    pub max_worlds: usize,
    /// Only models meeting these conditions (over the antecedents of the
    /// formula) are considered.
    pub conditions: Vec<Condition>,
    /// Maximum number of models to examine.
    pub budget: u64,
}

impl Default for BruteForce {
    fn default() -> Self {
        BruteForce { max_worlds: 3, conditions: vec![], budget: 20_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BruteForceResult {
    /// No countermodel with up to this many worlds.
    ValidUpTo(usize),
    Countermodel {
        model: PriestModel,
        world: World,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("search budget exhausted after {examined} models")]
pub struct BudgetExceeded {
    pub examined: u64,
}

/// Searches models with 1..=max_worlds worlds (numbered from 1) for one
/// falsifying `formula`. Accessibility keys are the antecedents of the
/// formula, plus ⊤ when (3) or (4) is requested; those keys are also the
/// vocabulary the conditions are checked over.
pub fn brute_force_valid(formula: &Formula, opts: &BruteForce) -> Result<BruteForceResult, BudgetExceeded> {
    let mut compiled = Compiled::default();
    let root = compiled.add(formula);
    let top = opts.conditions.iter().any(|c| matches!(c, Condition::C3 | Condition::C4));
    let vocab: Vec<Formula> = compiled.keys.clone();
    conditions::register(&mut compiled, &vocab, top);
    let vocab: Vec<Formula> = compiled.keys.clone();
    let local = local_instances(&compiled, &opts.conditions, &vocab);

    let mut examined = 0u64;
    for n in 1..=opts.max_worlds {
        let atoms = compiled.atoms.len();
        let valuations = 1u64 << (n * atoms);
        for v in 0..valuations {
            let mut interp = Interp::blank(n, &compiled);
            for a in 0..atoms {
                interp.val[a] = WorldSet::from_mask(n, (v >> (a * n)) & ((1 << n) - 1));
            }
            let static_truth = compiled.truth(&interp);
            let options = candidate_successors(&compiled, &mut interp, &static_truth, &local, n);
            if options.iter().any(Vec::is_empty) {
                continue;
            }
            // odometer over one tuple of successor sets per world
            let mut choice = vec![0usize; n];
            loop {
                examined += 1;
                if examined > opts.budget {
                    return Err(BudgetExceeded { examined: examined - 1 });
                }
                for (x, &c) in choice.iter().enumerate() {
                    for (k, &mask) in options[x][c].iter().enumerate() {
                        interp.succ[k][x] = WorldSet::from_mask(n, mask);
                    }
                }
                let truth = compiled.truth(&interp);
                if let Some(x) = WorldSet::full(n).minus(&truth[root]).first() {
                    let view = View { compiled: &compiled, interp: &interp, truth: &truth };
                    if opts.conditions.iter().all(|c| view.first_violation(*c, &vocab).is_none()) {
                        return Ok(BruteForceResult::Countermodel {
                            model: to_model(&compiled, &interp),
                            world: x as World + 1,
                        });
                    }
                }
                if !advance(&mut choice, &options) {
                    break;
                }
            }
        }
    }
    Ok(BruteForceResult::ValidUpTo(opts.max_worlds))
}

fn advance(choice: &mut [usize], options: &[Vec<Vec<u64>>]) -> bool {
    for (x, c) in choice.iter_mut().enumerate() {
        *c += 1;
        if *c < options[x].len() {
            return true;
        }
        *c = 0;
    }
    false
}

/// Condition instances whose formulas are all Boolean, so their truth sets
/// depend on the valuation alone, bucketed by the last key they read.
fn local_instances(compiled: &Compiled, conds: &[Condition], vocab: &[Formula]) -> Vec<Vec<(Condition, Vec<Formula>)>> {
    let mut buckets = vec![Vec::new(); compiled.keys.len()];
    for &c in conds {
        for fs in conditions::instances(c, vocab) {
            if !fs.iter().all(Formula::is_propositional) {
                continue;
            }
            let last = conditions::keys_read(c, &fs)
                .iter()
                .map(|k| compiled.key(k).expect("key registered"))
                .max()
                .expect("every condition reads a key");
            buckets[last].push((c, fs));
        }
    }
    buckets
}

/// Successor tuples (one mask per key) worth trying at each world. Every
/// condition is local to a world, so instances over Boolean formulas prune
/// here as soon as the keys they read are chosen; the complete model is
/// re-checked anyway.
fn candidate_successors(
    compiled: &Compiled,
    interp: &mut Interp,
    static_truth: &[WorldSet],
    local: &[Vec<(Condition, Vec<Formula>)>],
    n: usize,
) -> Vec<Vec<Vec<u64>>> {
    (0..n)
        .map(|x| {
            let mut tuples: Vec<Vec<u64>> = vec![Vec::new()];
            for bucket in local.iter().take(compiled.keys.len()) {
                let mut next = Vec::new();
                for t in &tuples {
                    for (k, &mask) in t.iter().enumerate() {
                        interp.succ[k][x] = WorldSet::from_mask(n, mask);
                    }
                    for m in 0u64..1 << n {
                        interp.succ[t.len()][x] = WorldSet::from_mask(n, m);
                        let view = View { compiled, interp, truth: static_truth };
                        if bucket.iter().all(|(c, fs)| view.instance(*c, x, fs).is_ok()) {
                            let mut t = t.clone();
                            t.push(m);
                            next.push(t);
                        }
                    }
                }
                tuples = next;
            }
            tuples
        })
        .collect()
}

fn to_model(compiled: &Compiled, interp: &Interp) -> PriestModel {
    let n = interp.n;
    let mut model = PriestModel { worlds: (1..=n as World).collect(), ..Default::default() };
    for (slot, atom) in compiled.atoms.iter().enumerate() {
        model.valuation.insert(atom.to_string(), interp.val[slot].iter().map(|x| x as World + 1).collect());
    }
    for (slot, key) in compiled.keys.iter().enumerate() {
        let pairs: std::collections::BTreeSet<(World, World)> =
            (0..n).flat_map(|x| interp.succ[slot][x].iter().map(move |y| (x as World + 1, y as World + 1))).collect();
        if !pairs.is_empty() {
            model.access.insert(key.clone(), pairs);
        }
    }
    model
}
