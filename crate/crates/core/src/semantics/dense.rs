//! Bitset evaluation over a fixed vocabulary.
//!
//! Worlds are renumbered `0..n`. A formula set is compiled once into a
//! topologically ordered node table, after which the truth set of every node
//! in a given interpretation is a single linear pass.

use std::collections::HashMap;
use std::sync::Arc;

use smallvec::{smallvec, SmallVec};

use crate::formula::Formula;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub(crate) struct WorldSet(SmallVec<[u64; 2]>);

impl WorldSet {
    pub fn empty(n: usize) -> Self {
        WorldSet(smallvec![0; n.div_ceil(64).max(1)])
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for x in 0..n {
            s.insert(x);
        }
        s
    }

    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut s = Self::empty(n);
        s.0[0] = mask;
        s
    }

    pub fn insert(&mut self, x: usize) {
        self.0[x / 64] |= 1 << (x % 64);
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0[x / 64] & (1 << (x % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn is_subset(&self, other: &WorldSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &WorldSet) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }

    pub fn and(&self, other: &WorldSet) -> WorldSet {
        WorldSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    pub fn minus(&self, other: &WorldSet) -> WorldSet {
        WorldSet(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(k, word)| (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| k * 64 + b))
    }
}

#[derive(Clone, Debug)]
enum Node {
    Atom(usize),
    Bottom,
    Top,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Imp(usize, usize),
    Nec(usize, usize),
    Poss(usize, usize),
}

/// A vocabulary: formula nodes, atoms and accessibility keys.
#[derive(Clone, Debug, Default)]
pub(crate) struct Compiled {
    nodes: Vec<Node>,
    ids: HashMap<Formula, usize>,
    pub atoms: Vec<Arc<str>>,
    atom_ids: HashMap<Arc<str>, usize>,
    pub keys: Vec<Formula>,
    key_ids: HashMap<Formula, usize>,
}

impl Compiled {
    /// Adds `f` and its subformulas; returns the node id of `f`.
    pub fn add(&mut self, f: &Formula) -> usize {
        if let Some(&id) = self.ids.get(f) {
            return id;
        }
        let node = match f {
            Formula::Atom(name) => {
                let next = self.atoms.len();
                let slot = *self.atom_ids.entry(name.clone()).or_insert(next);
                if slot == next {
                    self.atoms.push(name.clone());
                }
                Node::Atom(slot)
            }
            Formula::Bottom => Node::Bottom,
            Formula::Top => Node::Top,
            Formula::Not(a) => Node::Not(self.add(a)),
            Formula::And(a, b) => Node::And(self.add(a), self.add(b)),
            Formula::Or(a, b) => Node::Or(self.add(a), self.add(b)),
            Formula::Imp(a, b) => Node::Imp(self.add(a), self.add(b)),
            Formula::Nec(a, b) | Formula::Poss(a, b) => {
                self.add(a);
                let key = self.add_key(a);
                let body = self.add(b);
                if matches!(f, Formula::Nec(..)) {
                    Node::Nec(key, body)
                } else {
                    Node::Poss(key, body)
                }
            }
        };
        let id = self.nodes.len();
        self.nodes.push(node);
        self.ids.insert(f.clone(), id);
        id
    }

    /// Registers an accessibility key (and its formula node).
    pub fn add_key(&mut self, f: &Formula) -> usize {
        if let Some(&slot) = self.key_ids.get(f) {
            return slot;
        }
        self.add(f);
        let slot = self.keys.len();
        self.keys.push(f.clone());
        self.key_ids.insert(f.clone(), slot);
        slot
    }

    pub fn id(&self, f: &Formula) -> Option<usize> {
        self.ids.get(f).copied()
    }

    pub fn key(&self, f: &Formula) -> Option<usize> {
        self.key_ids.get(f).copied()
    }

    /// Truth sets of every node, indexed by node id.
    pub fn truth(&self, interp: &Interp) -> Vec<WorldSet> {
        let n = interp.n;
        let mut out: Vec<WorldSet> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let set = match *node {
                Node::Atom(a) => interp.val[a].clone(),
                Node::Bottom => WorldSet::empty(n),
                Node::Top => WorldSet::full(n),
                Node::Not(a) => WorldSet::full(n).minus(&out[a]),
                Node::And(a, b) => out[a].and(&out[b]),
                Node::Or(a, b) => {
                    let mut s = out[a].clone();
                    for x in out[b].iter() {
                        s.insert(x);
                    }
                    s
                }
                Node::Imp(a, b) => {
                    let mut s = WorldSet::full(n).minus(&out[a]);
                    for x in out[b].iter() {
                        s.insert(x);
                    }
                    s
                }
                Node::Nec(k, b) => {
                    let mut s = WorldSet::empty(n);
                    for x in 0..n {
                        if interp.succ[k][x].is_subset(&out[b]) {
                            s.insert(x);
                        }
                    }
                    s
                }
                Node::Poss(k, b) => {
                    let mut s = WorldSet::empty(n);
                    for x in 0..n {
                        if interp.succ[k][x].intersects(&out[b]) {
                            s.insert(x);
                        }
                    }
                    s
                }
            };
            out.push(set);
        }
        out
    }
}

/// Valuation and successor sets on worlds `0..n`, slotted like a
/// [`Compiled`] vocabulary.
#[derive(Clone, Debug)]
pub(crate) struct Interp {
    pub n: usize,
    /// Per atom slot.
    pub val: Vec<WorldSet>,
    /// Per key slot, per world.
    pub succ: Vec<Vec<WorldSet>>,
}

impl Interp {
    pub fn blank(n: usize, vocab: &Compiled) -> Interp {
        Interp {
            n,
            val: vec![WorldSet::empty(n); vocab.atoms.len()],
            succ: vec![vec![WorldSet::empty(n); n]; vocab.keys.len()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn world_set_operations() {
        let mut a = WorldSet::empty(70);
        a.insert(0);
        a.insert(65);
        assert!(a.contains(65) && !a.contains(64));
        assert_eq!(a.iter().collect::<Vec<_>>(), vec![0, 65]);
        assert_eq!(a.len(), 2);
        let full = WorldSet::full(70);
        assert!(a.is_subset(&full));
        assert_eq!(full.minus(&a).len(), 68);
        assert!(!WorldSet::empty(3).intersects(&full));
    }

    #[test]
    fn nested_conditionals_share_nodes() {
        let mut c = Compiled::default();
        let f: Formula = "[p]q -> [p]~~q".parse().unwrap();
        c.add(&f);
        assert_eq!(c.keys.len(), 1);
        assert_eq!(c.atoms.len(), 2);
        // p, q, [p]q, ~q, ~~q, [p]~~q, whole
        assert_eq!(c.nodes.len(), 7);
    }
}
