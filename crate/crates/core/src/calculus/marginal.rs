use std::collections::{BTreeSet, HashMap};

use super::proof::{Justification, Proof, Rule, Step, Verdict};
use super::{bits, submasks, Universe, MAX_MARGINAL_VARS};
use crate::atoms::{Atom, AtomSet, VarSet};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Entry {
    left: u32,
    right: u32,
    just: Justification,
    premises: [u32; 2],
    arity: u8,
}

impl Entry {
    fn premises(&self) -> impl Iterator<Item = usize> + '_ {
        self.premises[..self.arity as usize]
            .iter()
            .map(|&p| p as usize)
    }
}

/// Largest universe whose pair table is stored densely (4^n slots).
const DENSE_VARS: usize = 10;

/// Map from (left, right) masks to entry ids.
#[derive(Debug, Clone)]
enum PairIndex {
    Dense { shift: usize, slots: Vec<u32> },
    Sparse(HashMap<(u32, u32), u32>),
}

impl PairIndex {
    fn new(n: usize) -> Self {
        if n <= DENSE_VARS {
            PairIndex::Dense {
                shift: n,
                slots: vec![u32::MAX; 1 << (2 * n)],
            }
        } else {
            PairIndex::Sparse(HashMap::new())
        }
    }

    fn get(&self, left: u32, right: u32) -> Option<usize> {
        match self {
            PairIndex::Dense { shift, slots } => {
                let id = slots[((left as usize) << shift) | right as usize];
                (id != u32::MAX).then_some(id as usize)
            }
            PairIndex::Sparse(map) => map.get(&(left, right)).map(|&id| id as usize),
        }
    }

    /// Inserts unless present; returns whether the pair was new.
    fn insert(&mut self, left: u32, right: u32, id: usize) -> bool {
        match self {
            PairIndex::Dense { shift, slots } => {
                let slot = &mut slots[((left as usize) << *shift) | right as usize];
                if *slot != u32::MAX {
                    return false;
                }
                *slot = id as u32;
                true
            }
            PairIndex::Sparse(map) => match map.entry((left, right)) {
                std::collections::hash_map::Entry::Occupied(_) => false,
                std::collections::hash_map::Entry::Vacant(v) => {
                    v.insert(id as u32);
                    true
                }
            },
        }
    }
}

/// The least set of marginal atoms over a finite universe that contains Σ
/// and every axiom instance and is closed under the rules. Each atom keeps
/// the first derivation found in FIFO order, so proofs are reproducible.
#[derive(Debug, Clone)]
pub struct MarginalClosure {
    universe: Universe,
    vars: VarSet,
    entries: Vec<Entry>,
    index: PairIndex,
}

impl MarginalClosure {
    /// Saturates `sigma` over `sigma.universe() ∪ extra`.
    pub fn new(sigma: &AtomSet, extra: &VarSet) -> Result<Self> {
        if let Some(a) = sigma.iter().find(|a| !a.is_marginal()) {
            return Err(Error::ConditionalInMarginal(a.clone()));
        }
        let mut vars = sigma.universe().clone();
        vars.extend(extra.iter().cloned());
        let universe = Universe::new(&vars, MAX_MARGINAL_VARS)?;
        let n = universe.len();
        let mut sat = Saturation {
            closure: MarginalClosure {
                universe,
                vars,
                entries: Vec::new(),
                index: PairIndex::new(n),
            },
            by_left: vec![Vec::new(); 1 << n],
            by_union: vec![Vec::new(); 1 << n],
        };
        sat.run(sigma);
        Ok(sat.closure)
    }

    pub fn universe(&self) -> &VarSet {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Membership; atoms mentioning variables outside the universe are never
    /// members.
    pub fn contains(&self, a: &Atom) -> bool {
        self.key(a)
            .is_some_and(|(l, r)| self.index.get(l, r).is_some())
    }

    fn key(&self, a: &Atom) -> Option<(u32, u32)> {
        if !a.is_marginal() {
            return None;
        }
        Some((
            self.universe.try_mask(a.left())?,
            self.universe.try_mask(a.right())?,
        ))
    }

    /// Closure atoms in derivation order.
    pub fn atoms(&self) -> Vec<Atom> {
        self.entries.iter().map(|e| self.atom(e)).collect()
    }

    pub fn atom_set(&self) -> BTreeSet<Atom> {
        self.atoms().into_iter().collect()
    }

    fn atom(&self, e: &Entry) -> Atom {
        Atom::marginal(self.universe.set(e.left), self.universe.set(e.right))
    }

    /// Proof of `goal` from the recorded first derivations, renumbered so
    /// that only ancestors of the goal appear.
    pub fn proof(&self, goal: &Atom) -> Option<Proof> {
        let (l, r) = self.key(goal)?;
        let root = self.index.get(l, r)?;
        let mut needed = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if needed.insert(i) {
                stack.extend(self.entries[i].premises());
            }
        }
        // premises are always inserted before their conclusions, so entry
        // order is a topological order
        let renumber: HashMap<usize, usize> =
            needed.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let steps = needed
            .iter()
            .map(|&i| {
                let e = &self.entries[i];
                Step {
                    conclusion: self.atom(e),
                    justification: e.just,
                    premises: e.premises().map(|p| renumber[&p]).collect(),
                }
            })
            .collect();
        Some(Proof { steps })
    }

    pub fn verdict(&self, goal: &Atom) -> Verdict {
        match self.proof(goal) {
            Some(p) => Verdict::Derived(p),
            None => Verdict::NotDerivable,
        }
    }

    /// Variables `v` with `v ⊥ v` in the closure.
    pub fn algebraic_vars(&self) -> VarSet {
        (0..self.universe.len())
            .filter(|&i| self.index.get(1 << i, 1 << i).is_some())
            .map(|i| self.universe.vars[i].clone())
            .collect()
    }

    /// Deterministic reduction of a non-derivable goal: scan the left side,
    /// then the right side, in canonical order, dropping a variable whenever
    /// the smaller atom is still not in the closure.
    pub fn minimal_nonderivable(&self, goal: &Atom) -> Result<Atom> {
        if !goal.is_marginal() {
            return Err(Error::ConditionalInMarginal(goal.clone()));
        }
        if self.contains(goal) {
            return Err(Error::GoalDerivable(goal.clone()));
        }
        let mut left = goal.left().clone();
        let mut right = goal.right().clone();
        for v in goal.left() {
            let mut smaller = left.clone();
            smaller.remove(v);
            if !self.contains(&Atom::marginal(
                smaller.iter().cloned(),
                right.iter().cloned(),
            )) {
                left = smaller;
            }
        }
        for v in goal.right() {
            let mut smaller = right.clone();
            smaller.remove(v);
            if !self.contains(&Atom::marginal(
                left.iter().cloned(),
                smaller.iter().cloned(),
            )) {
                right = smaller;
            }
        }
        Ok(Atom::marginal(left, right))
    }
}

struct Saturation {
    closure: MarginalClosure,
    by_left: Vec<Vec<u32>>,
    /// entries keyed by left ∪ right
    by_union: Vec<Vec<u32>>,
}

impl Saturation {
    fn add(&mut self, left: u32, right: u32, just: Justification, premises: &[usize]) {
        let c = &mut self.closure;
        let id = c.entries.len();
        if !c.index.insert(left, right, id) {
            return;
        }
        let mut p = [0u32; 2];
        for (slot, &q) in p.iter_mut().zip(premises) {
            *slot = q as u32;
        }
        c.entries.push(Entry {
            left,
            right,
            just,
            premises: p,
            arity: premises.len() as u8,
        });
        self.by_left[left as usize].push(id as u32);
        self.by_union[(left | right) as usize].push(id as u32);
    }

    fn run(&mut self, sigma: &AtomSet) {
        let u = &self.closure.universe;
        let seeds: Vec<(u32, u32)> = sigma
            .iter()
            .map(|a| (u.mask(a.left()), u.mask(a.right())))
            .collect();
        let full = u.full();
        for (l, r) in seeds {
            self.add(l, r, Justification::Hyp, &[]);
        }
        for x in submasks(full) {
            self.add(x, 0, Justification::Rule(Rule::A3), &[]);
        }

        let mut next = 0;
        while next < self.closure.entries.len() {
            let i = next;
            next += 1;
            let (x, y) = {
                let e = &self.closure.entries[i];
                (e.left, e.right)
            };

            self.add(y, x, Justification::Rule(Rule::B3), &[i]);

            for v in bits(y) {
                self.add(x, y & !(1 << v), Justification::Rule(Rule::C3), &[i]);
            }

            if x == y && x.count_ones() == 1 {
                for z in submasks(full) {
                    self.add(x, z, Justification::Rule(Rule::E3), &[i]);
                }
            }

            // x ⊥ y (this) and xy ⊥ z (partner)
            let key = (x | y) as usize;
            let mut k = 0;
            while k < self.by_left[key].len() {
                let j = self.by_left[key][k] as usize;
                k += 1;
                let z = self.closure.entries[j].right;
                self.add(x, y | z, Justification::Rule(Rule::D3), &[i, j]);
            }

            // a ⊥ b (partner) with a ∪ b = x, and x ⊥ y (this)
            let mut k = 0;
            while k < self.by_union[x as usize].len() {
                let j = self.by_union[x as usize][k] as usize;
                k += 1;
                let (a, b) = (self.closure.entries[j].left, self.closure.entries[j].right);
                self.add(a, b | y, Justification::Rule(Rule::D3), &[j, i]);
            }
        }
    }
}

/// The saturated set of marginal atoms over `sigma.universe()`.
pub fn saturate_marginal(sigma: &AtomSet) -> Result<BTreeSet<Atom>> {
    Ok(MarginalClosure::new(sigma, &VarSet::new())?.atom_set())
}

/// Decides `sigma ⊢ goal` in the marginal calculus over
/// `sigma.universe() ∪ vars(goal)`.
pub fn derives_marginal(sigma: &AtomSet, goal: &Atom) -> Result<Verdict> {
    if !goal.is_marginal() {
        return Err(Error::ConditionalInMarginal(goal.clone()));
    }
    let closure = MarginalClosure::new(sigma, &goal.vars())?;
    Ok(closure.verdict(goal))
}

/// A sub-atom of a non-derivable goal that is still non-derivable while each
/// single-variable deletion from it is derivable.
pub fn minimal_nonderivable(sigma: &AtomSet, goal: &Atom) -> Result<Atom> {
    if !goal.is_marginal() {
        return Err(Error::ConditionalInMarginal(goal.clone()));
    }
    MarginalClosure::new(sigma, &goal.vars())?.minimal_nonderivable(goal)
}
