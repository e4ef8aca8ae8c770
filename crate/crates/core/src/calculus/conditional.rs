use std::collections::{BTreeSet, HashMap};

use super::proof::{Justification, Proof, Rule, Step, Verdict};
use super::{bits, submasks, Universe, MAX_CONDITIONAL_VARS};
use crate::atoms::{Atom, AtomSet, VarSet};
use crate::error::Result;

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Triple {
    left: u32,
    right: u32,
    cond: u32,
}

#[derive(Debug, Clone)]
struct Entry {
    atom: Triple,
    just: Justification,
    premises: Vec<usize>,
}

/// Depth-bounded forward chaining for conditional atoms. Round 0 holds Σ
/// (marginal atoms lifted to the empty condition) and every reflexive axiom
/// instance; each later round fires every rule on every pair of atoms at
/// least one of which was produced in the previous round.
#[derive(Debug, Clone)]
pub struct ConditionalClosure {
    universe: Universe,
    vars: VarSet,
    entries: Vec<Entry>,
    /// Dense table over all (left, right, cond) triples.
    slot: Vec<u32>,
    rounds: usize,
    saturated: bool,
}

#[derive(Default)]
struct Indexes {
    by_right_cond: HashMap<(u32, u32), Vec<usize>>,
    by_right_leftcond: HashMap<(u32, u32), Vec<usize>>,
    by_cond: HashMap<u32, Vec<usize>>,
    reflexive_by_left: HashMap<u32, Vec<usize>>,
    by_left_cond: HashMap<(u32, u32), Vec<usize>>,
    by_union_cond: HashMap<(u32, u32), Vec<usize>>,
}

impl Indexes {
    fn insert(&mut self, id: usize, t: Triple) {
        self.by_right_cond
            .entry((t.right, t.cond))
            .or_default()
            .push(id);
        self.by_right_leftcond
            .entry((t.right, t.left | t.cond))
            .or_default()
            .push(id);
        self.by_cond.entry(t.cond).or_default().push(id);
        if t.left == t.right {
            self.reflexive_by_left.entry(t.left).or_default().push(id);
        }
        self.by_left_cond
            .entry((t.left, t.cond))
            .or_default()
            .push(id);
        self.by_union_cond
            .entry((t.left | t.right, t.cond))
            .or_default()
            .push(id);
    }
}

fn get<K: std::hash::Hash + Eq>(m: &HashMap<K, Vec<usize>>, k: &K) -> Vec<usize> {
    m.get(k).cloned().unwrap_or_default()
}

impl ConditionalClosure {
    /// Runs `depth` rounds over `sigma.universe() ∪ extra`, stopping early once
    /// a round adds nothing or `goal` (if given) appears.
    pub fn new(sigma: &AtomSet, extra: &VarSet, depth: usize, goal: Option<&Atom>) -> Result<Self> {
        let mut vars = sigma.universe().clone();
        vars.extend(extra.iter().cloned());
        let universe = Universe::new(&vars, MAX_CONDITIONAL_VARS)?;
        let n = universe.len();
        let mut closure = ConditionalClosure {
            universe,
            vars,
            entries: Vec::new(),
            slot: vec![ABSENT; 1 << (3 * n)],
            rounds: 0,
            saturated: false,
        };
        let goal_key = goal.map(|g| closure.triple(&g.lifted_or_self()));
        closure.run(sigma, depth, goal_key);
        Ok(closure)
    }

    fn triple(&self, a: &Atom) -> Triple {
        Triple {
            left: self.universe.mask(a.left()),
            right: self.universe.mask(a.right()),
            cond: self.universe.mask(a.condition()),
        }
    }

    fn try_triple(&self, a: &Atom) -> Option<Triple> {
        Some(Triple {
            left: self.universe.try_mask(a.left())?,
            right: self.universe.try_mask(a.right())?,
            cond: self.universe.try_mask(a.condition())?,
        })
    }

    fn key(&self, t: Triple) -> usize {
        let n = self.universe.len();
        (t.left | (t.right << n) | (t.cond << (2 * n))) as usize
    }

    fn lookup(&self, t: Triple) -> Option<usize> {
        match self.slot[self.key(t)] {
            ABSENT => None,
            i => Some(i as usize),
        }
    }

    fn add(&mut self, t: Triple, just: Justification, premises: Vec<usize>) {
        let k = self.key(t);
        if self.slot[k] != ABSENT {
            return;
        }
        self.slot[k] = self.entries.len() as u32;
        self.entries.push(Entry {
            atom: t,
            just,
            premises,
        });
    }

    fn run(&mut self, sigma: &AtomSet, depth: usize, goal: Option<Triple>) {
        let full = self.universe.full();
        let seeds: Vec<Triple> = sigma
            .iter()
            .map(|a| self.triple(&a.lifted_or_self()))
            .collect();
        for t in seeds {
            self.add(t, Justification::Hyp, vec![]);
        }
        for x in submasks(full) {
            for y in submasks(full) {
                self.add(
                    Triple {
                        left: x,
                        right: y,
                        cond: x,
                    },
                    Justification::Rule(Rule::A5),
                    vec![],
                );
            }
        }

        let mut idx = Indexes::default();
        let mut start = 0;
        let found = |c: &Self| goal.is_some_and(|g| c.lookup(g).is_some());
        while self.rounds < depth && !found(self) {
            let end = self.entries.len();
            if start == end {
                self.saturated = true;
                break;
            }
            for i in start..end {
                idx.insert(i, self.entries[i].atom);
            }
            for i in start..end {
                self.fire(i, &idx);
            }
            start = end;
            self.rounds += 1;
        }
        if start == self.entries.len() {
            self.saturated = true;
        }
    }

    fn fire(&mut self, i: usize, idx: &Indexes) {
        let Triple {
            left: x,
            right: y,
            cond: z,
        } = self.entries[i].atom;
        let rule = |r| Justification::Rule(r);
        let t = |left, right, cond| Triple { left, right, cond };

        self.add(t(y, x, z), rule(Rule::B5), vec![i]);

        for v in bits(x) {
            self.add(t(x & !(1 << v), y, z), rule(Rule::C5), vec![i]);
        }
        for v in bits(y) {
            self.add(t(x, y & !(1 << v), z), rule(Rule::C5), vec![i]);
        }

        self.add(t(x | z, y | z, z), rule(Rule::D5), vec![i]);

        // E5: x ⊥_z y, u ⊥_{zx} y ⟹ u ⊥_z y
        for j in get(&idx.by_right_cond, &(y, x | z)) {
            let u = self.entries[j].atom.left;
            self.add(t(u, y, z), rule(Rule::E5), vec![i, j]);
        }
        // this entry as the second premise u ⊥_w y, with partner a ⊥_c y and c ∪ a = w
        for j in get(&idx.by_right_leftcond, &(y, z)) {
            let c = self.entries[j].atom.cond;
            self.add(t(x, y, c), rule(Rule::E5), vec![j, i]);
        }

        // F5: y ⊥_z y, zx ⊥_y u ⟹ x ⊥_z u
        if x == y {
            for j in get(&idx.by_cond, &x) {
                let q = self.entries[j].atom;
                if z & !q.left == 0 {
                    self.fire_f5(i, j, z, q.left, q.right);
                }
            }
        }
        for j in get(&idx.reflexive_by_left, &z) {
            let c = self.entries[j].atom.cond;
            if c & !x == 0 {
                self.fire_f5(j, i, c, x, y);
            }
        }

        // G5: x ⊥_z y, xy ⊥_z u ⟹ x ⊥_z yu
        for j in get(&idx.by_left_cond, &(x | y, z)) {
            let u = self.entries[j].atom.right;
            self.add(t(x, y | u, z), rule(Rule::G5), vec![i, j]);
        }
        for j in get(&idx.by_union_cond, &(x, z)) {
            let p = self.entries[j].atom;
            self.add(t(p.left, p.right | y, z), rule(Rule::G5), vec![j, i]);
        }
    }

    /// Every conclusion `x ⊥_z u` with `z ∪ x = w`.
    fn fire_f5(&mut self, p: usize, q: usize, z: u32, w: u32, u: u32) {
        let base = w & !z;
        for s in submasks(z) {
            self.add(
                Triple {
                    left: base | s,
                    right: u,
                    cond: z,
                },
                Justification::Rule(Rule::F5),
                vec![p, q],
            );
        }
    }

    pub fn universe(&self) -> &VarSet {
        &self.vars
    }

    /// Number of completed rounds.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// True when a round added nothing, so the set is closed under all rules.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.try_triple(&a.lifted_or_self())
            .is_some_and(|t| self.lookup(t).is_some())
    }

    fn atom(&self, t: Triple) -> Atom {
        Atom::conditional(
            self.universe.set(t.left),
            self.universe.set(t.right),
            self.universe.set(t.cond),
        )
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.entries.iter().map(|e| self.atom(e.atom)).collect()
    }

    pub fn atom_set(&self) -> BTreeSet<Atom> {
        self.atoms().into_iter().collect()
    }

    pub fn proof(&self, goal: &Atom) -> Option<Proof> {
        let root = self.lookup(self.try_triple(&goal.lifted_or_self())?)?;
        let mut needed = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            if needed.insert(i) {
                stack.extend(self.entries[i].premises.iter().copied());
            }
        }
        let renumber: HashMap<usize, usize> =
            needed.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let steps = needed
            .iter()
            .map(|&i| {
                let e = &self.entries[i];
                Step {
                    conclusion: self.atom(e.atom),
                    justification: e.just,
                    premises: e.premises.iter().map(|p| renumber[p]).collect(),
                }
            })
            .collect();
        Some(Proof { steps })
    }
}

impl Atom {
    fn lifted_or_self(&self) -> Atom {
        if self.is_marginal() {
            self.lifted()
        } else {
            self.clone()
        }
    }
}

/// All conditional atoms derivable from `sigma` within `depth` rounds.
pub fn saturate_conditional(sigma: &AtomSet, depth: usize) -> Result<BTreeSet<Atom>> {
    Ok(ConditionalClosure::new(sigma, &VarSet::new(), depth, None)?.atom_set())
}

/// `Derived` with a replayable proof when the goal appears within `depth`
/// rounds, `Unknown` otherwise.
pub fn derives_conditional(sigma: &AtomSet, goal: &Atom, depth: usize) -> Result<Verdict> {
    let closure = ConditionalClosure::new(sigma, &goal.vars(), depth, Some(goal))?;
    Ok(match closure.proof(goal) {
        Some(p) => Verdict::Derived(p),
        None => Verdict::Unknown { depth },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::parse_atom;

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    fn sigma(atoms: &[&str]) -> AtomSet {
        AtomSet::new(atoms.iter().map(|s| atom(s)))
    }

    #[test]
    fn reflexive_axiom_everywhere() {
        let s = AtomSet::with_universe([], crate::atoms::vars(["x", "y"]));
        let closure = saturate_conditional(&s, 1).unwrap();
        assert!(closure.contains(&atom("x _|_{x} y")));
        assert!(closure.contains(&atom("y _|_{y} x")));
        assert!(closure.contains(&atom("x,y _|_{x,y} ()")));
    }

    #[test]
    fn symmetry_and_exchange() {
        let c = saturate_conditional(&sigma(&["x _|_{z} y"]), 1).unwrap();
        assert!(c.contains(&atom("y _|_{z} x")));
        let c = saturate_conditional(&sigma(&["x _|_{z} y", "x,y _|_{z} u"]), 1).unwrap();
        assert!(c.contains(&atom("x _|_{z} u,y")));
    }

    #[test]
    fn f5_derivation() {
        let s = sigma(&["y _|_{z} y", "x,z _|_{y} u"]);
        let v = derives_conditional(&s, &atom("x _|_{z} u"), 2).unwrap();
        let p = v.proof().expect("derived");
        assert_eq!(
            p.steps.last().unwrap().justification,
            Justification::Rule(Rule::F5)
        );
        p.validate(&s).unwrap();
    }

    #[test]
    fn a5_derivation() {
        let v = derives_conditional(&AtomSet::default(), &atom("x _|_{x} y"), 1).unwrap();
        let p = v.proof().unwrap();
        assert_eq!(p.len(), 1);
        assert_eq!(p.steps[0].justification, Justification::Rule(Rule::A5));
    }

    #[test]
    fn unknown_verdict() {
        let v = derives_conditional(&sigma(&["x _|_{z} y"]), &atom("x _|_{w} y"), 3).unwrap();
        assert_eq!(v, Verdict::Unknown { depth: 3 });
    }

    #[test]
    fn marginal_hypotheses_are_lifted() {
        let s = sigma(&["x _|_ y"]);
        let v = derives_conditional(&s, &atom("y _|_ x"), 2).unwrap();
        let p = v.proof().unwrap();
        p.validate(&s).unwrap();
        assert_eq!(p.conclusion().unwrap(), &atom("y _|_{()} x"));
    }

    #[test]
    fn monotone_in_depth() {
        let s = sigma(&["a _|_{c} b", "a,b _|_{c} d"]);
        let mut prev = BTreeSet::new();
        for d in 0..4 {
            let cur = saturate_conditional(&s, d).unwrap();
            assert!(prev.is_subset(&cur));
            prev = cur;
        }
    }

    #[test]
    fn all_proofs_replay() {
        let s = sigma(&["a _|_{c} b", "b _|_ b", "a,c _|_{b} d"]);
        let closure = ConditionalClosure::new(&s, &VarSet::new(), 2, None).unwrap();
        for a in closure.atoms().iter().step_by(97) {
            closure.proof(a).unwrap().validate(&s).unwrap();
        }
    }
}
