use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use super::proof::Rule;
use crate::atoms::{Atom, VarSet, Variable};

/// Which rule system a fuzz run exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleFamily {
    Marginal,
    Conditional,
}

impl RuleFamily {
    pub fn rules(self) -> &'static [Rule] {
        match self {
            RuleFamily::Marginal => &Rule::MARGINAL,
            RuleFamily::Conditional => &Rule::CONDITIONAL,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RuleStats {
    pub trials: usize,
    /// Instances whose premises all held in the sampled model.
    pub premises_held: usize,
}

/// A rule instance whose premises hold and whose conclusion fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub premises: Vec<Atom>,
    pub conclusion: Atom,
    pub witness: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub per_rule: BTreeMap<Rule, RuleStats>,
    pub violations: Vec<Violation>,
}

impl SoundnessReport {
    pub fn is_sound(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn total_trials(&self) -> usize {
        self.per_rule.values().map(|s| s.trials).sum()
    }

    pub(crate) fn record(&mut self, rule: Rule, held: bool) {
        let s = self.per_rule.entry(rule).or_default();
        s.trials += 1;
        if held {
            s.premises_held += 1;
        }
    }
}

/// One application of a rule schema: premises and the conclusion they
/// license.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleInstance {
    pub rule: Rule,
    pub premises: Vec<Atom>,
    pub conclusion: Atom,
}

fn subset<R: Rng>(vars: &[Variable], rng: &mut R) -> VarSet {
    vars.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect()
}

fn sub_of<R: Rng>(set: &VarSet, rng: &mut R) -> VarSet {
    set.iter().filter(|_| rng.gen_bool(0.6)).cloned().collect()
}

fn union(a: &VarSet, b: &VarSet) -> VarSet {
    a.union(b).cloned().collect()
}

fn m(l: &VarSet, r: &VarSet) -> Atom {
    Atom::marginal(l.iter().cloned(), r.iter().cloned())
}

fn c(l: &VarSet, r: &VarSet, z: &VarSet) -> Atom {
    Atom::conditional(l.iter().cloned(), r.iter().cloned(), z.iter().cloned())
}

/// Samples a random instance of `rule` whose variables are drawn from `vars`
/// (which must be nonempty).
pub fn sample_instance<R: Rng>(rule: Rule, vars: &[Variable], rng: &mut R) -> RuleInstance {
    let mut s = || subset(vars, rng);
    let (x, y, z, u) = (s(), s(), s(), s());
    let (premises, conclusion) = match rule {
        Rule::A3 => (vec![], m(&x, &VarSet::new())),
        Rule::B3 => (vec![m(&x, &y)], m(&y, &x)),
        Rule::C3 => {
            let y2 = sub_of(&y, rng);
            (vec![m(&x, &y)], m(&x, &y2))
        }
        Rule::D3 => (
            vec![m(&x, &y), m(&union(&x, &y), &z)],
            m(&x, &union(&y, &z)),
        ),
        Rule::E3 => {
            let v: VarSet = [vars[rng.gen_range(0..vars.len())].clone()].into();
            (vec![m(&v, &v)], m(&v, &y))
        }
        Rule::A5 => (vec![], c(&x, &y, &x)),
        Rule::B5 => (vec![c(&x, &y, &z)], c(&y, &x, &z)),
        Rule::C5 => {
            let (x2, y2) = (sub_of(&x, rng), sub_of(&y, rng));
            (vec![c(&x, &y, &z)], c(&x2, &y2, &z))
        }
        Rule::D5 => (vec![c(&x, &y, &z)], c(&union(&x, &z), &union(&y, &z), &z)),
        Rule::E5 => (
            vec![c(&x, &y, &z), c(&u, &y, &union(&z, &x))],
            c(&u, &y, &z),
        ),
        Rule::F5 => (
            vec![c(&y, &y, &z), c(&union(&z, &x), &u, &y)],
            c(&x, &u, &z),
        ),
        Rule::G5 => (
            vec![c(&x, &y, &z), c(&union(&x, &y), &u, &z)],
            c(&x, &union(&y, &u), &z),
        ),
    };
    RuleInstance {
        rule,
        premises,
        conclusion,
    }
}
