//! Atom semantics over closure models and counterexample synthesis for the
//! marginal calculus.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};

use crate::atoms::{Atom, AtomSet, VarSet, Variable};
use crate::calculus::{sample_instance, MarginalClosure, RuleFamily, SoundnessReport, Violation};
use crate::error::{Error, Result};
use crate::pregeom::{
    ClosureModel, IndependenceQuery, IndependenceRelation, RankIndependence, Sampler, Vector,
};

/// A map from variables to elements of one closure model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AirAssignment {
    model: ClosureModel,
    map: BTreeMap<Variable, Vector>,
}

impl AirAssignment {
    pub fn new(model: ClosureModel, map: BTreeMap<Variable, Vector>) -> Result<Self> {
        for v in map.values() {
            model.check(v)?;
        }
        Ok(AirAssignment { model, map })
    }

    pub fn model(&self) -> &ClosureModel {
        &self.model
    }

    pub fn map(&self) -> &BTreeMap<Variable, Vector> {
        &self.map
    }

    pub fn dom(&self) -> VarSet {
        self.map.keys().cloned().collect()
    }

    pub fn get(&self, v: &Variable) -> Result<&Vector> {
        self.map
            .get(v)
            .ok_or_else(|| Error::UnboundVariable(v.to_string()))
    }

    /// Images of the variables of `set`, in canonical order.
    pub fn image(&self, set: &VarSet) -> Result<Vec<Vector>> {
        set.iter().map(|v| self.get(v).cloned()).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "model": self.model.to_string(),
            "map": self
                .map
                .iter()
                .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
                .collect::<serde_json::Map<_, _>>(),
        })
    }
}

/// `name = [..]` per line in variable order.
impl fmt::Display for AirAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model {}", self.model)?;
        for (k, v) in &self.map {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

/// Evaluates `a` under `s` with the relation induced by the model's rank.
pub fn air_satisfies(s: &AirAssignment, a: &Atom) -> Result<bool> {
    s.model.indep(&IndependenceQuery::new(
        s.image(a.left())?,
        s.image(a.right())?,
        s.image(a.condition())?,
    ))
}

/// Evaluates `a` under `s` with an arbitrary relation on the same model.
pub fn air_satisfies_with(
    rel: &dyn IndependenceRelation,
    s: &AirAssignment,
    a: &Atom,
) -> Result<bool> {
    rel.holds(
        &s.image(a.left())?,
        &s.image(a.right())?,
        &s.image(a.condition())?,
    )
}

/// Rule soundness over random assignments into `model`.
pub fn soundness_fuzz(
    family: RuleFamily,
    model: &ClosureModel,
    trials: usize,
    seed: u64,
) -> SoundnessReport {
    relation_soundness_fuzz(family, &RankIndependence(*model), trials, seed)
}

/// Samples `trials` random assignments and rule instances per rule over the
/// variables `a`, `b`, `c`, `d`; a violation is an instance whose premises
/// hold while its conclusion fails.
pub fn relation_soundness_fuzz(
    family: RuleFamily,
    rel: &dyn IndependenceRelation,
    trials: usize,
    seed: u64,
) -> SoundnessReport {
    let dom = crate::atoms::vars(["a", "b", "c", "d"]);
    let mut sampler = Sampler::new(*rel.model(), seed);
    let mut report = SoundnessReport::default();
    for &rule in family.rules() {
        for _ in 0..trials {
            sampler.reset();
            let map = dom.iter().map(|v| (v.clone(), sampler.element())).collect();
            let s = AirAssignment::new(*rel.model(), map)
                .expect("sampled elements belong to the model");
            let inst = sample_instance(rule, &dom, &mut sampler.rng);
            let eval =
                |a: &Atom| air_satisfies_with(rel, &s, a).expect("fuzz atoms lie in the domain");
            let held = inst.premises.iter().all(eval);
            report.record(rule, held);
            if held && !eval(&inst.conclusion) {
                report.violations.push(Violation {
                    rule,
                    premises: inst.premises,
                    conclusion: inst.conclusion,
                    witness: s.to_string(),
                });
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// The minimal atom shares a variable between its sides.
    Case1,
    /// The minimal atom has disjoint sides.
    Case2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomCheck {
    pub atom: Atom,
    pub holds: bool,
}

/// An assignment satisfying every atom of `satisfied` and refuting
/// `refuted`, with the data of the construction that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub assignment: AirAssignment,
    pub refuted: Atom,
    pub satisfied: AtomSet,
    pub case: Case,
    /// Non-derivable sub-atom of the goal all of whose one-variable
    /// deletions are derivable.
    pub minimal: Atom,
    /// Variables `v` with `Σ ⊢ v ⊥ v`.
    pub algebraic: VarSet,
    /// The remaining variables.
    pub free: VarSet,
    /// Results of the final verification, Σ first and the goal last.
    pub checks: Vec<AtomCheck>,
}

impl Counterexample {
    pub fn to_json(&self) -> Value {
        json!({
            "model": self.assignment.model.to_string(),
            "assignment": self.assignment.to_json()["map"],
            "case": format!("{:?}", self.case),
            "minimal_atom": self.minimal.to_string(),
            "refuted": self.refuted.to_string(),
            "partition": {
                "algebraic": self.algebraic.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                "free": self.free.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            },
            "verification": self.checks.iter().map(|c| json!({
                "atom": c.atom.to_string(),
                "holds": c.holds,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Builds a vector-space assignment satisfying `sigma` and refuting `goal`.
/// Fails with [`Error::GoalDerivable`] when `sigma ⊢ goal`.
pub fn synthesize_counterexample(sigma: &AtomSet, goal: &Atom) -> Result<Counterexample> {
    if !goal.is_marginal() {
        return Err(Error::ConditionalInMarginal(goal.clone()));
    }
    let closure = MarginalClosure::new(sigma, &goal.vars())?;
    synthesize_with_closure(&closure, sigma, goal)
}

/// As [`synthesize_counterexample`], reusing a saturation of `sigma` whose
/// universe covers the goal.
pub fn synthesize_with_closure(
    closure: &MarginalClosure,
    sigma: &AtomSet,
    goal: &Atom,
) -> Result<Counterexample> {
    if !goal.vars().is_subset(closure.universe()) {
        return Err(Error::Invalid(format!(
            "closure universe does not cover `{goal}`"
        )));
    }
    let minimal = closure.minimal_nonderivable(goal)?;
    let algebraic = closure.algebraic_vars();
    let free: VarSet = closure.universe().difference(&algebraic).cloned().collect();
    let (x, y) = (minimal.left(), minimal.right());
    let mut map: BTreeMap<Variable, Vector> = BTreeMap::new();
    let (model, case) = match x.intersection(y).next() {
        Some(z) => {
            let model = ClosureModel::vector_space(1);
            map.insert(z.clone(), model.basis(0));
            (model, Case::Case1)
        }
        None => {
            let mut xs = x.iter();
            let x0 = xs.next().ok_or_else(|| {
                Error::Internal(format!("minimal atom `{minimal}` has an empty side"))
            })?;
            let ws: Vec<&Variable> = xs.chain(y.iter()).collect();
            if ws.is_empty() {
                return Err(Error::Internal(format!(
                    "minimal atom `{minimal}` has an empty side"
                )));
            }
            let model = ClosureModel::vector_space(ws.len());
            for (i, w) in ws.iter().enumerate() {
                map.insert((*w).clone(), model.basis(i));
            }
            map.insert(x0.clone(), Vector::ones_prefix(model.dim(), ws.len()));
            (model, Case::Case2)
        }
    };
    for v in closure.universe() {
        map.entry(v.clone()).or_insert_with(|| model.zero());
    }
    let assignment = AirAssignment::new(model, map)?;
    let mut checks = Vec::with_capacity(sigma.len() + 1);
    for a in sigma.iter().chain(std::iter::once(goal)) {
        checks.push(AtomCheck {
            atom: a.clone(),
            holds: air_satisfies(&assignment, a)?,
        });
    }
    let (goal_check, sigma_checks) = checks.split_last().expect("goal check present");
    if let Some(bad) = sigma_checks.iter().find(|c| !c.holds) {
        return Err(Error::Internal(format!(
            "synthesized assignment violates `{}`",
            bad.atom
        )));
    }
    if goal_check.holds {
        return Err(Error::Internal(format!(
            "synthesized assignment satisfies `{goal}`"
        )));
    }
    Ok(Counterexample {
        assignment,
        refuted: goal.clone(),
        satisfied: sigma.clone(),
        case,
        minimal,
        algebraic,
        free,
        checks,
    })
}

/// A non-entailment together with a verified refuting assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub sigma: AtomSet,
    pub goal: Atom,
    pub assignment: AirAssignment,
}

impl Fixture {
    fn verified(sigma: AtomSet, goal: Atom, assignment: AirAssignment) -> Result<Fixture> {
        for a in sigma.iter() {
            if !air_satisfies(&assignment, a)? {
                return Err(Error::Internal(format!(
                    "fixture assignment violates `{a}`"
                )));
            }
        }
        if air_satisfies(&assignment, &goal)? {
            return Err(Error::Internal(format!(
                "fixture assignment satisfies `{goal}`"
            )));
        }
        Ok(Fixture {
            sigma,
            goal,
            assignment,
        })
    }
}

/// The instance over `x0..x{n-1}, y` whose refutation needs a federated
/// sequence of length `n`:
/// `Σ = {x0..x{i-1} ⊥ xi} ∪ {x0..x{n-1} without xi ⊥ y}` for `i < n`, goal
/// `x0..x{n-1} ⊥ y`, refuted in ℚⁿ by `s(xi) = ei`, `s(y) = (1, .., 1)`.
pub fn build_federation_gap_instance(n: usize) -> Result<Fixture> {
    if n < 2 {
        return Err(Error::Invalid(format!(
            "gap instances need n >= 2, got {n}"
        )));
    }
    let xs: Vec<Variable> = (0..n)
        .map(|i| Variable::new(format!("x{i}")).expect("valid name"))
        .collect();
    let y = Variable::new("y").expect("valid name");
    let mut sigma = AtomSet::default();
    for i in 0..n {
        sigma.insert(Atom::marginal(xs[..i].iter().cloned(), [xs[i].clone()]));
        let rest = xs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| v.clone());
        sigma.insert(Atom::marginal(rest, [y.clone()]));
    }
    let goal = Atom::marginal(xs.iter().cloned(), [y.clone()]);
    let model = ClosureModel::vector_space(n);
    let mut map: BTreeMap<Variable, Vector> = xs
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), model.basis(i)))
        .collect();
    map.insert(y, Vector::ones_prefix(n, n));
    let fixture = Fixture::verified(sigma, goal, AirAssignment::new(model, map)?)?;
    if derives_goal(&fixture)? {
        return Err(Error::Internal(format!(
            "gap instance goal `{}` is derivable",
            fixture.goal
        )));
    }
    Ok(fixture)
}

/// `x ⊥ x` does not entail `y ⊥ z` once an algebraic point exists: in ℚ¹,
/// `s(x) = 0`, `s(y) = 1`, `s(z) = 2`.
pub fn algebraic_point_fixture() -> Result<Fixture> {
    let [x, y, z] = ["x", "y", "z"].map(|n| Variable::new(n).expect("valid name"));
    let sigma = AtomSet::new([Atom::marginal([x.clone()], [x.clone()])]);
    let goal = Atom::marginal([y.clone()], [z.clone()]);
    let map = BTreeMap::from([
        (x, Vector::from_ints([0])),
        (y, Vector::from_ints([1])),
        (z, Vector::from_ints([2])),
    ]);
    let fixture = Fixture::verified(
        sigma,
        goal,
        AirAssignment::new(ClosureModel::vector_space(1), map)?,
    )?;
    if derives_goal(&fixture)? {
        return Err(Error::Internal(format!(
            "fixture goal `{}` is derivable",
            fixture.goal
        )));
    }
    Ok(fixture)
}

fn derives_goal(f: &Fixture) -> Result<bool> {
    Ok(crate::calculus::derives_marginal(&f.sigma, &f.goal)?.is_derived())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::parse_atom;
    use crate::calculus::{derives_marginal, Rule};
    use crate::pregeom::{AsymmetricIndependence, Rational};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    fn sigma(atoms: &[&str]) -> AtomSet {
        AtomSet::new(atoms.iter().map(|s| atom(s)))
    }

    fn assign(dim: usize, pairs: &[(&str, &[i64])]) -> AirAssignment {
        let map = pairs
            .iter()
            .map(|(k, v)| {
                (
                    Variable::new(*k).unwrap(),
                    Vector::from_ints(v.iter().copied()),
                )
            })
            .collect();
        AirAssignment::new(ClosureModel::vector_space(dim), map).unwrap()
    }

    fn image(c: &Counterexample, v: &str) -> Vector {
        c.assignment
            .get(&Variable::new(v).unwrap())
            .unwrap()
            .clone()
    }

    #[test]
    fn satisfaction_examples() {
        let s = assign(2, &[("x", &[1, 0]), ("y", &[0, 1])]);
        assert!(air_satisfies(&s, &atom("x _|_ y")).unwrap());
        let s = assign(2, &[("x", &[0, 0])]);
        assert!(air_satisfies(&s, &atom("x _|_ x")).unwrap());
        let s = assign(2, &[("x", &[1, 0]), ("y", &[1, 1]), ("z", &[0, 1])]);
        assert!(!air_satisfies(&s, &atom("x _|_{z} y")).unwrap());
        assert!(matches!(
            air_satisfies(&s, &atom("x _|_ w")),
            Err(Error::UnboundVariable(v)) if v == "w"
        ));
    }

    #[test]
    fn case_two_single_dimension() {
        let c = synthesize_counterexample(&sigma(&["x _|_ y"]), &atom("x _|_ z")).unwrap();
        assert_eq!(c.case, Case::Case2);
        assert_eq!(c.assignment.model(), &ClosureModel::vector_space(1));
        assert_eq!(image(&c, "z"), Vector::from_ints([1]));
        assert_eq!(image(&c, "x"), Vector::from_ints([1]));
        assert_eq!(image(&c, "y"), Vector::from_ints([0]));
    }

    #[test]
    fn case_one_for_an_empty_sigma() {
        let c = synthesize_counterexample(&AtomSet::default(), &atom("x _|_ x")).unwrap();
        assert_eq!(c.case, Case::Case1);
        assert_eq!(image(&c, "x"), Vector::from_ints([1]));
        let c = synthesize_counterexample(&sigma(&["y _|_ y"]), &atom("x,y _|_ x")).unwrap();
        assert_eq!(c.case, Case::Case1);
        assert_eq!(c.minimal, atom("x _|_ x"));
        assert_eq!(image(&c, "y"), Vector::from_ints([0]));
        assert_eq!(c.algebraic.len(), 1);
    }

    #[test]
    fn case_two_with_two_dimensions() {
        let c = synthesize_counterexample(
            &sigma(&["x0 _|_ x1", "x1 _|_ y", "x0 _|_ y"]),
            &atom("x0,x1 _|_ y"),
        )
        .unwrap();
        assert_eq!(c.case, Case::Case2);
        assert_eq!(image(&c, "x1"), Vector::from_ints([1, 0]));
        assert_eq!(image(&c, "y"), Vector::from_ints([0, 1]));
        assert_eq!(image(&c, "x0"), Vector::from_ints([1, 1]));
        let j = c.to_json();
        assert_eq!(j["case"], "Case2");
        assert_eq!(j["model"], "vspace:Q:2");
        assert_eq!(j["assignment"]["x0"], "[1, 1]");
        assert_eq!(j["verification"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn derivable_goals_are_rejected() {
        let err = synthesize_counterexample(&sigma(&["x _|_ y,z"]), &atom("z _|_ x")).unwrap_err();
        assert!(matches!(err, Error::GoalDerivable(_)));
        assert!(matches!(
            synthesize_counterexample(&AtomSet::default(), &atom("x _|_{y} z")),
            Err(Error::ConditionalInMarginal(_))
        ));
    }

    #[test]
    fn gap_instances() {
        let f = build_federation_gap_instance(2).unwrap();
        assert_eq!(
            f.sigma,
            sigma(&["() _|_ x0", "x0 _|_ x1", "x1 _|_ y", "x0 _|_ y"])
        );
        assert_eq!(f.goal, atom("x0,x1 _|_ y"));
        let f = build_federation_gap_instance(3).unwrap();
        assert_eq!(f.sigma.len(), 6);
        assert_eq!(
            f.assignment.get(&Variable::new("y").unwrap()).unwrap(),
            &Vector::from_ints([1, 1, 1])
        );
        for n in 2..=6 {
            build_federation_gap_instance(n).unwrap();
        }
        assert!(build_federation_gap_instance(1).is_err());
    }

    #[test]
    fn algebraic_point() {
        let f = algebraic_point_fixture().unwrap();
        assert_eq!(f.goal, atom("y _|_ z"));
    }

    #[test]
    fn rules_are_sound_in_vector_spaces() {
        for family in [RuleFamily::Marginal, RuleFamily::Conditional] {
            for model in [ClosureModel::vector_space(3), ClosureModel::lattice(2)] {
                let r = soundness_fuzz(family, &model, 300, 7);
                assert!(r.is_sound(), "{:?}", r.violations.first());
                assert!(
                    r.per_rule.values().all(|s| s.premises_held > 0),
                    "{:?}",
                    r.per_rule
                );
            }
        }
    }

    #[test]
    fn asymmetric_relation_is_caught_by_symmetry_rule() {
        let rel = AsymmetricIndependence(ClosureModel::vector_space(3));
        let r = relation_soundness_fuzz(RuleFamily::Marginal, &rel, 300, 1);
        assert!(r.violations.iter().any(|v| v.rule == Rule::B3));
    }

    fn random_sigma(rng: &mut ChaCha8Rng, names: &[&str]) -> (AtomSet, Atom) {
        let vs = crate::atoms::vars(names.iter().copied());
        let side = |rng: &mut ChaCha8Rng| -> VarSet {
            let s: VarSet = vs.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
            if s.is_empty() {
                [vs[rng.gen_range(0..vs.len())].clone()].into()
            } else {
                s
            }
        };
        let k = rng.gen_range(0..=3);
        let mut atoms = Vec::new();
        for _ in 0..k {
            let (l, r) = (side(rng), side(rng));
            atoms.push(Atom::marginal(l, r));
        }
        let (l, r) = (side(rng), side(rng));
        (AtomSet::new(atoms), Atom::marginal(l, r))
    }

    #[test]
    fn synthesis_succeeds_exactly_on_non_derivable_goals() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut refuted = 0;
        for _ in 0..300 {
            let (s, g) = random_sigma(&mut rng, &["a", "b", "c", "d"]);
            let derived = derives_marginal(&s, &g).unwrap().is_derived();
            match synthesize_counterexample(&s, &g) {
                Ok(c) => {
                    assert!(!derived);
                    assert!(c.checks.iter().rev().skip(1).all(|c| c.holds));
                    refuted += 1;
                }
                Err(Error::GoalDerivable(_)) => assert!(derived),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(refuted > 50);
    }

    proptest! {
        #[test]
        fn derived_goals_hold_in_sampled_models(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (s, g) = random_sigma(&mut rng, &["a", "b", "c"]);
            prop_assume!(derives_marginal(&s, &g).unwrap().is_derived());
            let model = ClosureModel::vector_space(2);
            let mut sampler = Sampler::new(model, seed);
            for _ in 0..20 {
                sampler.reset();
                let map = s.universe().iter().chain(g.vars().iter()).map(|v| (v.clone(), sampler.element())).collect();
                let asg = AirAssignment::new(model, map).unwrap();
                if s.iter().all(|a| air_satisfies(&asg, a).unwrap()) {
                    prop_assert!(air_satisfies(&asg, &g).unwrap());
                }
            }
        }

        #[test]
        fn zero_images_are_independent_of_everything(k in 0i64..4, dim in 1usize..4) {
            let model = ClosureModel::vector_space(dim);
            let v = model.basis(0).scale(&Rational::from_integer(k.into()));
            let map = BTreeMap::from([
                (Variable::new("x").unwrap(), model.zero()),
                (Variable::new("y").unwrap(), v),
            ]);
            let s = AirAssignment::new(model, map).unwrap();
            prop_assert!(air_satisfies(&s, &atom("x _|_ y")).unwrap());
            prop_assert!(air_satisfies(&s, &atom("x _|_ x")).unwrap());
            prop_assert_eq!(air_satisfies(&s, &atom("y _|_ y")).unwrap(), k == 0);
        }
    }
}
