//! Built-in fixtures replayed by `indep demo`.

use indep_core::atoms::parse_atom_list;
use indep_core::calculus::{minimal_nonderivable, RuleFamily};
use indep_core::pregeom::{
    axiom_suite, federation_index_lower_bound, first_projection, hyttinen_chain,
    relation_axiom_suite, sum_combiner, Axiom, ClosureModel, ElementwiseIndependence, Vector,
};
use indep_core::synth::{
    algebraic_point_fixture, build_federation_gap_instance, soundness_fuzz, Case,
};
use indep_core::teams::find_counterexample_team;
use indep_core::{
    derives_conditional, derives_marginal, parse_atom, synthesize_counterexample, AtomSet, Error,
    SearchBounds, Variable, Verdict,
};

pub struct FixtureResult {
    pub name: String,
    pub error: Option<String>,
}

type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn sigma(text: &str) -> AtomSet {
    AtomSet::new(parse_atom_list(text).expect("fixture atoms parse"))
}

fn atom(text: &str) -> indep_core::Atom {
    parse_atom(text).expect("fixture atom parses")
}

fn e(err: Error) -> String {
    err.to_string()
}

fn derive_d3() -> Check {
    let v = derives_marginal(&sigma("x _|_ y; x,y _|_ z"), &atom("x _|_ y,z")).map_err(e)?;
    let p = v.proof().ok_or("not derived")?;
    ensure(p.len() == 3, format!("expected 3 steps, got {}", p.len()))?;
    ensure(p.to_string().ends_with("[D3 1 2]\n"), "last step is not D3")
}

fn derive_a3() -> Check {
    let v = derives_marginal(&AtomSet::default(), &atom("x _|_ ()")).map_err(e)?;
    ensure(
        v.proof().is_some_and(|p| p.len() == 1),
        "expected a one-step A3 proof",
    )
}

fn not_derivable() -> Check {
    let v = derives_marginal(&sigma("x _|_ y"), &atom("x _|_ z")).map_err(e)?;
    ensure(
        v == Verdict::NotDerivable,
        "x _|_ z should not be derivable",
    )
}

fn minimal_atoms() -> Check {
    let m = minimal_nonderivable(&AtomSet::default(), &atom("x,y _|_ z")).map_err(e)?;
    ensure(m == atom("y _|_ z"), format!("got {m}"))
}

fn conditional_f5() -> Check {
    let v = derives_conditional(&sigma("y _|_{z} y; z,x _|_{y} u"), &atom("x _|_{z} u"), 2)
        .map_err(e)?;
    ensure(v.is_derived(), "x _|_{z} u not derived within 2 rounds")
}

fn conditional_unknown() -> Check {
    let s = sigma("x _|_{z} y");
    let g = atom("x _|_{w} y");
    let v = derives_conditional(&s, &g, 3).map_err(e)?;
    ensure(
        matches!(v, Verdict::Unknown { depth: 3 }),
        "expected UNKNOWN",
    )?;
    ensure(
        find_counterexample_team(&s, &g, SearchBounds::default()).is_some(),
        "no refuting team found",
    )
}

fn team_search() -> Check {
    let t = find_counterexample_team(&sigma("x _|_ y"), &atom("x _|_ z"), SearchBounds::new(2, 4))
        .ok_or("no team found")?;
    ensure(
        t.len() == 2,
        format!("expected a 2-row team, got {}", t.len()),
    )?;
    ensure(
        find_counterexample_team(&sigma("x _|_ x"), &atom("x _|_ y"), SearchBounds::default())
            .is_none(),
        "x _|_ x should entail x _|_ y in teams",
    )
}

fn image(c: &indep_core::Counterexample, v: &str) -> Vector {
    c.assignment
        .get(&Variable::new(v).expect("valid name"))
        .expect("bound")
        .clone()
}

fn synth_case2_k1() -> Check {
    let c = synthesize_counterexample(&sigma("x _|_ y"), &atom("x _|_ z")).map_err(e)?;
    ensure(c.case == Case::Case2, "expected Case2")?;
    ensure(
        image(&c, "x") == Vector::from_ints([1])
            && image(&c, "z") == Vector::from_ints([1])
            && image(&c, "y") == Vector::from_ints([0]),
        "unexpected assignment",
    )
}

fn synth_case1() -> Check {
    let c = synthesize_counterexample(&AtomSet::default(), &atom("x _|_ x")).map_err(e)?;
    ensure(c.case == Case::Case1, "expected Case1")
}

fn synth_case2_k2() -> Check {
    let c = synthesize_counterexample(
        &sigma("x0 _|_ x1; x1 _|_ y; x0 _|_ y"),
        &atom("x0,x1 _|_ y"),
    )
    .map_err(e)?;
    ensure(
        image(&c, "x0") == Vector::from_ints([1, 1])
            && image(&c, "x1") == Vector::from_ints([1, 0])
            && image(&c, "y") == Vector::from_ints([0, 1]),
        "unexpected assignment",
    )
}

fn synth_rejects_derivable() -> Check {
    match synthesize_counterexample(&sigma("x _|_ y; x,y _|_ z"), &atom("x _|_ y,z")) {
        Err(Error::GoalDerivable(_)) => Ok(()),
        other => Err(format!("expected a derivable-goal error, got {other:?}")),
    }
}

fn gap_instances() -> Check {
    for n in 2..=6 {
        build_federation_gap_instance(n).map_err(|err| format!("n={n}: {err}"))?;
    }
    Ok(())
}

fn algebraic_point() -> Check {
    algebraic_point_fixture().map(|_| ()).map_err(e)
}

fn federation_bounds() -> Check {
    for (model, n) in [
        (ClosureModel::vector_space(4), 3),
        (ClosureModel::lattice(2), 2),
        (ClosureModel::vector_space(1), 1),
    ] {
        let b = federation_index_lower_bound(&model, n).map_err(e)?;
        let last = Vector::ones_prefix(model.dim(), n);
        ensure(
            b.witnesses.last() == Some(&last),
            format!("{model}: wrong witness"),
        )?;
    }
    Ok(())
}

fn chains() -> Check {
    let m = ClosureModel::vector_space(3);
    let ds: Vec<Vector> = (0..3).map(|i| m.basis(i)).collect();
    let r = hyttinen_chain(&m, &ds, &[], sum_combiner).map_err(e)?;
    ensure(r.federated_witness, "sum chain is not federated")?;
    match hyttinen_chain(&m, &ds, &[], first_projection) {
        Err(Error::ChainStep { property: "ii", .. }) => Ok(()),
        other => Err(format!(
            "first projection should fail property ii, got {other:?}"
        )),
    }
}

fn axioms() -> Check {
    for m in [ClosureModel::vector_space(3), ClosureModel::lattice(2)] {
        let r = axiom_suite(&m, 0, 200);
        ensure(r.all_pass(), format!("{m}: {:?}", r.failures().next()))?;
    }
    let r = relation_axiom_suite(
        &ElementwiseIndependence(ClosureModel::vector_space(3)),
        0,
        500,
    );
    ensure(
        !r.result(Axiom::Exchange).is_some_and(|x| x.passed()),
        "elementwise relation passed Exchange",
    )
}

fn rule_soundness() -> Check {
    for family in [RuleFamily::Marginal, RuleFamily::Conditional] {
        let r = soundness_fuzz(family, &ClosureModel::vector_space(3), 200, 0);
        ensure(r.is_sound(), format!("{:?}", r.violations.first()))?;
    }
    Ok(())
}

pub fn run() -> Vec<FixtureResult> {
    let fixtures: [(&str, fn() -> Check); 18] = [
        ("derive: D3 instance with a 3-step proof", derive_d3),
        ("derive: A3 axiom", derive_a3),
        ("derive: x _|_ y does not give x _|_ z", not_derivable),
        ("derive: minimal non-derivable sub-atom", minimal_atoms),
        ("derive: conditional F5 instance", conditional_f5),
        (
            "derive: conditional query left unknown, refuted by a team",
            conditional_unknown,
        ),
        ("countermodel: team search", team_search),
        ("synth: case 2 in one dimension", synth_case2_k1),
        ("synth: case 1", synth_case1),
        ("synth: case 2 in two dimensions", synth_case2_k2),
        (
            "synth: derivable goals are rejected",
            synth_rejects_derivable,
        ),
        ("synth: federation gap instances n=2..6", gap_instances),
        ("synth: algebraic point fixture", algebraic_point),
        ("federation: index lower bounds", federation_bounds),
        ("hyttinen: sum accepted, first projection rejected", chains),
        (
            "axioms: rank relations pass, elementwise fails Exchange",
            axioms,
        ),
        (
            "soundness: rules hold in the rational model",
            rule_soundness,
        ),
        ("synth: output is stable", stable_output),
    ];
    fixtures
        .into_iter()
        .map(|(name, f)| FixtureResult {
            name: name.to_string(),
            error: f().err(),
        })
        .collect()
}

fn stable_output() -> Check {
    let s = sigma("x _|_ y");
    let g = atom("x _|_ z");
    let a = synthesize_counterexample(&s, &g).map_err(e)?.to_json();
    let b = synthesize_counterexample(&s, &g).map_err(e)?.to_json();
    ensure(a == b, "two runs differ")
}
