use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use indep_core::atoms::parse_atom_list;
use indep_core::calculus::MarginalClosure;
use indep_core::pregeom::{random_independent_sequence, ClosureModel};
use indep_core::synth::build_federation_gap_instance;
use indep_core::{
    derives_conditional, find_counterexample_team, parse_atom, synthesize_counterexample, AtomSet,
    SearchBounds, VarSet,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sigma(text: &str) -> AtomSet {
    AtomSet::new(parse_atom_list(text).unwrap())
}

fn marginal_closure(c: &mut Criterion) {
    let mut g = c.benchmark_group("marginal_closure");
    for n in [3, 5, 7] {
        let inst = build_federation_gap_instance(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n + 1), &inst.sigma, |b, s| {
            b.iter(|| MarginalClosure::new(black_box(s), &VarSet::default()).unwrap())
        });
    }
    g.finish();
}

fn conditional_closure(c: &mut Criterion) {
    let s = sigma("y _|_{z} y; z,x _|_{y} u; x _|_{u} w");
    let goal = parse_atom("x _|_{z} w").unwrap();
    let mut g = c.benchmark_group("conditional_closure");
    for depth in [2, 4] {
        g.bench_with_input(BenchmarkId::from_parameter(depth), &depth, |b, &d| {
            b.iter(|| derives_conditional(black_box(&s), &goal, d).unwrap())
        });
    }
    g.finish();
}

fn team_search(c: &mut Criterion) {
    let s = sigma("x _|_ y; y _|_ z");
    let goal = parse_atom("x _|_ y,z").unwrap();
    c.bench_function("team_search", |b| {
        b.iter(|| find_counterexample_team(black_box(&s), &goal, SearchBounds::new(3, 9)))
    });
}

fn synth(c: &mut Criterion) {
    let mut g = c.benchmark_group("synth");
    for n in [2, 4, 6] {
        let inst = build_federation_gap_instance(n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, i| {
            b.iter(|| synthesize_counterexample(black_box(&i.sigma), &i.goal).unwrap())
        });
    }
    g.finish();
}

fn rank(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank");
    for model in [ClosureModel::vector_space(6), ClosureModel::lattice(6)] {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let vs = random_independent_sequence(&model, 6, &mut rng).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(model), &vs, |b, vs| {
            b.iter(|| model.rank(black_box(vs)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    marginal_closure,
    conditional_closure,
    team_search,
    synth,
    rank
);
criterion_main!(benches);
