use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::linalg::{Matrix, Rational, Vector};
use super::model::{ClosureModel, IndependenceRelation, ModelKind, RankIndependence};

/// Laws checked by the harness: the pre-independence axioms, the two derived
/// forms of transitivity and exchange, and the pregeometry laws of the
/// closure operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Axiom {
    Invariance,
    Existence,
    Monotonicity,
    BaseMonotonicity,
    Symmetry,
    Transitivity,
    TransitivityIff,
    Normality,
    FiniteCharacter,
    AntiReflexivity,
    Exchange,
    ClosureExtensive,
    ClosureMonotone,
    ClosureIdempotent,
    ClosureExchange,
}

impl Axiom {
    pub const RELATION: [Axiom; 11] = [
        Axiom::Invariance,
        Axiom::Existence,
        Axiom::Monotonicity,
        Axiom::BaseMonotonicity,
        Axiom::Symmetry,
        Axiom::Transitivity,
        Axiom::TransitivityIff,
        Axiom::Normality,
        Axiom::FiniteCharacter,
        Axiom::AntiReflexivity,
        Axiom::Exchange,
    ];
    pub const CLOSURE: [Axiom; 4] = [
        Axiom::ClosureExtensive,
        Axiom::ClosureMonotone,
        Axiom::ClosureIdempotent,
        Axiom::ClosureExchange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::Invariance => "Invariance",
            Axiom::Existence => "Existence",
            Axiom::Monotonicity => "Monotonicity",
            Axiom::BaseMonotonicity => "Base Monotonicity",
            Axiom::Symmetry => "Symmetry",
            Axiom::Transitivity => "Transitivity",
            Axiom::TransitivityIff => "Transitivity (two-sided)",
            Axiom::Normality => "Normality",
            Axiom::FiniteCharacter => "Finite Character",
            Axiom::AntiReflexivity => "Anti-Reflexivity",
            Axiom::Exchange => "Exchange",
            Axiom::ClosureExtensive => "Closure extensivity",
            Axiom::ClosureMonotone => "Closure monotonicity",
            Axiom::ClosureIdempotent => "Closure idempotence",
            Axiom::ClosureExchange => "Closure exchange",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomResult {
    pub axiom: Axiom,
    pub trials: usize,
    /// Trials in which the hypotheses of the law held.
    pub premises_held: usize,
    /// First counterexample found, if any.
    pub witness: Option<String>,
}

impl AxiomResult {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    pub relation: String,
    pub model: ClosureModel,
    pub seed: u64,
    pub results: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(AxiomResult::passed)
    }

    pub fn result(&self, axiom: Axiom) -> Option<&AxiomResult> {
        self.results.iter().find(|r| r.axiom == axiom)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomResult> {
        self.results.iter().filter(|r| !r.passed())
    }
}

impl fmt::Display for AxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "relation {} on {} (seed {})",
            self.relation, self.model, self.seed
        )?;
        for r in &self.results {
            write!(
                f,
                "  {:<26} {} ({} trials, {} with premises)",
                r.axiom.name(),
                if r.passed() { "pass" } else { "FAIL" },
                r.trials,
                r.premises_held
            )?;
            if let Some(w) = &r.witness {
                write!(f, "\n    witness: {w}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Draws small element sets from a random low-rank subspace so that
/// dependencies are common.
pub(crate) struct Sampler {
    model: ClosureModel,
    pub(crate) rng: ChaCha8Rng,
    generators: Vec<Vector>,
}

impl Sampler {
    pub(crate) fn new(model: ClosureModel, seed: u64) -> Sampler {
        Sampler {
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            generators: Vec::new(),
        }
    }

    /// Picks a fresh random generating set for the next trial.
    pub(crate) fn reset(&mut self) {
        let d = self.model.dim();
        let count = self.rng.gen_range(1..=d.clamp(1, 3));
        let lattice = self.model.kind() == ModelKind::Lattice;
        self.generators = (0..count)
            .map(|_| {
                let mut g = Vector::from_ints((0..d).map(|_| self.rng.gen_range(-2..=2)));
                if lattice && self.rng.gen_bool(0.3) {
                    g = g.scale(&Rational::from_integer(2.into()));
                }
                g
            })
            .collect();
    }

    pub(crate) fn element(&mut self) -> Vector {
        let d = self.model.dim();
        match self.rng.gen_range(0..10) {
            0 => self.model.zero(),
            1 => self.model.basis(self.rng.gen_range(0..d.max(1))),
            _ => {
                let mut v = Vector::zero(d);
                for g in &self.generators {
                    let c = self.rng.gen_range(-2i64..=2);
                    v = v.add(&g.scale(&Rational::from_integer(c.into())));
                }
                if self.model.kind() == ModelKind::VectorSpace && self.rng.gen_bool(0.2) {
                    v = v.scale(&Rational::new(1.into(), 2.into()));
                }
                v
            }
        }
    }

    pub(crate) fn set(&mut self, max: usize) -> Vec<Vector> {
        let n = self.rng.gen_range(0..=max);
        (0..n).map(|_| self.element()).collect()
    }

    /// A random subset of `s`.
    pub(crate) fn subset(&mut self, s: &[Vector]) -> Vec<Vector> {
        s.iter()
            .filter(|_| self.rng.gen_bool(0.5))
            .cloned()
            .collect()
    }

    /// A random automorphism of the model: an invertible rational matrix
    /// for vector spaces, a product of elementary integer operations for
    /// lattices.
    pub(crate) fn automorphism(&mut self) -> Matrix {
        let d = self.model.dim();
        match self.model.kind() {
            ModelKind::VectorSpace => loop {
                let m = Matrix::new(
                    (0..d)
                        .map(|_| {
                            (0..d)
                                .map(|_| {
                                    Rational::new(
                                        self.rng.gen_range(-2i64..=2).into(),
                                        self.rng.gen_range(1i64..=2).into(),
                                    )
                                })
                                .collect()
                        })
                        .collect(),
                );
                if m.is_invertible() {
                    return m;
                }
            },
            ModelKind::Lattice => {
                let mut rows: Vec<Vec<Rational>> = Matrix::identity(d).rows().to_vec();
                for _ in 0..3 * d {
                    let i = self.rng.gen_range(0..d);
                    let j = self.rng.gen_range(0..d);
                    match self.rng.gen_range(0..3) {
                        0 if i != j => {
                            let k = Rational::from_integer(self.rng.gen_range(-2i64..=2).into());
                            let add: Vec<Rational> = rows[j].iter().map(|x| x * &k).collect();
                            for (x, a) in rows[i].iter_mut().zip(add) {
                                *x += a;
                            }
                        }
                        1 => rows.swap(i, j),
                        _ => {
                            for x in rows[i].iter_mut() {
                                *x = -x.clone();
                            }
                        }
                    }
                }
                Matrix::new(rows)
            }
        }
    }
}

fn show(s: &[Vector]) -> String {
    let items: Vec<String> = s.iter().map(Vector::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn cat(parts: &[&[Vector]]) -> Vec<Vector> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

/// Outcome of one trial: whether the hypotheses held, and a witness when the
/// conclusion failed.
type Trial = (bool, Option<String>);

fn check_relation(rel: &dyn IndependenceRelation, axiom: Axiom, s: &mut Sampler) -> Trial {
    let r = |a: &[Vector], b: &[Vector], c: &[Vector]| {
        rel.holds(a, b, c)
            .expect("sampled elements belong to the model")
    };
    let implies = |premise: bool, conclusion: bool, w: String| -> Trial {
        (premise, (premise && !conclusion).then_some(w))
    };
    match axiom {
        Axiom::Invariance => {
            let (a, b, c) = (s.set(3), s.set(3), s.set(2));
            let f = s.automorphism();
            let img = |x: &[Vector]| x.iter().map(|v| f.apply(v)).collect::<Vec<_>>();
            let before = r(&a, &b, &c);
            let after = r(&img(&a), &img(&b), &img(&c));
            let w = format!(
                "A={} B={} C={} f={:?}",
                show(&a),
                show(&b),
                show(&c),
                f.rows()
            );
            (true, (before != after).then_some(w))
        }
        Axiom::Existence => {
            let (a, b) = (s.set(3), s.set(3));
            implies(
                true,
                r(&a, &b, &a),
                format!("A={} B={}", show(&a), show(&b)),
            )
        }
        Axiom::Monotonicity => {
            let (a, b, c) = (s.set(3), s.set(3), s.set(2));
            let d = s.subset(&a);
            let w = format!(
                "A={} B={} C={} D={}",
                show(&a),
                show(&b),
                show(&c),
                show(&d)
            );
            implies(r(&a, &b, &c), r(&d, &b, &c), w)
        }
        Axiom::BaseMonotonicity => {
            let (a, b) = (s.set(3), s.set(4));
            let c = s.subset(&b);
            let d = s.subset(&c);
            let w = format!(
                "A={} B={} C={} D={}",
                show(&a),
                show(&b),
                show(&c),
                show(&d)
            );
            implies(r(&a, &b, &d), r(&a, &b, &c), w)
        }
        Axiom::Symmetry => {
            let (a, b, c) = (s.set(3), s.set(3), s.set(2));
            let w = format!("A={} B={} C={}", show(&a), show(&b), show(&c));
            implies(r(&a, &b, &c), r(&b, &a, &c), w)
        }
        Axiom::Transitivity => {
            let (a, b) = (s.set(3), s.set(4));
            let c = s.subset(&b);
            let d = s.subset(&c);
            let w = format!(
                "A={} B={} C={} D={}",
                show(&a),
                show(&b),
                show(&c),
                show(&d)
            );
            implies(r(&b, &a, &c) && r(&c, &a, &d), r(&b, &a, &d), w)
        }
        Axiom::TransitivityIff => {
            let (a, b, c, d) = (s.set(2), s.set(2), s.set(2), s.set(2));
            let left = r(&a, &b, &c) && r(&a, &d, &cat(&[&c, &b]));
            let right = r(&a, &cat(&[&b, &d]), &c);
            let w = format!(
                "A={} B={} C={} D={}",
                show(&a),
                show(&b),
                show(&c),
                show(&d)
            );
            (true, (left != right).then_some(w))
        }
        Axiom::Normality => {
            let (a, b, c) = (s.set(3), s.set(3), s.set(2));
            let w = format!("A={} B={} C={}", show(&a), show(&b), show(&c));
            implies(r(&a, &b, &c), r(&cat(&[&a, &c]), &b, &c), w)
        }
        Axiom::FiniteCharacter => {
            let (a, b, c) = (s.set(4), s.set(3), s.set(2));
            let all_subsets = (0u32..1 << a.len()).all(|m| {
                let sub: Vec<Vector> = a
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| m & (1 << i) != 0)
                    .map(|(_, v)| v.clone())
                    .collect();
                r(&sub, &b, &c)
            });
            let w = format!("A={} B={} C={}", show(&a), show(&b), show(&c));
            implies(all_subsets, r(&a, &b, &c), w)
        }
        Axiom::AntiReflexivity => {
            let (a, b, c) = (s.set(3), s.set(3), s.set(3));
            let w = format!("A={} B={} C={}", show(&a), show(&b), show(&c));
            implies(r(&a, &a, &b), r(&a, &c, &b), w)
        }
        Axiom::Exchange => {
            let (a, b, c, d) = (s.set(2), s.set(2), s.set(2), s.set(2));
            let w = format!(
                "A={} B={} C={} D={}",
                show(&a),
                show(&b),
                show(&c),
                show(&d)
            );
            implies(
                r(&a, &b, &d) && r(&cat(&[&a, &b]), &c, &d),
                r(&a, &cat(&[&b, &c]), &d),
                w,
            )
        }
        _ => unreachable!("closure laws are checked against the model"),
    }
}

fn check_closure(model: &ClosureModel, axiom: Axiom, s: &mut Sampler) -> Trial {
    let cl = |v: &Vector, set: &[Vector]| {
        model
            .in_closure(v, set)
            .expect("sampled elements belong to the model")
    };
    match axiom {
        Axiom::ClosureExtensive => {
            let set = s.set(4);
            let ok = set.iter().all(|v| cl(v, &set));
            (true, (!ok).then(|| format!("S={}", show(&set))))
        }
        Axiom::ClosureMonotone => {
            let t = s.set(4);
            let sub = s.subset(&t);
            let v = s.element();
            let w = format!("v={v} S={} T={}", show(&sub), show(&t));
            let premise = cl(&v, &sub);
            (premise, (premise && !cl(&v, &t)).then_some(w))
        }
        Axiom::ClosureIdempotent => {
            // elements of cl(S) added to S do not enlarge the closure
            let set = s.set(3);
            let extra: Vec<Vector> = (0..3)
                .map(|_| s.element())
                .filter(|e| cl(e, &set))
                .collect();
            let v = s.element();
            let bigger = cat(&[&set, &extra]);
            let premise = cl(&v, &bigger);
            let w = format!("v={v} S={} W={}", show(&set), show(&extra));
            (premise, (premise && !cl(&v, &set)).then_some(w))
        }
        Axiom::ClosureExchange => {
            let set = s.set(3);
            let (v, w) = (s.element(), s.element());
            let premise = cl(&v, &cat(&[&set, std::slice::from_ref(&w)])) && !cl(&v, &set);
            let witness = format!("v={v} w={w} S={}", show(&set));
            (
                premise,
                (premise && !cl(&w, &cat(&[&set, std::slice::from_ref(&v)]))).then_some(witness),
            )
        }
        _ => unreachable!("relation axioms are checked against a relation"),
    }
}

fn run<F>(
    axioms: &[Axiom],
    seed: u64,
    trials: usize,
    model: ClosureModel,
    mut check: F,
) -> Vec<AxiomResult>
where
    F: FnMut(Axiom, &mut Sampler) -> Trial,
{
    axioms
        .iter()
        .enumerate()
        .map(|(k, &axiom)| {
            let mut s = Sampler::new(
                model,
                seed ^ (k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let mut res = AxiomResult {
                axiom,
                trials,
                premises_held: 0,
                witness: None,
            };
            for _ in 0..trials {
                s.reset();
                let (held, witness) = check(axiom, &mut s);
                res.premises_held += held as usize;
                if res.witness.is_none() {
                    res.witness = witness;
                }
            }
            res
        })
        .collect()
}

/// Samples `trials` queries per law for an arbitrary relation.
pub fn relation_axiom_suite(
    rel: &dyn IndependenceRelation,
    seed: u64,
    trials: usize,
) -> AxiomReport {
    let model = *rel.model();
    AxiomReport {
        relation: rel.name().to_string(),
        model,
        seed,
        results: run(&Axiom::RELATION, seed, trials, model, |a, s| {
            check_relation(rel, a, s)
        }),
    }
}

/// The full harness for a closure model: every relation axiom for its rank
/// independence, plus the pregeometry laws of its closure operator.
pub fn axiom_suite(model: &ClosureModel, seed: u64, trials: usize) -> AxiomReport {
    let rel = RankIndependence(*model);
    let mut report = relation_axiom_suite(&rel, seed, trials);
    report
        .results
        .extend(run(&Axiom::CLOSURE, seed, trials, *model, |a, s| {
            check_closure(model, a, s)
        }));
    report
}
