//! Exact closure models (ℚ^d under span, ℤ^d under pure closure), the
//! independence relation their rank function induces, an axiom harness and
//! federation checks.

mod axioms;
mod federation;
mod linalg;
mod model;

pub(crate) use axioms::Sampler;
pub use axioms::{axiom_suite, relation_axiom_suite, Axiom, AxiomReport, AxiomResult};
pub use federation::{
    check_federation_witness, federation_index_lower_bound, first_projection, hyttinen_chain,
    is_algebraic, is_independent_sequence, random_independent_sequence, sum_combiner, ChainReport,
    ChainStep, FederationBound,
};
pub use linalg::{rank_of, Matrix, Rational, Vector};
pub use model::{
    AsymmetricIndependence, CardinalityIndependence, ClosureModel, ElementwiseIndependence,
    IndependenceQuery, IndependenceRelation, ModelKind, RankIndependence,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn v(s: &str) -> Vector {
        s.parse().unwrap()
    }

    fn q2() -> ClosureModel {
        ClosureModel::vector_space(2)
    }

    #[test]
    fn descriptors() {
        assert_eq!(
            "vspace:Q:3".parse::<ClosureModel>().unwrap(),
            ClosureModel::vector_space(3)
        );
        assert_eq!(
            "lattice:Z:2".parse::<ClosureModel>().unwrap(),
            ClosureModel::lattice(2)
        );
        assert_eq!(ClosureModel::lattice(2).to_string(), "lattice:Z:2");
        for bad in ["vspace:Z:2", "vspace:Q", "lattice:Z:x", "vspace:Q:2:1"] {
            assert!(bad.parse::<ClosureModel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn rank_and_dimension_errors() {
        let m = ClosureModel::vector_space(3);
        assert_eq!(m.rank(&[m.basis(0), m.basis(1)]).unwrap(), 2);
        assert_eq!(m.rank(&[]).unwrap(), 0);
        assert!(matches!(
            m.rank(&[v("[1, 0]")]),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(
            ClosureModel::lattice(1).rank(&[v("[1/2]")]),
            Err(Error::NonIntegral(_))
        ));
    }

    #[test]
    fn closure_examples() {
        let z1 = ClosureModel::lattice(1);
        assert!(z1.in_closure(&v("[1]"), &[v("[2]")]).unwrap());
        assert!(!q2().in_closure(&v("[1, 1]"), &[v("[1, 0]")]).unwrap());
        assert!(q2().in_closure(&q2().zero(), &[]).unwrap());
        assert!(z1.in_closure(&z1.zero(), &[]).unwrap());
        let z2 = ClosureModel::lattice(2);
        assert!(z2.in_closure(&v("[1, 1]"), &[v("[3, 3]")]).unwrap());
        assert!(!z2.in_closure(&v("[1, 0]"), &[v("[3, 3]")]).unwrap());
    }

    #[test]
    fn indep_examples() {
        let m = q2();
        let (e0, e1) = (m.basis(0), m.basis(1));
        let q = |a: Vec<Vector>, b: Vec<Vector>, c: Vec<Vector>| {
            m.indep(&IndependenceQuery::new(a, b, c)).unwrap()
        };
        assert!(q(vec![e0.clone()], vec![e1.clone()], vec![]));
        assert!(!q(vec![e0.add(&e1)], vec![e0.clone(), e1.clone()], vec![]));
        assert!(q(vec![], vec![e0.clone(), e1.clone()], vec![e0.add(&e1)]));
    }

    #[test]
    fn sequence_examples() {
        let q3 = ClosureModel::vector_space(3);
        let (e0, e1, e2) = (q3.basis(0), q3.basis(1), q3.basis(2));
        assert!(is_independent_sequence(&q3, &[e0.clone(), e1.clone(), e2], &[]).unwrap());
        let (a, b) = (q2().basis(0), q2().basis(1));
        assert!(is_independent_sequence(&q2(), &[a.clone(), a.add(&b)], &[]).unwrap());
        assert!(
            !is_independent_sequence(&q3, &[e0.clone(), e1.clone(), e0.add(&e1)], &[]).unwrap()
        );
        assert!(matches!(
            is_independent_sequence(&q3, &[e0.clone(), e0], &[]),
            Err(Error::DuplicateElement(_))
        ));
    }

    #[test]
    fn algebraic_examples() {
        let m = q2();
        assert!(is_algebraic(&m, &[m.zero()], &[]).unwrap());
        assert!(!is_algebraic(&m, &[m.basis(0)], &[]).unwrap());
        let base = [m.basis(0).add(&m.basis(1)), m.basis(1)];
        assert!(is_algebraic(&m, &[m.basis(0)], &base).unwrap());
    }

    #[test]
    fn federation_examples() {
        let m = q2();
        let (e0, e1) = (m.basis(0), m.basis(1));
        let seq = [e0.clone(), e1.clone()];
        assert!(check_federation_witness(&m, &seq, &e0.add(&e1), &[]).unwrap());
        assert!(!check_federation_witness(&m, &seq, &e0, &[]).unwrap());
        assert!(check_federation_witness(&m, &[e0.clone()], &e0, &[]).unwrap());
        assert!(matches!(
            check_federation_witness(
                &m,
                &[
                    e0.clone(),
                    e0.clone().scale(&Rational::from_integer(2.into()))
                ],
                &e0,
                &[]
            ),
            Err(Error::NotIndependent(1))
        ));
    }

    #[test]
    fn federation_bounds() {
        let b = federation_index_lower_bound(&ClosureModel::vector_space(4), 3).unwrap();
        assert_eq!(
            b.seq,
            vec![v("[1, 0, 0, 0]"), v("[0, 1, 0, 0]"), v("[0, 0, 1, 0]")]
        );
        assert_eq!(
            b.witnesses,
            vec![v("[1, 0, 0, 0]"), v("[1, 1, 0, 0]"), v("[1, 1, 1, 0]")]
        );
        let b = federation_index_lower_bound(&ClosureModel::lattice(2), 2).unwrap();
        assert_eq!(b.witnesses[1], v("[1, 1]"));
        let b = federation_index_lower_bound(&ClosureModel::vector_space(1), 1).unwrap();
        assert_eq!(b.witnesses, vec![v("[1]")]);
        assert!(matches!(
            federation_index_lower_bound(&ClosureModel::vector_space(2), 3),
            Err(Error::LengthExceedsDimension { n: 3, dim: 2 })
        ));
    }

    #[test]
    fn chain_examples() {
        let m = q2();
        let r = hyttinen_chain(&m, &[m.basis(0), m.basis(1)], &[], sum_combiner).unwrap();
        assert_eq!(r.chain, vec![v("[1, 0]"), v("[1, 1]")]);
        assert!(r.federated_witness);
        let q3 = ClosureModel::vector_space(3);
        let ds: Vec<Vector> = (0..3).map(|i| q3.basis(i)).collect();
        let r = hyttinen_chain(&q3, &ds, &[], sum_combiner).unwrap();
        assert_eq!(r.chain.last().unwrap(), &v("[1, 1, 1]"));
        let err = hyttinen_chain(&m, &[m.basis(0), m.basis(1)], &[], first_projection).unwrap_err();
        assert!(
            matches!(
                err,
                Error::ChainStep {
                    step: 1,
                    property: "ii",
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn chain_over_a_nonempty_base() {
        let q4 = ClosureModel::vector_space(4);
        let base = [q4.basis(3)];
        let ds = [q4.basis(0).add(&q4.basis(3)), q4.basis(1), q4.basis(2)];
        let r = hyttinen_chain(&q4, &ds, &base, sum_combiner).unwrap();
        assert_eq!(r.steps.len(), 3);
        assert!(matches!(
            hyttinen_chain(&q4, &[q4.basis(3)], &base, sum_combiner),
            Err(Error::ChainStep {
                property: "federation",
                ..
            })
        ));
    }

    #[test]
    fn random_sequences_chain_with_the_sum_combiner() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for m in [ClosureModel::vector_space(4), ClosureModel::lattice(3)] {
            for len in 1..=m.dim() {
                let ds = random_independent_sequence(&m, len, &mut rng).unwrap();
                assert!(is_independent_sequence(&m, &ds, &[]).unwrap());
                assert_eq!(m.rank(&ds).unwrap(), len);
                assert!(
                    hyttinen_chain(&m, &ds, &[], sum_combiner)
                        .unwrap()
                        .federated_witness
                );
            }
        }
        assert!(random_independent_sequence(&ClosureModel::vector_space(2), 3, &mut rng).is_err());
    }

    #[test]
    fn suites_pass_for_rank_independence() {
        for m in [ClosureModel::vector_space(3), ClosureModel::lattice(2)] {
            let report = axiom_suite(&m, 5, 150);
            assert!(report.all_pass(), "{report}");
            assert!(
                report.results.iter().all(|r| r.premises_held > 0),
                "{report}"
            );
        }
    }

    #[test]
    fn elementwise_relation_breaks_exchange() {
        let rel = ElementwiseIndependence(ClosureModel::vector_space(3));
        let report = relation_axiom_suite(&rel, 1, 500);
        assert!(
            !report.result(Axiom::Exchange).unwrap().passed(),
            "{report}"
        );
        // the fixed witness: e0 ⊥ e1 and e0e1 ⊥ e0+e1 hold elementwise,
        // e0 ⊥ e1,e0+e1 does not
        let m = rel.model();
        let (e0, e1) = (m.basis(0), m.basis(1));
        let s = e0.add(&e1);
        assert!(rel.holds(&[e0.clone()], &[e1.clone()], &[]).unwrap());
        assert!(rel
            .holds(&[e0.clone(), e1.clone()], &[s.clone()], &[])
            .unwrap());
        assert!(!rel.holds(&[e0], &[e1, s], &[]).unwrap());
    }

    #[test]
    fn cardinality_relation_is_a_genuine_pre_independence_relation() {
        let rel = CardinalityIndependence(ClosureModel::vector_space(3));
        let report = relation_axiom_suite(&rel, 2, 300);
        assert!(report.all_pass(), "{report}");
    }

    #[test]
    fn asymmetric_relation_breaks_symmetry() {
        let rel = AsymmetricIndependence(ClosureModel::vector_space(3));
        let report = relation_axiom_suite(&rel, 3, 300);
        assert!(
            !report.result(Axiom::Symmetry).unwrap().passed(),
            "{report}"
        );
    }

    fn arb_int_vec(dim: usize) -> impl Strategy<Value = Vector> {
        prop::collection::vec(-2i64..=2, dim).prop_map(Vector::from_ints)
    }

    proptest! {
        #[test]
        fn whole_set_check_matches_all_subtuples(
            a in prop::collection::vec(arb_int_vec(3), 0..4),
            b in prop::collection::vec(arb_int_vec(3), 0..3),
            c in prop::collection::vec(arb_int_vec(3), 0..3),
        ) {
            let m = ClosureModel::vector_space(3);
            let whole = m.indep(&IndependenceQuery::new(a.clone(), b.clone(), c.clone())).unwrap();
            let every = (0u32..1 << a.len()).all(|mask| {
                let sub: Vec<Vector> = a.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, x)| x.clone()).collect();
                m.indep(&IndependenceQuery::new(sub, b.clone(), c.clone())).unwrap()
            });
            prop_assert_eq!(whole, every);
        }

        #[test]
        fn rank_is_submodular(
            a in prop::collection::vec(arb_int_vec(3), 0..4),
            b in prop::collection::vec(arb_int_vec(3), 0..4),
        ) {
            let m = ClosureModel::vector_space(3);
            let inter: Vec<Vector> = a.iter().filter(|x| b.contains(x)).cloned().collect();
            let ra = m.rank(&a).unwrap();
            let rb = m.rank(&b).unwrap();
            let ru = m.rank_union(&[&a, &b]).unwrap();
            let ri = m.rank(&inter).unwrap();
            prop_assert!(ru + ri <= ra + rb);
        }

        #[test]
        fn rank_invariant_under_invertible_maps(seed in 0u64..500, a in prop::collection::vec(arb_int_vec(3), 0..5)) {
            for m in [ClosureModel::vector_space(3), ClosureModel::lattice(3)] {
                let mut s = Sampler::new(m, seed);
                let f = s.automorphism();
                prop_assert!(f.is_invertible());
                if m.kind() == ModelKind::Lattice {
                    prop_assert!(f.is_unimodular());
                }
                let img: Vec<Vector> = a.iter().map(|x| f.apply(x)).collect();
                prop_assert_eq!(m.rank(&a).unwrap(), m.rank(&img).unwrap());
            }
        }
    }
}
