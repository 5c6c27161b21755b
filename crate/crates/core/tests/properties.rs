//! Property tests: the algebraic laws hold on mechanically generated inputs,
//! not just on the structured corpora the suites use.

use monorel::fitz::{fitzpatrick, ExtendedScalar, PartialQuadratic};
use monorel::l2exact::{
    gap_eval, inner_exact, rational, s_apply, seq_sum, sstar_apply, FinSeq, Rational,
};
use monorel::linrel::{weighted_adjoint_matrix, LinearRelation};
use monorel::space::{HilbertContext, Subspace, Vector, RANK_TOL};
use nalgebra::{DMatrix, DVector};
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::Arc;

const TOL: f64 = 1e-8;

fn ctx_strategy() -> impl Strategy<Value = Arc<HilbertContext>> {
    (2usize..=4, prop::collection::vec(prop::sample::select(vec![0.5, 1.0, 2.0, 3.0]), 4))
        .prop_map(|(n, w)| HilbertContext::new(&w[..n]).unwrap())
}

fn graph_relation_strategy() -> impl Strategy<Value = LinearRelation> {
    (ctx_strategy(), 1usize..=5, prop::collection::vec(-3.0..3.0f64, 8 * 5))
        .prop_map(|(ctx, d, entries)| {
            let n2 = 2 * ctx.dim();
            let cols: Vec<Vector> = (0..d.min(n2))
                .map(|j| {
                    let chunk = &entries[j * n2..(j + 1) * n2];
                    Vector::new(&ctx.power(2), chunk.to_vec()).unwrap()
                })
                .collect();
            let graph = Subspace::orthonormalize(&ctx.power(2), &cols, RANK_TOL).unwrap();
            LinearRelation::from_graph(&ctx, graph).unwrap()
        })
        .prop_filter("nontrivial graph", |rel| rel.rank() > 0)
}

fn monotone_matrix_strategy() -> impl Strategy<Value = (Arc<HilbertContext>, DMatrix<f64>)> {
    (ctx_strategy(), prop::collection::vec(-2.0..2.0f64, 2 * 4 * 4)).prop_map(|(ctx, e)| {
        let n = ctx.dim();
        let g = DMatrix::from_fn(n, n, |i, j| e[i * n + j]);
        let r = DMatrix::from_fn(n, n, |i, j| e[16 + i * n + j]);
        let wm = g.transpose() * &g / n as f64 + (&r - r.transpose());
        let mut m = wm;
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] /= ctx.weights()[i];
            }
        }
        (ctx, m)
    })
}

fn rational_seq_strategy() -> impl Strategy<Value = FinSeq> {
    prop::collection::vec((-12i64..=12, 1i64..=6), 1..=8)
        .prop_map(|pairs| FinSeq::new(pairs.into_iter().map(|(p, q)| rational(p, q)).collect()))
}

fn zero_sum_seq_strategy() -> impl Strategy<Value = FinSeq> {
    rational_seq_strategy().prop_map(|y| {
        let mut entries = y.entries().to_vec();
        let balance = -seq_sum(&y);
        entries.push(balance);
        FinSeq::new(entries)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn adjoint_laws_hold_on_arbitrary_graphs(rel in graph_relation_strategy()) {
        let adj = rel.adjoint();
        prop_assert!(adj.adjoint().graph_equals(&rel, TOL).unwrap());
        prop_assert_eq!(rel.rank() + adj.rank(), 2 * rel.base().dim());
        prop_assert!(rel
            .inverse()
            .adjoint()
            .graph_equals(&adj.inverse(), TOL)
            .unwrap());
        prop_assert_eq!(
            rel.rank(),
            rel.domain().rank() + rel.multivalued_directions().rank()
        );
    }

    #[test]
    fn scaling_commutes_with_the_adjoint(
        rel in graph_relation_strategy(),
        k in (-3.0..3.0f64).prop_filter("away from zero", |k| k.abs() >= 0.1),
    ) {
        prop_assert!(rel
            .scale(k)
            .unwrap()
            .adjoint()
            .graph_equals(&rel.adjoint().scale(k).unwrap(), TOL)
            .unwrap());
        prop_assert!(rel
            .negate()
            .adjoint()
            .graph_equals(&rel.adjoint().negate(), TOL)
            .unwrap());
    }

    #[test]
    fn matrix_adjoint_is_the_weighted_transpose(
        (ctx, m) in monotone_matrix_strategy(),
    ) {
        let rel = LinearRelation::from_matrix(&ctx, &m, None).unwrap();
        let direct = LinearRelation::from_matrix(&ctx, &weighted_adjoint_matrix(&ctx, &m), None)
            .unwrap();
        prop_assert!(rel.adjoint().graph_equals(&direct, TOL).unwrap());
    }

    #[test]
    fn graph_points_realize_the_coupling(
        (ctx, m) in monotone_matrix_strategy(),
        raw in prop::collection::vec(-2.0..2.0f64, 4),
    ) {
        let rel = LinearRelation::from_matrix(&ctx, &m, None).unwrap();
        let f = fitzpatrick(&rel);
        let n = ctx.dim();
        let x = DVector::from_fn(n, |i, _| raw[i]);
        let mx = &m * &x;
        let pairing = ctx.weights().dot(&x.component_mul(&mx));
        let mut z = x.as_slice().to_vec();
        z.extend(mx.as_slice());
        let z = Vector::new(&ctx.power(2), z).unwrap();
        match f.evaluate(&z, 1e-6).unwrap() {
            ExtendedScalar::Finite(v) => {
                prop_assert!((v - pairing).abs() <= 1e-7 * (1.0 + pairing.abs()))
            }
            other => prop_assert!(false, "graph point evaluated to {:?}", other),
        }
    }

    #[test]
    fn biconjugation_is_the_identity_on_proper_quadratics(
        ctx in ctx_strategy(),
        entries in prop::collection::vec(-2.0..2.0f64, 4 * 4 + 2 * 4),
        k in 1usize..=4,
    ) {
        let n = ctx.dim();
        let g = DMatrix::from_fn(n, n, |i, j| entries[i * n + j]);
        let a = g.transpose() * &g;
        let origin = DVector::from_fn(n, |i, _| entries[16 + i]);
        let b = DVector::from_fn(n, |i, _| entries[16 + 4 + i]);
        let cols: Vec<Vector> = (0..k.min(n))
            .map(|j| {
                let coords: Vec<f64> = (0..n).map(|i| entries[(i + j) % entries.len()] + if i == j { 1.0 } else { 0.0 }).collect();
                Vector::new(&ctx, coords).unwrap()
            })
            .collect();
        let dirs = Subspace::orthonormalize(&ctx, &cols, RANK_TOL).unwrap();
        prop_assume!(dirs.rank() > 0);
        let f = PartialQuadratic::from_ambient(&ctx, &origin, &dirs, &a, &b, 0.7).unwrap();
        prop_assert!(f.conjugate().unwrap().conjugate().unwrap().equals(&f, 1e-7).unwrap());
    }

    #[test]
    fn subspace_complement_is_an_involution(
        ctx in ctx_strategy(),
        entries in prop::collection::vec(-3.0..3.0f64, 3 * 4),
        d in 1usize..=3,
    ) {
        let n = ctx.dim();
        let cols: Vec<Vector> = (0..d.min(n))
            .map(|j| Vector::new(&ctx, entries[j * n..(j + 1) * n].to_vec()).unwrap())
            .collect();
        let s = Subspace::orthonormalize(&ctx, &cols, RANK_TOL).unwrap();
        let c = s.complement();
        prop_assert_eq!(s.rank() + c.rank(), n);
        prop_assert!(c.complement().equals(&s, TOL).unwrap());
        for i in 0..s.rank() {
            for j in 0..c.rank() {
                prop_assert!(s.basis_vector(i).inner(&c.basis_vector(j)).unwrap().abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn stack_and_split_are_inverse(
        ctx in ctx_strategy(),
        entries in prop::collection::vec(-3.0..3.0f64, 2 * 4),
    ) {
        let n = ctx.dim();
        let x = Vector::new(&ctx, entries[..n].to_vec()).unwrap();
        let y = Vector::new(&ctx, entries[n..2 * n].to_vec()).unwrap();
        let z = x.stack(&y, &ctx.power(2)).unwrap();
        let (back_x, back_y) = z.split(&ctx).unwrap();
        prop_assert!(back_x.sub(&x).unwrap().norm() == 0.0);
        prop_assert!(back_y.sub(&y).unwrap().norm() == 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn adjoint_quadratic_identity_is_exact(y in rational_seq_strategy()) {
        let s = seq_sum(&y);
        prop_assert_eq!(inner_exact(&sstar_apply(&y), &y), rational(1, 2) * &s * &s);
    }

    #[test]
    fn skewness_and_restriction_are_exact_on_the_zero_sum_domain(y in zero_sum_seq_strategy()) {
        let sy = s_apply(&y).unwrap();
        prop_assert!(inner_exact(&sy, &y).is_zero());
        prop_assert_eq!(sstar_apply(&y), sy.negate());
    }

    #[test]
    fn the_gap_is_strict_exactly_off_the_zero_sum_domain(y in rational_seq_strategy()) {
        let gap = gap_eval(&y);
        prop_assert_eq!(gap.strict_gap(), !seq_sum(&y).is_zero());
        if let monorel::l2exact::ExactValue::Finite(lhs) = &gap.lhs {
            prop_assert!(lhs >= &Rational::zero());
        }
    }
}
