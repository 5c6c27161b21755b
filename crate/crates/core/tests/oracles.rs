//! Independent oracles: the closed forms and conjugation machinery are
//! checked against derivative-free grid search and against defining
//! properties, sharing no intermediate math with the implementation.

mod common;

use common::{brute_force_fitzpatrick, rand_unit_box, zoom_extremum};
use monorel::fitz::{box2, fitzpatrick, ExtendedScalar, PartialQuadratic};
use monorel::linrel::LinearRelation;
use monorel::space::{HilbertContext, Subspace, Vector, RANK_TOL};
use monorel::volterra::{ft_closed_form, Grid};
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn finite(v: ExtendedScalar) -> f64 {
    match v {
        ExtendedScalar::Finite(x) => x,
        other => panic!("expected a finite value, got {other:?}"),
    }
}

/// `GᵀG/n + I/5 + (R − Rᵀ)` in the weighted inner product: monotone with a
/// positive-definite symmetric part, so the graph supremum is finite
/// everywhere and grid search can find it.
fn strongly_monotone_matrix(rng: &mut ChaCha8Rng, ctx: &std::sync::Arc<HilbertContext>) -> DMatrix<f64> {
    let n = ctx.dim();
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let wm = g.transpose() * &g / n as f64
        + DMatrix::identity(n, n) * 0.2
        + (&r - r.transpose());
    let mut m = wm;
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] /= ctx.weights()[i];
        }
    }
    m
}

#[test]
fn graph_supremum_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for trial in 0..6 {
        let n = 1 + trial % 3;
        let ctx = if trial % 2 == 0 {
            HilbertContext::unweighted(n)
        } else {
            let w: Vec<f64> = (0..n).map(|i| 0.5 + i as f64).collect();
            HilbertContext::new(&w).unwrap()
        };
        let m = strongly_monotone_matrix(&mut rng, &ctx);
        let rel = LinearRelation::from_matrix(&ctx, &m, None).unwrap();
        let f = fitzpatrick(&rel);
        let ctx2 = ctx.power(2);
        for _ in 0..8 {
            let x = rand_unit_box(&mut rng, n) * 2.0;
            let xs = rand_unit_box(&mut rng, n) * 2.0;
            let mut z = x.as_slice().to_vec();
            z.extend(xs.as_slice());
            let z = Vector::new(&ctx2, z).unwrap();
            let machine = finite(f.evaluate(&z, 1e-7).unwrap());
            let searched = brute_force_fitzpatrick(&ctx, &m, &x, &xs);
            assert!(
                (machine - searched).abs() <= 1e-6 * (1.0 + machine.abs()),
                "n={n} machine {machine} vs grid search {searched}"
            );
        }
    }
}

#[test]
fn conjugate_matches_grid_search_over_the_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let ctx = HilbertContext::unweighted(3);
        let k = rng.random_range(1..=3usize);
        let cols: Vec<Vector> = (0..k)
            .map(|_| Vector::new(&ctx, rand_unit_box(&mut rng, 3).as_slice().to_vec()).unwrap())
            .collect();
        let dirs = Subspace::orthonormalize(&ctx, &cols, RANK_TOL).unwrap();
        let k = dirs.rank();
        let g = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let a = g.transpose() * &g + DMatrix::identity(3, 3);
        let origin = rand_unit_box(&mut rng, 3);
        let b = rand_unit_box(&mut rng, 3);
        let f = PartialQuadratic::from_ambient(&ctx, &origin, &dirs, &a, &b, 0.3).unwrap();
        let conj = f.conjugate().unwrap();
        let basis = dirs.basis_matrix().clone();
        for _ in 0..6 {
            let y = rand_unit_box(&mut rng, 3);
            let yv = Vector::new(&ctx, y.as_slice().to_vec()).unwrap();
            let machine = finite(conj.evaluate(&yv, 1e-7).unwrap());
            let searched = zoom_extremum(k, 16.0, 48, |c| {
                let x = &origin + &basis * c;
                let xv = Vector::new(&ctx, x.as_slice().to_vec()).unwrap();
                let fx = finite(f.evaluate(&xv, 1e-7).unwrap());
                y.dot(&x) - fx
            });
            assert!(
                (machine - searched).abs() <= 1e-6 * (1.0 + machine.abs()),
                "domain dim {k}: machine {machine} vs grid search {searched}"
            );
        }
    }
}

#[test]
fn partial_minimization_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let ctx = HilbertContext::new(&[1.0, 2.0]).unwrap();
    let ctx2 = ctx.power(2);
    for _ in 0..4 {
        let m1 = strongly_monotone_matrix(&mut rng, &ctx);
        let m2 = strongly_monotone_matrix(&mut rng, &ctx);
        let f1 = fitzpatrick(&LinearRelation::from_matrix(&ctx, &m1, None).unwrap());
        let f2 = fitzpatrick(&LinearRelation::from_matrix(&ctx, &m2, None).unwrap());
        let conv = box2(&f1, &f2).unwrap();
        for _ in 0..5 {
            let x = rand_unit_box(&mut rng, 2);
            let xs = rand_unit_box(&mut rng, 2);
            let mut z = x.as_slice().to_vec();
            z.extend(xs.as_slice());
            let z = Vector::new(&ctx2, z).unwrap();
            let machine = finite(conv.evaluate(&z, 1e-7).unwrap());
            // minimize over the split point with the two factors evaluated
            // through the already-validated machinery
            let searched = -zoom_extremum(2, 16.0, 48, |ys| {
                let mut z1 = x.as_slice().to_vec();
                z1.extend((&xs - ys).as_slice());
                let mut z2 = x.as_slice().to_vec();
                z2.extend(ys.as_slice());
                let a = finite(f1.evaluate(&Vector::new(&ctx2, z1).unwrap(), 1e-7).unwrap());
                let b = finite(f2.evaluate(&Vector::new(&ctx2, z2).unwrap(), 1e-7).unwrap());
                -(a + b)
            });
            assert!(
                (machine - searched).abs() <= 1e-6 * (1.0 + machine.abs()),
                "machine {machine} vs grid search {searched}"
            );
        }
    }
}

#[test]
fn adjoint_satisfies_its_defining_bilinear_identity() {
    for rel in monorel::relation_corpus(57, 40) {
        let adj = rel.adjoint();
        let (u, v) = rel.graph_blocks();
        let (x, xs) = adj.graph_blocks();
        let w = rel.base().weights();
        // ⟨x*, u⟩ = ⟨x, v⟩ for every pair of basis columns
        for j in 0..adj.rank() {
            for i in 0..rel.rank() {
                let lhs = w.dot(&xs.column(j).component_mul(&u.column(i)));
                let rhs = w.dot(&x.column(j).component_mul(&v.column(i)));
                assert!(
                    (lhs - rhs).abs() <= 1e-9,
                    "adjoint basis pair ({j}) fails against graph pair ({i}): {lhs} vs {rhs}"
                );
            }
        }
        // and the dimension count says nothing was missed
        assert_eq!(rel.rank() + adj.rank(), 2 * rel.base().dim());
    }
}

#[test]
fn skew_graph_supremum_diverges_off_the_graph() {
    let ctx = HilbertContext::unweighted(2);
    let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let rel = LinearRelation::from_matrix(&ctx, &j, None).unwrap();
    let f = fitzpatrick(&rel);
    let ctx2 = ctx.power(2);

    // on the graph: the value is the pairing, which is zero for skew
    let x = DVector::from_column_slice(&[1.5, -0.5]);
    let jx = &j * &x;
    let mut zg = x.as_slice().to_vec();
    zg.extend(jx.as_slice());
    let at_graph = finite(f.evaluate(&Vector::new(&ctx2, zg).unwrap(), 1e-7).unwrap());
    assert!(at_graph.abs() <= 1e-9);

    // off the graph: the machine reports +∞ and the raw objective really is
    // unbounded along the gradient direction of its linear part
    let z = Vector::new(&ctx2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
    assert!(f.evaluate(&z, 1e-7).unwrap().is_plus_infinity());
    let d = j.transpose() * DVector::from_column_slice(&[1.0, 0.0]);
    let objective = |c: &DVector<f64>| {
        let jc = &j * c;
        DVector::from_column_slice(&[1.0, 0.0]).dot(&jc) - jc.dot(c)
    };
    let mut last = objective(&(&d * 10.0));
    for t in [100.0, 1000.0, 10000.0] {
        let now = objective(&(&d * t));
        assert!(now > last, "objective must keep growing along the escape direction");
        last = now;
    }
    assert!(last > 1e3);
}

#[test]
fn one_dimensional_identity_fitzpatrick_is_the_square_mean() {
    let ctx = HilbertContext::unweighted(1);
    let rel = LinearRelation::from_matrix(&ctx, &DMatrix::identity(1, 1), None).unwrap();
    let f = fitzpatrick(&rel);
    let ctx2 = ctx.power(2);
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..20 {
        let x = rng.random_range(-3.0..3.0);
        let xs = rng.random_range(-3.0..3.0);
        let z = Vector::new(&ctx2, vec![x, xs]).unwrap();
        let machine = finite(f.evaluate(&z, 1e-7).unwrap());
        let expected = 0.25 * (x + xs) * (x + xs);
        assert!((machine - expected).abs() <= 1e-9);
        let searched = brute_force_fitzpatrick(
            &ctx,
            &DMatrix::identity(1, 1),
            &DVector::from_column_slice(&[x]),
            &DVector::from_column_slice(&[xs]),
        );
        assert!((searched - expected).abs() <= 1e-6);
    }
}

#[test]
fn volterra_inverse_supremum_matches_grid_search_on_its_domain() {
    let g = Grid::new(2).unwrap();
    let ctx = g.ctx();
    let ctx2 = ctx.power(2);
    let closed = ft_closed_form(&g);
    let vstar = g.v_star_matrix();
    let w = ctx.weights().clone();
    let e = g.ones().coords().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..8 {
        // feasible points of the restricted domain: x = αe − V*x*
        let xs = rand_unit_box(&mut rng, 2);
        let alpha: f64 = rng.random_range(-2.0..2.0);
        let x = &e * alpha - &vstar * &xs;
        let mut z = x.as_slice().to_vec();
        z.extend(xs.as_slice());
        let z = Vector::new(&ctx2, z).unwrap();
        let machine = finite(closed.evaluate(&z, 1e-7).unwrap());
        // the graph of T is {(Vc, c)}: supremum over c directly
        let v = g.v_matrix();
        let searched = zoom_extremum(2, 16.0, 48, |c| {
            let vc = &v * c;
            w.dot(&x.component_mul(c)) + w.dot(&vc.component_mul(&xs))
                - w.dot(&vc.component_mul(c))
        });
        assert!(
            (machine - searched).abs() <= 1e-6 * (1.0 + machine.abs()),
            "machine {machine} vs grid search {searched}"
        );
    }
}
