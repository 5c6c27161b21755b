//! Uniform-grid quadrature model of the integration operator on `[0, 1]`
//! and the differentiation-type relations built from it.
//!
//! The cumulative-sum matrix `V = h(L_strict + ½I)` integrates a cell-sampled
//! function; its key structural features are exact, not asymptotic: the
//! symmetric part `V₊ = ½(V + V*)` has rank one with range spanned by the
//! all-ones vector `e`, and `‖e‖ = 1` in the `h`-weighted inner product.
//! Inverting graphs of `V`, `V∘`, and restrictions of `V` produces the
//! derivative-like relations `T`, `T₂`, `T₁`, and the non-maximal skew core
//! `S`, whose monotonicity structure this module's checks exercise.

use crate::error::{Error, Result};
use crate::fitz::PartialQuadratic;
use crate::linrel::LinearRelation;
use crate::space::{HilbertContext, Subspace, Vector};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::sync::Arc;

/// Uniform grid on `[0, 1]` with `m` cells of width `h = 1/m`; vectors carry
/// cell samples and the inner product weights every coordinate by `h`.
#[derive(Debug, Clone)]
pub struct Grid {
    m: usize,
    h: f64,
    ctx: Arc<HilbertContext>,
}

impl Grid {
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::Precondition(format!(
                "grid needs at least 2 cells, got {m}"
            )));
        }
        let h = 1.0 / m as f64;
        Ok(Self {
            m,
            h,
            ctx: HilbertContext::uniform(m, h)?,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn ctx(&self) -> &Arc<HilbertContext> {
        &self.ctx
    }

    /// The all-ones vector `e`; `⟨e, e⟩ = m·h = 1`.
    pub fn ones(&self) -> Vector {
        Vector::new(&self.ctx, vec![1.0; self.m]).expect("ones in grid context")
    }

    /// The hyperplane `e⊥` of samples with zero weighted mean.
    pub fn ones_complement(&self) -> Subspace {
        Subspace::span_of(&self.ones(), crate::space::RANK_TOL).complement()
    }

    /// Cumulative sum with a half-weight diagonal: `(Vx)_i = h(Σ_{j<i} x_j + ½x_i)`.
    pub fn v_matrix(&self) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(self.m, self.m);
        for i in 0..self.m {
            for j in 0..i {
                v[(i, j)] = self.h;
            }
            v[(i, i)] = 0.5 * self.h;
        }
        v
    }

    /// Adjoint of `V` in the `h`-weighted inner product; uniform weights make
    /// it the plain transpose (tail sums with a half-weight diagonal).
    pub fn v_star_matrix(&self) -> DMatrix<f64> {
        self.v_matrix().transpose()
    }

    /// Symmetric part `½(V + V*) = (h/2)·(all ones)`: rank one, `V₊x = ½⟨e,x⟩e`.
    pub fn v_plus_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_element(self.m, self.m, 0.5 * self.h)
    }

    /// Antisymmetric part `½(V − V*)`.
    pub fn v_circ_matrix(&self) -> DMatrix<f64> {
        0.5 * (self.v_matrix() - self.v_star_matrix())
    }

    /// The difference-quotient relation `T = V⁻¹` (graph swap of `V`).
    pub fn t_relation(&self) -> LinearRelation {
        LinearRelation::from_matrix(&self.ctx, &self.v_matrix(), None)
            .expect("V lives on the grid context")
            .inverse()
    }

    /// `T* = (V*)⁻¹`, built independently of `adjoint(T)`.
    pub fn t_star_relation(&self) -> LinearRelation {
        LinearRelation::from_matrix(&self.ctx, &self.v_star_matrix(), None)
            .expect("V* lives on the grid context")
            .inverse()
    }

    /// The mean-periodic extension: graph `{(Vu + αe, u) : u ⊥ e, α ∈ ℝ}`.
    pub fn t1_relation(&self) -> LinearRelation {
        let v = self.v_matrix();
        let mut pairs: Vec<(Vector, Vector)> = self
            .ones_complement()
            .basis_vectors()
            .into_iter()
            .map(|u| (apply(&v, &u), u))
            .collect();
        pairs.push((self.ones(), Vector::zeros(&self.ctx)));
        LinearRelation::from_pairs(&self.ctx, &pairs).expect("t1 pairs in grid context")
    }

    /// The antisymmetric-kernel extension `T₂ = V∘⁻¹` as a graph swap; a
    /// genuine (multivalued) relation whenever `V∘` is singular.
    pub fn t2_relation(&self) -> LinearRelation {
        LinearRelation::from_matrix(&self.ctx, &self.v_circ_matrix(), None)
            .expect("V∘ lives on the grid context")
            .inverse()
    }

    /// The common skew core `S`: graph `{(Vu, u) : u ⊥ e}`, rank `m − 1`.
    pub fn skew_part_relation(&self) -> LinearRelation {
        LinearRelation::from_matrix(&self.ctx, &self.v_matrix(), Some(&self.ones_complement()))
            .expect("restricted V lives on the grid context")
            .inverse()
    }

    /// Closed-form adjoint of the skew core: `{(V*w + l·e, w) : w, l free}`,
    /// rank `m + 1`, assembled directly from its parameterization.
    pub fn skew_part_adjoint_closed_form(&self) -> LinearRelation {
        let vs = self.v_star_matrix();
        let mut pairs: Vec<(Vector, Vector)> = (0..self.m)
            .map(|i| {
                let b = Vector::basis(&self.ctx, i);
                (apply(&vs, &b), b)
            })
            .collect();
        pairs.push((self.ones(), Vector::zeros(&self.ctx)));
        LinearRelation::from_pairs(&self.ctx, &pairs).expect("adjoint pairs in grid context")
    }
}

fn apply(m: &DMatrix<f64>, v: &Vector) -> Vector {
    Vector::from_dvector(v.ctx(), m * v.coords())
}

/// Rank-one ambient quadratic `s·½⟨z, e⟩²` as a coordinate-form matrix.
fn mean_square_ambient(g: &Grid, s: f64) -> DMatrix<f64> {
    // ⟨z, e⟩_W = Σ w_i z_i, so the coordinate Hessian of ⟨z,e⟩² is 2·(We)(We)ᵀ.
    let n = g.m();
    let we = DVector::from_element(n, g.h());
    s * &we * we.transpose()
}

/// Closed form of the conjugate of `q_{V₊}`: the indicator of `span{e}` plus
/// `⟨z, e⟩²` — exact at every `m` because `‖e‖ = 1`.
pub fn vle1_closed_form(g: &Grid) -> PartialQuadratic {
    let span_e = Subspace::span_of(&g.ones(), crate::space::RANK_TOL);
    PartialQuadratic::from_ambient(
        g.ctx(),
        &DVector::zeros(g.m()),
        &span_e,
        &mean_square_ambient(g, 2.0),
        &DVector::zeros(g.m()),
        0.0,
    )
    .expect("closed form on grid context")
}

fn mean_square_through(g: &Grid, k: &DMatrix<f64>) -> PartialQuadratic {
    let n = g.m();
    let span_e = Subspace::span_of(&g.ones(), crate::space::RANK_TOL);
    let inner = PartialQuadratic::from_ambient(
        g.ctx(),
        &DVector::zeros(n),
        &span_e,
        &mean_square_ambient(g, 1.0),
        &DVector::zeros(n),
        0.0,
    )
    .expect("mean-square form on grid context");
    let ctx2 = g.ctx().power(2);
    let mut l = DMatrix::zeros(n, 2 * n);
    for i in 0..n {
        l[(i, i)] = 1.0;
        for j in 0..n {
            l[(i, n + j)] = k[(i, j)];
        }
    }
    inner
        .precompose_linear(&ctx2, &l)
        .expect("affine substitution stays on the product context")
}

/// Closed form of the Fitzpatrick function of `T`:
/// `F_T(x, y*) = ι_{span{e}}(x + V*y*) + ½⟨x + V*y*, e⟩²`.
pub fn ft_closed_form(g: &Grid) -> PartialQuadratic {
    mean_square_through(g, &g.v_star_matrix())
}

/// Closed form of the Fitzpatrick function of `T*`: same shape with `V`.
pub fn ft_star_closed_form(g: &Grid) -> PartialQuadratic {
    mean_square_through(g, &g.v_matrix())
}

/// Built-in analytic test functions with known endpoint values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestFunction {
    /// `x(t) = t`
    Linear,
    /// `x(t) = t² + 1`
    QuadPlusOne,
    /// `x(t) = 1`
    ConstOne,
}

impl TestFunction {
    pub const ALL: [TestFunction; 3] =
        [TestFunction::Linear, TestFunction::QuadPlusOne, TestFunction::ConstOne];

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Linear => "t",
            TestFunction::QuadPlusOne => "t2p1",
            TestFunction::ConstOne => "const1",
        }
    }

    pub fn from_name(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(TestFunction::Linear),
            "t2p1" => Ok(TestFunction::QuadPlusOne),
            "const1" => Ok(TestFunction::ConstOne),
            other => Err(Error::Parse(format!(
                "unknown test function {other:?}; choose one of t, t2p1, const1"
            ))),
        }
    }

    pub fn value(self, t: f64) -> f64 {
        match self {
            TestFunction::Linear => t,
            TestFunction::QuadPlusOne => t * t + 1.0,
            TestFunction::ConstOne => 1.0,
        }
    }
}

/// Cell samples of an analytic function together with its endpoint values;
/// the endpoints travel separately because the target functional
/// `½[x(1)² + x(0)²]` is a boundary quantity the samples only approximate.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    pub samples: Vector,
    pub x0: f64,
    pub x1: f64,
}

pub fn sample(g: &Grid, f: TestFunction) -> SampledFunction {
    let coords: Vec<f64> = (1..=g.m()).map(|i| f.value(i as f64 * g.h())).collect();
    SampledFunction {
        samples: Vector::new(g.ctx(), coords).expect("samples on grid context"),
        x0: f.value(0.0),
        x1: f.value(1.0),
    }
}

/// One grid size of the convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub m: usize,
    pub h: f64,
    pub function: String,
    pub value: f64,
    pub target: f64,
    pub abs_error: f64,
    pub ratio_prev: Option<f64>,
}

/// Evaluate the partial inf-convolution of `F_T` and `F_{T*}` at `(x, 0)`
/// along the transport of its continuum minimizer, per grid size, against the
/// boundary target `½(x1² + x0²)`.
///
/// The continuum infimum is pinned at the single feasible point `y* = −x′`;
/// its grid transport is `u = V⁻¹(x − x0·e)`, which satisfies both domain
/// constraints exactly (the leftover `x + V*u` is a multiple of `e` because
/// `V + V*` maps into `span{e}`). The value is computed twice — from the
/// scalar closed form and through the assembled quadratic objects — and the
/// routes must agree; the grid's own unconstrained infimum is lower (`e`
/// becomes integrable in finite dimensions), which is exactly the degeneracy
/// the positive-gap checks quantify elsewhere.
pub fn ft_box_convergence(f: TestFunction, m_list: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let g = Grid::new(m)?;
        let sf = sample(&g, f);
        let target = 0.5 * (sf.x1 * sf.x1 + sf.x0 * sf.x0);

        // u = V⁻¹(x − x0·e) by forward substitution
        let rhs = sf.samples.coords() - sf.x0 * g.ones().coords();
        let u = g
            .v_matrix()
            .solve_lower_triangular(&rhs)
            .ok_or_else(|| Error::Precondition("cumulative-sum matrix must be invertible".into()))?;
        let u = Vector::from_dvector(g.ctx(), u);

        let mean_u = g.ones().inner(&u)?;
        let value = 0.5 * (sf.x0 + mean_u).powi(2) + 0.5 * sf.x0 * sf.x0;

        // Same point through the assembled quadratics: F_T(x, u) + F_{T*}(x, −u).
        let ctx2 = g.ctx().power(2);
        let zt = sf.samples.stack(&u, &ctx2)?;
        let zts = sf.samples.stack(&u.scale(-1.0), &ctx2)?;
        let eval_tol = 1e-7;
        let via_t = ft_closed_form(&g).evaluate(&zt, eval_tol)?;
        let via_ts = ft_star_closed_form(&g).evaluate(&zts, eval_tol)?;
        let assembled = match (via_t.as_finite(), via_ts.as_finite()) {
            (Some(a), Some(b)) => a + b,
            _ => {
                return Err(Error::CriterionDisagreement(
                    "transported minimizer left the quadratic domains".into(),
                ))
            }
        };
        if (assembled - value).abs() > 1e-7 * (1.0 + value.abs()) {
            return Err(Error::CriterionDisagreement(format!(
                "inf-convolution routes disagree at m={m}: closed form {value}, assembled {assembled}"
            )));
        }

        let abs_error = (value - target).abs();
        let ratio_prev = rows.last().map(|prev: &ConvergenceRow| {
            if prev.abs_error > 0.0 {
                abs_error / prev.abs_error
            } else {
                f64::NAN
            }
        });
        rows.push(ConvergenceRow {
            m,
            h: g.h(),
            function: f.name().to_string(),
            value,
            target,
            abs_error,
            ratio_prev,
        });
    }
    Ok(rows)
}

/// Both sides of the exact discrete identities `⟨T(Vu), Vu⟩ = ½(hΣu)²` and
/// `⟨T*(V*u), V*u⟩ = ½(hΣu)²`, with the left sides routed through the
/// relation machinery (graph solve) rather than by cancelling `V` against `T`.
#[derive(Debug, Clone)]
pub struct QuadraticIdentity {
    pub t_pairing: f64,
    pub t_star_pairing: f64,
    pub half_square: f64,
}

pub fn quadratic_identity(g: &Grid, u: &Vector) -> Result<QuadraticIdentity> {
    g.ctx().check_same(u.ctx())?;
    let x = apply(&g.v_matrix(), u);
    let tu = g
        .t_relation()
        .principal_image(&x)?
        .ok_or_else(|| Error::Precondition("Vu must lie in dom T".into()))?;
    let xs = apply(&g.v_star_matrix(), u);
    let tsu = g
        .t_star_relation()
        .principal_image(&xs)?
        .ok_or_else(|| Error::Precondition("V*u must lie in dom T*".into()))?;
    let mean = g.ones().inner(u)?;
    Ok(QuadraticIdentity {
        t_pairing: x.inner(&tu)?,
        t_star_pairing: xs.inner(&tsu)?,
        half_square: 0.5 * mean * mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitz::{box2, fitzpatrick, PqTag};
    use crate::linrel::Image;
    use crate::monotone;
    use approx::assert_abs_diff_eq;

    const TOL: f64 = 1e-9;

    #[test]
    fn frozen_small_matrices() {
        let g = Grid::new(2).unwrap();
        let v = g.v_matrix();
        assert_eq!(v.as_slice(), DMatrix::from_row_slice(2, 2, &[0.25, 0.0, 0.5, 0.25]).as_slice());
        let vc = g.v_circ_matrix();
        let want = DMatrix::from_row_slice(2, 2, &[0.0, -0.25, 0.25, 0.0]);
        assert_abs_diff_eq!(vc.as_slice(), want.as_slice(), epsilon = 1e-15);

        // V₊(1, 3) = ½⟨e, x⟩e with ⟨e, x⟩ = 2
        let x = Vector::new(g.ctx(), vec![1.0, 3.0]).unwrap();
        let vp = apply(&g.v_plus_matrix(), &x);
        assert_abs_diff_eq!(vp.as_slice(), [1.0, 1.0].as_slice(), epsilon = 1e-15);

        assert!(Grid::new(1).is_err());
    }

    #[test]
    fn symmetric_split_and_ones_normalization() {
        for m in [2, 3, 5, 8] {
            let g = Grid::new(m).unwrap();
            let sum = g.v_matrix() + g.v_star_matrix();
            assert_abs_diff_eq!(
                sum.as_slice(),
                (2.0 * g.v_plus_matrix()).as_slice(),
                epsilon = 1e-15
            );
            let e = g.ones();
            assert_abs_diff_eq!(e.inner(&e).unwrap(), 1.0, epsilon = 1e-12);
            // adjoint in the weighted inner product is the plain transpose here
            let wa = crate::linrel::weighted_adjoint_matrix(g.ctx(), &g.v_matrix());
            assert_abs_diff_eq!(wa.as_slice(), g.v_star_matrix().as_slice(), epsilon = 1e-14);
        }
    }

    #[test]
    fn relation_ranks() {
        for m in [4, 5] {
            let g = Grid::new(m).unwrap();
            assert_eq!(g.t_relation().rank(), m);
            assert_eq!(g.t_star_relation().rank(), m);
            assert_eq!(g.t1_relation().rank(), m);
            assert_eq!(g.t2_relation().rank(), m);
            assert_eq!(g.skew_part_relation().rank(), m - 1);
            assert_eq!(g.skew_part_relation().adjoint().rank(), m + 1);
        }
    }

    #[test]
    fn t_is_maximal_but_not_skew_or_symmetric() {
        let g = Grid::new(4).unwrap();
        let t = g.t_relation();
        assert!(monotone::is_maximal_monotone(&t, TOL).unwrap().result);
        assert!(!monotone::is_skew(&t, TOL).result);
        assert!(!monotone::is_symmetric(&t, TOL).result);
        assert!(t.adjoint().graph_equals(&g.t_star_relation(), TOL).unwrap());
    }

    #[test]
    fn t1_structure() {
        for m in [4, 5] {
            let g = Grid::new(m).unwrap();
            let t1 = g.t1_relation();
            assert!(monotone::is_anti_self_adjoint(&t1, TOL).result);
            assert!(monotone::is_skew(&t1, TOL).result);
            assert!(t1.range().equals(&g.ones_complement(), TOL).unwrap());
            assert!(monotone::is_maximal_monotone(&t1, TOL).unwrap().result);
            assert!(monotone::is_maximal_monotone(&t1.negate(), TOL).unwrap().result);
            assert!(monotone::unique_extension_check(&t1, TOL).unwrap().result);
            // parity of the multivalued part: e ∈ V(e⊥) exactly when m is even
            let expected_mul = if m % 2 == 0 { 1 } else { 0 };
            assert_eq!(t1.multivalued_directions().rank(), expected_mul);
        }
    }

    #[test]
    fn t2_structure_including_singular_odd_case() {
        let g = Grid::new(3).unwrap();
        let t2 = g.t2_relation();
        assert_eq!(t2.rank(), 3);
        assert_eq!(t2.multivalued_directions().rank(), 1);
        assert!(monotone::is_anti_self_adjoint(&t2, TOL).result);
        assert!(monotone::is_maximal_monotone(&t2, TOL).unwrap().result);
        assert!(monotone::is_maximal_monotone(&t2.negate(), TOL).unwrap().result);

        let g = Grid::new(2).unwrap();
        let t2 = g.t2_relation();
        assert_eq!(t2.multivalued_directions().rank(), 0);
        assert!(monotone::is_maximal_monotone(&t2, TOL).unwrap().result);
    }

    #[test]
    fn skew_core_sits_strictly_inside_its_extensions() {
        for m in [4, 5] {
            let g = Grid::new(m).unwrap();
            let s = g.skew_part_relation();
            assert!(monotone::is_skew(&s, TOL).result);
            assert!(!monotone::is_maximal_monotone(&s, TOL).unwrap().result);
            assert!(!monotone::is_maximal_monotone(&s.negate(), TOL).unwrap().result);

            for ext in [g.t_relation(), g.t1_relation(), g.t2_relation()] {
                assert!(s.extended_by(&ext, TOL).unwrap());
                assert!(!s.graph_equals(&ext, TOL).unwrap());
            }
            // gra T ⊂ gra(−S*) strictly
            let minus_sstar = s.adjoint().negate();
            assert!(g.t_relation().extended_by(&minus_sstar, TOL).unwrap());
            assert!(!g.t_relation().graph_equals(&minus_sstar, TOL).unwrap());

            let sstar = s.adjoint();
            assert!(sstar.graph_equals(&g.skew_part_adjoint_closed_form(), TOL).unwrap());
            assert!(!monotone::is_monotone(&sstar, TOL).result);
            assert!(!monotone::is_monotone(&sstar.negate(), TOL).result);
        }
    }

    #[test]
    fn conjugate_of_rank_one_form_matches_closed_form() {
        for m in [2, 3, 5, 8] {
            let g = Grid::new(m).unwrap();
            let q = PartialQuadratic::quadratic_form(g.ctx(), &g.v_plus_matrix()).unwrap();
            let qs = q.conjugate().unwrap();
            assert!(qs.equals(&vle1_closed_form(&g), TOL).unwrap());
        }
    }

    #[test]
    fn fitzpatrick_pipeline_matches_closed_forms() {
        for m in [2, 3, 4] {
            let g = Grid::new(m).unwrap();
            assert!(fitzpatrick(&g.t_relation())
                .equals(&ft_closed_form(&g), 1e-8)
                .unwrap());
            assert!(fitzpatrick(&g.t_star_relation())
                .equals(&ft_star_closed_form(&g), 1e-8)
                .unwrap());
        }
    }

    #[test]
    fn fitzpatrick_of_t2_is_its_graph_indicator() {
        for m in [2, 3, 4] {
            let g = Grid::new(m).unwrap();
            let t2 = g.t2_relation();
            let f = fitzpatrick(&t2);
            assert!(f.equals(&PartialQuadratic::indicator_of_subspace(t2.graph()), 1e-8).unwrap());
        }
    }

    #[test]
    fn box2_collapses_to_fitzpatrick_of_the_sum() {
        for m in [2, 3] {
            let g = Grid::new(m).unwrap();
            let b = box2(&ft_closed_form(&g), &ft_star_closed_form(&g)).unwrap();
            let sum = g.t_relation().add(&g.t_star_relation()).unwrap();
            assert!(b.equals(&fitzpatrick(&sum), 1e-7).unwrap());
        }
    }

    #[test]
    fn sum_with_adjoint_degenerates() {
        // odd m: T₁ + T₁* vanishes on the whole space
        let g = Grid::new(5).unwrap();
        let z = g.t1_relation().add(&g.t1_relation().adjoint()).unwrap();
        assert_eq!(z.rank(), 5);
        let zero = LinearRelation::from_matrix(g.ctx(), &DMatrix::zeros(5, 5), None).unwrap();
        assert!(z.graph_equals(&zero, TOL).unwrap());

        // even m: the sum is purely multivalued over its domain
        let g = Grid::new(4).unwrap();
        let z = g.t1_relation().add(&g.t1_relation().adjoint()).unwrap();
        assert_eq!(z.rank(), 4);
        assert_eq!(z.multivalued_directions().rank(), 1);
        let x = g.t1_relation().domain().basis_vector(0);
        match z.image(&x).unwrap() {
            Image::Set { particular, directions } => {
                assert!(particular.norm() < 1e-9);
                assert_eq!(directions.rank(), 1);
            }
            Image::Empty => panic!("x was chosen in the domain"),
        }
    }

    #[test]
    fn exact_discrete_quadratic_identities() {
        let g = Grid::new(5).unwrap();
        // u = e reproduces the ½·1² example; a lopsided u exercises the rest
        let qi = quadratic_identity(&g, &g.ones()).unwrap();
        assert_abs_diff_eq!(qi.t_pairing, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(qi.t_star_pairing, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(qi.half_square, 0.5, epsilon = 1e-12);

        let u = Vector::new(g.ctx(), vec![3.0, -1.0, 0.5, 2.0, -4.0]).unwrap();
        let qi = quadratic_identity(&g, &u).unwrap();
        assert_abs_diff_eq!(qi.t_pairing, qi.half_square, epsilon = 1e-9);
        assert_abs_diff_eq!(qi.t_star_pairing, qi.half_square, epsilon = 1e-9);
    }

    #[test]
    fn convergence_rows() {
        // constant function: exact at every m
        let rows = ft_box_convergence(TestFunction::ConstOne, &[2, 4, 8]).unwrap();
        for r in &rows {
            assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);
            assert!(r.abs_error < 1e-12);
        }

        // linear function: exact at even m
        let rows = ft_box_convergence(TestFunction::Linear, &[2, 4, 8]).unwrap();
        for r in &rows {
            assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-12);
        }

        // quadratic: first-order error decay toward ½(2² + 1²)
        let rows = ft_box_convergence(TestFunction::QuadPlusOne, &[8, 16, 32, 64]).unwrap();
        assert_abs_diff_eq!(rows[0].target, 2.5, epsilon = 1e-15);
        for pair in rows.windows(2) {
            assert!(pair[1].abs_error < pair[0].abs_error);
            let ratio = pair[1].ratio_prev.unwrap();
            assert!((0.3..0.7).contains(&ratio), "ratio {ratio} not first-order");
        }
    }

    #[test]
    fn sampling_and_names() {
        let g = Grid::new(4).unwrap();
        let sf = sample(&g, TestFunction::Linear);
        assert_abs_diff_eq!(sf.samples.as_slice(), [0.25, 0.5, 0.75, 1.0].as_slice(), epsilon = 1e-15);
        assert_eq!((sf.x0, sf.x1), (0.0, 1.0));
        for f in TestFunction::ALL {
            assert_eq!(TestFunction::from_name(f.name()).unwrap(), f);
        }
        assert!(TestFunction::from_name("sin").is_err());
    }

    #[test]
    fn second_fitzpatrick_route_through_the_inverse_matrix() {
        for m in [3, 4] {
            let g = Grid::new(m).unwrap();
            let v_inv = g.v_matrix().try_inverse().unwrap();
            let via_matrix = crate::fitz::f1fitz(g.ctx(), &v_inv).unwrap();
            assert!(via_matrix.equals(&ft_closed_form(&g), 1e-7).unwrap());
        }
    }

    #[test]
    fn transported_point_is_feasible_but_above_the_grid_infimum() {
        // the grid's own infimum collapses below the continuum value for t
        let g = Grid::new(4).unwrap();
        let b = box2(&ft_closed_form(&g), &ft_star_closed_form(&g)).unwrap();
        assert_eq!(b.tag(), PqTag::Proper);
        let sf = sample(&g, TestFunction::Linear);
        let z = sf
            .samples
            .stack(&Vector::zeros(g.ctx()), &g.ctx().power(2))
            .unwrap();
        let inf = b.evaluate(&z, 1e-7).unwrap().as_finite().unwrap();
        let rows = ft_box_convergence(TestFunction::Linear, &[4]).unwrap();
        assert!(inf <= rows[0].value + 1e-9);
        assert!(inf < rows[0].value - 1e-3, "collapse must be strict for t");
    }
}
