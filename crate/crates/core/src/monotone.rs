//! Monotonicity predicates for linear relations.
//!
//! Everything reduces to the pairing quadratic form on the graph: with an
//! orthonormal graph basis `(u_j, v_j)`, the form is the symmetric matrix
//! `P = (⟨u_i, v_j⟩ + ⟨u_j, v_i⟩)/2`. Monotone ⟺ P is PSD; skew ⟺ P = 0.
//! Maximality combines the dimension criterion (`rank = n`) with the
//! adjoint-monotonicity criterion; the two must agree for monotone inputs,
//! and a mismatch is reported as an error rather than silently resolved.

use crate::error::{Error, Result};
use crate::linrel::LinearRelation;
use crate::space::{Vector, RANK_TOL};
use nalgebra::{DMatrix, DVector};
use serde::ser::{Serialize, SerializeMap, Serializer};

/// A point `(x, x*)` of a product space, used as evidence in verdicts.
#[derive(Debug, Clone, serde::Serialize)]
pub struct GraphPoint {
    pub x: Vector,
    pub xs: Vector,
}

#[derive(Debug, Clone)]
pub struct MonotonicityVerdict {
    pub predicate: String,
    pub result: bool,
    /// Meaning depends on the predicate: smallest pairing eigenvalue
    /// (is_monotone), largest absolute eigenvalue (is_skew), containment or
    /// equality residual (symmetry family), or the exact infimum
    /// (monotonically_related).
    pub margin: f64,
    pub witness: Option<GraphPoint>,
}

impl MonotonicityVerdict {
    fn new(predicate: &str, result: bool, margin: f64) -> Self {
        Self {
            predicate: predicate.into(),
            result,
            margin,
            witness: None,
        }
    }
}

impl Serialize for MonotonicityVerdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = 3 + usize::from(self.witness.is_some());
        let mut map = s.serialize_map(Some(n))?;
        map.serialize_entry("predicate", &self.predicate)?;
        map.serialize_entry("result", &self.result)?;
        if self.margin.is_finite() {
            map.serialize_entry("margin", &self.margin)?;
        } else {
            map.serialize_entry("margin", if self.margin > 0.0 { "+inf" } else { "-inf" })?;
        }
        if let Some(w) = &self.witness {
            map.serialize_entry("witness", w)?;
        }
        map.end()
    }
}

/// Pairing form on the graph in basis coordinates:
/// `P[i][j] = (⟨u_i, v_j⟩_W + ⟨u_j, v_i⟩_W)/2`.
pub(crate) fn pairing_matrix(rel: &LinearRelation) -> DMatrix<f64> {
    let (b1, b2) = rel.graph_blocks();
    let w = rel.base().weights();
    let mut wb2 = b2.clone();
    for i in 0..wb2.nrows() {
        for j in 0..wb2.ncols() {
            wb2[(i, j)] *= w[i];
        }
    }
    let cross = b1.transpose() * wb2;
    0.5 * (&cross + cross.transpose())
}

fn graph_point_from_coeffs(rel: &LinearRelation, c: &DVector<f64>) -> GraphPoint {
    let (b1, b2) = rel.graph_blocks();
    let ctx = rel.base();
    GraphPoint {
        x: Vector::new(ctx, (&b1 * c).as_slice().to_vec()).expect("coeff map"),
        xs: Vector::new(ctx, (&b2 * c).as_slice().to_vec()).expect("coeff map"),
    }
}

pub fn is_monotone(rel: &LinearRelation, tol: f64) -> MonotonicityVerdict {
    let p = pairing_matrix(rel);
    if p.nrows() == 0 {
        return MonotonicityVerdict::new("is_monotone", true, 0.0);
    }
    let eig = p.symmetric_eigen();
    let (idx, min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("nonempty spectrum");
    let mut verdict = MonotonicityVerdict::new("is_monotone", min >= -tol, min);
    if !verdict.result {
        let c = eig.eigenvectors.column(idx).into_owned();
        verdict.witness = Some(graph_point_from_coeffs(rel, &c));
    }
    verdict
}

pub fn is_skew(rel: &LinearRelation, tol: f64) -> MonotonicityVerdict {
    let p = pairing_matrix(rel);
    if p.nrows() == 0 {
        return MonotonicityVerdict::new("is_skew", true, 0.0);
    }
    let eig = p.symmetric_eigen();
    let (idx, max_abs) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, v)| (i, v.abs()))
        .expect("nonempty spectrum");
    let mut verdict = MonotonicityVerdict::new("is_skew", max_abs <= tol, max_abs);
    if !verdict.result {
        let c = eig.eigenvectors.column(idx).into_owned();
        verdict.witness = Some(graph_point_from_coeffs(rel, &c));
    }
    verdict
}

/// `gra A ⊆ gra A*` (the defining containment; equality not required).
pub fn is_symmetric(rel: &LinearRelation, tol: f64) -> MonotonicityVerdict {
    let adj = rel.adjoint();
    let resid = adj.graph().containment_residual(rel.graph()).unwrap_or(f64::INFINITY);
    MonotonicityVerdict::new("is_symmetric", resid <= tol, resid)
}

fn graph_equality_residual(a: &LinearRelation, b: &LinearRelation) -> f64 {
    let fwd = b.graph().containment_residual(a.graph()).unwrap_or(f64::INFINITY);
    let bwd = a.graph().containment_residual(b.graph()).unwrap_or(f64::INFINITY);
    fwd.max(bwd)
}

pub fn is_self_adjoint(rel: &LinearRelation, tol: f64) -> MonotonicityVerdict {
    let resid = graph_equality_residual(rel, &rel.adjoint());
    MonotonicityVerdict::new("is_self_adjoint", resid <= tol, resid)
}

pub fn is_anti_self_adjoint(rel: &LinearRelation, tol: f64) -> MonotonicityVerdict {
    let resid = graph_equality_residual(&rel.negate(), &rel.adjoint());
    MonotonicityVerdict::new("is_anti_self_adjoint", resid <= tol, resid)
}

/// Maximality of a monotone relation. Two exact finite-dimensional criteria
/// are evaluated: graph dimension = n, and monotonicity of the adjoint
/// (Brézis–Browder). For monotone input they must agree; disagreement means a
/// numerical-rank bug and is an error, never a verdict.
pub fn is_maximal_monotone(rel: &LinearRelation, tol: f64) -> Result<MonotonicityVerdict> {
    let n = rel.base().dim();
    let mono = is_monotone(rel, tol);
    let adj_mono = is_monotone(&rel.adjoint(), tol);
    let by_rank = mono.result && rel.rank() == n;
    if mono.result && by_rank != adj_mono.result {
        return Err(Error::CriterionDisagreement(format!(
            "rank criterion says {} (rank {} vs n {}), adjoint-monotonicity says {} \
             (adjoint margin {:.3e})",
            by_rank,
            rel.rank(),
            n,
            adj_mono.result,
            adj_mono.margin
        )));
    }
    let mut verdict = MonotonicityVerdict::new("is_maximal_monotone", by_rank, mono.margin);
    verdict.witness = mono.witness;
    Ok(verdict)
}

/// Exact infimum of `⟨x − a, x* − a*⟩` over graph points `(a, a*)`.
///
/// In graph coordinates the objective is `⟨x,x*⟩ − b·c + cᵀPc` with
/// `b_j = ⟨x, v_j⟩ + ⟨u_j, x*⟩`. For PSD `P` the infimum is
/// `⟨x,x*⟩ − ¼ bᵀP⁺b` when `b ∈ ran P` and `−∞` otherwise.
pub fn monotonically_related(
    x: &Vector,
    xs: &Vector,
    rel: &LinearRelation,
    tol: f64,
) -> Result<MonotonicityVerdict> {
    let mono = is_monotone(rel, tol);
    if !mono.result {
        return Err(Error::Precondition(format!(
            "monotonically_related requires a monotone relation (margin {:.3e})",
            mono.margin
        )));
    }
    let (b1, b2) = rel.graph_blocks();
    let ctx = rel.base();
    ctx.check_same(x.ctx())?;
    ctx.check_same(xs.ctx())?;
    let q = x.inner(xs)?;
    let k = rel.rank();
    let mut b = DVector::zeros(k);
    for j in 0..k {
        let u = b1.column(j).into_owned();
        let v = b2.column(j).into_owned();
        b[j] = ctx.w_inner(x.coords(), &v) + ctx.w_inner(&u, xs.coords());
    }

    let mut verdict = MonotonicityVerdict::new("monotonically_related", false, f64::NEG_INFINITY);
    if k == 0 {
        verdict.margin = q;
        verdict.result = q >= -tol;
        return Ok(verdict);
    }
    let p = pairing_matrix(rel);
    let eig = p.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let band = RANK_TOL * lam_max.max(1.0);

    // Split b across ran(P) and ker(P); a kernel component with nonzero slope
    // sends the objective to −∞ along that graph line.
    let mut quad = 0.0; // ¼ bᵀ P⁺ b
    let mut minimizer = DVector::zeros(k);
    let mut kernel_slope: Option<DVector<f64>> = None;
    for i in 0..k {
        let lam = eig.eigenvalues[i];
        let qi = eig.eigenvectors.column(i).into_owned();
        let coef = qi.dot(&b);
        if lam.abs() <= band {
            if coef.abs() > tol * (1.0 + b.norm()) && kernel_slope.is_none() {
                kernel_slope = Some(qi.clone() * coef.signum());
            }
        } else {
            quad += 0.25 * coef * coef / lam;
            minimizer += qi * (0.5 * coef / lam);
        }
    }

    if let Some(dir) = kernel_slope {
        verdict.result = false;
        verdict.margin = f64::NEG_INFINITY;
        verdict.witness = Some(graph_point_from_coeffs(rel, &dir));
        return Ok(verdict);
    }
    let inf = q - quad;
    verdict.margin = inf;
    verdict.result = inf >= -tol;
    verdict.witness = Some(graph_point_from_coeffs(rel, &minimizer));

    // Cross-route: the line-wise discriminant inequality
    // (⟨x, v_j⟩ + ⟨u_j, x*⟩)² ≤ 4⟨x,x*⟩⟨u_j, v_j⟩ per basis element is a
    // consequence of inf ≥ 0; a decisive violation flags an internal bug.
    if verdict.result && verdict.margin >= tol {
        let scale = 1.0 + q.abs() + b.norm_squared();
        for j in 0..k {
            let violation = b[j] * b[j] - 4.0 * q * p[(j, j)];
            if violation > 1e3 * tol * scale {
                return Err(Error::CriterionDisagreement(format!(
                    "exact infimum {inf:.3e} is nonnegative but the line discriminant at basis \
                     column {j} is violated by {violation:.3e}"
                )));
            }
        }
    }
    Ok(verdict)
}

/// For a maximal monotone skew relation, the adjoint is the unique maximal
/// monotone extension of the negation. The two checkable halves: the
/// containment `gra(−A) ⊆ gra A*` and maximality of the adjoint.
pub fn unique_extension_check(rel: &LinearRelation, tol: f64) -> Result<MonotonicityVerdict> {
    let maximal = is_maximal_monotone(rel, tol)?;
    let skew = is_skew(rel, tol);
    if !maximal.result || !skew.result {
        return Err(Error::Precondition(format!(
            "unique_extension_check requires a maximal monotone skew relation \
             (maximal: {}, skew margin {:.3e})",
            maximal.result, skew.margin
        )));
    }
    let adj = rel.adjoint();
    let resid = adj
        .graph()
        .containment_residual(rel.negate().graph())
        .unwrap_or(f64::INFINITY);
    let adj_maximal = is_maximal_monotone(&adj, tol)?;
    let result = resid <= tol && adj_maximal.result;
    Ok(MonotonicityVerdict::new("unique_extension_check", result, resid))
}
