//! Weighted finite-dimensional Hilbert spaces: contexts, vectors, and
//! orthonormal subspaces.
//!
//! The inner product is `<x, y> = sum_i w_i * x_i * y_i` with strictly positive
//! weights. Every vector and subspace carries a shared reference to its
//! [`HilbertContext`]; operations mixing contexts fail with
//! [`Error::ContextMismatch`].

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::sync::Arc;

/// Relative rank tolerance for orthonormalization and rank decisions.
pub const RANK_TOL: f64 = 1e-10;

/// Dimension plus diagonal inner-product weights. Shared via `Arc`; equality is
/// by value (dimension and exact weight bits), so independently constructed
/// contexts with identical weights are interchangeable.
#[derive(Debug, PartialEq)]
pub struct HilbertContext {
    dim: usize,
    weights: DVector<f64>,
}

impl HilbertContext {
    pub fn new(weights: &[f64]) -> Result<Arc<Self>> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        for &w in weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidWeights(format!("weight {w}")));
            }
        }
        Ok(Arc::new(Self {
            dim: weights.len(),
            weights: DVector::from_column_slice(weights),
        }))
    }

    /// All weights 1 (the plain Euclidean inner product).
    pub fn unweighted(dim: usize) -> Arc<Self> {
        Self::new(&vec![1.0; dim]).expect("unit weights are valid")
    }

    /// Uniform weight `w` in every coordinate.
    pub fn uniform(dim: usize, w: f64) -> Result<Arc<Self>> {
        Self::new(&vec![w; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &DVector<f64> {
        &self.weights
    }

    /// The product context of `copies` factors: dimension `copies * dim`,
    /// weights repeated blockwise. Graphs of relations live in `power(2)`.
    pub fn power(self: &Arc<Self>, copies: usize) -> Arc<Self> {
        let mut w = Vec::with_capacity(self.dim * copies);
        for _ in 0..copies {
            w.extend(self.weights.iter().copied());
        }
        Arc::new(Self {
            dim: self.dim * copies,
            weights: DVector::from_vec(w),
        })
    }

    /// Context over the first `k` coordinates of this one.
    pub fn prefix(self: &Arc<Self>, k: usize) -> Arc<Self> {
        assert!(k >= 1 && k <= self.dim);
        Arc::new(Self {
            dim: k,
            weights: DVector::from_iterator(k, self.weights.iter().take(k).copied()),
        })
    }

    pub fn same(a: &Arc<Self>, b: &Arc<Self>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }

    fn check_same_for(a: &Arc<Self>, b: &Arc<Self>, what: &str) -> Result<()> {
        if Self::same(a, b) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(format!(
                "{what}: dims {} vs {}",
                a.dim, b.dim
            )))
        }
    }

    pub(crate) fn check_same(self: &Arc<Self>, other: &Arc<Self>) -> Result<()> {
        Self::check_same_for(self, other, "context")
    }

    pub(crate) fn w_inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            acc += self.weights[i] * a[i] * b[i];
        }
        acc
    }

    pub(crate) fn w_norm(&self, a: &DVector<f64>) -> f64 {
        self.w_inner(a, a).max(0.0).sqrt()
    }
}

/// A vector bound to a context. Serializes as a plain JSON array; the context
/// is implied by the container.
#[derive(Debug, Clone)]
pub struct Vector {
    ctx: Arc<HilbertContext>,
    coords: DVector<f64>,
}

impl Vector {
    pub fn new(ctx: &Arc<HilbertContext>, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != ctx.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} in context of dimension {}",
                coords.len(),
                ctx.dim()
            )));
        }
        Ok(Self {
            ctx: Arc::clone(ctx),
            coords: DVector::from_vec(coords),
        })
    }

    pub(crate) fn from_dvector(ctx: &Arc<HilbertContext>, coords: DVector<f64>) -> Self {
        debug_assert_eq!(coords.len(), ctx.dim());
        Self {
            ctx: Arc::clone(ctx),
            coords,
        }
    }

    pub fn zeros(ctx: &Arc<HilbertContext>) -> Self {
        Self::from_dvector(ctx, DVector::zeros(ctx.dim()))
    }

    /// Standard basis vector `e_i` (0-based index, unnormalized).
    pub fn basis(ctx: &Arc<HilbertContext>, i: usize) -> Self {
        let mut c = DVector::zeros(ctx.dim());
        c[i] = 1.0;
        Self::from_dvector(ctx, c)
    }

    pub fn ctx(&self) -> &Arc<HilbertContext> {
        &self.ctx
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }

    pub fn inner(&self, other: &Self) -> Result<f64> {
        HilbertContext::check_same_for(&self.ctx, &other.ctx, "inner product")?;
        Ok(self.ctx.w_inner(&self.coords, &other.coords))
    }

    pub fn norm(&self) -> f64 {
        self.ctx.w_norm(&self.coords)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        HilbertContext::check_same_for(&self.ctx, &other.ctx, "vector sum")?;
        Ok(Self::from_dvector(&self.ctx, &self.coords + &other.coords))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        HilbertContext::check_same_for(&self.ctx, &other.ctx, "vector difference")?;
        Ok(Self::from_dvector(&self.ctx, &self.coords - &other.coords))
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_dvector(&self.ctx, &self.coords * k)
    }

    /// Concatenate with another vector into the given (larger) context.
    pub fn stack(&self, other: &Self, out: &Arc<HilbertContext>) -> Result<Self> {
        if self.ctx.dim() + other.ctx.dim() != out.dim() {
            return Err(Error::DimensionMismatch("stack target dimension".into()));
        }
        let mut c = DVector::zeros(out.dim());
        c.rows_mut(0, self.ctx.dim()).copy_from(&self.coords);
        c.rows_mut(self.ctx.dim(), other.ctx.dim())
            .copy_from(&other.coords);
        Ok(Self::from_dvector(out, c))
    }

    /// Split a product-context vector into its two component blocks.
    pub fn split(&self, base: &Arc<HilbertContext>) -> Result<(Self, Self)> {
        let n = base.dim();
        if self.ctx.dim() != 2 * n {
            return Err(Error::DimensionMismatch("split of non-product vector".into()));
        }
        let x = Self::from_dvector(base, self.coords.rows(0, n).into_owned());
        let y = Self::from_dvector(base, self.coords.rows(n, n).into_owned());
        Ok((x, y))
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.coords.len()))?;
        for v in self.coords.iter() {
            seq.serialize_element(v)?;
        }
        seq.end()
    }
}

/// A subspace stored as a matrix of orthonormal basis columns (orthonormal in
/// the weighted inner product). `rank() == 0` is the zero subspace.
#[derive(Debug, Clone)]
pub struct Subspace {
    ctx: Arc<HilbertContext>,
    basis: DMatrix<f64>, // dim x rank, W-orthonormal columns
}

impl Subspace {
    /// Modified Gram-Schmidt with one re-orthogonalization pass. Candidates
    /// whose residual after projection is `<= tol * (1 + original norm)` are
    /// dropped; this is the rank decision.
    pub fn orthonormalize(
        ctx: &Arc<HilbertContext>,
        candidates: &[Vector],
        tol: f64,
    ) -> Result<Self> {
        for v in candidates {
            HilbertContext::check_same_for(ctx, &v.ctx, "orthonormalize")?;
        }
        let cols: Vec<DVector<f64>> = candidates.iter().map(|v| v.coords.clone()).collect();
        Ok(Self::mgs(ctx, &cols, tol))
    }

    pub(crate) fn mgs(ctx: &Arc<HilbertContext>, cols: &[DVector<f64>], tol: f64) -> Self {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        Self::mgs_extend(ctx, &mut basis, cols, tol, None);
        Self::from_basis_columns(ctx, basis)
    }

    // Extends `basis` (already W-orthonormal) by the accepted candidates.
    // `stop_at` bounds the total basis size (early exit for complements).
    fn mgs_extend(
        ctx: &Arc<HilbertContext>,
        basis: &mut Vec<DVector<f64>>,
        cols: &[DVector<f64>],
        tol: f64,
        stop_at: Option<usize>,
    ) {
        for v in cols {
            if let Some(cap) = stop_at {
                if basis.len() >= cap {
                    return;
                }
            }
            let scale = 1.0 + ctx.w_norm(v);
            let mut r = v.clone();
            // one re-orthogonalization pass after the first sweep
            for _ in 0..2 {
                for b in basis.iter() {
                    let c = ctx.w_inner(&r, b);
                    r.axpy(-c, b, 1.0);
                }
            }
            let n = ctx.w_norm(&r);
            if n > tol * scale {
                basis.push(r / n);
            }
        }
    }

    fn from_basis_columns(ctx: &Arc<HilbertContext>, cols: Vec<DVector<f64>>) -> Self {
        let k = cols.len();
        let mut m = DMatrix::zeros(ctx.dim(), k);
        for (j, c) in cols.iter().enumerate() {
            m.set_column(j, c);
        }
        Self {
            ctx: Arc::clone(ctx),
            basis: m,
        }
    }

    /// Trusted constructor: columns must already be W-orthonormal (checked in
    /// debug builds only).
    pub(crate) fn from_orthonormal(ctx: &Arc<HilbertContext>, basis: DMatrix<f64>) -> Self {
        debug_assert_eq!(basis.nrows(), ctx.dim());
        #[cfg(debug_assertions)]
        {
            for j in 0..basis.ncols() {
                for l in j..basis.ncols() {
                    let g = ctx.w_inner(&basis.column(j).into_owned(), &basis.column(l).into_owned());
                    let want = if j == l { 1.0 } else { 0.0 };
                    debug_assert!(
                        (g - want).abs() < 1e-7,
                        "non-orthonormal basis: gram[{j},{l}] = {g}"
                    );
                }
            }
        }
        Self {
            ctx: Arc::clone(ctx),
            basis,
        }
    }

    pub fn zero(ctx: &Arc<HilbertContext>) -> Self {
        Self {
            ctx: Arc::clone(ctx),
            basis: DMatrix::zeros(ctx.dim(), 0),
        }
    }

    pub fn full(ctx: &Arc<HilbertContext>) -> Self {
        let n = ctx.dim();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0 / ctx.weights()[i].sqrt();
        }
        Self {
            ctx: Arc::clone(ctx),
            basis: m,
        }
    }

    /// Span of a single vector (zero subspace if `v` is numerically zero).
    pub fn span_of(v: &Vector, tol: f64) -> Self {
        Self::mgs(&v.ctx, std::slice::from_ref(&v.coords), tol)
    }

    pub fn ctx(&self) -> &Arc<HilbertContext> {
        &self.ctx
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> Vector {
        Vector::from_dvector(&self.ctx, self.basis.column(j).into_owned())
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        (0..self.rank()).map(|j| self.basis_vector(j)).collect()
    }

    /// Orthogonal projection onto the subspace.
    pub fn project(&self, v: &Vector) -> Result<Vector> {
        HilbertContext::check_same_for(&self.ctx, &v.ctx, "projection")?;
        Ok(Vector::from_dvector(&self.ctx, self.project_raw(&v.coords)))
    }

    pub(crate) fn project_raw(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.ctx.dim());
        for j in 0..self.rank() {
            let b = self.basis.column(j);
            let mut c = 0.0;
            for i in 0..self.ctx.dim() {
                c += self.ctx.weights()[i] * v[i] * b[i];
            }
            out.axpy(c, &b.into_owned(), 1.0);
        }
        out
    }

    /// Distance from `v` to the subspace (weighted norm of the residual).
    pub fn residual(&self, v: &Vector) -> Result<f64> {
        HilbertContext::check_same_for(&self.ctx, &v.ctx, "residual")?;
        let r = &v.coords - self.project_raw(&v.coords);
        Ok(self.ctx.w_norm(&r))
    }

    pub fn contains(&self, v: &Vector, tol: f64) -> Result<bool> {
        Ok(self.residual(v)? <= tol * (1.0 + v.norm()))
    }

    /// Max residual of the other subspace's basis vectors relative to this one;
    /// zero iff `other` is contained in `self` (basis vectors have norm 1, so
    /// this is an absolute measure).
    pub fn containment_residual(&self, other: &Self) -> Result<f64> {
        HilbertContext::check_same_for(&self.ctx, &other.ctx, "containment")?;
        let mut worst: f64 = 0.0;
        for j in 0..other.rank() {
            let col = other.basis.column(j).into_owned();
            let r = &col - self.project_raw(&col);
            worst = worst.max(self.ctx.w_norm(&r));
        }
        Ok(worst)
    }

    pub fn contains_subspace(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.containment_residual(other)? <= tol)
    }

    /// Subspace equality is mutual containment (never basis comparison).
    pub fn equals(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.contains_subspace(other, tol)? && other.contains_subspace(self, tol)?)
    }

    /// Orthogonal complement. rank(S) + rank(complement(S)) == dim always: the
    /// standard basis is appended and MGS keeps exactly dim - rank survivors.
    pub fn complement(&self) -> Self {
        let n = self.ctx.dim();
        let mut accepted: Vec<DVector<f64>> = (0..self.rank())
            .map(|j| self.basis.column(j).into_owned())
            .collect();
        let k = accepted.len();
        let units: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                v
            })
            .collect();
        Self::mgs_extend(&self.ctx, &mut accepted, &units, RANK_TOL, Some(n));
        // The full space is spanned, so exactly n columns survive in total.
        debug_assert_eq!(accepted.len(), n);
        let comp: Vec<DVector<f64>> = accepted.split_off(k);
        Self::from_basis_columns(&self.ctx, comp)
    }

    /// Span sum.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        HilbertContext::check_same_for(&self.ctx, &other.ctx, "subspace sum")?;
        let mut accepted: Vec<DVector<f64>> = (0..self.rank())
            .map(|j| self.basis.column(j).into_owned())
            .collect();
        let cols: Vec<DVector<f64>> = (0..other.rank())
            .map(|j| other.basis.column(j).into_owned())
            .collect();
        Self::mgs_extend(&self.ctx, &mut accepted, &cols, RANK_TOL, None);
        Ok(Self::from_basis_columns(&self.ctx, accepted))
    }

    /// Intersection via complement(complement(S1) + complement(S2)).
    pub fn intersect(&self, other: &Self) -> Result<Self> {
        let c = self.complement().sum(&other.complement())?;
        Ok(c.complement())
    }

    /// JSON form: `{dim, weights, rank, basis}` with the basis flattened
    /// row-major (dim rows of rank entries).
    pub fn to_json(&self) -> serde_json::Value {
        let mut flat = Vec::with_capacity(self.ctx.dim() * self.rank());
        for i in 0..self.ctx.dim() {
            for j in 0..self.rank() {
                flat.push(self.basis[(i, j)]);
            }
        }
        serde_json::json!({
            "dim": self.ctx.dim(),
            "weights": self.ctx.weights().as_slice(),
            "rank": self.rank(),
            "basis": flat,
        })
    }
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}
