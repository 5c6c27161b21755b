//! Linear relations: set-valued linear operators represented by their graphs.
//!
//! A relation on a context of dimension `n` stores an orthonormal basis of its
//! graph, a subspace of the product context (dimension `2n`, weights
//! duplicated). Points of the graph are stacked pairs `(x, x*)`. All calculus
//! (adjoint, inverse, scaling, sum) is subspace arithmetic on graphs, so
//! multivalued relations and relations with restricted domain need no special
//! cases.

use crate::error::{Error, Result};
use crate::space::{HilbertContext, Subspace, Vector, RANK_TOL};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Image of a point under a relation: empty (point outside the domain) or an
/// affine set `particular + directions` with `particular` the minimum-norm
/// element (the principal selection).
#[derive(Debug, Clone)]
pub enum Image {
    Empty,
    Set { particular: Vector, directions: Subspace },
}

#[derive(Debug, Clone)]
pub struct LinearRelation {
    base: Arc<HilbertContext>,
    graph: Subspace, // lives in base.power(2)
}

impl LinearRelation {
    pub fn from_graph(base: &Arc<HilbertContext>, graph: Subspace) -> Result<Self> {
        let prod = base.power(2);
        if !HilbertContext::same(graph.ctx(), &prod) {
            return Err(Error::ContextMismatch(
                "relation graph must live in the product context".into(),
            ));
        }
        Ok(Self {
            base: Arc::clone(base),
            graph,
        })
    }

    /// Span of the given `(x, x*)` pairs.
    pub fn from_pairs(base: &Arc<HilbertContext>, pairs: &[(Vector, Vector)]) -> Result<Self> {
        let prod = base.power(2);
        let mut cols = Vec::with_capacity(pairs.len());
        for (x, xs) in pairs {
            cols.push(x.stack(xs, &prod)?);
        }
        let graph = Subspace::orthonormalize(&prod, &cols, RANK_TOL)?;
        Self::from_graph(base, graph)
    }

    /// Graph of the matrix `m`, optionally restricted to a domain subspace.
    pub fn from_matrix(
        base: &Arc<HilbertContext>,
        m: &DMatrix<f64>,
        domain: Option<&Subspace>,
    ) -> Result<Self> {
        let n = base.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "matrix {}x{} in context of dimension {n}",
                m.nrows(),
                m.ncols()
            )));
        }
        let dom_basis: Vec<DVector<f64>> = match domain {
            Some(d) => {
                if !HilbertContext::same(d.ctx(), base) {
                    return Err(Error::ContextMismatch("domain subspace context".into()));
                }
                (0..d.rank()).map(|j| d.basis_matrix().column(j).into_owned()).collect()
            }
            None => (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(n);
                    v[i] = 1.0;
                    v
                })
                .collect(),
        };
        let prod = base.power(2);
        let cols: Vec<DVector<f64>> = dom_basis
            .iter()
            .map(|d| {
                let mut z = DVector::zeros(2 * n);
                z.rows_mut(0, n).copy_from(d);
                z.rows_mut(n, n).copy_from(&(m * d));
                z
            })
            .collect();
        let graph = Subspace::mgs(&prod, &cols, RANK_TOL);
        Self::from_graph(base, graph)
    }

    /// The zero relation `{(0, 0)}`.
    pub fn trivial(base: &Arc<HilbertContext>) -> Self {
        let prod = base.power(2);
        Self {
            base: Arc::clone(base),
            graph: Subspace::zero(&prod),
        }
    }

    pub fn base(&self) -> &Arc<HilbertContext> {
        &self.base
    }

    pub fn graph(&self) -> &Subspace {
        &self.graph
    }

    pub fn rank(&self) -> usize {
        self.graph.rank()
    }

    /// First- and second-block components of the graph basis (`n x k` each).
    pub fn graph_blocks(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.base.dim();
        let k = self.rank();
        let b = self.graph.basis_matrix();
        (
            b.view((0, 0), (n, k)).into_owned(),
            b.view((n, 0), (n, k)).into_owned(),
        )
    }

    /// Adjoint relation: `gra A* = {(x, x*) : (x*, -x) ⟂ gra A}`. Computed by
    /// remapping an orthonormal basis of the graph's orthogonal complement
    /// through the isometry `(u, v) -> (-v, u)`.
    pub fn adjoint(&self) -> Self {
        let n = self.base.dim();
        let comp = self.graph.complement();
        let k = comp.rank();
        let mut basis = DMatrix::zeros(2 * n, k);
        for j in 0..k {
            let c = comp.basis_matrix().column(j);
            for i in 0..n {
                basis[(i, j)] = -c[n + i];
                basis[(n + i, j)] = c[i];
            }
        }
        Self {
            base: Arc::clone(&self.base),
            graph: Subspace::from_orthonormal(self.graph.ctx(), basis),
        }
    }

    /// Inverse relation: swap the blocks (an isometry of the product).
    pub fn inverse(&self) -> Self {
        let n = self.base.dim();
        let k = self.rank();
        let mut basis = DMatrix::zeros(2 * n, k);
        for j in 0..k {
            let c = self.graph.basis_matrix().column(j);
            for i in 0..n {
                basis[(i, j)] = c[n + i];
                basis[(n + i, j)] = c[i];
            }
        }
        Self {
            base: Arc::clone(&self.base),
            graph: Subspace::from_orthonormal(self.graph.ctx(), basis),
        }
    }

    /// `-A`, i.e. `{(x, -x*)}` (an isometry; no re-orthonormalization needed).
    pub fn negate(&self) -> Self {
        let n = self.base.dim();
        let k = self.rank();
        let mut basis = self.graph.basis_matrix().clone();
        for j in 0..k {
            for i in 0..n {
                basis[(n + i, j)] = -basis[(n + i, j)];
            }
        }
        Self {
            base: Arc::clone(&self.base),
            graph: Subspace::from_orthonormal(self.graph.ctx(), basis),
        }
    }

    /// `kA = {(x, k x*)}` for nonzero `k`.
    pub fn scale(&self, k: f64) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::ZeroScale);
        }
        let n = self.base.dim();
        let cols: Vec<DVector<f64>> = (0..self.rank())
            .map(|j| {
                let mut c = self.graph.basis_matrix().column(j).into_owned();
                for i in 0..n {
                    c[n + i] *= k;
                }
                c
            })
            .collect();
        Ok(Self {
            base: Arc::clone(&self.base),
            graph: Subspace::mgs(self.graph.ctx(), &cols, RANK_TOL),
        })
    }

    /// Relation sum `A + B = {(x, a* + b*) : (x, a*) ∈ A, (x, b*) ∈ B}`.
    ///
    /// Built in the lifted space of triples `(x, a*, b*)` as the intersection
    /// of `{(x, a*) ∈ gra A, b* free}` with `{(x, b*) ∈ gra B, a* free}`,
    /// then pushed through `(x, a*, b*) -> (x, a* + b*)`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if !HilbertContext::same(&self.base, &other.base) {
            return Err(Error::ContextMismatch("relation sum".into()));
        }
        let n = self.base.dim();
        let lifted = self.base.power(3);
        let w = self.base.weights();

        let embed = |rel: &Self, free_block: usize, value_block: usize| -> Subspace {
            // graph columns (u, v) placed at blocks (0, value_block), plus the
            // full free block; all columns stay orthonormal by construction.
            let k = rel.rank();
            let mut basis = DMatrix::zeros(3 * n, k + n);
            for j in 0..k {
                let c = rel.graph.basis_matrix().column(j);
                for i in 0..n {
                    basis[(i, j)] = c[i];
                    basis[(value_block * n + i, j)] = c[n + i];
                }
            }
            for i in 0..n {
                basis[(free_block * n + i, k + i)] = 1.0 / w[i].sqrt();
            }
            Subspace::from_orthonormal(&lifted, basis)
        };

        let wa = embed(self, 2, 1); // (x, a*, free)
        let wb = embed(other, 1, 2); // (x, free, b*)
        let joint = wa.intersect(&wb)?;

        let prod = self.base.power(2);
        let cols: Vec<DVector<f64>> = (0..joint.rank())
            .map(|j| {
                let c = joint.basis_matrix().column(j);
                let mut z = DVector::zeros(2 * n);
                for i in 0..n {
                    z[i] = c[i];
                    z[n + i] = c[n + i] + c[2 * n + i];
                }
                z
            })
            .collect();
        Ok(Self {
            base: Arc::clone(&self.base),
            graph: Subspace::mgs(&prod, &cols, RANK_TOL),
        })
    }

    pub fn domain(&self) -> Subspace {
        let (b1, _) = self.graph_blocks();
        let cols: Vec<DVector<f64>> = (0..b1.ncols()).map(|j| b1.column(j).into_owned()).collect();
        Subspace::mgs(&self.base, &cols, RANK_TOL)
    }

    pub fn range(&self) -> Subspace {
        let (_, b2) = self.graph_blocks();
        let cols: Vec<DVector<f64>> = (0..b2.ncols()).map(|j| b2.column(j).into_owned()).collect();
        Subspace::mgs(&self.base, &cols, RANK_TOL)
    }

    /// The multivalued part `A(0)`: directions along which images are affine.
    pub fn multivalued_directions(&self) -> Subspace {
        let (b1, b2) = self.graph_blocks();
        let null = coefficient_null_space(&b1);
        let cols: Vec<DVector<f64>> = (0..null.len()).map(|j| &b2 * &null[j]).collect();
        Subspace::mgs(&self.base, &cols, RANK_TOL)
    }

    /// Image of `x`: empty if `x` is outside the domain, otherwise the affine
    /// set with its minimum-norm particular element.
    pub fn image(&self, x: &Vector) -> Result<Image> {
        if !HilbertContext::same(x.ctx(), &self.base) {
            return Err(Error::ContextMismatch("image query".into()));
        }
        let (b1, b2) = self.graph_blocks();
        if self.rank() == 0 {
            return Ok(if x.norm() <= RANK_TOL {
                Image::Set {
                    particular: Vector::zeros(&self.base),
                    directions: Subspace::zero(&self.base),
                }
            } else {
                Image::Empty
            });
        }
        // Least-squares in the weighted norm: scale rows by sqrt(w).
        let n = self.base.dim();
        let mut flat = b1.clone();
        let mut rhs = x.coords().clone();
        for i in 0..n {
            let s = self.base.weights()[i].sqrt();
            for j in 0..flat.ncols() {
                flat[(i, j)] *= s;
            }
            rhs[i] *= s;
        }
        let svd = nalgebra::SVD::new(flat, true, true);
        let c0 = svd
            .solve(&rhs, RANK_TOL)
            .map_err(|e| Error::Precondition(format!("SVD solve failed: {e}")))?;
        let achieved = &b1 * &c0;
        let resid = &achieved - x.coords();
        if self.base.w_norm(&resid) > RANK_TOL.sqrt() * 1e-2 * (1.0 + x.norm()) {
            return Ok(Image::Empty);
        }
        let directions = self.multivalued_directions();
        let raw = &b2 * &c0;
        let particular = &raw - directions.project_raw(&raw);
        Ok(Image::Set {
            particular: Vector::new(&self.base, particular.as_slice().to_vec())?,
            directions,
        })
    }

    /// Minimum-norm selection of the image, if the point is in the domain.
    pub fn principal_image(&self, x: &Vector) -> Result<Option<Vector>> {
        match self.image(x)? {
            Image::Empty => Ok(None),
            Image::Set { particular, .. } => Ok(Some(particular)),
        }
    }

    /// Extract the matrix of a full-domain single-valued relation.
    pub fn matrix(&self) -> Result<DMatrix<f64>> {
        let n = self.base.dim();
        if self.multivalued_directions().rank() != 0 {
            return Err(Error::NotSingleValued);
        }
        let dom_rank = self.domain().rank();
        if dom_rank != n {
            return Err(Error::NotFullDomain { rank: dom_rank, dim: n });
        }
        debug_assert_eq!(self.rank(), n);
        let (b1, b2) = self.graph_blocks();
        let inv = b1
            .try_inverse()
            .ok_or_else(|| Error::Precondition("graph first block not invertible".into()))?;
        Ok(&b2 * inv)
    }

    /// Split a full-domain single-valued relation into symmetric and skew
    /// matrix parts with respect to the weighted adjoint `W^{-1} M^T W`.
    pub fn parts(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let m = self.matrix()?;
        let ma = weighted_adjoint_matrix(&self.base, &m);
        Ok((0.5 * (&m + &ma), 0.5 * (&m - &ma)))
    }

    pub fn graph_equals(&self, other: &Self, tol: f64) -> Result<bool> {
        self.graph.equals(&other.graph, tol)
    }

    /// True iff `gra self ⊆ gra other`.
    pub fn extended_by(&self, other: &Self, tol: f64) -> Result<bool> {
        other.graph.contains_subspace(&self.graph, tol)
    }
}

/// The adjoint of a full-domain matrix operator in the weighted inner product.
pub fn weighted_adjoint_matrix(ctx: &Arc<HilbertContext>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ctx.dim();
    let mut out = m.transpose();
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] *= ctx.weights()[j] / ctx.weights()[i];
        }
    }
    out
}

/// Euclidean-orthonormal basis of the null space of `a` (coefficient space),
/// via complement of the row span.
pub(crate) fn coefficient_null_space(a: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let k = a.ncols();
    if k == 0 {
        return Vec::new();
    }
    let coef_ctx = HilbertContext::unweighted(k);
    let rows: Vec<DVector<f64>> = (0..a.nrows())
        .map(|i| a.row(i).transpose().into_owned())
        .collect();
    let row_space = Subspace::mgs(&coef_ctx, &rows, RANK_TOL);
    let null = row_space.complement();
    (0..null.rank())
        .map(|j| null.basis_matrix().column(j).into_owned())
        .collect()
}
