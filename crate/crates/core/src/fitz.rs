//! Partial quadratic functionals and the Fitzpatrick calculus.
//!
//! A `PartialQuadratic` is a convex quadratic on an affine set, `+∞` off it —
//! the smallest function family containing indicators of graphs, the duality
//! pairing restricted to graphs, and every Fitzpatrick function built here,
//! and closed under the operations we need: Fenchel conjugate (in the weighted
//! pairing), slot transpose, linear precomposition, addition, and partial
//! minimization. Every operation is a pseudoinverse/eigendecomposition closed
//! form; nothing iterates.
//!
//! Conventions: values at `z = origin + D·s` are `½ sᵀHs + gᵀs + constant`
//! with `D` a W-orthonormal direction basis, so `H` is scale-normalized no
//! matter how skewed the weights are. Ambient quadratics entering
//! constructors are plain coordinate forms `½ zᵀAz + bᵀz + c`.

use crate::error::{Error, Result};
use crate::linrel::LinearRelation;
use crate::space::{HilbertContext, Subspace, Vector, RANK_TOL};
use nalgebra::{DMatrix, DVector};
use serde::ser::{Serialize, SerializeMap, Serializer};
use std::fmt;
use std::sync::Arc;

/// Curvature classification band: eigenvalues within the band count as zero
/// (flat directions trigger domain constraints and recession analysis). The
/// band is widened proportionally when the spectrum itself is large.
pub const PSD_EIG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqTag {
    Proper,
    EverywherePlusInfinity,
    MinusInfinityOnDomain,
}

impl PqTag {
    fn as_str(self) -> &'static str {
        match self {
            PqTag::Proper => "proper",
            PqTag::EverywherePlusInfinity => "everywhere_plus_infinity",
            PqTag::MinusInfinityOnDomain => "minus_infinity_on_domain",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedScalar {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
}

impl ExtendedScalar {
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtendedScalar::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_plus_infinity(self) -> bool {
        self == ExtendedScalar::PlusInfinity
    }

    /// `self ≥ other − slack` in the extended-real order.
    pub fn ge_with_slack(self, other: ExtendedScalar, slack: f64) -> bool {
        use ExtendedScalar::*;
        match (self, other) {
            (PlusInfinity, _) => true,
            (_, MinusInfinity) => true,
            (MinusInfinity, _) => false,
            (_, PlusInfinity) => false,
            (Finite(a), Finite(b)) => a >= b - slack,
        }
    }
}

impl fmt::Display for ExtendedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedScalar::Finite(v) => write!(f, "{v}"),
            ExtendedScalar::PlusInfinity => write!(f, "+inf"),
            ExtendedScalar::MinusInfinity => write!(f, "-inf"),
        }
    }
}

impl Serialize for ExtendedScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedScalar::Finite(v) => s.serialize_f64(*v),
            ExtendedScalar::PlusInfinity => s.serialize_str("+inf"),
            ExtendedScalar::MinusInfinity => s.serialize_str("-inf"),
        }
    }
}

/// Affine subset `origin + span(directions)` with the canonical (minimum
/// weighted norm) origin, so set equality is coordinate equality.
#[derive(Debug, Clone)]
struct AffineSet {
    origin: DVector<f64>,
    dirs: Subspace,
}

impl AffineSet {
    fn new(origin: DVector<f64>, dirs: Subspace) -> Self {
        let proj = dirs.project_raw(&origin);
        Self {
            origin: origin - proj,
            dirs,
        }
    }

    fn subspace(dirs: Subspace) -> Self {
        let n = dirs.ctx().dim();
        Self {
            origin: DVector::zeros(n),
            dirs,
        }
    }

    fn rank(&self) -> usize {
        self.dirs.rank()
    }

    /// Direction coordinates of `z` if it lies in the set (within `tol`).
    fn coords_of(&self, ctx: &HilbertContext, z: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
        let shifted = z - &self.origin;
        let d = self.dirs.basis_matrix();
        let mut c = DVector::zeros(self.rank());
        for j in 0..self.rank() {
            c[j] = ctx.w_inner(&d.column(j).into_owned(), &shifted);
        }
        let resid = &shifted - d * &c;
        if ctx.w_norm(&resid) <= tol * (1.0 + ctx.w_norm(z)) {
            Some(c)
        } else {
            None
        }
    }

    /// Equality of affine sets: same direction span and same canonical origin.
    fn equals(&self, other: &AffineSet, ctx: &HilbertContext, tol: f64) -> Result<bool> {
        if !self.dirs.equals(&other.dirs, tol)? {
            return Ok(false);
        }
        let diff = &self.origin - &other.origin;
        Ok(ctx.w_norm(&diff) <= tol * (1.0 + ctx.w_norm(&self.origin)))
    }
}

#[derive(Debug, Clone)]
pub struct PartialQuadratic {
    ctx: Arc<HilbertContext>,
    tag: PqTag,
    dom: AffineSet,
    h: DMatrix<f64>,
    g: DVector<f64>,
    c: f64,
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// Minimum-W-norm solution of the linear constraint system `rows·y = rhs`,
/// with the W-orthonormal null-space directions; `None` when infeasible.
fn solve_constraints(
    ctx: &Arc<HilbertContext>,
    rows: &[DVector<f64>],
    rhs: &[f64],
) -> Option<(DVector<f64>, Subspace)> {
    let n = ctx.dim();
    if rows.is_empty() {
        return Some((DVector::zeros(n), Subspace::zero(ctx).complement()));
    }
    // Substitute y = W^{-1/2} ŷ so the minimum-Euclidean-norm solve in ŷ is
    // the minimum-W-norm solve in y.
    let mut b = DMatrix::zeros(rows.len(), n);
    for (i, r) in rows.iter().enumerate() {
        for j in 0..n {
            b[(i, j)] = r[j] / ctx.weights()[j].sqrt();
        }
    }
    let d = DVector::from_column_slice(rhs);
    let svd = nalgebra::SVD::new(b.clone(), true, true);
    let sigma_max = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let yh = svd.solve(&d, RANK_TOL * sigma_max.max(1.0)).ok()?;
    let resid = &b * &yh - &d;
    if resid.norm() > RANK_TOL.sqrt() * 1e-2 * (1.0 + d.norm()) {
        return None;
    }
    let mut y0 = yh;
    for j in 0..n {
        y0[j] /= ctx.weights()[j].sqrt();
    }
    // Null directions: W-complement of the span of the W-gradients W^{-1}r.
    let normals: Vec<DVector<f64>> = rows
        .iter()
        .map(|r| {
            let mut v = r.clone();
            for j in 0..n {
                v[j] /= ctx.weights()[j];
            }
            v
        })
        .collect();
    let normal_span = Subspace::mgs(ctx, &normals, RANK_TOL);
    Some((y0, normal_span.complement()))
}

impl PartialQuadratic {
    fn proper(ctx: Arc<HilbertContext>, dom: AffineSet, h: DMatrix<f64>, g: DVector<f64>, c: f64) -> Self {
        let k = dom.rank();
        debug_assert_eq!(h.nrows(), k);
        debug_assert_eq!(h.ncols(), k);
        debug_assert_eq!(g.len(), k);
        Self {
            ctx,
            tag: PqTag::Proper,
            dom,
            h: symmetrize(&h),
            g,
            c,
        }
    }

    pub fn plus_infinity_everywhere(ctx: &Arc<HilbertContext>) -> Self {
        Self {
            ctx: Arc::clone(ctx),
            tag: PqTag::EverywherePlusInfinity,
            dom: AffineSet::subspace(Subspace::zero(ctx)),
            h: DMatrix::zeros(0, 0),
            g: DVector::zeros(0),
            c: 0.0,
        }
    }

    fn minus_infinity_on(ctx: &Arc<HilbertContext>, dom: AffineSet) -> Self {
        let k = dom.rank();
        Self {
            ctx: Arc::clone(ctx),
            tag: PqTag::MinusInfinityOnDomain,
            dom,
            h: DMatrix::zeros(k, k),
            g: DVector::zeros(k),
            c: f64::NEG_INFINITY,
        }
    }

    /// Indicator of a linear subspace: zero on it, `+∞` off it.
    pub fn indicator_of_subspace(s: &Subspace) -> Self {
        let ctx = Arc::clone(s.ctx());
        let k = s.rank();
        Self::proper(
            ctx,
            AffineSet::subspace(s.clone()),
            DMatrix::zeros(k, k),
            DVector::zeros(k),
            0.0,
        )
    }

    /// Restriction of the ambient quadratic `½ zᵀAz + bᵀz + c` (coordinate
    /// form) to the affine set `origin + span(directions)`, `+∞` elsewhere.
    pub fn from_ambient(
        ctx: &Arc<HilbertContext>,
        origin: &DVector<f64>,
        directions: &Subspace,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        c: f64,
    ) -> Result<Self> {
        let n = ctx.dim();
        if origin.len() != n || a.nrows() != n || a.ncols() != n || b.len() != n {
            return Err(Error::DimensionMismatch("ambient quadratic".into()));
        }
        if !HilbertContext::same(directions.ctx(), ctx) {
            return Err(Error::ContextMismatch("ambient quadratic directions".into()));
        }
        let dom = AffineSet::new(origin.clone(), directions.clone());
        let d = dom.dirs.basis_matrix();
        let a_sym = symmetrize(a);
        let h = d.transpose() * &a_sym * d;
        let ao = &a_sym * &dom.origin;
        let g = d.transpose() * (&ao + b);
        let c0 = 0.5 * dom.origin.dot(&ao) + b.dot(&dom.origin) + c;
        Ok(Self::proper(Arc::clone(ctx), dom, h, g, c0))
    }

    /// The quadratic form `q_M(x) = ½⟨x, Mx⟩` of a matrix on the full space.
    pub fn quadratic_form(ctx: &Arc<HilbertContext>, m: &DMatrix<f64>) -> Result<Self> {
        let n = ctx.dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch("quadratic form matrix".into()));
        }
        let mut wm = m.clone();
        for i in 0..n {
            for j in 0..n {
                wm[(i, j)] *= ctx.weights()[i];
            }
        }
        let full = Subspace::zero(ctx).complement();
        Self::from_ambient(ctx, &DVector::zeros(n), &full, &symmetrize(&wm), &DVector::zeros(n), 0.0)
    }

    pub fn ctx(&self) -> &Arc<HilbertContext> {
        &self.ctx
    }

    pub fn tag(&self) -> PqTag {
        self.tag
    }

    pub fn domain_origin(&self) -> Vector {
        Vector::new(&self.ctx, self.dom.origin.as_slice().to_vec()).expect("origin in ctx")
    }

    pub fn domain_directions(&self) -> &Subspace {
        &self.dom.dirs
    }

    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn linear_part(&self) -> &DVector<f64> {
        &self.g
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Multiply values by `s > 0` (keeps convexity and the domain).
    pub fn scale_value(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::ZeroScale);
        }
        let mut out = self.clone();
        if out.tag == PqTag::Proper {
            out.h *= s;
            out.g *= s;
            out.c *= s;
        }
        Ok(out)
    }

    pub fn evaluate(&self, z: &Vector, tol: f64) -> Result<ExtendedScalar> {
        self.ctx.check_same(z.ctx())?;
        match self.tag {
            PqTag::EverywherePlusInfinity => Ok(ExtendedScalar::PlusInfinity),
            PqTag::MinusInfinityOnDomain => {
                Ok(match self.dom.coords_of(&self.ctx, z.coords(), tol) {
                    Some(_) => ExtendedScalar::MinusInfinity,
                    None => ExtendedScalar::PlusInfinity,
                })
            }
            PqTag::Proper => Ok(match self.dom.coords_of(&self.ctx, z.coords(), tol) {
                Some(s) => {
                    ExtendedScalar::Finite(0.5 * s.dot(&(&self.h * &s)) + self.g.dot(&s) + self.c)
                }
                None => ExtendedScalar::PlusInfinity,
            }),
        }
    }

    /// Fenchel conjugate in the weighted pairing: `f*(w) = sup ⟨w,z⟩ − f(z)`.
    pub fn conjugate(&self) -> Result<Self> {
        match self.tag {
            PqTag::EverywherePlusInfinity => {
                // sup over nothing: −∞ everywhere
                let full = AffineSet::subspace(Subspace::zero(&self.ctx).complement());
                return Ok(Self::minus_infinity_on(&self.ctx, full));
            }
            PqTag::MinusInfinityOnDomain => {
                return Ok(Self::plus_infinity_everywhere(&self.ctx));
            }
            PqTag::Proper => {}
        }
        let k = self.dom.rank();
        let d = self.dom.dirs.basis_matrix();
        let w = self.ctx.weights();
        let n = self.ctx.dim();

        let eig = self.h.clone().symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let band = PSD_EIG_TOL * lam_max.max(1.0);

        // Flat modes force affine constraints on the conjugate's domain;
        // curved modes contribute rank-one terms through the pseudoinverse.
        let mut normals: Vec<DVector<f64>> = Vec::new(); // W-orthonormal
        let mut normal_rhs: Vec<f64> = Vec::new();
        let mut pos: Vec<(f64, DVector<f64>, f64)> = Vec::new(); // (λ, N_i, g_i')
        for i in 0..k {
            let lam = eig.eigenvalues[i];
            let qi = eig.eigenvectors.column(i).into_owned();
            let ni = d * &qi;
            let gi = qi.dot(&self.g);
            if lam.abs() <= band {
                normals.push(ni);
                normal_rhs.push(gi);
            } else if lam > 0.0 {
                pos.push((lam, ni, gi));
            } else {
                return Err(Error::Nonconvex(lam));
            }
        }

        let (dirs, o_star) = if normals.is_empty() {
            (Subspace::zero(&self.ctx).complement(), DVector::zeros(n))
        } else {
            let nm = DMatrix::from_columns(&normals);
            let span = Subspace::from_orthonormal(&self.ctx, nm);
            let mut o = DVector::zeros(n);
            for (ni, gi) in normals.iter().zip(&normal_rhs) {
                o += ni * *gi;
            }
            (span.complement(), o)
        };

        let ks = dirs.rank();
        let e = dirs.basis_matrix();
        let mut h_star = DMatrix::zeros(ks, ks);
        let mut g_star = DVector::zeros(ks);
        let mut c_star = 0.0;
        // E^T W x for x a coordinate vector
        let etw = |x: &DVector<f64>| -> DVector<f64> {
            let mut wx = x.clone();
            for i in 0..n {
                wx[i] *= w[i];
            }
            e.transpose() * wx
        };
        for (lam, ni, gi) in &pos {
            let mi = etw(ni);
            h_star += &mi * mi.transpose() / *lam;
            g_star -= &mi * (*gi / *lam);
            c_star += gi * gi / (2.0 * lam);
        }
        g_star += etw(&self.dom.origin);
        c_star += self.ctx.w_inner(&o_star, &self.dom.origin) - self.c;

        Ok(Self::proper(
            Arc::clone(&self.ctx),
            AffineSet::new(o_star, dirs),
            h_star,
            g_star,
            c_star,
        ))
    }

    /// Swap the two halves of a product context: `f^⊺(x*, x) = f(x, x*)`.
    pub fn transpose(&self) -> Result<Self> {
        let n2 = self.ctx.dim();
        if n2 % 2 != 0 {
            return Err(Error::ContextMismatch("transpose needs a product context".into()));
        }
        let n = n2 / 2;
        for i in 0..n {
            if self.ctx.weights()[i] != self.ctx.weights()[n + i] {
                return Err(Error::ContextMismatch(
                    "transpose needs block-symmetric weights".into(),
                ));
            }
        }
        let swap = |v: &DVector<f64>| -> DVector<f64> {
            let mut out = DVector::zeros(n2);
            for i in 0..n {
                out[i] = v[n + i];
                out[n + i] = v[i];
            }
            out
        };
        let mut out = self.clone();
        out.dom.origin = swap(&self.dom.origin);
        let k = self.dom.rank();
        if k > 0 {
            let mut basis = DMatrix::zeros(n2, k);
            for j in 0..k {
                basis.set_column(j, &swap(&self.dom.dirs.basis_matrix().column(j).into_owned()));
            }
            out.dom.dirs = Subspace::from_orthonormal(&self.ctx, basis);
        }
        Ok(out)
    }

    /// Express the restriction of `self` to the affine frame
    /// `origin + span(dirs)` (assumed inside the domain) as `(H, g, c)`.
    fn rebase(&self, origin: &DVector<f64>, dirs: &Subspace) -> (DMatrix<f64>, DVector<f64>, f64) {
        let w = self.ctx.weights();
        let n = self.ctx.dim();
        let dself = self.dom.dirs.basis_matrix();
        let wtimes = |x: &DVector<f64>| -> DVector<f64> {
            let mut wx = x.clone();
            for i in 0..n {
                wx[i] *= w[i];
            }
            wx
        };
        let shift = origin - &self.dom.origin;
        let c0v = dself.transpose() * wtimes(&shift);
        let k_new = dirs.rank();
        let mut t = DMatrix::zeros(self.dom.rank(), k_new);
        for j in 0..k_new {
            let col = dirs.basis_matrix().column(j).into_owned();
            t.set_column(j, &(dself.transpose() * wtimes(&col)));
        }
        let hc = &self.h * &c0v;
        let h_new = t.transpose() * &self.h * &t;
        let g_new = t.transpose() * (&hc + &self.g);
        let c_new = 0.5 * c0v.dot(&hc) + self.g.dot(&c0v) + self.c;
        (h_new, g_new, c_new)
    }

    /// Constraint rows describing membership of the domain: `row·z = rhs`.
    fn domain_constraints(&self, l: Option<&DMatrix<f64>>) -> (Vec<DVector<f64>>, Vec<f64>) {
        let w = self.ctx.weights();
        let n = self.ctx.dim();
        let comp = self.dom.dirs.complement();
        let mut rows = Vec::with_capacity(comp.rank());
        let mut rhs = Vec::with_capacity(comp.rank());
        for j in 0..comp.rank() {
            let nj = comp.basis_matrix().column(j).into_owned();
            let mut wn = nj.clone();
            for i in 0..n {
                wn[i] *= w[i];
            }
            rhs.push(wn.dot(&self.dom.origin));
            rows.push(match l {
                Some(map) => map.transpose() * wn,
                None => wn,
            });
        }
        (rows, rhs)
    }

    /// `h(y) = f(L y)` for a coordinate matrix `L: src → this.ctx`.
    pub fn precompose_linear(&self, src_ctx: &Arc<HilbertContext>, l: &DMatrix<f64>) -> Result<Self> {
        if l.nrows() != self.ctx.dim() || l.ncols() != src_ctx.dim() {
            return Err(Error::DimensionMismatch(format!(
                "precompose map {}x{} between dims {} and {}",
                l.nrows(),
                l.ncols(),
                src_ctx.dim(),
                self.ctx.dim()
            )));
        }
        if self.tag == PqTag::EverywherePlusInfinity {
            return Ok(Self::plus_infinity_everywhere(src_ctx));
        }
        let (rows, rhs) = self.domain_constraints(Some(l));
        let Some((o_h, dirs)) = solve_constraints(src_ctx, &rows, &rhs) else {
            return Ok(Self::plus_infinity_everywhere(src_ctx));
        };
        let dom = AffineSet::new(o_h, dirs);
        if self.tag == PqTag::MinusInfinityOnDomain {
            return Ok(Self::minus_infinity_on(src_ctx, dom));
        }
        // Map the new frame through L and read off coordinates in self's frame.
        let w = self.ctx.weights();
        let n = self.ctx.dim();
        let dself = self.dom.dirs.basis_matrix();
        let wtimes = |x: &DVector<f64>| -> DVector<f64> {
            let mut wx = x.clone();
            for i in 0..n {
                wx[i] *= w[i];
            }
            wx
        };
        let z0 = l * &dom.origin - &self.dom.origin;
        let c0v = dself.transpose() * wtimes(&z0);
        let k_new = dom.rank();
        let mut t = DMatrix::zeros(self.dom.rank(), k_new);
        for j in 0..k_new {
            let col = l * dom.dirs.basis_matrix().column(j);
            t.set_column(j, &(dself.transpose() * wtimes(&col)));
        }
        let hc = &self.h * &c0v;
        let h_new = t.transpose() * &self.h * &t;
        let g_new = t.transpose() * (&hc + &self.g);
        let c_new = 0.5 * c0v.dot(&hc) + self.g.dot(&c0v) + self.c;
        Ok(Self::proper(Arc::clone(src_ctx), dom, h_new, g_new, c_new))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.ctx.check_same(&other.ctx)?;
        if self.tag == PqTag::EverywherePlusInfinity || other.tag == PqTag::EverywherePlusInfinity {
            return Ok(Self::plus_infinity_everywhere(&self.ctx));
        }
        let (mut rows, mut rhs) = self.domain_constraints(None);
        let (rows2, rhs2) = other.domain_constraints(None);
        rows.extend(rows2);
        rhs.extend(rhs2);
        let Some((o, dirs)) = solve_constraints(&self.ctx, &rows, &rhs) else {
            return Ok(Self::plus_infinity_everywhere(&self.ctx));
        };
        let dom = AffineSet::new(o, dirs);
        if self.tag == PqTag::MinusInfinityOnDomain || other.tag == PqTag::MinusInfinityOnDomain {
            return Ok(Self::minus_infinity_on(&self.ctx, dom));
        }
        let (h1, g1, c1) = self.rebase(&dom.origin, &dom.dirs);
        let (h2, g2, c2) = other.rebase(&dom.origin, &dom.dirs);
        Ok(Self::proper(
            Arc::clone(&self.ctx),
            dom,
            h1 + h2,
            g1 + g2,
            c1 + c2,
        ))
    }

    /// Projection of the domain onto the leading `p` coordinates.
    fn project_domain(&self, out_ctx: &Arc<HilbertContext>) -> AffineSet {
        let p = out_ctx.dim();
        let o_out = DVector::from_iterator(p, self.dom.origin.iter().take(p).copied());
        let cols: Vec<DVector<f64>> = (0..self.dom.rank())
            .map(|j| {
                DVector::from_iterator(
                    p,
                    self.dom.dirs.basis_matrix().column(j).iter().take(p).copied(),
                )
            })
            .collect();
        let dirs = Subspace::mgs(out_ctx, &cols, RANK_TOL);
        AffineSet::new(o_out, dirs)
    }

    /// Exact infimum over the trailing `k` coordinates:
    /// `g(x) = inf_y f(x, y)`, a partial quadratic on the leading block.
    ///
    /// Recession analysis: a flat direction of the reduced Hessian with
    /// nonzero slope (or any negative curvature) makes the infimum `−∞` on
    /// the whole projected domain — for PSD `H` the slope of a flat mode is
    /// independent of the slice, since `zᵀHz = 0` forces `Hz = 0`.
    pub fn partial_minimize_last(&self, k: usize, out_ctx: &Arc<HilbertContext>) -> Result<Self> {
        let dim = self.ctx.dim();
        if k >= dim {
            return Err(Error::DimensionMismatch("partial minimization block".into()));
        }
        let p = dim - k;
        if out_ctx.dim() != p {
            return Err(Error::ContextMismatch("partial minimization output".into()));
        }
        for i in 0..p {
            if out_ctx.weights()[i] != self.ctx.weights()[i] {
                return Err(Error::ContextMismatch(
                    "partial minimization output weights".into(),
                ));
            }
        }
        if self.tag == PqTag::EverywherePlusInfinity {
            return Ok(Self::plus_infinity_everywhere(out_ctx));
        }
        let dom_out = self.project_domain(out_ctx);
        if self.tag == PqTag::MinusInfinityOnDomain {
            return Ok(Self::minus_infinity_on(out_ctx, dom_out));
        }

        let r = self.dom.rank();
        // Rows of D seen by the output block.
        let mut a_o = DMatrix::zeros(p, r);
        for i in 0..p {
            for j in 0..r {
                a_o[(i, j)] = self.dom.dirs.basis_matrix()[(i, j)];
            }
        }
        let null = crate::linrel::coefficient_null_space(&a_o);
        let q = null.len();
        let svd_scale = {
            let svd = nalgebra::SVD::new(a_o.clone(), false, false);
            svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s)).max(1.0)
        };
        if q == 0 {
            // The slice is a single point: the "infimum" is evaluation.
            let svd = nalgebra::SVD::new(a_o.clone(), true, true);
            let pinv = svd
                .pseudo_inverse(RANK_TOL * svd_scale)
                .map_err(|e| Error::Precondition(format!("pseudoinverse failed: {e}")))?;
            let s1 = &pinv; // s(x) = pinv (x − o_out)
            let h_amb = s1.transpose() * &self.h * s1;
            let b_amb = s1.transpose() * &self.g;
            return self.assemble_minimized(out_ctx, dom_out, &h_amb, &b_amb, self.c);
        }
        let z = DMatrix::from_columns(&null);
        let h_r = z.transpose() * &self.h * &z;
        let eig = h_r.clone().symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let band = PSD_EIG_TOL * lam_max.max(1.0);
        let mut minus_infinity = false;
        for i in 0..q {
            let lam = eig.eigenvalues[i];
            if lam < -band {
                minus_infinity = true;
                break;
            }
            if lam.abs() <= band {
                let dir = &z * eig.eigenvectors.column(i).into_owned();
                let slope = dir.dot(&self.g);
                if slope.abs() > PSD_EIG_TOL * (1.0 + self.g.norm()) {
                    minus_infinity = true;
                    break;
                }
            }
        }
        if minus_infinity {
            return Ok(Self::minus_infinity_on(out_ctx, dom_out));
        }

        // Minimizer over the slice: s*(x) = (P_a − Z H_r⁺ Zᵀ H P_a)(x − o_out)
        // − Z H_r⁺ Zᵀ g, with P_a the min-norm solve of A_o s = x − o_out.
        let svd = nalgebra::SVD::new(a_o.clone(), true, true);
        let pinv = svd
            .pseudo_inverse(RANK_TOL * svd_scale)
            .map_err(|e| Error::Precondition(format!("pseudoinverse failed: {e}")))?;
        let mut hr_pinv = DMatrix::zeros(q, q);
        for i in 0..q {
            let lam = eig.eigenvalues[i];
            if lam.abs() > band {
                let qi = eig.eigenvectors.column(i).into_owned();
                hr_pinv += &qi * qi.transpose() / lam;
            }
        }
        let corr = &z * &hr_pinv * z.transpose();
        let s1 = &pinv - &corr * &self.h * &pinv;
        let s_c = -(&corr * &self.g);
        // value(u) with u = x − o_out
        let hs_c = &self.h * &s_c;
        let h_amb = s1.transpose() * &self.h * &s1;
        let b_amb = s1.transpose() * (&hs_c + &self.g);
        let c_amb = 0.5 * s_c.dot(&hs_c) + self.g.dot(&s_c) + self.c;
        self.assemble_minimized(out_ctx, dom_out, &h_amb, &b_amb, c_amb)
    }

    /// Shared tail of partial minimization: the value as a quadratic in
    /// `u = x − o_out` becomes a canonical partial quadratic on `out_ctx`.
    fn assemble_minimized(
        &self,
        out_ctx: &Arc<HilbertContext>,
        dom_out: AffineSet,
        h_amb: &DMatrix<f64>,
        b_amb: &DVector<f64>,
        c_amb: f64,
    ) -> Result<Self> {
        let o = dom_out.origin.clone();
        let a_sym = symmetrize(h_amb);
        let b_shift = b_amb - &a_sym * &o;
        let c_shift = 0.5 * o.dot(&(&a_sym * &o)) - b_amb.dot(&o) + c_amb;
        let out = Self::from_ambient(out_ctx, &o, &dom_out.dirs, &a_sym, &b_shift, c_shift)?;
        Ok(out)
    }

    /// Mutual containment of domains plus agreement of the rebased forms.
    pub fn equals(&self, other: &Self, tol: f64) -> Result<bool> {
        self.ctx.check_same(&other.ctx)?;
        if self.tag != other.tag {
            return Ok(false);
        }
        match self.tag {
            PqTag::EverywherePlusInfinity => Ok(true),
            PqTag::MinusInfinityOnDomain => self.dom.equals(&other.dom, &self.ctx, tol),
            PqTag::Proper => {
                if !self.dom.equals(&other.dom, &self.ctx, tol)? {
                    return Ok(false);
                }
                Ok(self.form_distance(other) <= tol)
            }
        }
    }

    /// Largest coefficient discrepancy after rebasing `other` onto this
    /// functional's frame, relative to the coefficient scale.
    pub fn form_distance(&self, other: &Self) -> f64 {
        let (h2, g2, c2) = other.rebase(&self.dom.origin, &self.dom.dirs);
        let scale = 1.0
            + self.h.norm().max(h2.norm())
            + self.g.norm().max(g2.norm())
            + self.c.abs().max(c2.abs());
        let dh = (&self.h - h2).norm();
        let dg = (&self.g - g2).norm();
        let dc = (self.c - c2).abs();
        dh.max(dg).max(dc) / scale
    }
}

impl Serialize for PartialQuadratic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(6))?;
        map.serialize_entry("tag", self.tag.as_str())?;
        map.serialize_entry("origin", self.dom.origin.as_slice())?;
        map.serialize_entry("directions", &self.dom.dirs)?;
        let k = self.h.nrows();
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| self.h[(i, j)]).collect())
            .collect();
        map.serialize_entry("hessian", &rows)?;
        map.serialize_entry("linear", self.g.as_slice())?;
        map.serialize_entry("constant", &self.c)?;
        map.end()
    }
}

/// Fitzpatrick function of a relation: the conjugate of (pairing + graph
/// indicator), slot-swapped. Non-monotone input gives `+∞` everywhere (the
/// supremum blows up along any negative pairing direction).
pub fn fitzpatrick(rel: &LinearRelation) -> PartialQuadratic {
    let base = rel.base();
    let n = base.dim();
    let ctx2 = base.power(2);
    debug_assert!(HilbertContext::same(&ctx2, rel.graph().ctx()));

    let mut a_pair = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        a_pair[(i, n + i)] = base.weights()[i];
        a_pair[(n + i, i)] = base.weights()[i];
    }
    let restricted = PartialQuadratic::from_ambient(
        &ctx2,
        &DVector::zeros(2 * n),
        rel.graph(),
        &a_pair,
        &DVector::zeros(2 * n),
        0.0,
    )
    .expect("graph lives in the product context");

    if restricted.dom.rank() > 0 {
        let eig = restricted.h.clone().symmetric_eigen();
        let lam_max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let band = PSD_EIG_TOL * lam_max.max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < -band) {
            return PartialQuadratic::plus_infinity_everywhere(&ctx2);
        }
    }
    restricted
        .conjugate()
        .expect("pairing restricted to a monotone graph is convex")
        .transpose()
        .expect("product context is block-symmetric")
}

/// Second route to the Fitzpatrick function of a full-domain monotone matrix:
/// `F(x, x*) = ½ q*_{M₊}(x* + Mᵃx)` with `Mᵃ` the weighted adjoint and
/// `M₊ = (M + Mᵃ)/2`.
pub fn f1fitz(ctx: &Arc<HilbertContext>, m: &DMatrix<f64>) -> Result<PartialQuadratic> {
    let n = ctx.dim();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch("f1fitz matrix".into()));
    }
    let ma = crate::linrel::weighted_adjoint_matrix(ctx, m);
    let m_plus = 0.5 * (m + &ma);
    let q = PartialQuadratic::quadratic_form(ctx, &m_plus)?;
    let eig = q.h.clone().symmetric_eigen();
    let lam_max = eig.eigenvalues.iter().fold(0.0f64, |mx, v| mx.max(v.abs()));
    if eig.eigenvalues.iter().any(|&l| l < -PSD_EIG_TOL * lam_max.max(1.0)) {
        return Err(Error::Precondition(
            "f1fitz requires a monotone matrix (symmetric part PSD)".into(),
        ));
    }
    let q_star = q.conjugate()?;
    let ctx2 = ctx.power(2);
    // (x, x*) ↦ x* + Mᵃ x
    let mut l = DMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            l[(i, j)] = ma[(i, j)];
        }
        l[(i, n + i)] = 1.0;
    }
    q_star.precompose_linear(&ctx2, &l)?.scale_value(0.5)
}

/// Partial inf-convolution in the second slot:
/// `(f □₂ g)(x, x*) = inf_{y*} f(x, x* − y*) + g(x, y*)`.
pub fn box2(f: &PartialQuadratic, g: &PartialQuadratic) -> Result<PartialQuadratic> {
    f.ctx().check_same(g.ctx())?;
    let n2 = f.ctx().dim();
    if n2 % 2 != 0 {
        return Err(Error::ContextMismatch("box2 needs a product context".into()));
    }
    let n = n2 / 2;
    let base_w: Vec<f64> = f.ctx().weights().iter().take(n).copied().collect();
    let base = HilbertContext::new(&base_w)?;
    let triple = base.power(3);

    let mut l1 = DMatrix::zeros(2 * n, 3 * n);
    let mut l2 = DMatrix::zeros(2 * n, 3 * n);
    for i in 0..n {
        l1[(i, i)] = 1.0;
        l1[(n + i, n + i)] = 1.0;
        l1[(n + i, 2 * n + i)] = -1.0;
        l2[(i, i)] = 1.0;
        l2[(n + i, 2 * n + i)] = 1.0;
    }
    let joint = f
        .precompose_linear(&triple, &l1)?
        .add(&g.precompose_linear(&triple, &l2)?)?;
    joint.partial_minimize_last(n, f.ctx())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn vec2(ctx: &Arc<HilbertContext>, c: &[f64]) -> Vector {
        Vector::new(ctx, c.to_vec()).unwrap()
    }

    fn eval_f(f: &PartialQuadratic, c: &[f64]) -> ExtendedScalar {
        let z = Vector::new(f.ctx(), c.to_vec()).unwrap();
        f.evaluate(&z, 1e-9).unwrap()
    }

    #[test]
    fn identity_fitzpatrick_is_quarter_square() {
        let ctx = HilbertContext::unweighted(1);
        let rel = LinearRelation::from_matrix(&ctx, &DMatrix::identity(1, 1), None).unwrap();
        let f = fitzpatrick(&rel);
        assert_eq!(f.tag(), PqTag::Proper);
        for (x, xs, want) in [
            (1.0, 1.0, 1.0),
            (2.0, 0.0, 1.0),
            (1.0, -1.0, 0.0),
            (0.0, 0.0, 0.0),
            (3.0, 1.0, 4.0),
        ] {
            let got = eval_f(&f, &[x, xs]).as_finite().unwrap();
            assert_abs_diff_eq!(got, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn skew_matrix_fitzpatrick_is_graph_indicator() {
        let ctx = HilbertContext::unweighted(2);
        let k = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let rel = LinearRelation::from_matrix(&ctx, &k, None).unwrap();
        let f = fitzpatrick(&rel);
        let ind = PartialQuadratic::indicator_of_subspace(rel.graph());
        assert!(f.equals(&ind, 1e-9).unwrap());
        // on the graph the value is the pairing (= 0 for skew)
        assert_eq!(eval_f(&f, &[1.0, 2.0, -2.0, 1.0]), ExtendedScalar::Finite(0.0));
        assert_eq!(eval_f(&f, &[1.0, 0.0, 0.0, 0.0]), ExtendedScalar::PlusInfinity);
    }

    #[test]
    fn non_monotone_input_tags_plus_infinity() {
        let ctx = HilbertContext::unweighted(2);
        let rel = LinearRelation::from_matrix(&ctx, &(-DMatrix::identity(2, 2)), None).unwrap();
        let f = fitzpatrick(&rel);
        assert_eq!(f.tag(), PqTag::EverywherePlusInfinity);
        assert_eq!(eval_f(&f, &[0.0; 4]), ExtendedScalar::PlusInfinity);
    }

    #[test]
    fn subspace_indicator_conjugates_to_complement_indicator() {
        let ctx = HilbertContext::new(&[0.5, 0.5, 2.0]).unwrap();
        let s = Subspace::orthonormalize(
            &ctx,
            &[vec2(&ctx, &[1.0, 1.0, 0.0]), vec2(&ctx, &[0.0, 1.0, 1.0])],
            RANK_TOL,
        )
        .unwrap();
        let ind = PartialQuadratic::indicator_of_subspace(&s);
        let conj = ind.conjugate().unwrap();
        let expect = PartialQuadratic::indicator_of_subspace(&s.complement());
        assert!(conj.equals(&expect, 1e-9).unwrap());
    }

    #[test]
    fn scalar_half_square_is_self_conjugate() {
        let ctx = HilbertContext::unweighted(1);
        let q = PartialQuadratic::quadratic_form(&ctx, &DMatrix::identity(1, 1)).unwrap();
        let qs = q.conjugate().unwrap();
        assert!(qs.equals(&q, 1e-10).unwrap());
    }

    #[test]
    fn biconjugation_fixes_proper_convex_members() {
        // quadratic with flat directions on an affine set, weighted context
        let ctx = HilbertContext::new(&[1.0, 0.25, 2.0, 1.0]).unwrap();
        let dirs = Subspace::orthonormalize(
            &ctx,
            &[
                vec2(&ctx, &[1.0, 0.0, 1.0, 0.0]),
                vec2(&ctx, &[0.0, 1.0, 0.0, -1.0]),
            ],
            RANK_TOL,
        )
        .unwrap();
        let origin = DVector::from_column_slice(&[1.0, 0.0, 0.0, 2.0]);
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 2.0, 0.0, //
                0.0, 0.0, 0.0, 0.5,
            ],
        );
        let b = DVector::from_column_slice(&[0.5, -1.0, 0.0, 1.0]);
        let f = PartialQuadratic::from_ambient(&ctx, &origin, &dirs, &a, &b, 0.75).unwrap();
        let ff = f.conjugate().unwrap().conjugate().unwrap();
        assert!(ff.equals(&f, 1e-8).unwrap());
        // probe agreement away from the origin as well
        let z = vec2(&ctx, &[1.6, 0.8, 0.6, 1.2]);
        match (f.evaluate(&z, 1e-8).unwrap(), ff.evaluate(&z, 1e-8).unwrap()) {
            (ExtendedScalar::Finite(a0), ExtendedScalar::Finite(b0)) => {
                assert_abs_diff_eq!(a0, b0, epsilon = 1e-8)
            }
            (a0, b0) => assert_eq!(a0, b0),
        }
    }

    #[test]
    fn transpose_is_involutive_and_matches_inverse_relation() {
        let ctx = HilbertContext::unweighted(2);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, -1.0, 1.0]);
        let rel = LinearRelation::from_matrix(&ctx, &m, None).unwrap();
        let f = fitzpatrick(&rel);
        assert!(f.transpose().unwrap().transpose().unwrap().equals(&f, 1e-10).unwrap());
        let finv = fitzpatrick(&rel.inverse());
        assert!(f.transpose().unwrap().equals(&finv, 1e-8).unwrap());
    }

    #[test]
    fn f1fitz_agrees_with_graph_route() {
        let ctx = HilbertContext::unweighted(1);
        let rel = LinearRelation::from_matrix(&ctx, &DMatrix::identity(1, 1), None).unwrap();
        let via_graph = fitzpatrick(&rel);
        let via_conj = f1fitz(&ctx, &DMatrix::identity(1, 1)).unwrap();
        assert!(via_graph.equals(&via_conj, 1e-9).unwrap());
        assert!(f1fitz(&ctx, &(-DMatrix::identity(1, 1))).is_err());
    }

    #[test]
    fn box2_of_matching_indicators_is_identity_case() {
        // f = g = ι_{X×{0}}: the only feasible split is y* = 0.
        let base = HilbertContext::unweighted(2);
        let ctx2 = base.power(2);
        let cols = vec![
            vec2(&ctx2, &[1.0, 0.0, 0.0, 0.0]),
            vec2(&ctx2, &[0.0, 1.0, 0.0, 0.0]),
        ];
        let x_cross_zero = Subspace::orthonormalize(&ctx2, &cols, RANK_TOL).unwrap();
        let ind = PartialQuadratic::indicator_of_subspace(&x_cross_zero);
        let out = box2(&ind, &ind).unwrap();
        assert!(out.equals(&ind, 1e-9).unwrap());
    }

    #[test]
    fn partial_minimization_detects_recession() {
        // f(x, y) = x + y on the full plane: inf over y is −∞ at every x.
        let ctx = HilbertContext::unweighted(2);
        let full = Subspace::zero(&ctx).complement();
        let f = PartialQuadratic::from_ambient(
            &ctx,
            &DVector::zeros(2),
            &full,
            &DMatrix::zeros(2, 2),
            &DVector::from_column_slice(&[1.0, 1.0]),
            0.0,
        )
        .unwrap();
        let out_ctx = HilbertContext::unweighted(1);
        let g = f.partial_minimize_last(1, &out_ctx).unwrap();
        assert_eq!(g.tag(), PqTag::MinusInfinityOnDomain);
        let x = Vector::new(&out_ctx, vec![3.0]).unwrap();
        assert_eq!(g.evaluate(&x, 1e-9).unwrap(), ExtendedScalar::MinusInfinity);
    }

    #[test]
    fn partial_minimization_quadratic_case() {
        // f(x, y) = ½(x² + y²) + xy + x: the minimizer over y is y = −x,
        // leaving ½x² + ½x² − x² + x = x — affine with zero curvature.
        let ctx = HilbertContext::unweighted(2);
        let full = Subspace::zero(&ctx).complement();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let f = PartialQuadratic::from_ambient(
            &ctx,
            &DVector::zeros(2),
            &full,
            &a,
            &DVector::from_column_slice(&[1.0, 0.0]),
            0.0,
        )
        .unwrap();
        let out_ctx = HilbertContext::unweighted(1);
        let g = f.partial_minimize_last(1, &out_ctx).unwrap();
        assert_eq!(g.tag(), PqTag::Proper);
        for x in [-2.0, 0.0, 1.5] {
            let z = Vector::new(&out_ctx, vec![x]).unwrap();
            let got = g.evaluate(&z, 1e-9).unwrap().as_finite().unwrap();
            assert_abs_diff_eq!(got, x, epsilon = 1e-9);
        }
    }

    #[test]
    fn evaluate_off_span_is_plus_infinity() {
        let ctx = HilbertContext::unweighted(2);
        let ones = vec2(&ctx, &[1.0, 1.0]);
        let span = Subspace::span_of(&ones, RANK_TOL);
        let ind = PartialQuadratic::indicator_of_subspace(&span);
        assert_eq!(eval_f(&ind, &[1.0, 0.0]), ExtendedScalar::PlusInfinity);
        assert_eq!(eval_f(&ind, &[2.0, 2.0]), ExtendedScalar::Finite(0.0));
    }

    #[test]
    fn quarter_square_differs_from_indicator() {
        let ctx = HilbertContext::unweighted(1);
        let rel = LinearRelation::from_matrix(&ctx, &DMatrix::identity(1, 1), None).unwrap();
        let f = fitzpatrick(&rel);
        let ind = PartialQuadratic::indicator_of_subspace(rel.graph());
        assert!(!f.equals(&ind, 1e-9).unwrap());
    }
}
