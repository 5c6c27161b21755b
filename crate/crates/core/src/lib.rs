//! Verification laboratory for linear relations, monotone operator predicates,
//! Fitzpatrick functions, and two concrete operator families: an exact-rational
//! summation operator on finitely supported sequences and a discretized Volterra
//! integration operator on a uniform grid.
//!
//! The crate is organized around immutable value types sharing a weighted
//! inner-product context:
//!
//! - [`space`]: weighted Hilbert contexts, vectors, and orthonormal subspaces.
//! - [`linrel`]: linear relations as graph subspaces of the product space, with
//!   adjoint/inverse/scale/sum calculus.
//! - [`monotone`]: monotonicity predicates with witnesses and exact
//!   constrained-quadratic relatedness tests.
//! - [`fitz`]: partial quadratic functions (quadratic on an affine set, extended
//!   values elsewhere) with closed-form conjugation, Fitzpatrick construction,
//!   and partial inf-convolution.
//! - [`l2exact`]: the exact rational sequence model (no floats anywhere).
//! - [`volterra`]: the grid discretization and its convergence study.
//! - [`report`]: verification report types shared with the CLI.
//! - [`suites`]: seeded, deterministic check suites per module.

pub mod error;
pub mod fitz;
pub mod l2exact;
pub mod linrel;
pub mod monotone;
pub mod report;
pub mod space;
pub mod suites;
pub mod volterra;

pub use error::{Error, Result};
pub use fitz::{box2, fitzpatrick, ExtendedScalar, PartialQuadratic, PqTag};
pub use linrel::{Image, LinearRelation};
pub use monotone::MonotonicityVerdict;
pub use report::{CheckRecord, CheckStatus, VerificationReport};
pub use space::{HilbertContext, Subspace, Vector};
pub use suites::{monotone_relation_corpus, relation_corpus, run_suite};
