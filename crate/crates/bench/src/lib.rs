//! Shared fixtures for the criterion benchmarks in `benches/`.
//!
//! Everything here is seed-fixed so successive `cargo bench` runs time the
//! same inputs.

use monorel::space::HilbertContext;
use monorel::LinearRelation;
use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense monotone matrix relation on an unweighted space: symmetric-PSD part
/// plus a skew part, with a small ridge so the pairing form is comfortably
/// inside the cone.
pub fn dense_monotone_relation(n: usize) -> LinearRelation {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6265_6e63 ^ n as u64);
    let ctx = HilbertContext::unweighted(n);
    let g = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let m = (g.transpose() * &g) / n as f64
        + DMatrix::identity(n, n) * 0.1
        + (&r - r.transpose());
    LinearRelation::from_matrix(&ctx, &m, None).expect("square matrix in matching context")
}

/// A deterministic full-dimension probe point for a quadratic on `R^{2n}`.
pub fn probe_coords(n: usize) -> Vec<f64> {
    (0..2 * n).map(|i| ((i * 37 + 11) % 19) as f64 / 19.0 - 0.4).collect()
}
