#![allow(dead_code)]

use monorel::space::HilbertContext;
use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Maximize an arbitrary scalar field over R^n by a zooming grid: evaluate a
/// 7-per-axis lattice, recenter on the best node, expand when the best node
/// sits on the boundary and shrink otherwise. Derivative-free on purpose —
/// the point is to agree with closed forms without sharing any math with
/// them. Converges for the concave/convex quadratics it is used on.
pub fn zoom_extremum(
    n: usize,
    start_radius: f64,
    levels: usize,
    mut f: impl FnMut(&DVector<f64>) -> f64,
) -> f64 {
    let mut center = DVector::zeros(n);
    let mut radius = start_radius;
    let mut best_val = f(&center);
    for _ in 0..levels {
        let mut best_idx: Option<Vec<isize>> = None;
        let mut level_best = best_val;
        let mut counters = vec![-3isize; n];
        loop {
            let point = DVector::from_fn(n, |i, _| center[i] + counters[i] as f64 / 3.0 * radius);
            let v = f(&point);
            if v > level_best {
                level_best = v;
                best_idx = Some(counters.clone());
            }
            // odometer over {-3,...,3}^n
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                counters[k] += 1;
                if counters[k] <= 3 {
                    break;
                }
                counters[k] = -3;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        match best_idx {
            Some(idx) => {
                let on_boundary = idx.iter().any(|&c| c.abs() == 3);
                for i in 0..n {
                    center[i] += idx[i] as f64 / 3.0 * radius;
                }
                best_val = level_best;
                radius *= if on_boundary { 2.0 } else { 0.55 };
            }
            None => {
                radius *= 0.55;
            }
        }
    }
    best_val
}

/// Brute-force the graph supremum defining the Fitzpatrick function of the
/// full-domain matrix relation `x ↦ Mx` at `(x, xs)`, in the weighted inner
/// product of `ctx`. Only meaningful when the weighted symmetric part of `M`
/// is positive definite, so the supremum is finite.
pub fn brute_force_fitzpatrick(
    ctx: &Arc<HilbertContext>,
    m: &DMatrix<f64>,
    x: &DVector<f64>,
    xs: &DVector<f64>,
) -> f64 {
    let w = ctx.weights();
    let pair = |a: &DVector<f64>, b: &DVector<f64>| w.dot(&a.component_mul(b));
    zoom_extremum(ctx.dim(), 16.0, 48, |c| {
        let mc = m * c;
        pair(x, &mc) + pair(c, xs) - pair(c, &mc)
    })
}

pub fn rand_unit_box(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}
