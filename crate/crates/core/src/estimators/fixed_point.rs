use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub value: f64,
    pub iterations: usize,
    /// `|φ(value) − value|`.
    pub residual: f64,
    /// A posteriori bound `residual/(1−𝔠)` on the distance to the true fixed
    /// point, valid when `φ` is a `𝔠`-contraction.
    pub error_bound: f64,
}

/// Picard iteration `r₀ = 0`, `r_{n+1} = φ(r_n)`.
///
/// Stops after `max_iters` steps or as soon as `|φ(r_n) − r_n| ≤ tol`.
pub fn fixed_point(
    mut phi: impl FnMut(f64) -> f64,
    c: f64,
    max_iters: usize,
    tol: f64,
) -> Result<FixedPoint> {
    if max_iters == 0 {
        return Err(Error::config("max_iters", "at least one iteration is required"));
    }
    if !(tol >= 0.0) {
        return Err(Error::config("tol", format!("tolerance must be nonnegative, got {tol}")));
    }
    let mut r = 0.0;
    let mut next = phi(r);
    let mut iterations = 0;
    loop {
        if !next.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations + 1,
                value: next,
            });
        }
        r = next;
        iterations += 1;
        next = phi(r);
        if !next.is_finite() {
            return Err(Error::Divergence {
                iteration: iterations + 1,
                value: next,
            });
        }
        let residual = (next - r).abs();
        if residual <= tol || iterations == max_iters {
            return Ok(FixedPoint {
                value: r,
                iterations,
                residual,
                error_bound: residual / (1.0 - c),
            });
        }
    }
}
