//! Numeric Bernstein infimum `inf_{λ>=0} exp(-λx + n ln cosh(λ / n^{1/β}))`.
//!
//! This is the exponential-moment bound for `S_n / V_n(β)` when every `ξ_i`
//! is a fair `±a` coin. It is minimized directly, without the closed-form
//! minimizer, so it can serve as an independent check on [`crate::bounds::bound_bn`]
//! and [`crate::bounds::lambda_star`].

use serde::Serialize;

use crate::bounds::{endpoint, log_cosh, normalized_threshold, BetaParam};
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BernsteinResult {
    pub lambda_star: f64,
    pub objective_value: f64,
    /// Bracket expansions plus golden-section steps.
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenMin {
    pub argmin: f64,
    pub min: f64,
    pub iterations: usize,
}

/// Golden-section search for the minimum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol * max(1, |midpoint|)`.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<GoldenMin>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for iter in 0..max_iter {
        let mid = 0.5 * (a + b);
        if (b - a) <= tol * mid.abs().max(1.0) {
            let (argmin, min) = best_of(&mut f, [(a, None), (c, Some(fc)), (d, Some(fd)), (b, None)]);
            return Ok(GoldenMin { argmin, min, iterations: iter });
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    Err(Error::NoConvergence(max_iter))
}

fn best_of<F: FnMut(f64) -> f64>(f: &mut F, points: [(f64, Option<f64>); 4]) -> (f64, f64) {
    points
        .into_iter()
        .map(|(p, v)| (p, v.unwrap_or_else(|| f(p))))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Minimizes `-λx + n ln cosh(λ / n^{1/β})` over `λ >= 0`.
///
/// Only the interior `0 < x < n^{(β-1)/β}` is accepted; at the endpoint the
/// infimum is approached as `λ -> ∞` and the closed form handles it.
pub fn bernstein_numeric(n: usize, beta: BetaParam, x: f64, tol: f64) -> Result<BernsteinResult> {
    if n == 0 {
        return Err(Error::TooFewSamples { min: 1, got: 0 });
    }
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidThreshold(x));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    if normalized_threshold(n, beta, x) >= 1.0 {
        return Err(Error::OutsideInterior { x, endpoint: endpoint(n, beta) });
    }

    let nf = n as f64;
    let scale = nf.powf(1.0 / beta.get());
    let objective = |lambda: f64| -lambda * x + nf * log_cosh(lambda / scale);
    let slope = |lambda: f64| -x + (nf / scale) * (lambda / scale).tanh();

    // grow the bracket until the objective turns upward
    let mut upper = scale;
    let mut expansions = 0;
    while slope(upper) <= 0.0 {
        upper *= 2.0;
        expansions += 1;
        if expansions >= MAX_ITERATIONS {
            return Err(Error::NoConvergence(MAX_ITERATIONS));
        }
    }

    let found = golden_section(objective, 0.0, upper, tol, MAX_ITERATIONS - expansions)?;
    Ok(BernsteinResult {
        lambda_star: found.argmin,
        objective_value: found.min.min(0.0).exp(),
        iterations: expansions + found.iterations,
    })
}
