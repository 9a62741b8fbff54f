//! Closed-form tail bounds for self-normalized sums of symmetric variables.
//!
//! Every bound here is a function of the normalized threshold
//! `s = x / n^{(β-1)/β}`. Hölder's inequality gives `max_k S_k <= n^{(β-1)/β} V_n(β)`,
//! so `s = 1` is the largest attainable value (the *endpoint*) and any `s > 1`
//! describes an impossible event.
//!
//! All evaluation happens in natural-log space; the product form of the bound
//! overflows long before `n` gets interesting.

use std::f64::consts::LN_2;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Normalized thresholds within this many ulps of 1 are treated as the endpoint.
///
/// `n^{(β-1)/β}` computed by a caller through a different route (for example
/// `sqrt(n)` instead of `powf(n, 0.5)`) can land a couple of ulps away from ours.
const ENDPOINT_SNAP: f64 = 4.0 * f64::EPSILON;

/// Exponent `β > 1` of the self-normalizer `V_n(β) = (Σ|ξ_i|^β)^{1/β}`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct BetaParam(f64);

impl BetaParam {
    pub const TWO: BetaParam = BetaParam(2.0);

    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 1.0 {
            Ok(BetaParam(beta))
        } else {
            Err(Error::InvalidBeta(beta))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// `(β-1)/β`, the Hölder exponent of `n` in the endpoint.
    pub fn holder_exponent(self) -> f64 {
        (self.0 - 1.0) / self.0
    }
}

impl fmt::Display for BetaParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `0 < s < 1`.
    Interior,
    /// `s = 1`; the bound is exactly `2^{-n}`.
    Endpoint,
    /// `s > 1`; the event is empty.
    Impossible,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Interior => "interior",
            Regime::Endpoint => "endpoint",
            Regime::Impossible => "impossible",
        })
    }
}

/// Result of evaluating `B_n(β, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEvaluation {
    pub n: usize,
    pub x: f64,
    /// Normalized threshold `x / n^{(β-1)/β}`.
    pub s: f64,
    /// Odds ratio `(1+s)/(1-s)`; `+inf` when `s >= 1`.
    pub t: f64,
    pub log_value: f64,
    pub value: f64,
    pub regime: Regime,
}

impl BoundEvaluation {
    fn endpoint(n: usize, x: f64) -> Self {
        BoundEvaluation {
            n,
            x,
            s: 1.0,
            t: f64::INFINITY,
            log_value: -(n as f64) * LN_2,
            value: pow2_neg(n),
            regime: Regime::Endpoint,
        }
    }

    fn impossible(n: usize, x: f64, s: f64) -> Self {
        BoundEvaluation {
            n,
            x,
            s,
            t: f64::INFINITY,
            log_value: f64::NEG_INFINITY,
            value: 0.0,
            regime: Regime::Impossible,
        }
    }

    fn interior(n: usize, x: f64, s: f64, log_value: f64) -> Self {
        BoundEvaluation {
            n,
            x,
            s,
            t: (1.0 + s) / (1.0 - s),
            log_value,
            value: log_value.exp(),
            regime: Regime::Interior,
        }
    }
}

/// Realizations `ξ_1, ..., ξ_n` of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector(Vec<f64>);

impl SampleVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::TooFewSamples { min: 1, got: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        Ok(SampleVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `V_n(β) = (Σ|ξ_i|^β)^{1/β}`.
pub fn v_norm(xs: &SampleVector, beta: BetaParam) -> f64 {
    lp_norm(xs.values(), beta)
}

/// `β`-norm of a raw slice, rescaled by the largest entry so heavy-tailed
/// samples do not overflow.
pub(crate) fn lp_norm(values: &[f64], beta: BetaParam) -> f64 {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let b = beta.get();
    let sum: f64 = values.iter().map(|v| (v.abs() / scale).powf(b)).sum();
    scale * sum.powf(1.0 / b)
}

/// `ln cosh(u)`, evaluated without overflow for large `|u|`.
pub fn log_cosh(u: f64) -> f64 {
    let a = u.abs();
    if a < 1.0 {
        // cosh(u) - 1 = 2 sinh²(u/2)
        let h = (0.5 * a).sinh();
        (2.0 * h * h).ln_1p()
    } else {
        a - LN_2 + (-2.0 * a).exp().ln_1p()
    }
}

/// Largest attainable self-normalized maximum, `n^{(β-1)/β}`.
pub fn endpoint(n: usize, beta: BetaParam) -> f64 {
    (n as f64).powf(beta.holder_exponent())
}

/// `x / n^{(β-1)/β}`, snapped to exactly 1 within a few ulps of the endpoint.
pub fn normalized_threshold(n: usize, beta: BetaParam, x: f64) -> f64 {
    let s = x / endpoint(n, beta);
    if (s - 1.0).abs() <= ENDPOINT_SNAP {
        1.0
    } else {
        s
    }
}

/// `H(s) = ((1+s)/2) ln(1+s) + ((1-s)/2) ln(1-s)` on `[0, 1]`, with `H(1) = ln 2`.
pub fn entropy_rate(s: f64) -> f64 {
    if s >= 1.0 {
        return LN_2;
    }
    0.5 * (1.0 + s) * s.ln_1p() + 0.5 * (1.0 - s) * (-s).ln_1p()
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::TooFewSamples { min: 1, got: 0 })
    } else {
        Ok(())
    }
}

fn check_threshold(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(x))
    }
}

fn pow2_neg(n: usize) -> f64 {
    // exact down to the subnormal floor
    0.5f64.powi(n.min(i32::MAX as usize) as i32)
}

/// `B_n(β, x) = 2^{-n} (√t + 1/√t)^n t^{-n^{1/β} x / 2}` with
/// `t = (n^{(β-1)/β} + x) / (n^{(β-1)/β} - x)`, evaluated term by term in log space.
///
/// Returns `2^{-n}` at the endpoint and `0` beyond it.
pub fn bound_bn(n: usize, beta: BetaParam, x: f64) -> Result<BoundEvaluation> {
    check_n(n)?;
    check_threshold(x)?;
    let s = normalized_threshold(n, beta, x);
    if s > 1.0 {
        return Ok(BoundEvaluation::impossible(n, x, s));
    }
    if s == 1.0 {
        return Ok(BoundEvaluation::endpoint(n, x));
    }
    let m = endpoint(n, beta);
    let t = (m + x) / (m - x);
    let root = t.sqrt();
    let nf = n as f64;
    let log_value =
        nf * ((root + 1.0 / root).ln() - LN_2) - 0.5 * nf.powf(1.0 / beta.get()) * x * t.ln();
    // rounding can push the log a hair above zero as x -> 0
    Ok(BoundEvaluation::interior(n, x, s, log_value.min(0.0)))
}

/// The same bound written as `exp(-n H(s))`.
pub fn bound_bn_entropy_form(n: usize, beta: BetaParam, x: f64) -> Result<BoundEvaluation> {
    check_n(n)?;
    check_threshold(x)?;
    let s = normalized_threshold(n, beta, x);
    if s > 1.0 {
        return Ok(BoundEvaluation::impossible(n, x, s));
    }
    if s == 1.0 {
        return Ok(BoundEvaluation::endpoint(n, x));
    }
    let log_value = -(n as f64) * entropy_rate(s);
    Ok(BoundEvaluation::interior(n, x, s, log_value.min(0.0)))
}

/// Sub-Gaussian bound `exp(-x² n^{2/β-1} / 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorollaryBound {
    pub value: f64,
    /// Set when `β > 2`, outside the range where the inequality is stated.
    pub extrapolated: bool,
}

pub fn bound_corollary(n: usize, beta: BetaParam, x: f64) -> Result<CorollaryBound> {
    check_n(n)?;
    check_threshold(x)?;
    let exponent = 2.0 / beta.get() - 1.0;
    let value = (-0.5 * x * x * (n as f64).powf(exponent)).exp();
    Ok(CorollaryBound {
        value: value.clamp(0.0, 1.0),
        extrapolated: beta.get() > 2.0,
    })
}

/// Corollary bound at the rescaled threshold `x n^α`, i.e.
/// `exp(-x² n^{2α+2/β-1} / 2)`.
///
/// `extrapolated` is set when `β > 2` or `α` falls outside
/// `((β-2)/(2β), (β-1)/β)`. The right end of the interval is flagged too,
/// even though it is the large-deviation scaling.
pub fn bound_rescaled(n: usize, beta: BetaParam, x: f64, alpha: f64) -> Result<CorollaryBound> {
    check_threshold(x)?;
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
    }
    let scaled = x * (n as f64).powf(alpha);
    check_threshold(scaled)?;
    let mut bound = bound_corollary(n, beta, scaled)?;
    let b = beta.get();
    let lo = (b - 2.0) / (2.0 * b);
    let hi = (b - 1.0) / b;
    if !(alpha > lo && alpha < hi) {
        bound.extrapolated = true;
    }
    Ok(bound)
}

/// Minimizer `λ(x) = (n^{1/β}/2) ln t` of `-λx + n ln cosh(λ / n^{1/β})`.
///
/// Returns `+inf` at and beyond the endpoint, where the infimum is not attained.
pub fn lambda_star(n: usize, beta: BetaParam, x: f64) -> Result<f64> {
    check_n(n)?;
    check_threshold(x)?;
    let s = normalized_threshold(n, beta, x);
    if s >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let log_t = s.ln_1p() - (-s).ln_1p();
    Ok(0.5 * (n as f64).powf(1.0 / beta.get()) * log_t)
}

/// Self-normalized threshold equivalent to `T_n >= x`: `x (n / (n + x² - 1))^{1/2}`.
///
/// Always in `(0, √n]`.
pub fn tstat_threshold(n: usize, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewSamples { min: 2, got: n });
    }
    check_threshold(x)?;
    let root_n = (n as f64).sqrt();
    // x / sqrt(x² + n - 1) without overflow, capped at 1 against rounding
    let ratio = (x / x.hypot(((n - 1) as f64).sqrt())).min(1.0);
    Ok(root_n * ratio)
}

/// `P(T_n >= x) <= B_n(2, x (n / (n + x² - 1))^{1/2})`.
pub fn bound_tstat(n: usize, x: f64) -> Result<BoundEvaluation> {
    let y = tstat_threshold(n, x)?;
    let mut eval = bound_bn(n, BetaParam::TWO, y)?;
    eval.x = x;
    Ok(eval)
}

/// Union of the upper and mirrored lower tail, `min(1, 2 B_n(β, x))`.
pub fn two_sided_bound(n: usize, beta: BetaParam, x: f64) -> Result<f64> {
    let one_sided = bound_bn(n, beta, x)?;
    Ok((2.0 * one_sided.value).min(1.0))
}
