//! Per-sample statistics and the threshold comparison shared by the exact
//! oracle and the simulator.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;

/// Relative slack on `>=` comparisons between floating-point statistics and
/// thresholds. Mathematical ties (the endpoint, `T_n = x` on lattice samples)
/// must land inside the event no matter which algebraic route produced them.
pub const TIE_REL: f64 = 1e-12;

/// `value >= threshold`, with ties decided in favour of the event.
#[inline]
pub fn reaches(value: f64, threshold: f64) -> bool {
    value >= threshold - TIE_REL * threshold.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    /// `max_k S_k / V_n(β)`.
    RunningMax,
    /// `S_n / V_n(β)`.
    FinalSum,
    /// Student's `T_n`.
    TStat,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::RunningMax => "running-max",
            Statistic::FinalSum => "final-sum",
            Statistic::TStat => "tstat",
        })
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "running-max" | "running_max" => Ok(Statistic::RunningMax),
            "final-sum" | "final_sum" => Ok(Statistic::FinalSum),
            "tstat" => Ok(Statistic::TStat),
            other => Err(Error::InvalidArgument(format!("unknown statistic `{other}`"))),
        }
    }
}

/// `max_{1<=k<=n} S_k` and `S_n` in one pass.
#[inline]
pub fn partial_sums(values: &[f64]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    for v in values {
        sum += v;
        max = max.max(sum);
    }
    (max, sum)
}

/// Student's `T_n = √n ξ̄ / σ̂`, or `None` when `σ̂ = 0` (or `n < 2`).
pub fn t_statistic(values: &[f64]) -> Option<f64> {
    let n = values.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    if ss == 0.0 {
        return None;
    }
    let sd = (ss / (nf - 1.0)).sqrt();
    Some(nf.sqrt() * mean / sd)
}
