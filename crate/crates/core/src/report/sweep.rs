//! Grid sweeps comparing the closed-form bound, the sub-Gaussian corollary,
//! the numeric Bernstein infimum, the exact oracle and Monte Carlo.

use std::collections::HashMap;
use std::io::Write;

use serde::Serialize;

use crate::bernstein::{bernstein_numeric, DEFAULT_TOL};
use crate::bounds::{bound_bn, bound_corollary, endpoint, BetaParam};
use crate::error::{Error, Result};
use crate::oracle::{exact_tail, exact_tstat_tail, MagnitudeVector, TailProfile, MAX_ENUMERATION_LEN, MAX_PROFILE_LEN};
use crate::report::format::{fmt_sig, round_sig};
use crate::simulate::{estimate_tail, DistributionSpec, TailEstimate};
use crate::stats::Statistic;

/// Output columns, in order.
pub const COLUMNS: [&str; 13] = [
    "n",
    "beta",
    "s",
    "x",
    "bound_bn",
    "bound_corollary",
    "bernstein_numeric",
    "oracle_exact",
    "mc_p_hat",
    "mc_ci_low",
    "mc_ci_high",
    "trials",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n_values: Vec<usize>,
    pub beta_values: Vec<BetaParam>,
    pub s_values: Vec<f64>,
    pub stat: Statistic,
    /// Law for Monte Carlo; `None` skips simulation.
    pub spec: Option<DistributionSpec>,
    pub trials: u64,
    pub seed: u64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_values.is_empty() || self.beta_values.is_empty() || self.s_values.is_empty() {
            return Err(Error::InvalidArgument("sweep grid lists must be nonempty".into()));
        }
        if self.n_values.contains(&0) {
            return Err(Error::InvalidArgument("n values must be positive".into()));
        }
        if self.stat == Statistic::TStat && self.n_values.iter().any(|&n| n < 2) {
            return Err(Error::TooFewSamples { min: 2, got: 1 });
        }
        if self.s_values.iter().any(|&s| !(s > 0.0 && s <= 1.0)) {
            return Err(Error::InvalidArgument("s values must lie in (0, 1]".into()));
        }
        if self.s_values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidArgument("s values must be sorted ascending".into()));
        }
        if self.spec.is_some() && self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub beta: f64,
    pub s: f64,
    pub x: f64,
    pub bound_bn: f64,
    pub bound_corollary: f64,
    pub bernstein_numeric: Option<f64>,
    pub oracle_exact: Option<f64>,
    pub mc: Option<TailEstimate>,
    pub trials: u64,
    pub seed: u64,
}

fn oracle_magnitudes(grid: &SweepGrid, n: usize) -> Option<MagnitudeVector> {
    if n > MAX_ENUMERATION_LEN {
        return None;
    }
    match &grid.spec {
        None => MagnitudeVector::unit(n).ok(),
        Some(spec) => spec.enumerable_magnitudes(n),
    }
}

pub fn run_sweep(grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let mut profiles: HashMap<usize, Option<TailProfile>> = HashMap::new();
    let mut rows = Vec::new();
    for &n in &grid.n_values {
        let mags = oracle_magnitudes(grid, n);
        if grid.stat != Statistic::TStat {
            profiles
                .entry(n)
                .or_insert_with(|| mags.as_ref().filter(|m| m.len() <= MAX_PROFILE_LEN).and_then(|m| TailProfile::new(m).ok()));
        }
        for &beta in &grid.beta_values {
            for &s in &grid.s_values {
                let x = s * endpoint(n, beta);
                let bn = bound_bn(n, beta, x)?;
                let corollary = bound_corollary(n, beta, x)?.value;
                let bernstein = if s < 1.0 {
                    Some(bernstein_numeric(n, beta, x, DEFAULT_TOL)?.objective_value)
                } else {
                    None
                };
                let oracle = match (&mags, grid.stat) {
                    (None, _) => None,
                    (Some(m), Statistic::TStat) => Some(exact_tstat_tail(m, x)?.probability()),
                    (Some(m), stat) => Some(match profiles.get(&n).and_then(Option::as_ref) {
                        Some(p) => p.tail(beta, x, stat)?.probability(),
                        None => exact_tail(m, beta, x, stat)?.probability(),
                    }),
                };
                let mc = match &grid.spec {
                    Some(spec) => Some(estimate_tail(spec, n, beta, x, grid.stat, grid.trials, grid.seed)?),
                    None => None,
                };
                rows.push(SweepRow {
                    n,
                    beta: beta.get(),
                    s,
                    x,
                    bound_bn: bn.value,
                    bound_corollary: corollary,
                    bernstein_numeric: bernstein,
                    oracle_exact: oracle,
                    trials: if mc.is_some() { grid.trials } else { 0 },
                    seed: grid.seed,
                    mc,
                });
            }
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_sig).unwrap_or_default()
}

impl SweepRow {
    fn fields(&self) -> [String; 13] {
        [
            self.n.to_string(),
            fmt_sig(self.beta),
            fmt_sig(self.s),
            fmt_sig(self.x),
            fmt_sig(self.bound_bn),
            fmt_sig(self.bound_corollary),
            opt(self.bernstein_numeric),
            opt(self.oracle_exact),
            opt(self.mc.map(|m| m.p_hat)),
            opt(self.mc.map(|m| m.ci_low)),
            opt(self.mc.map(|m| m.ci_high)),
            self.trials.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Header plus one comma-separated row per cell, LF line endings.
pub fn write_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::InvalidArgument(format!("writing CSV: {e}"));
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(COLUMNS).map_err(io)?;
    for row in rows {
        w.write_record(row.fields()).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("writing CSV: {e}")))
}

#[derive(Serialize)]
struct JsonRow {
    n: usize,
    beta: f64,
    s: f64,
    x: f64,
    bound_bn: f64,
    bound_corollary: f64,
    bernstein_numeric: Option<f64>,
    oracle_exact: Option<f64>,
    mc_p_hat: Option<f64>,
    mc_ci_low: Option<f64>,
    mc_ci_high: Option<f64>,
    trials: u64,
    seed: u64,
}

/// Array of flat records keyed by [`COLUMNS`]; missing values are `null`.
pub fn write_json<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let records: Vec<JsonRow> = rows
        .iter()
        .map(|r| JsonRow {
            n: r.n,
            beta: round_sig(r.beta),
            s: round_sig(r.s),
            x: round_sig(r.x),
            bound_bn: round_sig(r.bound_bn),
            bound_corollary: round_sig(r.bound_corollary),
            bernstein_numeric: r.bernstein_numeric.map(round_sig),
            oracle_exact: r.oracle_exact.map(round_sig),
            mc_p_hat: r.mc.map(|m| round_sig(m.p_hat)),
            mc_ci_low: r.mc.map(|m| round_sig(m.ci_low)),
            mc_ci_high: r.mc.map(|m| round_sig(m.ci_high)),
            trials: r.trials,
            seed: r.seed,
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &records)
        .map_err(|e| Error::InvalidArgument(format!("writing JSON: {e}")))?;
    out.write_all(b"\n")
        .map_err(|e| Error::InvalidArgument(format!("writing JSON: {e}")))
}
