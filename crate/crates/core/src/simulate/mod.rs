//! Seeded Monte Carlo estimates of self-normalized tail probabilities.
//!
//! Trials are grouped into fixed-size chunks and each trial draws from its own
//! [`TrialStream`], so hit counts are identical for any worker count.

mod dist;
mod stream;
mod wilson;

use rayon::prelude::*;
use serde::Serialize;

pub use dist::{read_magnitudes, sample_vector, DistributionSpec};
pub use stream::TrialStream;
pub use wilson::{wilson_interval, Z_99};

use crate::bounds::{lp_norm, tstat_threshold, BetaParam};
use crate::error::{Error, Result};
use crate::stats::{partial_sums, reaches, t_statistic, Statistic};

pub const DEFAULT_TRIALS: u64 = 1_000_000;

const CHUNK: u64 = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    /// Wilson 99% interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// Trials with `V_n = 0` (or `σ̂ = 0` for the t-statistic), counted as misses.
    pub degenerate_count: u64,
}

impl TailEstimate {
    fn from_counts(hits: u64, trials: u64, seed: u64, degenerate_count: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(hits, trials, Z_99);
        TailEstimate {
            hits,
            trials,
            p_hat: hits as f64 / trials as f64,
            ci_low,
            ci_high,
            seed,
            degenerate_count,
        }
    }

    /// Upper half-width `ci_high - p_hat`.
    pub fn half_width(&self) -> f64 {
        self.ci_high - self.p_hat
    }

    /// `p_hat <= bound + 3 * half_width`.
    pub fn respects(&self, bound: f64) -> bool {
        self.p_hat <= bound + 3.0 * self.half_width()
    }
}

/// Runs `trials` independent trials in parallel, folding each chunk's
/// `(a, b)` counters with `visit`.
fn run_trials<F>(spec: &DistributionSpec, n: usize, trials: u64, seed: u64, visit: F) -> (u64, u64)
where
    F: Fn(&[f64]) -> (u64, u64) + Sync,
{
    (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut stream = TrialStream::new(seed, 0);
            let mut buf = Vec::with_capacity(n);
            let lo = c * CHUNK;
            let mut acc = (0, 0);
            for trial in lo..(lo + CHUNK).min(trials) {
                stream.reset(trial);
                spec.fill(n, &mut stream, &mut buf);
                let (a, b) = visit(&buf);
                acc.0 += a;
                acc.1 += b;
            }
            acc
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
}

fn check_common(spec: &DistributionSpec, n: usize, x: f64, trials: u64) -> Result<()> {
    spec.check_len(n)?;
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::InvalidThreshold(x));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(())
}

/// Estimates `P(stat >= x)`. For `running-max` and `final-sum` the statistic is
/// normalized by `V_n(β)`; for `tstat` it is Student's `T_n` and `β` is unused.
pub fn estimate_tail(
    spec: &DistributionSpec,
    n: usize,
    beta: BetaParam,
    x: f64,
    stat: Statistic,
    trials: u64,
    seed: u64,
) -> Result<TailEstimate> {
    check_common(spec, n, x, trials)?;
    if stat == Statistic::TStat && n < 2 {
        return Err(Error::TooFewSamples { min: 2, got: n });
    }
    let (hits, degenerate) = run_trials(spec, n, trials, seed, |xs| match stat {
        Statistic::TStat => match t_statistic(xs) {
            None => (0, 1),
            Some(t) => (reaches(t, x) as u64, 0),
        },
        _ => {
            let v = lp_norm(xs, beta);
            if v == 0.0 {
                return (0, 1);
            }
            let (max, sum) = partial_sums(xs);
            let value = if stat == Statistic::RunningMax { max } else { sum };
            (reaches(value, x * v) as u64, 0)
        }
    });
    Ok(TailEstimate::from_counts(hits, trials, seed, degenerate))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EfronCheck {
    /// Trials where `{T_n >= x}` and `{S_n / V_n(2) >= x (n/(n+x²-1))^{1/2}}` disagree.
    pub violations: u64,
    /// Trials with `σ̂ > 0`.
    pub checked: u64,
    pub degenerate: u64,
}

/// Checks the t-statistic / self-normalized-sum event identity trial by trial.
pub fn efron_check(spec: &DistributionSpec, n: usize, x: f64, trials: u64, seed: u64) -> Result<EfronCheck> {
    check_common(spec, n, x, trials)?;
    let y = tstat_threshold(n, x)?;
    let (violations, degenerate) = run_trials(spec, n, trials, seed, |xs| match t_statistic(xs) {
        None => (0, 1),
        Some(t) => {
            let direct = reaches(t, x);
            let (_, sum) = partial_sums(xs);
            let normalized = reaches(sum, y * lp_norm(xs, BetaParam::TWO));
            ((direct != normalized) as u64, 0)
        }
    });
    Ok(EfronCheck { violations, checked: trials - degenerate, degenerate })
}

/// One row of an empirical log-rate study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRatePoint {
    pub n: usize,
    /// Threshold on `max_k S_k / V_n(β)`, i.e. `c n^α`.
    pub x: f64,
    /// `n^{2α+2/β-1}`.
    pub normalizer: f64,
    pub estimate: TailEstimate,
    /// `ln(p_hat) / normalizer`; `-inf` when there are no hits.
    pub rate: f64,
    /// `ln(ci_low) / normalizer`.
    pub rate_low: f64,
    /// `ln(ci_high) / normalizer`, the usable upper figure when `hits = 0`.
    pub rate_high: f64,
    /// `-c² / 2`.
    pub claimed: f64,
}

impl LogRatePoint {
    /// The claimed upper bound lies above the lower end of the rate's interval.
    pub fn respects_claim(&self) -> bool {
        self.rate_low <= self.claimed
    }
}

/// Estimates `ln P(max_k S_k / (V_n(β) n^α) >= c) / n^{2α+2/β-1}` for each `n`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_log_rate(
    spec: &DistributionSpec,
    beta: BetaParam,
    c: f64,
    n_list: &[usize],
    alpha: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<LogRatePoint>> {
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidThreshold(c));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument(format!("alpha must be finite, got {alpha}")));
    }
    if (alpha - beta.holder_exponent()).abs() < 1e-12 && c > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "c must lie in (0, 1] at the large-deviation scaling, got {c}"
        )));
    }
    n_list
        .iter()
        .map(|&n| {
            let nf = n as f64;
            let x = c * nf.powf(alpha);
            let normalizer = nf.powf(2.0 * alpha + 2.0 / beta.get() - 1.0);
            let estimate = estimate_tail(spec, n, beta, x, Statistic::RunningMax, trials, seed)?;
            Ok(LogRatePoint {
                n,
                x,
                normalizer,
                estimate,
                rate: estimate.p_hat.ln() / normalizer,
                rate_low: estimate.ci_low.ln() / normalizer,
                rate_high: estimate.ci_high.ln() / normalizer,
                claimed: -0.5 * c * c,
            })
        })
        .collect()
}
