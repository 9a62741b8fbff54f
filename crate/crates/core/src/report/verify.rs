//! Built-in verification suites run by `selfnorm verify`.
//!
//! Each suite returns a [`SuiteOutcome`]; a failing check is a normal outcome,
//! while `Err` is reserved for the harness itself breaking.

use std::f64::consts::LN_2;

use rand::Rng;

use crate::bernstein::{bernstein_numeric, BernsteinResult, DEFAULT_TOL};
use crate::bounds::{
    bound_bn, bound_bn_entropy_form, bound_corollary, bound_tstat, endpoint, lambda_star, log_cosh,
    tstat_threshold, BetaParam, BoundEvaluation,
};
use crate::error::Result;
use crate::oracle::{exact_lower_tail, exact_tail, exact_tstat_tail, MagnitudeVector, TailProfile};
use crate::parallel::with_workers;
use crate::report::format::round_sig;
use crate::report::sweep::{run_sweep, write_csv, SweepGrid, COLUMNS};
use crate::simulate::{efron_check, empirical_log_rate, estimate_tail, DistributionSpec, TrialStream};
use crate::stats::Statistic;

pub type BoundFn = fn(usize, BetaParam, f64) -> Result<BoundEvaluation>;
pub type OptimizerFn = fn(usize, BetaParam, f64, f64) -> Result<BernsteinResult>;

const BETAS: [f64; 5] = [1.1, 1.5, 2.0, 3.0, 10.0];
const S_GRID: [f64; 5] = [0.01, 0.1, 0.5, 0.9, 0.999];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub module: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Grid sizes and trial counts; `fast` shrinks both roughly tenfold.
#[derive(Debug, Clone, Copy)]
pub struct Scale {
    pub fast: bool,
}

impl Scale {
    fn trials(self, full: u64) -> u64 {
        if self.fast {
            full / 10
        } else {
            full
        }
    }

    fn n_grid(self) -> Vec<usize> {
        if self.fast {
            vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 64]
        } else {
            (1..=64).collect()
        }
    }
}

/// Collects failures for one suite.
struct Tally {
    name: &'static str,
    module: &'static str,
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, module: &'static str) -> Self {
        Tally { name, module, checked: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> SuiteOutcome {
        let detail = match self.failures.first() {
            None => format!("{} checks", self.checked),
            Some(first) => format!("{}/{} failed; first: {first}", self.failures.len(), self.checked),
        };
        SuiteOutcome { name: self.name, module: self.module, passed: self.failures.is_empty(), detail }
    }
}

fn beta(b: f64) -> BetaParam {
    BetaParam::new(b).expect("grid betas exceed 1")
}

/// Seeded magnitude vectors mixing bounded and heavy-tailed entries.
pub fn weighted_magnitudes(n: usize, index: u64, seed: u64) -> MagnitudeVector {
    let mut rng = TrialStream::new(seed, index);
    let heavy = index % 2 == 1;
    let mags = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            if heavy {
                (1.0 - u).powf(-1.0 / 1.5)
            } else {
                0.05 + 2.0 * u
            }
        })
        .collect();
    MagnitudeVector::new(mags).expect("positive magnitudes")
}

pub fn form_equivalence(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("FORM EQUIVALENCE", "bounds");
    for n in scale.n_grid() {
        for b in BETAS {
            for s in S_GRID {
                let x = s * endpoint(n, beta(b));
                let lit = bound_bn(n, beta(b), x)?.log_value;
                let ent = bound_bn_entropy_form(n, beta(b), x)?.log_value;
                t.check((lit - ent).abs() <= 1e-12 * lit.abs().max(1.0), || {
                    format!("n={n} beta={b} s={s}: {lit} vs {ent}")
                });
            }
        }
    }
    Ok(t.finish())
}

/// Checks `bound(n, β, n^{(β-1)/β}) = 2^{-n}`.
pub fn endpoint_convention(bound: BoundFn, max_n: usize) -> SuiteOutcome {
    let mut t = Tally::new("ENDPOINT", "bounds");
    for n in 1..=max_n {
        for b in BETAS {
            let expect_log = -(n as f64) * LN_2;
            match bound(n, beta(b), endpoint(n, beta(b))) {
                Ok(e) => {
                    let ulp = 2.0 * f64::EPSILON * expect_log.abs();
                    t.check(e.value == 0.5f64.powi(n as i32) && (e.log_value - expect_log).abs() <= ulp, || {
                        format!("n={n} beta={b}: value {} log {}", e.value, e.log_value)
                    });
                }
                Err(err) => t.check(false, || format!("n={n} beta={b}: {err}")),
            }
        }
    }
    t.finish()
}

pub fn monotone_in_x(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("MONOTONE IN X", "bounds");
    for n in scale.n_grid() {
        for b in BETAS {
            let m = endpoint(n, beta(b));
            let mut prev = f64::INFINITY;
            for k in 1..=100 {
                let s = k as f64 / 100.0;
                let v = bound_bn(n, beta(b), s * m)?.value;
                t.check(v <= prev, || format!("n={n} beta={b} s={s}: {v} > {prev}"));
                prev = v;
            }
        }
    }
    Ok(t.finish())
}

pub fn monotone_in_n(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("MONOTONE IN N AND LIMIT", "bounds");
    let n_max = if scale.fast { 200 } else { 2000 };
    for x in [0.5f64, 1.0, 2.0] {
        let limit = (-0.5 * x * x).exp();
        let first = (x * x).ceil().max(1.0) as usize;
        let mut prev = bound_bn(first, BetaParam::TWO, x)?.value;
        for n in first + 1..=n_max {
            let v = bound_bn(n, BetaParam::TWO, x)?.value;
            t.check(prev <= v && v <= limit, || format!("x={x} n={n}: {prev} -> {v} (limit {limit})"));
            prev = v;
        }
    }
    let far = bound_bn(100_000, BetaParam::TWO, 1.0)?.value;
    let limit = (-0.5f64).exp();
    t.check(far >= limit - 1e-5 && far <= limit, || format!("B_100000(2,1) = {far}"));
    Ok(t.finish())
}

pub fn dominance(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("DOMINANCE", "bounds");
    let mut extension = 0;
    for n in scale.n_grid() {
        for b in BETAS {
            for k in 1..=100 {
                let s = k as f64 / 100.0;
                let x = s * endpoint(n, beta(b));
                let bn = bound_bn(n, beta(b), x)?.value;
                let cor = bound_corollary(n, beta(b), x)?;
                extension += cor.extrapolated as usize;
                t.check(bn <= cor.value + 1e-15, || format!("n={n} beta={b} s={s}: {bn} > {}", cor.value));
            }
        }
    }
    let mut out = t.finish();
    out.detail.push_str(&format!(" ({extension} with beta > 2, derived extension)"));
    Ok(out)
}

/// Checks the numeric optimizer against the closed form on the interior grid.
pub fn bernstein_consistency(optimize: OptimizerFn, scale: Scale) -> SuiteOutcome {
    let mut t = Tally::new("BERNSTEIN CONSISTENCY", "bounds");
    for n in scale.n_grid() {
        for b in BETAS {
            for s in [0.01, 0.1, 0.5, 0.9, 0.99] {
                let x = s * endpoint(n, beta(b));
                let closed = bound_bn(n, beta(b), x).map(|e| e.value);
                let lam = lambda_star(n, beta(b), x);
                match (optimize(n, beta(b), x, DEFAULT_TOL), closed, lam) {
                    (Ok(r), Ok(v), Ok(l)) => {
                        t.check(
                            (r.objective_value / v - 1.0).abs() <= 1e-9 && (r.lambda_star / l - 1.0).abs() <= 1e-6,
                            || format!("n={n} beta={b} s={s}: ({}, {}) vs ({v}, {l})", r.objective_value, r.lambda_star),
                        );
                    }
                    (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                        t.check(false, || format!("n={n} beta={b} s={s}: {e}"))
                    }
                }
            }
        }
    }
    t.finish()
}

pub fn majorization() -> SuiteOutcome {
    let mut t = Tally::new("MAJORIZATION", "bounds");
    for k in -5000..=5000 {
        let u = k as f64 / 100.0;
        t.check(log_cosh(u) <= 0.5 * u * u, || format!("u={u}"));
    }
    t.finish()
}

pub fn tstat_range() -> Result<SuiteOutcome> {
    let mut t = Tally::new("TSTAT RANGE", "bounds");
    for n in 2..=64usize {
        let root = (n as f64).sqrt();
        for k in 0..=120 {
            let x = 10f64.powf(-6.0 + k as f64 / 10.0);
            let y = tstat_threshold(n, x)?;
            t.check(y > 0.0 && y <= root, || format!("n={n} x={x}: {y}"));
        }
    }
    Ok(t.finish())
}

pub fn oracle_below_bound() -> Result<SuiteOutcome> {
    let mut t = Tally::new("ORACLE <= BOUND", "oracle");
    for n in 1..=16 {
        let profile = TailProfile::new(&MagnitudeVector::unit(n)?)?;
        check_profile_below_bound(&mut t, &profile, &[1.5, 2.0, 3.0])?;
    }
    // beyond the endpoint both sides vanish
    for n in [3, 9, 16] {
        for b in [1.5, 2.0, 3.0] {
            let x = 1.1 * endpoint(n, beta(b));
            let e = exact_tail(&MagnitudeVector::unit(n)?, beta(b), x, Statistic::RunningMax)?;
            let v = bound_bn(n, beta(b), x)?.value;
            t.check(e.hits == 0 && v == 0.0, || format!("zero regime n={n} beta={b}: hits {} bound {v}", e.hits));
        }
    }
    Ok(t.finish())
}

fn check_profile_below_bound(t: &mut Tally, profile: &TailProfile, betas: &[f64]) -> Result<()> {
    let n = profile.magnitudes().len();
    for &b in betas {
        for k in 1..=10 {
            let s = k as f64 / 10.0;
            let x = s * endpoint(n, beta(b));
            let p = profile.tail(beta(b), x, Statistic::RunningMax)?.probability();
            let v = bound_bn(n, beta(b), x)?.value;
            t.check(p <= v, || format!("n={n} beta={b} s={s}: exact {p} > bound {v}"));
        }
    }
    Ok(())
}

pub fn weighted_oracle_below_bound(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("WEIGHTED ORACLE <= BOUND", "oracle");
    let vectors = if scale.fast { 10 } else { 50 };
    for n in 1..=14 {
        for j in 0..vectors {
            let profile = TailProfile::new(&weighted_magnitudes(n, j, 0xC0FFEE))?;
            check_profile_below_bound(&mut t, &profile, &[1.5, 2.0, 3.0])?;
        }
    }
    Ok(t.finish())
}

pub fn endpoint_exactness(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("ENDPOINT EXACTNESS", "oracle");
    let max_n = if scale.fast { 14 } else { 20 };
    for n in 1..=max_n {
        for b in BETAS {
            let e = exact_tail(&MagnitudeVector::unit(n)?, beta(b), endpoint(n, beta(b)), Statistic::RunningMax)?;
            t.check(e.hits == 1 && e.total == 1 << n, || format!("n={n} beta={b}: hits {}", e.hits));
        }
    }
    Ok(t.finish())
}

pub fn two_point_tightness() -> Result<SuiteOutcome> {
    let mut t = Tally::new("TWO-POINT BERNSTEIN TIGHTNESS", "oracle");
    for n in 1..=12 {
        let unit = MagnitudeVector::unit(n)?;
        for b in [1.5, 2.0, 3.0] {
            for s in [0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
                let x = s * endpoint(n, beta(b));
                let p = exact_tail(&unit, beta(b), x, Statistic::FinalSum)?.probability();
                let r = bernstein_numeric(n, beta(b), x, DEFAULT_TOL)?;
                t.check(p <= r.objective_value, || format!("n={n} beta={b} s={s}: {p} > {}", r.objective_value));
                for a in [0.5, 3.7] {
                    let scaled = MagnitudeVector::constant(n, a)?;
                    for stat in [Statistic::FinalSum, Statistic::RunningMax] {
                        let lhs = exact_tail(&scaled, beta(b), x, stat)?;
                        let rhs = exact_tail(&unit, beta(b), x, stat)?;
                        t.check(lhs == rhs, || format!("scale {a} n={n} beta={b} s={s} {stat}"));
                    }
                }
            }
        }
    }
    Ok(t.finish())
}

pub fn mirror_symmetry() -> Result<SuiteOutcome> {
    let mut t = Tally::new("MIRROR SYMMETRY", "oracle");
    for n in 1..=12 {
        for mags in [MagnitudeVector::unit(n)?, weighted_magnitudes(n, n as u64, 7)] {
            for b in [1.5, 2.0, 3.0] {
                for s in [0.05, 0.2, 0.5, 0.8, 1.0] {
                    let x = s * endpoint(n, beta(b));
                    let up = exact_tail(&mags, beta(b), x, Statistic::FinalSum)?;
                    let down = exact_lower_tail(&mags, beta(b), x)?;
                    t.check(up == down, || format!("n={n} beta={b} s={s}: {} vs {}", up.hits, down.hits));
                }
            }
        }
    }
    Ok(t.finish())
}

pub fn oracle_monotone_in_x() -> Result<SuiteOutcome> {
    let mut t = Tally::new("ORACLE MONOTONE IN X", "oracle");
    for n in [1, 4, 9, 13] {
        for mags in [MagnitudeVector::unit(n)?, weighted_magnitudes(n, 3, 11)] {
            let profile = TailProfile::new(&mags)?;
            for stat in [Statistic::RunningMax, Statistic::FinalSum] {
                let mut prev = u64::MAX;
                for k in 1..=60 {
                    let x = k as f64 * 0.05 * endpoint(n, BetaParam::TWO);
                    let hits = profile.tail(BetaParam::TWO, x, stat)?.hits;
                    t.check(hits <= prev, || format!("n={n} {stat} k={k}"));
                    prev = hits;
                }
            }
        }
    }
    Ok(t.finish())
}

pub fn tstat_dual_route() -> Result<SuiteOutcome> {
    let mut t = Tally::new("TSTAT DUAL ROUTE", "oracle");
    for n in 2..=12 {
        for mags in [MagnitudeVector::unit(n)?, weighted_magnitudes(n, 5, 13)] {
            for x in [0.25, 0.5, 1.0, 2.0, 3.0] {
                let tt = exact_tstat_tail(&mags, x)?;
                let y = tstat_threshold(n, x)?;
                let f = exact_tail(&mags, BetaParam::TWO, y, Statistic::FinalSum)?;
                t.check(
                    tt.disagreements == 0
                        && tt.hits == tt.identity_hits
                        && tt.hits + tt.degenerate_identity_hits == f.hits,
                    || format!("n={n} x={x}: {tt:?} vs {}", f.hits),
                );
            }
        }
    }
    Ok(t.finish())
}

pub fn bound_respect(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("BOUND RESPECT", "simulate");
    let trials = scale.trials(200_000);
    let specs = [
        DistributionSpec::Rademacher,
        DistributionSpec::GaussianStandard,
        DistributionSpec::UniformSymmetric,
        DistributionSpec::symmetric_pareto(1.2)?,
        DistributionSpec::two_point(3.7)?,
    ];
    let mut seed = 1000;
    for spec in &specs {
        for n in [5, 20] {
            for b in [1.5, 2.0] {
                for s in [0.3, 0.6] {
                    for stat in [Statistic::RunningMax, Statistic::FinalSum] {
                        seed += 1;
                        let x = s * endpoint(n, beta(b));
                        let e = estimate_tail(spec, n, beta(b), x, stat, trials, seed)?;
                        let v = bound_bn(n, beta(b), x)?.value;
                        t.check(e.respects(v), || format!("{spec} n={n} beta={b} s={s} {stat}: {} > {v}", e.p_hat));
                    }
                }
            }
            for x in [1.0, 2.0, 3.0] {
                seed += 1;
                let e = estimate_tail(spec, n, BetaParam::TWO, x, Statistic::TStat, trials, seed)?;
                let v = bound_tstat(n, x)?.value;
                t.check(e.respects(v), || format!("{spec} n={n} tstat x={x}: {} > {v}", e.p_hat));
            }
        }
    }
    let e = estimate_tail(
        &DistributionSpec::GaussianStandard,
        20,
        BetaParam::TWO,
        2.0,
        Statistic::FinalSum,
        scale.trials(1_000_000),
        42,
    )?;
    t.check(e.respects((-2.0f64).exp()), || format!("gaussian n=20 x=2 final-sum vs exp(-2): {}", e.p_hat));
    Ok(t.finish())
}

pub fn oracle_agreement(scale: Scale) -> Result<SuiteOutcome> {
    let trials = scale.trials(100_000);
    let mut cells = Vec::new();
    for n in [4, 7, 10, 14] {
        for s in [0.2, 0.4, 0.6, 0.8, 1.0] {
            for stat in [Statistic::RunningMax, Statistic::FinalSum] {
                cells.push((DistributionSpec::Rademacher, n, 2.0, s, stat));
            }
        }
    }
    for (j, n) in [6usize, 12].into_iter().enumerate() {
        let spec = DistributionSpec::FixedMagnitudes(weighted_magnitudes(n, j as u64, 21));
        for s in [0.2, 0.4, 0.6, 0.8] {
            for stat in [Statistic::RunningMax, Statistic::FinalSum] {
                cells.push((spec.clone(), n, 1.5, s, stat));
            }
        }
    }
    let mut covered = 0;
    let mut misses = Vec::new();
    for (i, (spec, n, b, s, stat)) in cells.iter().enumerate() {
        let x = s * endpoint(*n, beta(*b));
        let mags = spec.enumerable_magnitudes(*n).expect("enumerable spec");
        let exact = exact_tail(&mags, beta(*b), x, *stat)?.probability();
        let e = estimate_tail(spec, *n, beta(*b), x, *stat, trials, 5000 + i as u64)?;
        if e.ci_low <= exact && exact <= e.ci_high {
            covered += 1;
        } else {
            misses.push(format!("{spec} n={n} s={s} {stat}: exact {exact} not in [{}, {}]", e.ci_low, e.ci_high));
        }
    }
    let rate = covered as f64 / cells.len() as f64;
    let mut detail = format!("{covered}/{} cells covered ({:.1}%)", cells.len(), 100.0 * rate);
    if let Some(m) = misses.first() {
        detail.push_str(&format!("; e.g. {m}"));
    }
    Ok(SuiteOutcome { name: "ORACLE AGREEMENT", module: "simulate", passed: cells.len() >= 40 && rate >= 0.95, detail })
}

pub fn determinism(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("DETERMINISM", "simulate");
    let trials = scale.trials(100_000);
    let cases = [
        (DistributionSpec::GaussianStandard, 12, Statistic::RunningMax),
        (DistributionSpec::symmetric_pareto(1.2)?, 30, Statistic::FinalSum),
        (DistributionSpec::Rademacher, 9, Statistic::TStat),
    ];
    for (spec, n, stat) in &cases {
        let run = |k| with_workers(Some(k), || estimate_tail(spec, *n, beta(1.5), 1.0, *stat, trials, 77));
        let one = run(1)?;
        for k in [2, 8] {
            let other = run(k)?;
            t.check(one == other, || format!("{spec} workers={k}: {} vs {}", one.hits, other.hits));
        }
    }
    Ok(t.finish())
}

pub fn heavy_tail_decay(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("HEAVY-TAIL DECAY", "simulate");
    let spec = DistributionSpec::symmetric_pareto(1.2)?;
    let trials = scale.trials(100_000);
    let estimates = [10, 100, 1000]
        .into_iter()
        .map(|n| estimate_tail(&spec, n, beta(1.5), 0.5, Statistic::FinalSum, trials, 31))
        .collect::<Result<Vec<_>>>()?;
    for w in estimates.windows(2) {
        let (a, b) = (w[0], w[1]);
        t.check(b.p_hat <= a.p_hat || b.ci_low <= a.ci_high, || {
            format!("p_hat rose from {} to {}", a.p_hat, b.p_hat)
        });
    }
    let mut out = t.finish();
    let trace: Vec<String> = estimates.iter().map(|e| format!("{:.4}", e.p_hat)).collect();
    out.detail.push_str(&format!(" (p_hat {})", trace.join(" > ")));
    Ok(out)
}

pub fn efron(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("EFRON", "simulate");
    let trials = scale.trials(100_000);
    let mut cells = vec![
        (DistributionSpec::GaussianStandard, 10, 1.5),
        (DistributionSpec::symmetric_pareto(1.2)?, 5, 0.7),
        (DistributionSpec::UniformSymmetric, 7, 2.0),
    ];
    for n in 2..=10 {
        cells.push((DistributionSpec::Rademacher, n, 1.0));
    }
    for (i, (spec, n, x)) in cells.iter().enumerate() {
        let c = efron_check(spec, *n, *x, trials, 900 + i as u64)?;
        t.check(c.violations == 0, || format!("{spec} n={n} x={x}: {} violations", c.violations));
    }
    Ok(t.finish())
}

pub fn log_rate(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("LDP LOG-RATE", "simulate");
    let c = 0.6;
    let points = empirical_log_rate(
        &DistributionSpec::Rademacher,
        BetaParam::TWO,
        c,
        &[10, 20, 40],
        0.5,
        scale.trials(1_000_000),
        2024,
    )?;
    for p in &points {
        t.check(p.respects_claim(), || format!("n={}: rate in [{}, {}] above {}", p.n, p.rate_low, p.rate_high, p.claimed));
    }
    let first = &points[0];
    let exact = exact_tail(&MagnitudeVector::unit(first.n)?, BetaParam::TWO, first.x, Statistic::RunningMax)?.probability();
    t.check(first.estimate.ci_low <= exact && exact <= first.estimate.ci_high, || {
        format!("n=10 exact {exact} outside [{}, {}]", first.estimate.ci_low, first.estimate.ci_high)
    });
    Ok(t.finish())
}

fn demo_grid(scale: Scale) -> Result<SweepGrid> {
    Ok(SweepGrid {
        n_values: vec![4, 10, 64],
        beta_values: vec![beta(1.5), BetaParam::TWO],
        s_values: vec![0.25, 0.5, 0.75, 1.0],
        stat: Statistic::RunningMax,
        spec: Some(DistributionSpec::Rademacher),
        trials: scale.trials(20_000),
        seed: 42,
    })
}

pub fn csv_round_trip(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("CSV ROUND-TRIP", "cli");
    let rows = run_sweep(&demo_grid(scale)?)?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().map(|h| h.iter().map(String::from).collect()).unwrap_or_default();
    t.check(header == COLUMNS, || format!("header {header:?}"));
    let records: Vec<csv::StringRecord> = match reader.records().collect() {
        Ok(r) => r,
        Err(e) => {
            t.check(false, || e.to_string());
            return Ok(t.finish());
        }
    };
    t.check(records.len() == rows.len(), || format!("{} records for {} rows", records.len(), rows.len()));
    for (row, record) in rows.iter().zip(&records) {
        let expect = [
            Some(row.beta),
            Some(row.s),
            Some(row.x),
            Some(row.bound_bn),
            Some(row.bound_corollary),
            row.bernstein_numeric,
            row.oracle_exact,
            row.mc.map(|m| m.p_hat),
            row.mc.map(|m| m.ci_low),
            row.mc.map(|m| m.ci_high),
        ];
        t.check(record.get(0) == Some(row.n.to_string().as_str()), || format!("n field {:?}", record.get(0)));
        for (field, want) in record.iter().skip(1).zip(expect) {
            let got = if field.is_empty() { None } else { field.parse::<f64>().ok() };
            t.check(got == want.map(round_sig), || format!("field `{field}` vs {want:?}"));
        }
    }
    Ok(t.finish())
}

pub fn sweep_determinism(scale: Scale) -> Result<SuiteOutcome> {
    let mut t = Tally::new("SWEEP BYTE-IDENTICAL", "cli");
    let grid = demo_grid(scale)?;
    let render = |k| -> Result<Vec<u8>> {
        let rows = with_workers(Some(k), || run_sweep(&grid))?;
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf)?;
        Ok(buf)
    };
    let one = render(1)?;
    for k in [2, 8] {
        t.check(render(k)? == one, || format!("workers={k} differs"));
    }
    Ok(t.finish())
}

/// Runs every suite in order.
pub fn run_all(scale: Scale) -> Result<Vec<SuiteOutcome>> {
    Ok(vec![
        form_equivalence(scale)?,
        endpoint_convention(bound_bn, if scale.fast { 20 } else { 64 }),
        monotone_in_x(scale)?,
        monotone_in_n(scale)?,
        dominance(scale)?,
        bernstein_consistency(bernstein_numeric, scale),
        majorization(),
        tstat_range()?,
        oracle_below_bound()?,
        weighted_oracle_below_bound(scale)?,
        endpoint_exactness(scale)?,
        two_point_tightness()?,
        mirror_symmetry()?,
        oracle_monotone_in_x()?,
        tstat_dual_route()?,
        bound_respect(scale)?,
        oracle_agreement(scale)?,
        determinism(scale)?,
        heavy_tail_decay(scale)?,
        efron(scale)?,
        log_rate(scale)?,
        csv_round_trip(scale)?,
        sweep_determinism(scale)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::Regime;
    use crate::error::Error;

    fn no_endpoint_convention(n: usize, b: BetaParam, x: f64) -> Result<BoundEvaluation> {
        // plugs s = 1 - ε into the interior formula instead of using 2^{-n}
        bound_bn(n, b, x * (1.0 - 1e-9))
    }

    fn diverging(_: usize, _: BetaParam, _: f64, _: f64) -> Result<BernsteinResult> {
        Err(Error::NoConvergence(200))
    }

    fn wrong_argmin(n: usize, b: BetaParam, x: f64, tol: f64) -> Result<BernsteinResult> {
        let mut r = bernstein_numeric(n, b, x, tol)?;
        r.lambda_star *= 1.01;
        Ok(r)
    }

    #[test]
    fn endpoint_suite_catches_missing_convention() {
        assert!(endpoint_convention(bound_bn, 20).passed);
        let broken = endpoint_convention(no_endpoint_convention, 20);
        assert!(!broken.passed);
        assert_eq!(bound_bn(4, BetaParam::TWO, 2.0).unwrap().regime, Regime::Endpoint);
    }

    #[test]
    fn bernstein_suite_catches_divergence() {
        let fast = Scale { fast: true };
        assert!(bernstein_consistency(bernstein_numeric, fast).passed);
        assert!(!bernstein_consistency(diverging, fast).passed);
        assert!(!bernstein_consistency(wrong_argmin, fast).passed);
    }

    #[test]
    fn weighted_vectors_are_seeded() {
        assert_eq!(weighted_magnitudes(6, 3, 1), weighted_magnitudes(6, 3, 1));
        assert_ne!(weighted_magnitudes(6, 3, 1), weighted_magnitudes(6, 4, 1));
    }
}
