//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any failure.

use std::f64::consts::LN_2;
use std::process::{Command, ExitCode};
use std::time::Instant;

use selfnorm::bernstein::{bernstein_numeric, DEFAULT_TOL};
use selfnorm::bounds::{
    bound_bn, bound_corollary, bound_tstat, endpoint, lambda_star, tstat_threshold, BetaParam, Regime,
};
use selfnorm::oracle::{exact_tail, exact_tstat_tail, MagnitudeVector, TailProfile};
use selfnorm::report::verify::weighted_magnitudes;
use selfnorm::simulate::{efron_check, empirical_log_rate, estimate_tail, DistributionSpec};
use selfnorm::stats::Statistic;
use selfnorm::Result;

/// Failures for one criterion; the first is kept for the report.
#[derive(Default)]
struct Check {
    checked: usize,
    failed: usize,
    first: Option<String>,
}

impl Check {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            self.first.get_or_insert_with(what);
        }
    }
}

fn beta(b: f64) -> BetaParam {
    BetaParam::new(b).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn ulps(a: f64, b: f64) -> u64 {
    (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
}

const S_TENTHS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

fn s_fine() -> Vec<f64> {
    let mut s = vec![0.001, 0.005];
    s.extend((1..=99).map(|k| k as f64 / 100.0));
    s.extend([0.995, 0.999]);
    s
}

fn endpoint_convention() -> Result<Check> {
    let mut c = Check::default();
    for n in 1..=20 {
        for b in [1.1, 1.5, 2.0, 3.0] {
            let e = bound_bn(n, beta(b), endpoint(n, beta(b)))?;
            let want = -(n as f64) * LN_2;
            c.expect(
                e.regime == Regime::Endpoint && ulps(e.log_value, want) <= 2 && e.value == 0.5f64.powi(n as i32),
                || format!("n={n} beta={b}: log {} vs {want}", e.log_value),
            );
        }
    }
    Ok(c)
}

fn endpoint_tightness() -> Result<Check> {
    let mut c = Check::default();
    for n in 1..=20 {
        for b in [1.1, 1.5, 2.0, 3.0] {
            let e = exact_tail(&MagnitudeVector::unit(n)?, beta(b), endpoint(n, beta(b)), Statistic::RunningMax)?;
            c.expect(e.hits == 1 && e.probability() == 0.5f64.powi(n as i32), || {
                format!("n={n} beta={b}: hits {}", e.hits)
            });
        }
    }
    Ok(c)
}

fn closed_form_vs_optimizer() -> Result<Check> {
    let mut c = Check::default();
    let r = bernstein_numeric(4, BetaParam::TWO, 1.0, DEFAULT_TOL)?;
    c.expect(rel(r.objective_value, 16.0 / 27.0) <= 1e-9, || format!("spot value {}", r.objective_value));
    c.expect(rel(r.lambda_star, 3f64.ln()) <= 1e-6, || format!("spot lambda {}", r.lambda_star));
    for n in 1..=64 {
        for b in [1.1, 1.5, 2.0, 3.0, 10.0] {
            for s in s_fine().into_iter().filter(|&s| s <= 0.99) {
                let x = s * endpoint(n, beta(b));
                let r = bernstein_numeric(n, beta(b), x, DEFAULT_TOL)?;
                let closed = bound_bn(n, beta(b), x)?.value;
                let lam = lambda_star(n, beta(b), x)?;
                c.expect(rel(r.objective_value, closed) <= 1e-9 && rel(r.lambda_star, lam) <= 1e-6, || {
                    format!(
                        "n={n} beta={b} s={s}: {} vs {closed}, lambda {} vs {lam}",
                        r.objective_value, r.lambda_star
                    )
                });
            }
        }
    }
    Ok(c)
}

fn monotone_limit() -> Result<Check> {
    let mut c = Check::default();
    let ns = [1usize, 4, 16, 100, 1_000, 10_000, 100_000];
    let vals = ns
        .iter()
        .map(|&n| bound_bn(n, BetaParam::TWO, 1.0).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    c.expect(vals[0] == 0.5, || format!("B_1 = {}", vals[0]));
    c.expect(rel(vals[1], 16.0 / 27.0) <= 1e-15, || format!("B_4 = {}", vals[1]));
    for (w, n) in vals.windows(2).zip(&ns[1..]) {
        c.expect(w[0] < w[1], || format!("not increasing at n={n}: {} >= {}", w[0], w[1]));
    }
    let last = vals[vals.len() - 1];
    c.expect((last - (-0.5f64).exp()).abs() < 1e-5, || format!("B_1e5 = {last}"));
    Ok(c)
}

fn dominance() -> Result<Check> {
    let mut c = Check::default();
    for n in 1..=64 {
        for b in [1.01, 1.1, 1.25, 1.5, 1.75, 2.0] {
            for s in s_fine().into_iter().chain([1.0]) {
                let x = s * endpoint(n, beta(b));
                let bn = bound_bn(n, beta(b), x)?.value;
                let cor = bound_corollary(n, beta(b), x)?.value;
                c.expect(bn <= cor + 1e-15, || format!("n={n} beta={b} s={s}: {bn} > {cor}"));
            }
        }
    }
    Ok(c)
}

fn oracle_below_bound() -> Result<Check> {
    let mut c = Check::default();
    for n in 1..=16 {
        let mut vectors = vec![MagnitudeVector::unit(n)?];
        vectors.extend((0..50).map(|j| weighted_magnitudes(n, j, 0xACCE97)));
        for mags in &vectors {
            let profile = TailProfile::new(mags)?;
            for b in [1.5, 2.0, 3.0] {
                for s in S_TENTHS {
                    let x = s * endpoint(n, beta(b));
                    let p = profile.tail(beta(b), x, Statistic::RunningMax)?.probability();
                    let bound = bound_bn(n, beta(b), x)?.value;
                    c.expect(p <= bound, || {
                        format!("n={n} beta={b} s={s} mags={:?}: {p} > {bound}", mags.magnitudes())
                    });
                }
            }
        }
    }
    Ok(c)
}

fn zero_regime() -> Result<Check> {
    let mut c = Check::default();
    let specs = [
        DistributionSpec::Rademacher,
        DistributionSpec::GaussianStandard,
        DistributionSpec::symmetric_pareto(1.2)?,
    ];
    for n in 1..=20 {
        for b in [1.1, 1.5, 2.0, 3.0] {
            for factor in [1.0 + 1e-9, 1.01, 1.5] {
                let x = factor * endpoint(n, beta(b));
                let e = bound_bn(n, beta(b), x)?;
                c.expect(e.value == 0.0 && e.regime == Regime::Impossible, || {
                    format!("bound n={n} beta={b} x={x}")
                });
                for mags in [MagnitudeVector::unit(n)?, weighted_magnitudes(n, n as u64, 5)] {
                    let hits = exact_tail(&mags, beta(b), x, Statistic::RunningMax)?.hits;
                    c.expect(hits == 0, || format!("oracle n={n} beta={b} x={x}: {hits} hits"));
                }
            }
            if n % 5 == 0 {
                let x = 1.01 * endpoint(n, beta(b));
                for spec in &specs {
                    let est = estimate_tail(spec, n, beta(b), x, Statistic::RunningMax, 10_000, 17)?;
                    c.expect(est.hits == 0, || format!("mc {spec} n={n} beta={b}: {} hits", est.hits));
                }
            }
        }
    }
    Ok(c)
}

fn efron_identity() -> Result<Check> {
    let mut c = Check::default();
    let mut runs: Vec<(DistributionSpec, usize)> = (2..=10).map(|n| (DistributionSpec::Rademacher, n)).collect();
    for n in [2, 5, 10, 20] {
        runs.push((DistributionSpec::GaussianStandard, n));
        runs.push((DistributionSpec::symmetric_pareto(1.2)?, n));
    }
    for (spec, n) in &runs {
        for x in [0.5, 1.0, 2.0] {
            let e = efron_check(spec, *n, x, 100_000, 23)?;
            c.expect(e.violations == 0, || format!("{spec} n={n} x={x}: {} violations", e.violations));
        }
    }
    for n in 2..=12 {
        for mags in [MagnitudeVector::unit(n)?, weighted_magnitudes(n, 1, 9), weighted_magnitudes(n, 2, 9)] {
            for x in [0.3, 1.0, 2.0, 4.0] {
                let t = exact_tstat_tail(&mags, x)?;
                let direct = exact_tail(&mags, BetaParam::TWO, tstat_threshold(n, x)?, Statistic::FinalSum)?;
                c.expect(
                    t.disagreements == 0
                        && t.hits == t.identity_hits
                        && direct.hits == t.identity_hits + t.degenerate_identity_hits,
                    || format!("n={n} x={x}: {t:?} vs {}", direct.hits),
                );
            }
        }
    }
    Ok(c)
}

fn monte_carlo_vs_bound() -> Result<Check> {
    let mut c = Check::default();
    let gauss = DistributionSpec::GaussianStandard;
    let est = estimate_tail(&gauss, 20, BetaParam::TWO, 2.0, Statistic::FinalSum, 1_000_000, 31)?;
    c.expect(est.respects((-2f64).exp()), || format!("gaussian final-sum p_hat {}", est.p_hat));
    for n in [5, 20] {
        for x in [1.0, 2.0, 3.0] {
            let est = estimate_tail(&gauss, n, BetaParam::TWO, x, Statistic::TStat, 1_000_000, 37)?;
            let bound = bound_tstat(n, x)?.value;
            c.expect(est.respects(bound), || format!("tstat n={n} x={x}: p_hat {} vs {bound}", est.p_hat));
        }
    }
    Ok(c)
}

fn ldp_scaling() -> Result<Check> {
    let mut c = Check::default();
    let pts = empirical_log_rate(&DistributionSpec::Rademacher, BetaParam::TWO, 0.6, &[10, 20, 40], 0.5, 1_000_000, 41)?;
    for p in &pts {
        c.expect(p.respects_claim() && p.claimed == -0.18, || {
            format!("n={}: rate {} in [{}, {}]", p.n, p.rate, p.rate_low, p.rate_high)
        });
    }
    let p10 = &pts[0];
    let exact = exact_tail(&MagnitudeVector::unit(10)?, BetaParam::TWO, p10.x, Statistic::RunningMax)?.probability();
    c.expect(p10.estimate.ci_low <= exact && exact <= p10.estimate.ci_high, || {
        format!("n=10 exact {exact} outside [{}, {}]", p10.estimate.ci_low, p10.estimate.ci_high)
    });
    Ok(c)
}

fn sweep_determinism() -> Result<Check> {
    let mut c = Check::default();
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_selfnorm"))
            .args(["sweep", "--n", "4,9,16,40", "--beta", "1.5,2,3", "--s", "0.2,0.5,0.9,1"])
            .args(["--stat", "running-max", "--dist", "gaussian", "--trials", "20000", "--seed", "5"])
            .env("SELFNORM_THREADS", threads)
            .output()
            .expect("run selfnorm binary")
    };
    let reference = run("1");
    c.expect(reference.status.success() && !reference.stdout.is_empty(), || {
        String::from_utf8_lossy(&reference.stderr).into_owned()
    });
    for threads in ["1", "2", "8", "2", "8"] {
        let out = run(threads);
        c.expect(out.status.success() && out.stdout == reference.stdout, || {
            format!("SELFNORM_THREADS={threads} differs")
        });
    }
    Ok(c)
}

type Criterion = (&'static str, fn() -> Result<Check>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("1  endpoint convention", endpoint_convention),
        ("2  endpoint tightness", endpoint_tightness),
        ("3  closed form vs optimizer", closed_form_vs_optimizer),
        ("4  monotone limit", monotone_limit),
        ("5  dominance", dominance),
        ("6  oracle below bound", oracle_below_bound),
        ("7  zero regime", zero_regime),
        ("8  efron identity", efron_identity),
        ("9  monte carlo vs bound", monte_carlo_vs_bound),
        ("10 ldp scaling", ldp_scaling),
        ("11 sweep determinism", sweep_determinism),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let line = match run() {
            Ok(c) if c.failed == 0 => format!("PASS  {name:<30} {} checks", c.checked),
            Ok(c) => {
                failures += 1;
                let first = c.first.unwrap_or_default();
                format!("FAIL  {name:<30} {}/{} failed; first: {first}", c.failed, c.checked)
            }
            Err(e) => {
                failures += 1;
                format!("FAIL  {name:<30} error: {e}")
            }
        };
        println!("{line}  ({:.1}s)", start.elapsed().as_secs_f64());
    }
    if failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
