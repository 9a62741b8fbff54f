use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use selfnorm::bernstein::{bernstein_numeric, DEFAULT_TOL};
use selfnorm::bounds::{
    bound_bn, bound_bn_entropy_form, bound_corollary, bound_rescaled, bound_tstat, endpoint, tstat_threshold,
    two_sided_bound, BetaParam, BoundEvaluation,
};
use selfnorm::oracle::{exact_tail, exact_tstat_tail, MagnitudeVector};
use selfnorm::parallel::{with_workers, workers_from_env};
use selfnorm::report::{self, round_sig, Scale, SweepGrid};
use selfnorm::simulate::{estimate_tail, DistributionSpec, DEFAULT_TRIALS};
use selfnorm::stats::Statistic;
use selfnorm::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "selfnorm", version, about = "Self-normalized deviation bounds with exact and Monte Carlo checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a closed-form or numeric bound.
    Bound(BoundArgs),
    /// Exact tail probability by sign enumeration (n <= 30).
    Oracle(OracleArgs),
    /// Monte Carlo tail estimate against the matching bound.
    Simulate(SimulateArgs),
    /// Tabulate bounds, oracle and simulation over a grid.
    Sweep(SweepArgs),
    /// Run every verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Threshold {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    beta: f64,
    /// Absolute threshold.
    #[arg(long, conflicts_with = "s", required_unless_present = "s")]
    x: Option<f64>,
    /// Normalized threshold, x = s * n^{(beta-1)/beta}.
    #[arg(long)]
    s: Option<f64>,
}

impl Threshold {
    fn beta(&self) -> Result<BetaParam> {
        BetaParam::new(self.beta)
    }

    fn x(&self) -> Result<f64> {
        match (self.x, self.s) {
            (Some(x), None) => Ok(x),
            (None, Some(s)) => Ok(s * endpoint(self.n, self.beta()?)),
            _ => Err(Error::InvalidArgument("exactly one of --x and --s is required".into())),
        }
    }

    /// The t-statistic threshold is not a normalized sum, so `--s` is refused.
    fn raw_x(&self, what: &str) -> Result<f64> {
        match self.x {
            Some(x) if self.s.is_none() => Ok(x),
            _ => Err(Error::InvalidArgument(format!("{what} takes an absolute --x threshold"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Bn,
    Entropy,
    Corollary,
    Bernstein,
    Tstat,
    TwoSided,
    Rescaled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StatArg {
    RunningMax,
    FinalSum,
    Tstat,
}

impl From<StatArg> for Statistic {
    fn from(s: StatArg) -> Self {
        match s {
            StatArg::RunningMax => Statistic::RunningMax,
            StatArg::FinalSum => Statistic::FinalSum,
            StatArg::Tstat => Statistic::TStat,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long, value_enum, default_value_t = Kind::Bn)]
    kind: Kind,
    /// Exponent of the rescaled threshold x n^alpha (kind = rescaled).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long, value_enum, default_value_t = StatArg::RunningMax)]
    stat: StatArg,
    /// rademacher, twopoint:A or mags:FILE.
    #[arg(long, default_value = "rademacher")]
    dist: String,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long, value_enum, default_value_t = StatArg::RunningMax)]
    stat: StatArg,
    /// rademacher, twopoint:A, uniform, gaussian, pareto:TAIL or mags:FILE.
    #[arg(long)]
    dist: String,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    beta: Vec<f64>,
    /// Comma-separated normalized thresholds in (0, 1], ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    s: Vec<f64>,
    #[arg(long, value_enum, default_value_t = StatArg::RunningMax)]
    stat: StatArg,
    /// Law for the Monte Carlo columns; omitted means no simulation.
    #[arg(long)]
    dist: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Shrink grids and trial counts roughly tenfold.
    #[arg(long)]
    fast: bool,
}

fn num(v: f64) -> Value {
    json!(round_sig(v))
}

fn evaluation_record(kind: &str, beta: Option<BetaParam>, e: &BoundEvaluation) -> Map<String, Value> {
    let mut rec = Map::new();
    rec.insert("kind".into(), json!(kind));
    rec.insert("n".into(), json!(e.n));
    if let Some(b) = beta {
        rec.insert("beta".into(), num(b.get()));
    }
    rec.insert("x".into(), num(e.x));
    rec.insert("s".into(), num(e.s));
    rec.insert("value".into(), num(e.value));
    rec.insert("log_value".into(), num(e.log_value));
    rec.insert("regime".into(), json!(e.regime.to_string()));
    rec
}

fn print_record(rec: Map<String, Value>) -> Result<()> {
    let text = serde_json::to_string(&Value::Object(rec)).expect("records serialize");
    writeln!(io::stdout(), "{text}").map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))
}

fn cmd_bound(args: &BoundArgs) -> Result<()> {
    let th = &args.threshold;
    let n = th.n;
    if args.kind == Kind::Tstat {
        let x = th.raw_x("--kind tstat")?;
        let e = bound_tstat(n, x)?;
        let mut rec = evaluation_record("tstat", None, &e);
        rec.insert("self_normalized_threshold".into(), num(tstat_threshold(n, x)?));
        return print_record(rec);
    }
    let beta = th.beta()?;
    let x = th.x()?;
    let rec = match args.kind {
        Kind::Bn => evaluation_record("bn", Some(beta), &bound_bn(n, beta, x)?),
        Kind::Entropy => evaluation_record("entropy", Some(beta), &bound_bn_entropy_form(n, beta, x)?),
        Kind::Bernstein => {
            let r = bernstein_numeric(n, beta, x, DEFAULT_TOL)?;
            let mut rec = evaluation_record("bernstein", Some(beta), &bound_bn(n, beta, x)?);
            rec.insert("value".into(), num(r.objective_value));
            rec.insert("log_value".into(), num(r.objective_value.ln()));
            rec.insert("lambda_star".into(), num(r.lambda_star));
            rec.insert("iterations".into(), json!(r.iterations));
            rec
        }
        Kind::Corollary | Kind::Rescaled => {
            let (name, c) = if args.kind == Kind::Corollary {
                ("corollary", bound_corollary(n, beta, x)?)
            } else {
                ("rescaled", bound_rescaled(n, beta, x, args.alpha)?)
            };
            let mut rec = Map::new();
            rec.insert("kind".into(), json!(name));
            rec.insert("n".into(), json!(n));
            rec.insert("beta".into(), num(beta.get()));
            rec.insert("x".into(), num(x));
            if args.kind == Kind::Rescaled {
                rec.insert("alpha".into(), num(args.alpha));
            }
            rec.insert("value".into(), num(c.value));
            rec.insert("log_value".into(), num(c.value.ln()));
            rec.insert("extrapolated".into(), json!(c.extrapolated));
            rec
        }
        Kind::TwoSided => {
            let one = bound_bn(n, beta, x)?;
            let v = two_sided_bound(n, beta, x)?;
            let mut rec = evaluation_record("two-sided", Some(beta), &one);
            rec.insert("value".into(), num(v));
            rec.insert("log_value".into(), num(v.ln()));
            rec
        }
        Kind::Tstat => unreachable!("handled above"),
    };
    print_record(rec)
}

/// Magnitudes for exact enumeration of a random-sign law.
fn enumerable(dist: &str, n: usize) -> Result<MagnitudeVector> {
    if n > selfnorm::oracle::MAX_ENUMERATION_LEN {
        return Err(Error::EnumerationBudget(n));
    }
    let spec = DistributionSpec::parse(dist)?;
    if let Some(len) = spec.fixed_len().filter(|&len| len != n) {
        return Err(Error::InvalidArgument(format!("magnitude file has {len} entries, but --n is {n}")));
    }
    spec.enumerable_magnitudes(n)
        .ok_or_else(|| Error::InvalidDistribution(format!("`{spec}` is not a random-sign law over fixed magnitudes")))
}

fn cmd_oracle(args: &OracleArgs) -> Result<()> {
    let th = &args.threshold;
    let mags = enumerable(&args.dist, th.n)?;
    let mut rec = Map::new();
    rec.insert("n".into(), json!(th.n));
    rec.insert("stat".into(), json!(Statistic::from(args.stat).to_string()));
    match Statistic::from(args.stat) {
        Statistic::TStat => {
            let x = th.raw_x("--stat tstat")?;
            let t = exact_tstat_tail(&mags, x)?;
            let bound = bound_tstat(th.n, x)?;
            rec.insert("x".into(), num(x));
            rec.insert("hits".into(), json!(t.hits));
            rec.insert("total".into(), json!(t.total));
            rec.insert("probability".into(), num(t.probability()));
            rec.insert("identity_hits".into(), json!(t.identity_hits));
            rec.insert("degenerate".into(), json!(t.degenerate));
            rec.insert("bound".into(), num(bound.value));
            rec.insert("regime".into(), json!(bound.regime.to_string()));
        }
        stat => {
            let beta = th.beta()?;
            let x = th.x()?;
            let e = exact_tail(&mags, beta, x, stat)?;
            let bound = bound_bn(th.n, beta, x)?;
            rec.insert("beta".into(), num(beta.get()));
            rec.insert("x".into(), num(x));
            rec.insert("hits".into(), json!(e.hits));
            rec.insert("total".into(), json!(e.total));
            rec.insert("probability".into(), num(e.probability()));
            rec.insert("bound".into(), num(bound.value));
            rec.insert("regime".into(), json!(bound.regime.to_string()));
        }
    }
    print_record(rec)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let th = &args.threshold;
    let spec = DistributionSpec::parse(&args.dist)?;
    let stat = Statistic::from(args.stat);
    let beta = th.beta()?;
    let (x, bound, corollary) = match stat {
        Statistic::TStat => {
            let x = th.raw_x("--stat tstat")?;
            (x, bound_tstat(th.n, x)?.value, None)
        }
        _ => {
            let x = th.x()?;
            (x, bound_bn(th.n, beta, x)?.value, Some(bound_corollary(th.n, beta, x)?))
        }
    };
    let e = estimate_tail(&spec, th.n, beta, x, stat, args.trials, args.seed)?;
    let flag = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut rec = Map::new();
    rec.insert("dist".into(), json!(spec.to_string()));
    rec.insert("n".into(), json!(th.n));
    rec.insert("beta".into(), num(beta.get()));
    rec.insert("x".into(), num(x));
    rec.insert("stat".into(), json!(stat.to_string()));
    rec.insert("hits".into(), json!(e.hits));
    rec.insert("trials".into(), json!(e.trials));
    rec.insert("p_hat".into(), num(e.p_hat));
    rec.insert("ci_low".into(), num(e.ci_low));
    rec.insert("ci_high".into(), num(e.ci_high));
    rec.insert("seed".into(), json!(e.seed));
    rec.insert("degenerate_count".into(), json!(e.degenerate_count));
    rec.insert("bound".into(), num(bound));
    rec.insert("respect".into(), json!(flag(e.respects(bound))));
    if let Some(c) = corollary {
        rec.insert("bound_corollary".into(), num(c.value));
        rec.insert("respect_corollary".into(), json!(flag(e.respects(c.value))));
    }
    print_record(rec)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let grid = SweepGrid {
        n_values: args.n.clone(),
        beta_values: args.beta.iter().map(|&b| BetaParam::new(b)).collect::<Result<_>>()?,
        s_values: args.s.clone(),
        stat: args.stat.into(),
        spec: args.dist.as_deref().map(DistributionSpec::parse).transpose()?,
        trials: args.trials,
        seed: args.seed,
    };
    grid.validate()?;
    let writer: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(
            File::create(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    let rows = report::run_sweep(&grid)?;
    let out = BufWriter::new(writer);
    match args.format {
        Format::Csv => report::write_csv(&rows, out),
        Format::Json => report::write_json(&rows, out),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let outcomes = report::run_all(Scale { fast: args.fast })?;
    let mut stdout = io::stdout().lock();
    let line = |out: &mut io::StdoutLock, s: String| {
        writeln!(out, "{s}").map_err(|e| Error::InvalidArgument(format!("stdout: {e}")))
    };
    line(&mut stdout, format!("{:<30} {:<9} {:<6} {}", "SUITE", "MODULE", "RESULT", "DETAIL"))?;
    for o in &outcomes {
        let result = if o.passed { "PASS" } else { "FAIL" };
        line(&mut stdout, format!("{:<30} {:<9} {:<6} {}", o.name, o.module, result, o.detail))?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    line(&mut stdout, format!("{} suites, {failed} failed", outcomes.len()))?;
    Ok(failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = match workers_from_env() {
        Ok(w) => w,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = with_workers(workers, || match &cli.command {
        Command::Bound(a) => cmd_bound(a).map(|_| true),
        Command::Oracle(a) => cmd_oracle(a).map(|_| true),
        Command::Simulate(a) => cmd_simulate(a).map(|_| true),
        Command::Sweep(a) => cmd_sweep(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
