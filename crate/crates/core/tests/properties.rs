use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use selfnorm::bernstein::{bernstein_numeric, DEFAULT_TOL};
use selfnorm::bounds::{
    bound_bn, bound_bn_entropy_form, bound_corollary, endpoint, log_cosh, tstat_threshold, BetaParam,
};
use selfnorm::oracle::{exact_lower_tail, exact_tail, MagnitudeVector};
use selfnorm::report::{run_sweep, write_csv, SweepGrid};
use selfnorm::simulate::{wilson_interval, Z_99};
use selfnorm::stats::Statistic;

fn beta() -> impl Strategy<Value = BetaParam> {
    (1.01f64..12.0).prop_map(|b| BetaParam::new(b).unwrap())
}

proptest! {
    #[test]
    fn product_and_entropy_forms_agree(n in 1usize..500, b in beta(), s in 0.0001f64..1.0) {
        let x = s * endpoint(n, b);
        let lit = bound_bn(n, b, x).unwrap();
        let ent = bound_bn_entropy_form(n, b, x).unwrap();
        prop_assert!((lit.log_value - ent.log_value).abs() <= 1e-9 * (1.0 + ent.log_value.abs()));
    }

    #[test]
    fn nonincreasing_in_x(n in 1usize..200, b in beta(), s1 in 0.0f64..1.2, s2 in 0.0f64..1.2) {
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let e = endpoint(n, b);
        prop_assert!(bound_bn(n, b, hi * e).unwrap().value <= bound_bn(n, b, lo * e).unwrap().value);
    }

    #[test]
    fn dominated_by_corollary(n in 1usize..300, b in 1.01f64..2.0, s in 0.0f64..1.0) {
        let b = BetaParam::new(b).unwrap();
        let x = s * endpoint(n, b);
        prop_assert!(bound_bn(n, b, x).unwrap().value <= bound_corollary(n, b, x).unwrap().value + 1e-15);
    }

    #[test]
    fn optimizer_matches_closed_form(n in 1usize..100, b in beta(), s in 0.01f64..0.99) {
        let x = s * endpoint(n, b);
        let r = bernstein_numeric(n, b, x, DEFAULT_TOL).unwrap();
        let closed = bound_bn(n, b, x).unwrap().value;
        prop_assert!((r.objective_value - closed).abs() <= 1e-9 * closed);
    }

    #[test]
    fn tstat_threshold_in_range(n in 2usize..1000, lx in -6.0f64..6.0) {
        let y = tstat_threshold(n, 10f64.powf(lx)).unwrap();
        prop_assert!(y > 0.0 && y <= (n as f64).sqrt());
    }

    #[test]
    fn log_cosh_majorized(u in -50.0f64..50.0) {
        let lc = log_cosh(u);
        prop_assert!(lc <= u * u / 2.0 && lc >= 0.0);
        prop_assert!((lc - u.cosh().ln()).abs() <= 1e-12 * (1.0 + lc));
    }

    #[test]
    fn oracle_mirror_and_bound(mags in prop::collection::vec(0.1f64..5.0, 1..10), s in 0.05f64..1.0) {
        let n = mags.len();
        let m = MagnitudeVector::new(mags).unwrap();
        let x = s * endpoint(n, BetaParam::TWO);
        let upper = exact_tail(&m, BetaParam::TWO, x, Statistic::FinalSum).unwrap();
        let lower = exact_lower_tail(&m, BetaParam::TWO, x).unwrap();
        prop_assert_eq!(upper.hits, lower.hits);
        let max = exact_tail(&m, BetaParam::TWO, x, Statistic::RunningMax).unwrap();
        prop_assert!(max.hits >= upper.hits);
        prop_assert!(max.probability() <= bound_bn(n, BetaParam::TWO, x).unwrap().value);
    }

    #[test]
    fn wilson_contains_estimate(trials in 1u64..1_000_000, frac in 0.0f64..=1.0) {
        let hits = (frac * trials as f64).floor() as u64;
        let (lo, hi) = wilson_interval(hits, trials, Z_99);
        let p = hits as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }
}

#[test]
fn wilson_z_is_the_99_percent_quantile() {
    let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.995);
    assert!((z - Z_99).abs() < 1e-9);
}

#[test]
fn csv_round_trip_at_twelve_digits() {
    let grid = SweepGrid {
        n_values: vec![3, 10, 40],
        beta_values: vec![BetaParam::new(1.3).unwrap(), BetaParam::TWO],
        s_values: vec![0.07, 0.5, 0.93, 1.0],
        stat: Statistic::RunningMax,
        spec: None,
        trials: 0,
        seed: 0,
    };
    let rows = run_sweep(&grid).unwrap();
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let parsed: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(parsed.len(), rows.len());
    let same = |text: &str, v: f64| {
        let r: f64 = text.parse().unwrap();
        r == v || ((r - v) / v).abs() < 5e-12
    };
    for (rec, row) in parsed.iter().zip(&rows) {
        assert_eq!(rec[0].parse::<usize>().unwrap(), row.n);
        assert!(same(&rec[3], row.x));
        assert!(same(&rec[4], row.bound_bn));
        assert!(same(&rec[5], row.bound_corollary));
        match row.oracle_exact {
            Some(p) => assert!(same(&rec[7], p)),
            None => assert!(rec[7].is_empty()),
        }
    }
}
