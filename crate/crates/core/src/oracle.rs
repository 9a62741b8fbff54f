//! Exact tail probabilities by enumerating all `2^n` sign vectors.
//!
//! For `ξ_i = ε_i a_i` with fair independent signs `ε_i`, the normalizer
//! `V_n(β) = (Σ a_i^β)^{1/β}` does not depend on the signs, so every event of
//! interest reduces to counting sign vectors. Bit `i` of the vector index set
//! means `ε_i = +1`.
//!
//! When all magnitudes are equal the sums live on an integer lattice and the
//! threshold is converted to an integer cut once, so endpoint ties such as
//! `S_n = n` against `x V = n^{(β-1)/β} n^{1/β}` are decided exactly.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{lp_norm, tstat_threshold, BetaParam};
use crate::error::{Error, Result};
use crate::stats::{reaches, t_statistic, Statistic, TIE_REL};

/// Largest `n` accepted for enumeration.
pub const MAX_ENUMERATION_LEN: usize = 30;
/// Largest `n` for which a [`TailProfile`] stores every outcome.
pub const MAX_PROFILE_LEN: usize = 22;

const CHUNK_BITS: usize = 12;

/// Magnitudes `a_1, ..., a_n` of a random-sign sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnitudeVector(Vec<f64>);

impl MagnitudeVector {
    pub fn new(magnitudes: Vec<f64>) -> Result<Self> {
        if magnitudes.is_empty() {
            return Err(Error::TooFewSamples { min: 1, got: 0 });
        }
        if magnitudes.len() > MAX_ENUMERATION_LEN {
            return Err(Error::EnumerationBudget(magnitudes.len()));
        }
        if magnitudes.iter().any(|a| !a.is_finite() || *a < 0.0) || magnitudes.iter().all(|a| *a == 0.0) {
            return Err(Error::DegenerateMagnitudes);
        }
        Ok(MagnitudeVector(magnitudes))
    }

    /// `n` copies of `a`.
    pub fn constant(n: usize, a: f64) -> Result<Self> {
        Self::new(vec![a; n])
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::constant(n, 1.0)
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The shared magnitude, when all entries are equal.
    pub fn common_magnitude(&self) -> Option<f64> {
        let a = self.0[0];
        self.0.iter().all(|&b| b == a).then_some(a)
    }

    fn total(&self) -> u64 {
        1u64 << self.0.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactTail {
    pub hits: u64,
    pub total: u64,
}

impl ExactTail {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

/// Exact counts for `T_n >= x` over all sign vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExactTstatTail {
    /// Vectors with `σ̂ > 0` and `T_n >= x`, computed from `T_n` directly.
    pub hits: u64,
    /// Vectors with `σ̂ > 0` and `S_n / V_n(2) >= x (n/(n+x²-1))^{1/2}`.
    pub identity_hits: u64,
    /// Vectors where the two routes disagree.
    pub disagreements: u64,
    /// Vectors with `σ̂ = 0`, excluded from the event.
    pub degenerate: u64,
    /// Degenerate vectors that nonetheless satisfy the self-normalized event.
    pub degenerate_identity_hits: u64,
    pub total: u64,
}

impl ExactTstatTail {
    pub fn probability(&self) -> f64 {
        self.hits as f64 / self.total as f64
    }
}

/// Smallest lattice sum that counts as reaching `threshold`.
fn lattice_cut(threshold: f64) -> f64 {
    (threshold - TIE_REL * threshold.abs()).ceil()
}

/// Threshold comparison for one `(mags, β, x)` triple.
#[derive(Debug, Clone, Copy)]
enum Cut {
    /// Integer cut on `Σ ε_i` (equal magnitudes).
    Lattice(i64),
    /// Raw cut on `Σ ε_i a_i`.
    Real(f64),
}

impl Cut {
    fn new(mags: &MagnitudeVector, beta: BetaParam, x: f64) -> Self {
        let v = lp_norm(mags.magnitudes(), beta);
        match mags.common_magnitude() {
            Some(a) => {
                let cut = lattice_cut(x * v / a);
                Cut::Lattice(cut.clamp(i64::MIN as f64, i64::MAX as f64) as i64)
            }
            None => Cut::Real(x * v),
        }
    }
}

fn lattice_sums(n: usize, idx: u64) -> (i64, i64) {
    let mut sum = 0i64;
    let mut max = i64::MIN;
    for i in 0..n {
        sum += if idx >> i & 1 == 1 { 1 } else { -1 };
        max = max.max(sum);
    }
    (max, sum)
}

fn real_sums(mags: &[f64], idx: u64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut max = f64::NEG_INFINITY;
    for (i, a) in mags.iter().enumerate() {
        sum += if idx >> i & 1 == 1 { *a } else { -*a };
        max = max.max(sum);
    }
    (max, sum)
}

fn in_event(mags: &MagnitudeVector, cut: Cut, stat: Statistic, idx: u64) -> bool {
    match cut {
        Cut::Lattice(k) => {
            let (max, sum) = lattice_sums(mags.len(), idx);
            let value = if stat == Statistic::RunningMax { max } else { sum };
            value >= k
        }
        Cut::Real(thr) => {
            let (max, sum) = real_sums(mags.magnitudes(), idx);
            let value = if stat == Statistic::RunningMax { max } else { sum };
            reaches(value, thr)
        }
    }
}

fn count_parallel<F>(total: u64, pred: F) -> u64
where
    F: Fn(u64) -> bool + Sync,
{
    let chunk = 1u64 << CHUNK_BITS;
    let chunks = total.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = (lo + chunk).min(total);
            (lo..hi).filter(|&i| pred(i)).count() as u64
        })
        .sum()
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(x))
    }
}

fn sum_statistic(stat: Statistic) -> Result<Statistic> {
    match stat {
        Statistic::TStat => Err(Error::InvalidArgument(
            "exact_tail counts running-max or final-sum events; use exact_tstat_tail".into(),
        )),
        s => Ok(s),
    }
}

/// Number of sign vectors with `max_k S_k >= x V_n(β)` (running max) or
/// `S_n >= x V_n(β)` (final sum).
pub fn exact_tail(mags: &MagnitudeVector, beta: BetaParam, x: f64, stat: Statistic) -> Result<ExactTail> {
    check_x(x)?;
    let stat = sum_statistic(stat)?;
    let cut = Cut::new(mags, beta, x);
    let hits = count_parallel(mags.total(), |idx| in_event(mags, cut, stat, idx));
    Ok(ExactTail { hits, total: mags.total() })
}

/// Number of sign vectors with `S_n <= -x V_n(β)`, counted on the flipped walk.
pub fn exact_lower_tail(mags: &MagnitudeVector, beta: BetaParam, x: f64) -> Result<ExactTail> {
    check_x(x)?;
    let cut = Cut::new(mags, beta, x);
    let hits = count_parallel(mags.total(), |idx| match cut {
        Cut::Lattice(k) => -lattice_sums(mags.len(), idx).1 >= k,
        Cut::Real(thr) => reaches(-real_sums(mags.magnitudes(), idx).1, thr),
    });
    Ok(ExactTail { hits, total: mags.total() })
}

/// Exact `P(T_n >= x)`, computed per sign vector both from `T_n` and through
/// the equivalent self-normalized event.
pub fn exact_tstat_tail(mags: &MagnitudeVector, x: f64) -> Result<ExactTstatTail> {
    check_x(x)?;
    let n = mags.len();
    let y = tstat_threshold(n, x)?;
    let cut = Cut::new(mags, BetaParam::TWO, y);
    let chunk = 1u64 << CHUNK_BITS;
    let total = mags.total();
    let zero = ExactTstatTail {
        hits: 0,
        identity_hits: 0,
        disagreements: 0,
        degenerate: 0,
        degenerate_identity_hits: 0,
        total,
    };
    let tally = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = zero;
            let mut buf = [0.0f64; MAX_ENUMERATION_LEN];
            let lo = c * chunk;
            for idx in lo..(lo + chunk).min(total) {
                for (i, a) in mags.magnitudes().iter().enumerate() {
                    buf[i] = if idx >> i & 1 == 1 { *a } else { -*a };
                }
                let identity = in_event(mags, cut, Statistic::FinalSum, idx);
                match t_statistic(&buf[..n]) {
                    None => {
                        acc.degenerate += 1;
                        acc.degenerate_identity_hits += identity as u64;
                    }
                    Some(t) => {
                        let direct = reaches(t, x);
                        acc.hits += direct as u64;
                        acc.identity_hits += identity as u64;
                        acc.disagreements += (direct != identity) as u64;
                    }
                }
            }
            acc
        })
        .reduce(
            || zero,
            |a, b| ExactTstatTail {
                hits: a.hits + b.hits,
                identity_hits: a.identity_hits + b.identity_hits,
                disagreements: a.disagreements + b.disagreements,
                degenerate: a.degenerate + b.degenerate,
                degenerate_identity_hits: a.degenerate_identity_hits + b.degenerate_identity_hits,
                total,
            },
        );
    Ok(tally)
}

/// Every outcome of one magnitude vector, sorted, so many thresholds can be
/// queried after a single enumeration.
#[derive(Debug, Clone)]
pub struct TailProfile {
    mags: MagnitudeVector,
    running_max: Vec<f64>,
    final_sum: Vec<f64>,
}

impl TailProfile {
    pub fn new(mags: &MagnitudeVector) -> Result<Self> {
        if mags.len() > MAX_PROFILE_LEN {
            return Err(Error::EnumerationBudget(mags.len()));
        }
        let lattice = mags.common_magnitude().is_some();
        let (mut running_max, mut final_sum): (Vec<f64>, Vec<f64>) = (0..mags.total())
            .into_par_iter()
            .map(|idx| {
                if lattice {
                    let (m, s) = lattice_sums(mags.len(), idx);
                    (m as f64, s as f64)
                } else {
                    real_sums(mags.magnitudes(), idx)
                }
            })
            .unzip();
        running_max.par_sort_unstable_by(f64::total_cmp);
        final_sum.par_sort_unstable_by(f64::total_cmp);
        Ok(TailProfile { mags: mags.clone(), running_max, final_sum })
    }

    pub fn magnitudes(&self) -> &MagnitudeVector {
        &self.mags
    }

    /// Same answer as [`exact_tail`] for these magnitudes.
    pub fn tail(&self, beta: BetaParam, x: f64, stat: Statistic) -> Result<ExactTail> {
        check_x(x)?;
        let sorted = match sum_statistic(stat)? {
            Statistic::RunningMax => &self.running_max,
            _ => &self.final_sum,
        };
        let first = match Cut::new(&self.mags, beta, x) {
            Cut::Lattice(k) => sorted.partition_point(|&v| v < k as f64),
            Cut::Real(thr) => sorted.partition_point(|&v| !reaches(v, thr)),
        };
        Ok(ExactTail { hits: (sorted.len() - first) as u64, total: self.mags.total() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::endpoint;

    fn beta(b: f64) -> BetaParam {
        BetaParam::new(b).unwrap()
    }

    fn mags(v: &[f64]) -> MagnitudeVector {
        MagnitudeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn magnitude_guards() {
        assert!(MagnitudeVector::new(vec![]).is_err());
        assert_eq!(MagnitudeVector::new(vec![0.0, 0.0]), Err(Error::DegenerateMagnitudes));
        assert!(MagnitudeVector::new(vec![1.0, -1.0]).is_err());
        assert_eq!(MagnitudeVector::unit(31), Err(Error::EnumerationBudget(31)));
        assert!(MagnitudeVector::unit(30).is_ok());
        assert!(MagnitudeVector::new(vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn hand_enumerated_pairs() {
        let m = mags(&[1.0, 1.0]);
        let e = exact_tail(&m, beta(2.0), 2f64.sqrt(), Statistic::RunningMax).unwrap();
        assert_eq!((e.hits, e.total), (1, 4));
        assert_eq!(e.probability(), 0.25);

        // ++ and +- reach 1 >= 0.5 sqrt 2
        let e = exact_tail(&m, beta(2.0), 0.5, Statistic::RunningMax).unwrap();
        assert_eq!(e.hits, 2);

        let e = exact_tail(&m, beta(2.0), 0.5, Statistic::FinalSum).unwrap();
        assert_eq!(e.hits, 1);

        let e = exact_tail(&mags(&[1.0; 3]), beta(2.0), 2.0, Statistic::RunningMax).unwrap();
        assert_eq!(e.hits, 0);
    }

    #[test]
    fn real_path_matches_lattice_path() {
        // 1 and 1 + 1e-300 are equal in floating point; perturb enough to take the real path
        let lattice = mags(&[1.0, 1.0, 1.0, 1.0, 1.0]);
        let real = mags(&[1.0, 1.0, 1.0, 1.0, 1.0 + 1e-13]);
        assert!(real.common_magnitude().is_none());
        for s in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let x = s * endpoint(5, beta(2.0));
            for stat in [Statistic::RunningMax, Statistic::FinalSum] {
                let a = exact_tail(&lattice, beta(2.0), x, stat).unwrap();
                let b = exact_tail(&real, beta(2.0), x, stat).unwrap();
                assert_eq!(a, b, "s={s} {stat}");
            }
        }
    }

    #[test]
    fn endpoint_hits_only_all_plus() {
        for n in 1..=12 {
            for b in [1.1, 1.5, 2.0, 3.0] {
                let x = endpoint(n, beta(b));
                let e = exact_tail(&MagnitudeVector::unit(n).unwrap(), beta(b), x, Statistic::RunningMax).unwrap();
                assert_eq!(e.hits, 1, "n={n} beta={b}");
            }
        }
    }

    #[test]
    fn rejects_tstat_statistic() {
        assert!(exact_tail(&mags(&[1.0, 2.0]), beta(2.0), 0.5, Statistic::TStat).is_err());
        assert!(exact_tail(&mags(&[1.0, 2.0]), beta(2.0), 0.0, Statistic::FinalSum).is_err());
    }

    #[test]
    fn tstat_dual_routes_agree() {
        let m = mags(&[1.0; 4]);
        let t = exact_tstat_tail(&m, 1.0).unwrap();
        let f = exact_tail(&m, beta(2.0), 1.0, Statistic::FinalSum).unwrap();
        assert_eq!(t.disagreements, 0);
        assert_eq!(t.hits, t.identity_hits);
        // ++++ has σ̂ = 0 but S_n / V_n = 2 >= 1
        assert_eq!(t.degenerate, 2);
        assert_eq!(t.degenerate_identity_hits, 1);
        assert_eq!(t.hits + t.degenerate_identity_hits, f.hits);
        assert_eq!(t.hits, 4);
    }

    #[test]
    fn tstat_huge_threshold_only_degenerate() {
        let t = exact_tstat_tail(&mags(&[1.0, 1.0]), 1e6).unwrap();
        assert_eq!(t.hits, 0);
        assert_eq!(t.degenerate, 2);
    }

    #[test]
    fn tstat_tiny_threshold_catches_positive_sums() {
        let t = exact_tstat_tail(&mags(&[1.0, 2.0, 3.0]), 1e-4).unwrap();
        // sums are 6, 4, 2, 0, 0, -2, -4, -6: exactly the three positive ones qualify
        assert_eq!(t.total, 8);
        assert_eq!(t.hits, 3);
        assert_eq!(t.probability(), 3.0 / 8.0);
        assert_eq!(t.disagreements, 0);
        assert!(exact_tstat_tail(&mags(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn profile_agrees_with_streaming() {
        let weighted = mags(&[0.3, 2.0, 1.1, 0.7, 5.0, 0.2, 1.0]);
        for m in [MagnitudeVector::unit(9).unwrap(), weighted] {
            let profile = TailProfile::new(&m).unwrap();
            for b in [1.5, 2.0, 3.0] {
                let top = endpoint(m.len(), beta(b));
                for k in 1..=11 {
                    let x = top * k as f64 / 10.0;
                    for stat in [Statistic::RunningMax, Statistic::FinalSum] {
                        assert_eq!(
                            profile.tail(beta(b), x, stat).unwrap(),
                            exact_tail(&m, beta(b), x, stat).unwrap()
                        );
                    }
                }
            }
        }
        assert!(TailProfile::new(&MagnitudeVector::unit(23).unwrap()).is_err());
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let m = mags(&[0.3, 2.0, 1.1, 0.7, 5.0, 0.2, 1.0, 0.9, 1.4, 2.2, 0.1, 3.3, 0.6, 0.8]);
        let run = |k| {
            crate::parallel::with_workers(Some(k), || {
                exact_tail(&m, beta(1.5), 1.3, Statistic::RunningMax).unwrap()
            })
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(8));
    }
}
