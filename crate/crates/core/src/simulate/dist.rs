use std::fmt;
use std::path::Path;

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::bounds::{BetaParam, SampleVector};
use crate::error::{Error, Result};
use crate::oracle::MagnitudeVector;

/// A law symmetric about zero. Every variant draws a magnitude and an
/// independent fair sign.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    Rademacher,
    /// `±a` with probability one half each.
    TwoPoint(f64),
    /// Uniform on `[-1, 1]`.
    UniformSymmetric,
    GaussianStandard,
    /// `|ξ| = U^{-1/tail_index}` for `U` uniform on `(0, 1)`.
    SymmetricPareto { tail_index: f64 },
    /// `ξ_i = ε_i a_i` with the magnitudes held fixed.
    FixedMagnitudes(MagnitudeVector),
}

impl DistributionSpec {
    pub fn two_point(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 {
            Ok(DistributionSpec::TwoPoint(a))
        } else {
            Err(Error::InvalidDistribution(format!("two-point magnitude must be positive, got {a}")))
        }
    }

    pub fn symmetric_pareto(tail_index: f64) -> Result<Self> {
        if tail_index.is_finite() && tail_index > 0.0 {
            Ok(DistributionSpec::SymmetricPareto { tail_index })
        } else {
            Err(Error::InvalidDistribution(format!("pareto tail index must be positive, got {tail_index}")))
        }
    }

    /// Parses `rademacher`, `twopoint:A`, `uniform`, `gaussian`, `pareto:TAIL`
    /// or `mags:FILE` (one nonnegative real per line).
    pub fn parse(text: &str) -> Result<Self> {
        let (kind, arg) = match text.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (text, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidDistribution(format!("`{kind}` needs a parameter")))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidDistribution(format!("{text}: {e}")))
        };
        match (kind, arg) {
            ("rademacher", None) => Ok(DistributionSpec::Rademacher),
            ("uniform", None) => Ok(DistributionSpec::UniformSymmetric),
            ("gaussian", None) => Ok(DistributionSpec::GaussianStandard),
            ("twopoint", a) => Self::two_point(number(a)?),
            ("pareto", a) => Self::symmetric_pareto(number(a)?),
            ("mags", Some(path)) => Ok(DistributionSpec::FixedMagnitudes(read_magnitudes(path)?)),
            _ => Err(Error::InvalidDistribution(format!("unknown distribution `{text}`"))),
        }
    }

    /// Whether `E|ξ|^β` is infinite.
    pub fn infinite_moment(&self, beta: BetaParam) -> bool {
        matches!(self, DistributionSpec::SymmetricPareto { tail_index } if *tail_index <= beta.get())
    }

    /// Required sample length, if the law fixes one.
    pub fn fixed_len(&self) -> Option<usize> {
        match self {
            DistributionSpec::FixedMagnitudes(m) => Some(m.len()),
            _ => None,
        }
    }

    /// Magnitudes for exact enumeration, when the law is a pure random-sign
    /// model over fixed magnitudes.
    pub fn enumerable_magnitudes(&self, n: usize) -> Option<MagnitudeVector> {
        match self {
            DistributionSpec::Rademacher => MagnitudeVector::unit(n).ok(),
            DistributionSpec::TwoPoint(a) => MagnitudeVector::constant(n, *a).ok(),
            DistributionSpec::FixedMagnitudes(m) if m.len() == n => Some(m.clone()),
            _ => None,
        }
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::TooFewSamples { min: 1, got: 0 });
        }
        match self.fixed_len() {
            Some(len) if len != n => Err(Error::InvalidArgument(format!(
                "fixed magnitudes have length {len}, but n = {n}"
            ))),
            _ => Ok(()),
        }
    }

    fn magnitude<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Rademacher => 1.0,
            DistributionSpec::TwoPoint(a) => *a,
            DistributionSpec::UniformSymmetric => rng.random::<f64>(),
            DistributionSpec::GaussianStandard => rng.sample::<f64, _>(StandardNormal).abs(),
            DistributionSpec::SymmetricPareto { tail_index } => {
                let u: f64 = rng.sample(Open01);
                u.powf(-1.0 / tail_index)
            }
            DistributionSpec::FixedMagnitudes(m) => m.magnitudes()[i],
        }
    }

    /// Fills `buf` with `n` draws.
    pub(crate) fn fill<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend((0..n).map(|i| {
            let a = self.magnitude(i, rng);
            if rng.random::<bool>() {
                a
            } else {
                -a
            }
        }));
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Rademacher => f.write_str("rademacher"),
            DistributionSpec::TwoPoint(a) => write!(f, "twopoint:{a}"),
            DistributionSpec::UniformSymmetric => f.write_str("uniform"),
            DistributionSpec::GaussianStandard => f.write_str("gaussian"),
            DistributionSpec::SymmetricPareto { tail_index } => write!(f, "pareto:{tail_index}"),
            DistributionSpec::FixedMagnitudes(m) => write!(f, "mags[{}]", m.len()),
        }
    }
}

/// Reads one nonnegative real per line; blank lines are skipped.
pub fn read_magnitudes(path: impl AsRef<Path>) -> Result<MagnitudeVector> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidDistribution(format!("{}: {e}", path.display())))?;
    let values = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|e| Error::InvalidDistribution(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    MagnitudeVector::new(values)
}

/// `n` independent draws from `spec`.
pub fn sample_vector<R: Rng + ?Sized>(spec: &DistributionSpec, n: usize, stream: &mut R) -> Result<SampleVector> {
    spec.check_len(n)?;
    let mut buf = Vec::with_capacity(n);
    spec.fill(n, stream, &mut buf);
    SampleVector::new(buf)
}
