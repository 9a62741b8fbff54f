//! Self-normalized deviation bounds for sums of independent symmetric random
//! variables and for Student's t-statistic, with an exact sign-enumeration
//! oracle and a seeded Monte Carlo harness to check them.
//!
//! ```
//! use selfnorm::bounds::{bound_bn, BetaParam};
//!
//! let b = bound_bn(4, BetaParam::TWO, 1.0).unwrap();
//! assert!((b.value - 16.0 / 27.0).abs() < 1e-12);
//! ```

pub mod bernstein;
pub mod bounds;
pub mod error;
pub mod oracle;
pub mod parallel;
pub mod report;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
