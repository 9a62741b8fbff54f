//! Sweep tables and the built-in verification suites behind the CLI.

pub mod format;
pub mod sweep;
pub mod verify;

pub use format::{fmt_sig, round_sig, SIG_DIGITS};
pub use sweep::{run_sweep, write_csv, write_json, SweepGrid, SweepRow, COLUMNS};
pub use verify::{run_all, Scale, SuiteOutcome};
