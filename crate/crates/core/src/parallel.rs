//! Worker-count control. Work is always split into fixed-size chunks whose
//! integer results are summed, so the worker count never changes an answer.

use crate::error::{Error, Result};

pub const THREADS_ENV: &str = "SELFNORM_THREADS";

/// Reads `SELFNORM_THREADS`; `None` when unset.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::InvalidArgument(format!("{THREADS_ENV}: {e}"))),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(Error::InvalidArgument(format!(
                "{THREADS_ENV} must be a positive integer, got `{raw}`"
            ))),
        },
    }
}

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool.
pub fn with_workers<R, F>(workers: Option<usize>, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match workers {
        None => f(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("failed to build worker pool")
            .install(f),
    }
}
