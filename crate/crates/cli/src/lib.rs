//! File formats, configuration and subcommands of the `touchbench` tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod formats;
pub mod objects;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{Config, ConfigError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Load(#[from] formats::LoadError),
    #[error(transparent)]
    Core(#[from] touchbench_core::Error),
    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 2 for bad input, 3 for a failed check, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::CheckFailed(_) => 3,
            Error::Io { .. } | Error::Load(_) | Error::Core(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// `f(0..n)` on up to `workers` threads; results keep index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.clamp(1, n.max(1));
    if workers == 1 {
        return (0..n).map(f).collect();
    }
    let f = &f;
    let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| s.spawn(move || (w..n).step_by(workers).map(|i| (i, f(i))).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    for (i, v) in parts.iter_mut().flat_map(std::mem::take) {
        slots[i] = Some(v);
    }
    slots.into_iter().map(|v| v.expect("every index computed")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        for workers in [1, 2, 3, 8] {
            assert_eq!(parallel_map(7, workers, |i| i * i), vec![0, 1, 4, 9, 16, 25, 36]);
        }
        assert!(parallel_map(0, 4, |i| i).is_empty());
    }
}
