//! Batch driver for laser-noise spectroscopy sweeps.
//!
//! Subcommands map onto [`commands`] (`ramsey`, `rabi`, `optimize`),
//! [`validate`] and [`recipes`]. Every run returns an [`output::Document`]
//! whose header records the resolved configuration, so a file can be
//! regenerated from its own metadata.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod recipes;
pub mod validate;

pub use commands::{cmd_optimize, cmd_rabi, cmd_ramsey};
pub use config::{ConfigLayers, Protocol, SweepConfig};
pub use error::{CliError, CliResult};
pub use output::{Document, Format, Table};
pub use recipes::Recipe;
pub use validate::{cmd_validate, Level, ValidateOptions, ValidationReport};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "LASERNOISE_THREADS";

/// Runs `f` on a dedicated pool of `threads` workers (the rayon default when
/// `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
