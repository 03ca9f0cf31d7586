//! Command-line front end for the workbench: parse a run configuration,
//! execute the task, emit a JSON verdict on stdout and CSV sample dumps for
//! external plotting.
//!
//! The binary's contract:
//!
//! ```text
//! reeb-lab <config-path> [--dump-dir DIR] [--json-only]
//! ```
//!
//! Exit codes: 0 — success; 1 — numerical non-convergence; 2 — invalid
//! input; 3 — a verification verdict that is false. The environment
//! variable `REEB_LAB_THREADS` caps internal parallelism.

pub mod config;
pub mod runner;
pub mod verdict;

pub use config::{parse_config, ConfigError, RunConfig};
pub use runner::{run_task, DumpPlan, RunError};
pub use verdict::Verdict;
