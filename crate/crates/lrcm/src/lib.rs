//! Experiment harness for semi-supervised regression with low-rank
//! co-association matrices.
//!
//! The numerical work lives in [`lrcm_core`]; this crate adds what needs an
//! operating system:
//!
//! - [`io`]: CSV loading of the UCI Forest Fires table and a lossless
//!   dataset CSV format.
//! - [`stats`]: RMSE and the paired Student t-test.
//! - [`experiment`]: Monte Carlo comparison of the ensemble method against
//!   the dense RBF baseline, with timings.
//! - [`grid`]: cross-validated grid search over `α` and `β`.
//! - [`report`]: table, CSV and JSON rendering of experiment reports.
//! - [`hbench`]: accuracy and storage of hierarchical kernel matrices
//!   versus rank.
//!
//! The `lrcm` binary exposes all of it on the command line.

pub mod error;
pub mod experiment;
pub mod grid;
pub mod hbench;
pub mod io;
pub mod report;
pub mod stats;

pub use error::Error;
pub use experiment::{run_experiment, ExperimentConfig, ExperimentReport, Scenario};
pub use lrcm_core;
