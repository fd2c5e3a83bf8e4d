//! File formats, benchmark loading and the replicated experiment harness
//! around [`bops_core`].

pub mod benchmark;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod nll;
pub mod solve;

pub use benchmark::{Benchmark, BenchmarkSpec};
pub use error::BopsError;
pub use experiment::{run_experiment, write_outputs, ExperimentResult, RunRequest, SystemClock};
pub use nll::{run_nll, NllRequest, NllRow};
