//! Bayesian optimization over permutation spaces.
//!
//! Two model-guided algorithms share one loop ([`engine`]):
//!
//! * **BOPS-T** fits a GP with the Kendall kernel, samples a weight vector from
//!   its exact weight-space posterior, and selects the permutation minimizing
//!   the sampled function by solving the equivalent quadratic assignment
//!   problem ([`acquisition::build_qap`], [`optimizers::QapSolver`]).
//! * **BOPS-H** fits a GP with the Mallows kernel and maximizes expected
//!   improvement by multi-restart transposition local search.
//!
//! Random search and a permutation GA are provided as baselines. The crate is
//! `no_std` (it needs `alloc`); file formats and the experiment runner live in
//! the companion `bops` crate.

#![no_std]

extern crate alloc;

pub mod acquisition;
pub mod engine;
pub mod error;
pub mod ga;
pub mod gp;
pub mod kernels;
pub mod linalg;
pub mod objectives;
pub mod optimizers;
pub mod perm;

pub use acquisition::{build_qap, expected_improvement, QapMatrices};
pub use engine::{run, Algorithm, BoConfig, BoTrace, Clock, NoClock, Phase, Record};
pub use error::{Error, Result};
pub use gp::{GpModel, HyperGrid, Prediction, WeightPosterior};
pub use kernels::{gram_matrix, kendall_kernel, mallows_kernel, KernelFamily, KernelSpec};
pub use objectives::{GpSamplePath, Objective, PairWeights, QapInstance, SyntheticObjective, TspInstance};
pub use optimizers::{QapSolver, SearchBudget};
pub use perm::{discordant_pairs, kendall_feature_map, swap_neighbors, Permutation};
