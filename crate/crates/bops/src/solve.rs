//! Standalone QAP solving for QAPLIB files.

use std::path::Path;

use bops_core::optimizers::{brute_force_argmin, multi_restart_argmin, SearchBudget, MAX_EXHAUSTIVE_DIM};
use bops_core::Permutation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::BopsError;
use crate::formats::parse_qaplib;

/// Best assignment found for the instance in `path`: multi-restart swap
/// search, or enumeration with `exact` (n ≤ 9).
pub fn solve_qap_file(path: &Path, exact: bool, restarts: usize, seed: u64) -> Result<(Permutation, f64), BopsError> {
    let text = std::fs::read_to_string(path).map_err(|source| BopsError::Io { path: path.to_path_buf(), source })?;
    let inst = parse_qaplib(&text).map_err(|source| BopsError::Format { path: path.to_path_buf(), source })?;
    let n = inst.n();
    let f = |p: &Permutation| inst.value(p).expect("dimension checked");
    if exact {
        if n > MAX_EXHAUSTIVE_DIM {
            return Err(BopsError::Usage(format!("--exact supports n <= {MAX_EXHAUSTIVE_DIM}, instance has n = {n}")));
        }
        return Ok(brute_force_argmin(f, n)?);
    }
    let budget = SearchBudget::for_dimension(n, restarts)?;
    Ok(multi_restart_argmin(f, n, &budget, &mut ChaCha8Rng::seed_from_u64(seed))?)
}
