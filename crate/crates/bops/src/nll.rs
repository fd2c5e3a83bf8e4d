//! Held-out predictive quality of the Kendall and Mallows surrogates.
//!
//! Each replication instantiates the benchmark from its own seed, draws one
//! pool of distinct permutations, and uses nested prefixes of it as training
//! sets. The remaining permutations form `test_reps` disjoint test sets.

use bops_core::engine::random_unevaluated;
use bops_core::gp::GpModel;
use bops_core::kernels::KernelSpec;
use bops_core::Permutation;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::benchmark::{Benchmark, BenchmarkSpec};
use crate::error::BopsError;
use crate::experiment::{median, replication_seeds, thread_pool};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllRequest {
    pub benchmark: String,
    pub train_sizes: Vec<usize>,
    pub reps: usize,
    pub test_size: usize,
    pub test_reps: usize,
    pub seed: u64,
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NllRow {
    pub kernel: String,
    pub train_size: usize,
    pub replication: usize,
    /// Median over test sets of the mean per-point negative log predictive density.
    pub nll: f64,
}

const KERNELS: [(&str, fn() -> KernelSpec); 2] = [
    ("kendall", || KernelSpec::kendall(1.0, 1e-4).expect("valid")),
    ("mallows", || KernelSpec::mallows(1.0, 1.0, 1e-4).expect("valid")),
];

fn replication(
    bench: &Benchmark,
    req: &NllRequest,
    rep: usize,
    objective_seed: u64,
    sample_seed: u64,
) -> Result<Vec<NllRow>, BopsError> {
    let d = bench.dim();
    let max_train = req.train_sizes.iter().copied().max().unwrap_or(0);
    let total = max_train + req.test_size * req.test_reps;
    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut seen = BTreeSet::new();
    let mut points: Vec<Permutation> = Vec::with_capacity(total);
    for _ in 0..total {
        let p = random_unevaluated(d, &seen, &mut rng)?;
        seen.insert(p.clone());
        points.push(p);
    }
    let mut objective = bench.instantiate(objective_seed)?;
    let values = points.iter().map(|p| objective.evaluate(p)).collect::<Result<Vec<f64>, _>>()?;
    let (train_x, test_x) = points.split_at(max_train);
    let (train_y, test_y) = values.split_at(max_train);

    let mut rows = Vec::new();
    for (name, template) in KERNELS {
        for &n in &req.train_sizes {
            let model = GpModel::fit(&template(), &train_x[..n], &train_y[..n])?;
            let mut per_test = (0..req.test_reps)
                .map(|t| {
                    let range = t * req.test_size..(t + 1) * req.test_size;
                    model.test_nll(&test_x[range.clone()], &test_y[range])
                })
                .collect::<Result<Vec<f64>, _>>()?;
            rows.push(NllRow { kernel: name.to_string(), train_size: n, replication: rep, nll: median(&mut per_test) });
        }
    }
    Ok(rows)
}

/// Rows ordered by kernel, then training size, then replication.
pub fn run_nll(req: &NllRequest) -> Result<Vec<NllRow>, BopsError> {
    if req.train_sizes.is_empty() || req.train_sizes.contains(&0) {
        return Err(BopsError::Usage("training sizes must be >= 1".into()));
    }
    if req.reps == 0 || req.test_size == 0 || req.test_reps == 0 || req.jobs == 0 {
        return Err(BopsError::Usage("--reps, --test-size, --test-reps and --jobs must be >= 1".into()));
    }
    let spec: BenchmarkSpec = req.benchmark.parse().map_err(BopsError::Usage)?;
    let bench = Benchmark::load(&spec)?;
    let seeds = replication_seeds(req.seed, req.reps);
    let pool = thread_pool(req.jobs)?;
    let per_rep: Vec<Vec<NllRow>> = pool.install(|| {
        seeds
            .par_iter()
            .enumerate()
            .map(|(rep, s)| replication(&bench, req, rep, s.objective, s.run))
            .collect::<Result<_, BopsError>>()
    })?;
    let mut rows: Vec<NllRow> = per_rep.into_iter().flatten().collect();
    rows.sort_by(|a, b| (&a.kernel, a.train_size, a.replication).cmp(&(&b.kernel, b.train_size, b.replication)));
    Ok(rows)
}
